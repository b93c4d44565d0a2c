"""
Forward Maxwell solver on the cube: curl(mu^-1 curl E) - omega^2 gamma E = 0
with N x E = T on the faces, discretized on a staggered (Yee) edge grid.

Edge unknowns live on the (2m)^3 cells of the closed cube:
E_x at (i+1/2, j, k), E_y at (i, j+1/2, k), E_z at (i, j, k+1/2).
The discrete curl maps edges to faces; the system matrix is
C^T diag(1/mu_face) C - omega^2 diag(gamma_edge).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple
import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from src.coefficients.pair import CoefficientPair
from src.forward.boundary import (
    BoundaryField, FACES, TANGENTIAL, closure_values, curl_normal_trace, face_number, normal_trace,
    tangent_axes, tangential_trace,
)
from src.utils.exceptions import NearResonance, NoConvergence
from src.utils.helpers import make_rng

CONDITION_LIMIT = 1e8
RESIDUAL_LIMIT = 1e-8


@dataclass
class ForwardSolution:
    """Node fields E, H on the closed cube, shape (3, s, s, s)."""
    E: np.ndarray
    H: np.ndarray
    residual: float
    condition: float
    diagnostics: Dict[str, float] = field(default_factory=dict)


def _edge_shapes(N: int) -> List[Tuple[int, int, int]]:
    shapes = []
    for comp in range(3):
        shape = [N + 1] * 3
        shape[comp] = N
        shapes.append(tuple(shape))
    return shapes


def _difference(N: int, h: float) -> sp.csr_matrix:
    """Forward difference from N+1 nodes to N midpoints."""
    return sp.diags([-np.ones(N), np.ones(N)], [0, 1], shape=(N, N + 1), format='csr') / h


def _along(op: sp.spmatrix, axis: int, shape: Tuple[int, int, int]) -> sp.csr_matrix:
    """Apply a 1-D operator along one axis of a C-ordered 3-D array."""
    mats = [sp.identity(n, format='csr') for n in shape]
    mats[axis] = op
    return sp.kron(sp.kron(mats[0], mats[1]), mats[2], format='csr')


def curl_matrix(N: int, h: float) -> sp.csr_matrix:
    """Discrete curl from stacked edge values to stacked face values."""
    d = _difference(N, h)
    es = _edge_shapes(N)
    blocks = [[None] * 3 for _ in range(3)]
    for comp in range(3):
        c1, c2 = (comp + 1) % 3, (comp + 2) % 3
        # (curl E)_comp = d_c1 E_c2 - d_c2 E_c1
        blocks[comp][c2] = _along(d, c1, es[c2])
        blocks[comp][c1] = -_along(d, c2, es[c1])
    return sp.bmat(blocks, format='csr')


def edge_average(node_values: np.ndarray, comp: int) -> np.ndarray:
    """Mean of the two end nodes of every edge along comp."""
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    lo[comp] = slice(None, -1)
    hi[comp] = slice(1, None)
    return 0.5 * (node_values[tuple(lo)] + node_values[tuple(hi)])


def face_average(node_values: np.ndarray, comp: int) -> np.ndarray:
    """Mean of the four corner nodes of every face normal to comp."""
    c1, c2 = (comp + 1) % 3, (comp + 2) % 3
    return edge_average(edge_average(node_values, c1), c2)


def edges_to_nodes(edge_values: np.ndarray, comp: int) -> np.ndarray:
    """Interpolate one edge component back to nodes (second-order at the ends)."""
    moved = np.moveaxis(edge_values, comp, 0)
    nodes = np.empty((moved.shape[0] + 1,) + moved.shape[1:], dtype=np.complex128)
    nodes[1:-1] = 0.5 * (moved[:-1] + moved[1:])
    nodes[0] = 1.5 * moved[0] - 0.5 * moved[1]
    nodes[-1] = 1.5 * moved[-1] - 0.5 * moved[-2]
    return np.moveaxis(nodes, 0, comp)


def _boundary_edge_masks(N: int) -> List[np.ndarray]:
    masks = []
    for comp, shape in enumerate(_edge_shapes(N)):
        mask = np.zeros(shape, dtype=bool)
        for ax in range(3):
            if ax == comp:
                continue
            idx = [slice(None)] * 3
            idx[ax] = 0
            mask[tuple(idx)] = True
            idx[ax] = N
            mask[tuple(idx)] = True
        masks.append(mask)
    return masks


def tangential_nodes_from_trace(T: BoundaryField) -> np.ndarray:
    """
    Node values of the tangential E implied by N x E = T, i.e.
    E_t = -N x T: components (sigma T2, -sigma T1) along (t1, t2).
    Nodes shared by several faces receive the face average.
    """
    s = 2 * T.grid.m + 1
    total = np.zeros((3, s, s, s), dtype=np.complex128)
    count = np.zeros((3, s, s, s))
    for axis, side in FACES:
        t1, t2 = tangent_axes(axis)
        face = T.data[face_number(axis, side)]
        idx = [slice(None)] * 3
        idx[axis] = 0 if side < 0 else s - 1
        idx = tuple(idx)
        for comp, values in ((t1, side * face[1]), (t2, -side * face[0])):
            total[comp][idx] += values
            count[comp][idx] += 1
    return np.where(count > 0, total / np.maximum(count, 1), 0.0)


class MaxwellForwardSolver:
    """
    Factorizes the interior edge system once per coefficient pair; every
    boundary datum then costs one pair of triangular solves.
    """

    def __init__(self, c: CoefficientPair, condition_limit: float = CONDITION_LIMIT,
                 probe_seed: int = 0):
        self.c = c
        self.grid = c.grid
        self.N = 2 * self.grid.m
        self.condition_limit = condition_limit
        self.probe_seed = probe_seed
        self.logger = logging.getLogger(self.__class__.__name__)
        self._lu = None
        self._condition = None
        self._assemble()

    def _assemble(self):
        N, h = self.N, self.grid.h
        gamma = closure_values(self.c.gamma, self.grid)
        inv_mu = 1.0 / closure_values(self.c.mu, self.grid)

        C = curl_matrix(N, h)
        inv_mu_face = np.concatenate([face_average(inv_mu, comp).ravel() for comp in range(3)])
        gamma_edge = np.concatenate([edge_average(gamma, comp).ravel() for comp in range(3)])
        A = (C.T @ sp.diags(inv_mu_face) @ C - self.c.omega ** 2 * sp.diags(gamma_edge)).tocsc()

        boundary = np.concatenate([m.ravel() for m in _boundary_edge_masks(N)])
        self.interior_idx = np.flatnonzero(~boundary)
        self.boundary_idx = np.flatnonzero(boundary)
        self.A = A
        self.A_II = A[self.interior_idx][:, self.interior_idx].tocsc()
        self.A_IB = A[self.interior_idx][:, self.boundary_idx].tocsc()
        self.logger.debug(
            f"Yee system: {len(self.interior_idx)} interior edges, {len(self.boundary_idx)} boundary edges"
        )

    def factorize(self):
        if self._lu is not None:
            return
        self._lu = splu(self.A_II)
        self._condition = self._condition_indicator()
        self.logger.debug(f"Condition indicator {self._condition:.3e}")
        if self._condition > self.condition_limit:
            raise NearResonance(
                f"omega={self.c.omega} is near a resonance: condition indicator "
                f"{self._condition:.3e} > {self.condition_limit:.1e}",
                condition=self._condition,
            )

    def _condition_indicator(self) -> float:
        """||A||_1 times the largest ||A^-1 x||_1 / ||x||_1 over four seeded probes."""
        rng = make_rng(self.probe_seed)
        size = self.A_II.shape[0]
        norm_a = float(abs(self.A_II).sum(axis=0).max())
        growth = 0.0
        for _ in range(4):
            x = rng.standard_normal(size) + 1j * rng.standard_normal(size)
            y = self._lu.solve(x)
            growth = max(growth, np.abs(y).sum() / np.abs(x).sum())
        return norm_a * growth

    @property
    def condition(self) -> float:
        self.factorize()
        return self._condition

    def boundary_edges(self, T: BoundaryField) -> np.ndarray:
        nodes = tangential_nodes_from_trace(T)
        values = np.concatenate([edge_average(nodes[comp], comp).ravel() for comp in range(3)])
        return values[self.boundary_idx]

    def interior_solve(self, Ts: Sequence[BoundaryField]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Boundary edge values, interior edge values (one column per datum) and
        relative residuals. All right-hand sides go through one batched
        triangular solve.
        """
        for T in Ts:
            if T.kind != TANGENTIAL:
                raise ValueError("solve_forward needs a tangential boundary field")
            self.grid.check_same(T.grid)
        self.factorize()

        e_b = np.stack([self.boundary_edges(T) for T in Ts], axis=1)
        rhs = -(self.A_IB @ e_b)
        e_i = self._lu.solve(rhs)
        rhs_norm = np.linalg.norm(rhs, axis=0)
        defect = np.linalg.norm(self.A_II @ e_i - rhs, axis=0)
        residuals = np.divide(defect, rhs_norm, out=np.zeros_like(defect), where=rhs_norm > 0)
        worst = float(residuals.max(initial=0.0))
        if worst > RESIDUAL_LIMIT:
            raise NoConvergence(f"Yee solve residual {worst:.3e} above {RESIDUAL_LIMIT:.0e}",
                                iterations=1, residual=worst)
        return e_b, e_i, residuals

    def solution_from_edges(self, e_b: np.ndarray, e_i: np.ndarray, residual: float) -> ForwardSolution:
        edges = np.zeros(self.A.shape[0], dtype=np.complex128)
        edges[self.interior_idx] = e_i
        edges[self.boundary_idx] = e_b
        E = self._edge_field_to_nodes(edges)
        H = self._magnetic_field(E)
        return ForwardSolution(E=E, H=H, residual=float(residual), condition=self._condition)

    def solve(self, T: BoundaryField) -> ForwardSolution:
        e_b, e_i, residuals = self.interior_solve([T])
        return self.solution_from_edges(e_b[:, 0], e_i[:, 0], residuals[0])

    def _edge_field_to_nodes(self, edges: np.ndarray) -> np.ndarray:
        shapes = _edge_shapes(self.N)
        out = []
        start = 0
        for comp, shape in enumerate(shapes):
            size = int(np.prod(shape))
            out.append(edges_to_nodes(edges[start:start + size].reshape(shape), comp))
            start += size
        return np.array(out)

    def _magnetic_field(self, E: np.ndarray) -> np.ndarray:
        """H = curl E / (i omega mu) with second-order node differences."""
        h = self.grid.h
        d = lambda comp, ax: np.gradient(E[comp], h, axis=ax, edge_order=2)
        curl = np.array([d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)])
        mu = closure_values(self.c.mu, self.grid)
        return curl / (1j * self.c.omega * mu)

    def admittance(self, T: BoundaryField) -> BoundaryField:
        """N x H of the interior solution with N x E = T."""
        return tangential_trace(self.solve(T).H, self.grid)


def solve_forward(c: CoefficientPair, T: BoundaryField) -> ForwardSolution:
    return MaxwellForwardSolver(c).solve(T)


def admittance_apply(c: CoefficientPair, T: BoundaryField) -> BoundaryField:
    return MaxwellForwardSolver(c).admittance(T)


def trace_identity_defects(c: CoefficientPair, E: np.ndarray, H: np.ndarray) -> Dict[str, float]:
    """
    Relative face defects of N.(gamma E) = (1/i omega) Div(N x H) and
    N.(mu H) = -(1/i omega) Div(N x E) for closure fields E, H.
    """
    grid = c.grid
    gamma = closure_values(c.gamma, grid)
    mu = closure_values(c.mu, grid)
    iw = 1j * c.omega
    out = {}
    for name, lhs, rhs in (
        ('electric', normal_trace(gamma * E, grid), curl_normal_trace(H, grid).scaled(1.0 / iw)),
        ('magnetic', normal_trace(mu * H, grid), curl_normal_trace(E, grid).scaled(-1.0 / iw)),
    ):
        scale = np.abs(lhs.data).max()
        diff = np.abs(lhs.data - rhs.data).max()
        out[name] = float(diff / scale) if scale > 0 else float(diff)
    return out
