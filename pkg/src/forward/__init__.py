# forward package
from .boundary import BoundaryField, tangential_trace
from .th_norm import th_norm, th_inner
from .solver import MaxwellForwardSolver, solve_forward, admittance_apply, trace_identity_defects
from .cauchy import CauchySet, generate_cauchy_set, delta_C, admittance_difference_norm
