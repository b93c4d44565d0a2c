"""
Binary field files.

Layout: magic b"CGOF", little-endian uint32 header length, UTF-8 JSON header
{grid: {n, L, a}, kind, dtype, layout, shape}, then the raw '<c16' samples of
each component in x-fastest order.
"""

import json
import struct
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from src.grid.grid import Grid3
from src.utils.exceptions import ConfigError

MAGIC = b"CGOF"
DTYPE = "<c16"
KIND_COMPONENTS = {'scalar': None, 'vector': 3, 'state8': 8}
BOUNDARY_KINDS = ('tangential', 'boundary_scalar')


def _leading_shape(kind: str, values: np.ndarray, grid: Optional[Grid3]) -> Tuple[int, ...]:
    if kind in KIND_COMPONENTS:
        comps = KIND_COMPONENTS[kind]
        expected = grid.shape if comps is None else (comps,) + grid.shape
        if values.shape != expected:
            raise ValueError(f"{kind} field needs shape {expected}, got {values.shape}")
        return values.shape
    if kind in BOUNDARY_KINDS:
        side = 2 * grid.m + 1
        comps = 2 if kind == 'tangential' else 1
        expected = (6, comps, side, side)
        if values.shape != expected:
            raise ValueError(f"{kind} field needs shape {expected}, got {values.shape}")
        return values.shape
    raise ValueError(f"Unknown field kind: {kind}")


def encode_field(grid: Grid3, values: np.ndarray, kind: str) -> bytes:
    shape = _leading_shape(kind, values, grid)
    header = {
        'grid': grid.describe(),
        'kind': kind,
        'dtype': 'complex128',
        'layout': 'x-fastest',
        'shape': list(shape),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode('utf-8')
    data = np.asarray(values, dtype=DTYPE)
    comps = data.reshape((-1,) + data.shape[-2:] if kind in BOUNDARY_KINDS else (-1,) + grid.shape)
    body = b"".join(c.tobytes(order='F') for c in comps)
    return MAGIC + struct.pack('<I', len(header_bytes)) + header_bytes + body


def decode_field(blob: bytes) -> Tuple[Grid3, np.ndarray, str]:
    if blob[:4] != MAGIC:
        raise ConfigError("Not a field file (bad magic)")
    (hlen,) = struct.unpack('<I', blob[4:8])
    header = json.loads(blob[8:8 + hlen].decode('utf-8'))
    g = header['grid']
    grid = Grid3(int(g['n']), float(g['L']), float(g['a']))
    shape = tuple(header['shape'])
    kind = header['kind']
    spatial = shape[-2:] if kind in BOUNDARY_KINDS else shape[-3:]
    per_comp = int(np.prod(spatial))
    raw = np.frombuffer(blob, dtype=DTYPE, offset=8 + hlen)
    count = int(np.prod(shape)) // per_comp
    if raw.size != count * per_comp:
        raise ConfigError(f"Field file truncated: {raw.size} samples, expected {count * per_comp}")
    comps = [raw[i * per_comp:(i + 1) * per_comp].reshape(spatial, order='F') for i in range(count)]
    values = np.array(comps, dtype=np.complex128).reshape(shape)
    return grid, values, kind


def write_field(path, grid: Grid3, values: np.ndarray, kind: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_field(grid, values, kind))
    return path


def read_field(path) -> Tuple[Grid3, np.ndarray, str]:
    return decode_field(Path(path).read_bytes())
