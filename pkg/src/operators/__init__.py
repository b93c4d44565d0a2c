# operators package
from .block_matrix import BlockMatrixField, pattern_apply
from .dirac import apply_P, apply_schrodinger, boundary_pairing
from .assembly import assemble_W, assemble_Q, assemble_Q_prime, assemble_Q_hat, assemble_V, RescaleMaps
