# grid package
from .grid import Grid3
from .state import StateY, inner_omega, weighted_norm
