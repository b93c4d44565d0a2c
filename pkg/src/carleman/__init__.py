# carleman package
from .estimate import CarlemanConfig, carleman_ratio, carleman_sweep, absorb_check
