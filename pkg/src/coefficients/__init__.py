# coefficients package
from .pair import CoefficientPair, DerivedScalars, synth_coefficients, derive_scalars
from .admissibility import check_admissible
