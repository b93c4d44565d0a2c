# cgo package
from .faddeev import FaddeevConfig, gzeta_apply, gzeta_derivative_bound
from .remainder import FixedPointReport, solve_remainder
from .builders import CGOSolution, build_maxwell_cgo, build_adjoint_cgo
