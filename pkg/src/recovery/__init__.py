# recovery package
from .zeta import ZetaPair, RecoveryConfig, make_zeta_pair
from .pairing import pairing_q_diff, oracle_hat
from .extraction import FourierSamples, extract_fg_hat
from .elliptic import RecoveryReport, invert_and_solve
from .curve import StabilityCurve, stability_curve
