# utils package
from .helpers import load_config, setup_logging, config_hash, make_rng
from .exceptions import (
    NumericFailure,
    NonContractive,
    NoConvergence,
    NearResonance,
    GridMismatch,
    ConfigError,
)
