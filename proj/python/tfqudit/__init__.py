"""Time-frequency qudit entanglement certification and key rates."""

from ._core import (
    ConfigError,
    DataError,
    NumericError,
    TfqError,
    __version__,
    analyze,
    assess_mub,
    asymptotic_rate,
    bin_full_frame,
    certify,
    certify_schmidt_number,
    conditional_entropy,
    delta_m,
    f2_tilde,
    h_min,
    hoeffding_mu,
    key_rate,
    run_pipeline,
    simulate,
    subspace_extract,
)

# channel numbers of the simulator streams
ALICE_TIME, ALICE_FREQ, BOB_TIME, BOB_FREQ = 0, 1, 2, 3

__all__ = [
    "ALICE_FREQ",
    "ALICE_TIME",
    "BOB_FREQ",
    "BOB_TIME",
    "ConfigError",
    "DataError",
    "NumericError",
    "TfqError",
    "analyze",
    "assess_mub",
    "asymptotic_rate",
    "bin_full_frame",
    "certify",
    "certify_schmidt_number",
    "conditional_entropy",
    "delta_m",
    "f2_tilde",
    "h_min",
    "hoeffding_mu",
    "key_rate",
    "run_pipeline",
    "simulate",
    "subspace_extract",
]
