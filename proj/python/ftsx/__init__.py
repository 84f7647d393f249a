"""Functional time series features: global FPCA plus local wavelet features."""

from ._ftsx import (
    InputError,
    NumericError,
    PreconditionError,
    __version__,
    dwt,
    extract,
    forecast,
    idwt,
    long_run_cov,
    select_k,
    simulate,
    smooth,
)

__all__ = [
    "InputError",
    "NumericError",
    "PreconditionError",
    "__version__",
    "dwt",
    "extract",
    "forecast",
    "idwt",
    "long_run_cov",
    "select_k",
    "simulate",
    "smooth",
]
