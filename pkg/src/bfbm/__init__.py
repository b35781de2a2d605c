"""Bifractional Brownian motion: covariances, spectral densities, existence
checks and path simulation."""

from .errors import (
    BfbmError,
    ConvergenceError,
    DomainError,
    NonMonotoneError,
    NotPSDError,
    NumericalError,
    PoleError,
    QuadratureError,
    ScanError,
    TruncationError,
)
from .existence import (
    BoundaryRow,
    ScanConfig,
    Status,
    Verdict,
    boundary_table,
    check,
    check_cov_bound_r,
    check_necessary,
    check_spectral,
    gram_psd_probe,
    kbar,
    khat,
    spectral_gap,
    stat_cov_sup,
)
from .kernels import KernelId, Params, cov_bfbm, cov_fbm, covariance, stat_cov
from .simulate import (
    PathSample,
    RngSpec,
    empirical_cov,
    sample_cholesky,
    sample_decomposition,
    sample_h1_series,
)
from .spectra import SpectrumId, f_ln, f_ln_rescaled, f_ou, f_ou_series, fourier_check

__version__ = "0.1.0"
