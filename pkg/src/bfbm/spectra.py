"""Spectral densities of the stationary (Lamperti) processes.

Densities are normalized so that R(tau) = int exp(i tau u) f(u) du. Each
density has a ``log_`` variant; the plain variant exponentiates it.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn
from scipy.special import gammaln, gammasgn, kv

from . import kernels
from .errors import ConvergenceError, DomainError, QuadratureError
from .special import log_abs_gamma_sq, log_cosh, log_sinh

LOG_2PI = math.log(2.0 * math.pi)


class SpectrumId(str, enum.Enum):
    FOU = "fou"
    FOU_SERIES = "fou-series"
    LN = "ln"
    LNR = "lnr"
    K0_F1 = "k0-f1"
    K0_F2 = "k0-f2"


@dataclass(frozen=True)
class SeriesConfig:
    max_terms: int = 10_000_000
    tail_tol: float = 1e-12

    def __post_init__(self):
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")
        if not self.tail_tol > 0:
            raise DomainError("tail_tol must be positive")


@dataclass(frozen=True)
class QuadSettings:
    """Gauss-Legendre panel rule on [0, u_max] for Fourier checks.

    ``u_max=None`` picks the cutoff from the decay of the integrand.
    """

    panel: float = 0.5
    nodes: int = 16
    u_max: float | None = None
    tol: float = 1e-9


def _open_unit(name, v):
    if not (math.isfinite(v) and 0.0 < v < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {v!r}")


def _out(x):
    return np.asarray(x).item() if np.ndim(x) == 0 else x


# ---------------------------------------------------------------------------
# fractional Ornstein-Uhlenbeck


def log_f_ou(h, u):
    """log of the fOU spectral density, with the denominator rewritten as
    sin^2(pi H) cosh^2(pi u) + cos^2(pi H) sinh^2(pi u) = sin^2(pi H) + sinh^2(pi u).
    """
    _open_unit("h", h)
    u = np.abs(np.asarray(u, dtype=float))
    if not np.all(np.isfinite(u)):
        raise DomainError("frequency must be finite")
    log_sin2 = 2.0 * math.log(math.sin(math.pi * h))
    pu = math.pi * u
    safe = np.where(pu > 0, pu, 1.0)
    log_sinh2 = np.where(pu > 0, 2.0 * log_sinh(safe), -np.inf)
    log_den = np.logaddexp(log_sin2, log_sinh2)
    out = (
        gammaln(2.0 * h + 1.0)
        + math.log(math.sin(math.pi * h))
        - math.log(2.0)
        - np.log(u * u + h * h)
        - log_abs_gamma_sq(h + 1j * u)
        + log_cosh(pu)
        - log_den
    )
    return _out(out)


def f_ou(h, u):
    return _out(np.exp(log_f_ou(h, u)))


def _ou_series_tail(h, u, n):
    """Euler-Maclaurin estimate of sum_{k >= n} of the series terms."""
    g_lead = gammaln(-2.0 * h)
    s_lead = gammasgn(-2.0 * h)

    def term(x):
        coef = -s_lead * np.exp(gammaln(x - 2.0 * h) - gammaln(x + 1.0) - g_lead)
        d = x - h
        return coef * d / (2.0 * math.pi * (u * u + d * d))

    integral, _ = integrate.quad(term, n, np.inf, epsabs=1e-16, epsrel=1e-11, limit=200)
    step = 1e-3 * n
    deriv = (term(n + step) - term(n - step)) / (2.0 * step)
    return integral + 0.5 * term(n) - deriv / 12.0


def f_ou_series(h, u, cfg=SeriesConfig()):
    """fOU density from its expansion in exponentials of the covariance.

    Terms are summed explicitly until one falls below ``cfg.tail_tol`` (and at
    least past max(64, 8|u|)); the remaining tail is added by Euler-Maclaurin
    since the terms only decay like k^(-2-2H).
    """
    _open_unit("h", h)
    if h == 0.5:
        raise DomainError("the series form is not used at H = 1/2")
    u = float(abs(u))
    min_terms = max(64, int(math.ceil(8.0 * u)))
    chunk = 65536
    total = 0.0
    coef = -1.0  # (-1)^(k+1) C_{k,H} at k = 0
    start = 0
    while start < cfg.max_terms:
        stop = min(start + chunk, cfg.max_terms)
        k = np.arange(start, stop, dtype=float)
        ratio = (k - 2.0 * h) / (k + 1.0)
        coefs = coef * np.concatenate(([1.0], np.cumprod(ratio[:-1])))
        coef = coefs[-1] * ratio[-1]
        d = k - h
        terms = coefs * d / (2.0 * math.pi * (u * u + d * d))
        small = (np.abs(terms) < cfg.tail_tol) & (k >= min_terms)
        if small.any():
            n = int(np.argmax(small))
            total += math.fsum(terms[:n])
            return total + _ou_series_tail(h, u, start + n)
        total += math.fsum(terms)
        start = stop
    raise ConvergenceError(
        f"series term still above {cfg.tail_tol:g} after {cfg.max_terms} terms"
    )


# ---------------------------------------------------------------------------
# Lei-Nualart


def log_f_ln(k, u):
    """log of K/Gamma(1-K) |Gamma(-iu - K/2)|^2 / (2 pi)."""
    _open_unit("k", k)
    u = np.abs(np.asarray(u, dtype=float))
    if not np.all(np.isfinite(u)):
        raise DomainError("frequency must be finite")
    out = math.log(k) - gammaln(1.0 - k) + log_abs_gamma_sq(-0.5 * k + 1j * u) - LOG_2PI
    return _out(out)


def f_ln(k, u):
    return _out(np.exp(log_f_ln(k, u)))


def log_f_ln_rescaled(h, k, u):
    kernels.Params(h, k)
    u = np.asarray(u, dtype=float)
    return _out(log_f_ln(k, u / (2.0 * h)) - math.log(2.0 * h))


def f_ln_rescaled(h, k, u):
    """Density of the time-rescaled Lei-Nualart process: f_ln(K, u/2H) / 2H."""
    kernels.Params(h, k)
    u = np.asarray(u, dtype=float)
    return _out(f_ln(k, u / (2.0 * h)) / (2.0 * h))


# ---------------------------------------------------------------------------
# K -> 0 limits


def _phi(u):
    # (1 / (pi u^2)) (1 - x / sinh x), x = pi u / 2
    x = 0.5 * math.pi * np.abs(u)
    small = x < 0.02
    xs = np.where(small, 1.0, x)
    ratio = 2.0 * xs * np.exp(-xs) / -np.expm1(-2.0 * xs)
    direct = (1.0 - ratio) * math.pi / (4.0 * xs * xs)
    x2 = x * x
    series = 0.25 * math.pi * (1 / 6 - 7 * x2 / 360 + 31 * x2**2 / 15120 - 127 * x2**3 / 604800)
    return np.where(small, series, direct)


def _coth_sum(u):
    # sum_{n>=1} 1/(u^2 + n^2) = (pi u coth(pi u) - 1) / (2 u^2)
    y = math.pi * np.abs(u)
    small = y < 0.05
    ys = np.where(small, 1.0, y)
    coth = 1.0 + 2.0 * np.exp(-2.0 * ys) / -np.expm1(-2.0 * ys)
    direct = (ys * coth - 1.0) * math.pi**2 / (2.0 * ys * ys)
    y2 = y * y
    series = (math.pi**2 / 2.0) * (1 / 3 - y2 / 45 + 2 * y2**2 / 945 - y2**3 / 4725)
    return np.where(small, series, direct)


def f_limit_k0(part, h, u):
    """Spectral densities f1 (part=1) and f2 (part=2) of the K -> 0 limit."""
    if not (math.isfinite(h) and h > 0):
        raise DomainError("h must be positive")
    u = np.asarray(u, dtype=float)
    if str(part) in ("1", "F1", "k0-f1"):
        return _out(_phi(u / h) / h)
    if str(part) in ("2", "F2", "k0-f2"):
        return _out((2.0 * h / math.pi) * _coth_sum(u))
    raise DomainError(f"unknown limit part {part!r}")


# ---------------------------------------------------------------------------


def spectral_density(kind, h, k, u, cfg=SeriesConfig()):
    """Dispatch on SpectrumId. fou/fou-series use ``h`` as the Hurst index."""
    kind = SpectrumId(kind)
    if kind is SpectrumId.FOU:
        return f_ou(h, u)
    if kind is SpectrumId.FOU_SERIES:
        return _out(np.vectorize(lambda x: f_ou_series(h, x, cfg))(u))
    if kind is SpectrumId.LN:
        return f_ln(k, u)
    if kind is SpectrumId.LNR:
        return f_ln_rescaled(h, k, u)
    if kind is SpectrumId.K0_F1:
        return f_limit_k0(1, h, u)
    return f_limit_k0(2, h, u)


def _power_tail(kind, h, k):
    """(amplitude, nu) with f(u) ~ amplitude * u^(-1-2 nu), or None."""
    if kind is kernels.KernelId.FBM:
        nu = h
        amp = gamma_fn(2 * nu + 1) * math.sin(math.pi * nu) / (2 * math.pi)
        return amp, nu
    if kind is kernels.KernelId.BFBM:
        nu = h * k
        amp = gamma_fn(2 * nu + 1) * math.sin(math.pi * nu) / (2 * math.pi)
        return 2.0 * amp / 2.0**k, nu
    return None


def _matern_transform(nu, tau):
    # int exp(i tau u) (u^2 + 1)^(-nu - 1/2) du
    if tau == 0:
        return math.sqrt(math.pi) * gamma_fn(nu) / gamma_fn(nu + 0.5)
    a = abs(tau)
    return 2.0 * math.sqrt(math.pi) / gamma_fn(nu + 0.5) * (a / 2.0) ** nu * kv(nu, a)


def _density_for_kernel(kind, h, k):
    if kind is kernels.KernelId.FBM:
        _open_unit("h", h)
        return lambda u: f_ou(h, u)
    if kind is kernels.KernelId.LN:
        _open_unit("k", k)
        return lambda u: f_ln(k, u)
    if kind is kernels.KernelId.LNR:
        _open_unit("k", k)
        return lambda u: f_ln_rescaled(h, k, u)
    if kind is kernels.KernelId.BFBM:
        _open_unit("k", k)
        _open_unit("hk", h * k)
        return lambda u: (2.0 * f_ou(h * k, u) - f_ln_rescaled(h, k, u)) / 2.0**k
    raise DomainError(f"no spectral density for kernel {kind.value!r}")


def _panel_integral(fn, tau, u_max, panel, nodes, scale):
    # panels of width scale/4 over the peak at the origin, then ``panel``
    x, w = np.polynomial.legendre.leggauss(nodes)
    fine_width = min(panel, 0.25 * scale)
    u1 = min(u_max, 40.0 * scale)
    inner = np.linspace(0.0, u1, max(1, int(math.ceil(u1 / fine_width))) + 1)
    n_outer = int(math.ceil((u_max - u1) / panel))
    outer = np.linspace(u1, u_max, n_outer + 1)[1:] if n_outer else np.empty(0)
    edges = np.concatenate((inner, outer))
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ww = (half[:, None] * w[None, :]).ravel()
    return 2.0 * float(np.sum(ww * np.cos(tau * u) * fn(u)))


def _feature_scale(kind, h, k):
    # width of the peak at u = 0
    if kind is kernels.KernelId.FBM:
        return h
    if kind is kernels.KernelId.LN:
        return 0.5 * k
    if kind is kernels.KernelId.LNR:
        return h * k
    return min(h * k, 1.0)


def fourier_check(kind, h, k, tau, quad=QuadSettings()):
    """Numerically evaluate 2 * int_0^inf cos(tau u) f(u) du.

    The result should reproduce ``kernels.stat_cov(kind, h, k, tau)``.
    Densities with a power-law tail (fbm, bfbm) have the leading
    u^(-1-2 nu) term replaced by A (u^2 + 1)^(-nu - 1/2), whose transform is
    a Bessel-K expression; only the faster-decaying remainder is integrated.
    """
    kind = kernels.KernelId(kind)
    dens = _density_for_kernel(kind, h, k)
    tail = _power_tail(kind, h, k)
    if tail is None:
        fn = dens
        exact = 0.0
        decay = lambda u: np.abs(fn(u)) * 10.0
    else:
        amp, nu = tail
        fn = lambda u: dens(u) - amp * (u * u + 1.0) ** (-nu - 0.5)
        exact = amp * _matern_transform(nu, tau)
        decay = lambda u: np.abs(fn(u)) * u / (1.0 + nu)

    u_max = quad.u_max
    if u_max is None:
        u_max = 16.0
        while float(decay(np.array([u_max]))[0]) > 0.25 * quad.tol:
            u_max *= 2.0
            if u_max > 1e6:
                raise QuadratureError("integrand tail does not fall below tolerance")

    scale = _feature_scale(kind, h, k)
    coarse = _panel_integral(fn, tau, u_max, quad.panel, quad.nodes, scale)
    fine = _panel_integral(fn, tau, u_max, quad.panel / 2.0, quad.nodes, scale / 2.0)
    if abs(coarse - fine) > quad.tol:
        raise QuadratureError(f"panel refinement changed the integral by {abs(coarse - fine):.3g}")
    return fine + exact
