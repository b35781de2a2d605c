"""Covariance functions of bfBm and its companion processes.

Self-similar kernels take time arguments ``s, t``; the stationary (Lamperti)
versions take a log-time lag ``tau``. All functions broadcast over numpy
arrays.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import DomainError


class KernelId(str, enum.Enum):
    BFBM = "bfbm"
    FBM = "fbm"
    ANTISYM = "antisym"
    LN = "ln"
    LNR = "lnr"
    BERNSTEIN = "bernstein"


@dataclass(frozen=True)
class Params:
    """Parameter pair (H, K)."""

    h: float
    k: float = 1.0

    def __post_init__(self):
        for name in ("h", "k"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and positive, got {v!r}")

    @property
    def hk(self):
        return self.h * self.k

    @property
    def zone(self):
        if self.k == 1.0:
            return "fbm-line"
        if self.k <= 2.0 and self.h * self.k <= 1.0:
            return "candidate"
        return "forbidden"


def _check_open_unit(name, v, closed_right=False):
    ok = 0.0 < v <= 1.0 if closed_right else 0.0 < v < 1.0
    if not (math.isfinite(v) and ok):
        interval = "(0, 1]" if closed_right else "(0, 1)"
        raise DomainError(f"{name} must lie in {interval}, got {v!r}")


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DomainError("time arguments must be finite")


def _result(x):
    return np.asarray(x).item() if np.ndim(x) == 0 else x


# ---------------------------------------------------------------------------
# self-similar kernels


def cov_fbm(h, s, t):
    """Fractional Brownian motion: (|s|^2H + |t|^2H - |t-s|^2H) / 2."""
    _check_open_unit("h", h, closed_right=True)
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    _check_finite(s, t)
    e = 2.0 * h
    return _result(0.5 * (np.abs(s) ** e + np.abs(t) ** e - np.abs(t - s) ** e))


def cov_bfbm(h, k, s, t):
    """Bifractional Brownian motion covariance.

    Defined for any h, k > 0; whether a process with this covariance exists
    is decided in :mod:`bfbm.existence`.
    """
    Params(h, k)
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    _check_finite(s, t)
    base = np.abs(s) ** (2.0 * h) + np.abs(t) ** (2.0 * h)
    out = 2.0 ** (-k) * (base**k - np.abs(t - s) ** (2.0 * h * k))
    return _result(out)


def cov_antisym_fbm(h, s, t):
    """Covariance of W(t) - W(-t) for fBm W, on t >= 0."""
    _check_open_unit("h", h, closed_right=True)
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    _check_finite(s, t)
    if np.any(s < 0) or np.any(t < 0):
        raise DomainError("anti-symmetrized fBm lives on t >= 0")
    e = 2.0 * h
    return _result((s + t) ** e - np.abs(t - s) ** e)


def cov_lei_nualart(k, s, t):
    """Normalized Lei-Nualart process: s^K + t^K - (s+t)^K, for s, t >= 0."""
    _check_open_unit("k", k)
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    _check_finite(s, t)
    if np.any(s < 0) or np.any(t < 0):
        raise DomainError("the Lei-Nualart process lives on t >= 0")
    # lo^K - hi^K ((1 + lo/hi)^K - 1), free of cancellation when lo << hi
    lo, hi = np.minimum(s, t), np.maximum(s, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(hi > 0, lo / np.where(hi > 0, hi, 1.0), 0.0)
    return _result(lo**k - hi**k * np.expm1(k * np.log1p(ratio)))


def cov_lei_nualart_rescaled(h, k, s, t):
    """Lei-Nualart process run on the clock |t|^2H."""
    _check_open_unit("k", k)
    Params(h, k)
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    _check_finite(s, t)
    return cov_lei_nualart(k, np.abs(s) ** (2.0 * h), np.abs(t) ** (2.0 * h))


# ---------------------------------------------------------------------------
# Bernstein construction


@dataclass(frozen=True)
class BernsteinSpec:
    """f(lam) = a + b*lam + sum(mass * (1 - exp(-x*lam))) paired with a
    variance profile ``sigma_sq(t)`` of a process with stationary increments.
    """

    a: float
    b: float
    atoms: tuple = ()
    sigma_sq: Callable = field(default=lambda t: np.abs(t), compare=False)

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise DomainError("Bernstein coefficients a, b must be nonnegative")
        for x, m in self.atoms:
            if not (x > 0 and m > 0):
                raise DomainError("Bernstein atoms need positive location and mass")
        object.__setattr__(self, "_x", np.array([x for x, _ in self.atoms], dtype=float))
        object.__setattr__(self, "_m", np.array([m for _, m in self.atoms], dtype=float))

    def f(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = self.a + self.b * lam
        if self._x.size:
            out = out + np.sum(self._m * -np.expm1(-np.multiply.outer(lam, self._x)), axis=-1)
        return out


def fbm_variance(h):
    """sigma(t)^2 = |t|^2H, the variance profile of fBm."""
    return lambda t: np.abs(t) ** (2.0 * h)


def power_bernstein(k, sigma_sq, n_nodes=400, lo=1e-8, hi=1e8, scale=1.0):
    """Discretize lam^K = K/Gamma(1-K) * int (1 - e^{-x lam}) x^{-1-K} dx.

    Gauss-Legendre in log x over [lo, hi] * scale. The mass cut off below
    ``lo`` is folded into the linear coefficient and the mass above ``hi``
    into the constant, both to leading order.
    """
    _check_open_unit("k", k)
    lo, hi = lo * scale, hi * scale
    y, w = np.polynomial.legendre.leggauss(n_nodes)
    a_, b_ = math.log(lo), math.log(hi)
    y = 0.5 * (b_ - a_) * y + 0.5 * (b_ + a_)
    w = 0.5 * (b_ - a_) * w
    c = k / gamma_fn(1.0 - k)
    x = np.exp(y)
    mass = c * w * x ** (-k)
    return BernsteinSpec(
        a=c * hi ** (-k) / k,
        b=c * lo ** (1.0 - k) / (1.0 - k),
        atoms=tuple(zip(x.tolist(), mass.tolist())),
        sigma_sq=sigma_sq,
    )


def cov_bernstein(spec, s, t):
    """f(sigma(s)^2 + sigma(t)^2) - f(sigma(s-t)^2)."""
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    _check_finite(s, t)
    sig = spec.sigma_sq
    return _result(np.asarray(spec.f(sig(s) + sig(t)) - spec.f(sig(s - t))))


# ---------------------------------------------------------------------------
# stationary versions


def _log1mexp(a):
    # log(1 - e^{-a}) for a >= 0
    with np.errstate(divide="ignore"):
        return np.where(a < math.log(2.0), np.log(-np.expm1(-a)), np.log1p(-np.exp(-a)))


def _stat_bfbm(h, k, tau):
    # 2^-K e^{HK a} [(1 + e^{-2Ha})^K - (1 - e^{-a})^{2HK}], a = |tau|
    a = np.abs(tau)
    with np.errstate(divide="ignore"):
        lead = np.expm1(k * np.log1p(np.exp(-2.0 * h * a)))
        trail = np.expm1(2.0 * h * k * _log1mexp(a))
        log_d = np.log(lead - trail)
    return np.exp(h * k * a - k * math.log(2.0) + log_d)


def _stat_ln(k, tau):
    # e^{-Ka/2} - e^{Ka/2} ((1 + e^{-a})^K - 1)
    a = np.abs(tau)
    with np.errstate(divide="ignore"):
        tail = np.exp(0.5 * k * a + np.log(np.expm1(k * np.log1p(np.exp(-a)))))
    return np.exp(-0.5 * k * a) - tail


def stat_cov(kind, h, k, tau):
    """Covariance of the stationary version at log-time lag ``tau``.

    ``kind`` is one of bfbm, fbm (uses h only), ln (uses k only), lnr.
    """
    kind = KernelId(kind)
    tau = np.asarray(tau, dtype=float)
    _check_finite(tau)
    if kind is KernelId.FBM:
        _check_open_unit("h", h, closed_right=True)
        out = _stat_bfbm(h, 1.0, tau)
    elif kind is KernelId.BFBM:
        Params(h, k)
        out = _stat_bfbm(h, k, tau)
    elif kind is KernelId.LN:
        _check_open_unit("k", k)
        out = _stat_ln(k, tau)
    elif kind is KernelId.LNR:
        _check_open_unit("k", k)
        Params(h, k)
        out = _stat_ln(k, 2.0 * h * tau)
    else:
        raise DomainError(f"no stationary covariance for kernel {kind.value!r}")
    return _result(out)


def lamperti_exponent(kind, h, k):
    """Self-similarity index used by the Lamperti transform of ``kind``."""
    kind = KernelId(kind)
    if kind is KernelId.FBM:
        return h
    if kind is KernelId.LN:
        return 0.5 * k
    return h * k


# ---------------------------------------------------------------------------


def covariance(kind, params, s, t, bernstein=None):
    """Evaluate the kernel selected by ``kind`` at (s, t)."""
    kind = KernelId(kind)
    h, k = params.h, params.k
    if kind is KernelId.BFBM:
        return cov_bfbm(h, k, s, t)
    if kind is KernelId.FBM:
        return cov_fbm(h, s, t)
    if kind is KernelId.ANTISYM:
        return cov_antisym_fbm(h, s, t)
    if kind is KernelId.LN:
        return cov_lei_nualart(k, s, t)
    if kind is KernelId.LNR:
        return cov_lei_nualart_rescaled(h, k, s, t)
    if bernstein is None:
        raise DomainError("the bernstein kernel needs a BernsteinSpec")
    return cov_bernstein(bernstein, s, t)
