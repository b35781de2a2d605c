"""Complex log-gamma and overflow-safe hyperbolic helpers.

Everything here accepts scalars or numpy arrays and returns the same shape.
Scalar inputs give Python scalars back.
"""

import numpy as np

from .errors import DomainError, PoleError

__all__ = ["log_gamma_complex", "log_abs_gamma_sq", "log_cosh", "log_sinh"]

LANCZOS_G = 7.0
LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
LOG2 = np.log(2.0)


def _unwrap_scalar(x, scalar):
    if scalar:
        return x.item()
    return x


def _lanczos(z):
    # valid for Re(z) >= 0.5
    z = z - 1.0
    acc = np.full(z.shape, LANCZOS_COEF[0], dtype=complex)
    for i in range(1, len(LANCZOS_COEF)):
        acc = acc + LANCZOS_COEF[i] / (z + i)
    t = z + LANCZOS_G + 0.5
    return HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def _check_poles(z):
    on_axis = (z.imag == 0.0) & (z.real <= 0.0) & (z.real == np.round(z.real))
    if np.any(on_axis):
        bad = z[on_axis].ravel()[0]
        raise PoleError(f"gamma has a pole at z={bad.real:g}")


def log_gamma_complex(z):
    """Principal logarithm of the gamma function for complex ``z``.

    The imaginary part is reduced modulo 2*pi, so ``exp`` of the result is
    Gamma(z) itself. Arguments with Re(z) < 0.5 are shifted up with
    Gamma(z) = Gamma(z+n) / (z (z+1) ... (z+n-1)) instead of the reflection
    formula.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(np.isfinite(z)):
        raise DomainError("log_gamma_complex needs a finite argument")
    _check_poles(z)

    shifts = np.where(z.real < 0.5, np.ceil(0.5 - z.real), 0.0).astype(int)
    out = _lanczos(z + shifts)
    for j in range(int(shifts.max(initial=0))):
        active = shifts > j
        out[active] -= np.log(z[active] + j)

    im = np.angle(np.exp(1j * out.imag))
    out = out.real + 1j * im
    return _unwrap_scalar(out, scalar)


def log_abs_gamma_sq(z):
    """log |Gamma(z)|^2, safe against overflow for large imaginary parts."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    # |Gamma(conj z)| = |Gamma(z)|; folding keeps the two bit-identical
    z = z.real + 1j * np.abs(z.imag)
    out = 2.0 * np.real(log_gamma_complex(z))
    return _unwrap_scalar(np.asarray(out), scalar)


def log_cosh(x):
    """log cosh(x) = |x| + log((1 + exp(-2|x|)) / 2)."""
    scalar = np.ndim(x) == 0
    a = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    if not np.all(np.isfinite(a)):
        raise DomainError("log_cosh needs a finite argument")
    out = a + np.log1p(np.exp(-2.0 * a)) - LOG2
    return _unwrap_scalar(out, scalar)


def log_sinh(x):
    """log sinh(x) for x > 0."""
    scalar = np.ndim(x) == 0
    a = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
        raise DomainError("log_sinh needs a finite positive argument")
    out = a + np.log(-np.expm1(-2.0 * a)) - LOG2
    return _unwrap_scalar(out, scalar)
