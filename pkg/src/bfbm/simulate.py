"""Gaussian sample paths of bfBm and related processes.

Three samplers:

* ``sample_cholesky``: exact Gaussian sampling from a covariance kernel,
* ``sample_decomposition``: bfBm with 1 < K < 2 as the sum of an independent
  smooth process X0 and fBm W^{HK},
* ``sample_h1_series``: bfBm with H = 1, 0 < K < 1 from its series of
  stochastic integrals.

Every path has its own generator, seeded from ``(seed, stream)`` through
``numpy.random.SeedSequence``. Path i of a batch uses stream i, so a batch run
serially or in parallel gives the same numbers.
"""

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack
from scipy.special import gamma as gamma_fn
from scipy.special import gammaln

from . import kernels
from .errors import DomainError, NotPSDError, TruncationError
from .existence import Status, check_necessary
from .kernels import KernelId, Params

MAX_POINTS = 4096
JITTER_LADDER = (0.0, 1e-14, 1e-12, 1e-10, 1e-8)


class Method(str, enum.Enum):
    CHOLESKY = "cholesky"
    DECOMPOSITION = "decomposition"
    H1_SERIES = "h1-series"


@dataclass(frozen=True)
class RngSpec:
    """Seed plus stream index for a PCG64 generator."""

    seed: int
    stream: int = 0
    algorithm: str = "PCG64"

    def __post_init__(self):
        if not (0 <= self.seed < 2**64 and 0 <= self.stream < 2**64):
            raise DomainError("seed and stream must be unsigned 64-bit integers")
        if self.algorithm != "PCG64":
            raise DomainError(f"unsupported generator {self.algorithm!r}")

    def generator(self):
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, self.stream])))

    def spawn(self, stream):
        return RngSpec(self.seed, stream, self.algorithm)


@dataclass(frozen=True)
class PathSample:
    times: np.ndarray
    values: np.ndarray
    method: Method
    seed: int
    params: Params
    stream: int = 0
    parts: dict = field(default_factory=dict, compare=False, repr=False)


def _check_times(times, nonneg=True, upper=None):
    t = np.asarray(times, dtype=float).ravel()
    if t.size == 0:
        raise DomainError("need at least one time point")
    if t.size > MAX_POINTS:
        raise DomainError(f"at most {MAX_POINTS} time points")
    if not np.all(np.isfinite(t)):
        raise DomainError("times must be finite")
    if np.any(np.diff(t) <= 0):
        raise DomainError("times must be strictly increasing")
    if nonneg and t[0] < 0:
        raise DomainError("this kernel lives on t >= 0")
    if upper is not None and t[-1] > upper:
        raise DomainError(f"times must not exceed {upper:g}")
    return t


# ---------------------------------------------------------------------------
# Cholesky


def cholesky_factor(g, max_jitter=1e-8):
    """Lower Cholesky factor of ``g``, escalating diagonal jitter on failure.

    Returns (L, jitter_used). Raises NotPSDError with the 1-based index of the
    failing leading minor once the ladder is exhausted.
    """
    g = np.asarray(g, dtype=float)
    scale = float(np.max(np.diag(g))) if g.size else 1.0
    if not scale > 0:
        raise NotPSDError("Gram matrix has no positive diagonal entry", 1)
    info = 0
    for rel in JITTER_LADDER:
        if rel > max_jitter:
            break
        a = g + rel * scale * np.eye(g.shape[0])
        c, info = lapack.dpotrf(a, lower=1, clean=1)
        if info == 0:
            return c, rel
    raise NotPSDError(
        f"Gram matrix is not positive definite: leading minor {info} fails "
        f"after jitter {max_jitter:g} * max diagonal",
        int(info),
    )


class _CholeskyPlan:
    def __init__(self, kind, p, times, jitter, bernstein=None):
        kind = KernelId(kind)
        self.kind, self.p = kind, p
        if kind is KernelId.BFBM and check_necessary(p).status is Status.NOT_EXISTS:
            raise DomainError(f"(H, K) = ({p.h:g}, {p.k:g}) fails a necessary existence condition")
        nonneg = kind not in (KernelId.BFBM, KernelId.FBM)
        self.times = _check_times(times, nonneg=nonneg)
        self.live = self.times != 0.0
        tl = self.times[self.live]
        g = np.atleast_2d(kernels.covariance(kind, p, tl[:, None], tl[None, :], bernstein))
        self.gram = g
        self.factor, self.jitter = cholesky_factor(g, jitter) if tl.size else (np.zeros((0, 0)), 0.0)

    def draw(self, gen):
        out = np.zeros(self.times.size)
        z = gen.standard_normal(self.factor.shape[0])
        out[self.live] = self.factor @ z
        return out


def sample_cholesky(kind, p, times, rng, jitter=1e-8, bernstein=None):
    """One path with covariance ``kind`` at ``times`` by Cholesky factorization.

    A time equal to 0 gets the value 0.
    """
    plan = _CholeskyPlan(kind, p, times, jitter, bernstein)
    vals = plan.draw(rng.generator())
    return PathSample(plan.times, vals, Method.CHOLESKY, rng.seed, p, rng.stream)


# ---------------------------------------------------------------------------
# additive decomposition for 1 < K < 2


@dataclass(frozen=True)
class DecompositionGrid:
    """Log-r grid for the X0 integral, relative to 1 / max(t^2H)."""

    r_lo: float = 1e-10
    r_hi: float = 1e10
    n_cells: int = 2000


def _x0_weights(k, clock, grid):
    # columns: discretized (1 - e^{-r c}) r^{-(1+K)/2} dW(r) per cell, rows per clock value
    top = float(np.max(clock))
    edges = np.geomspace(grid.r_lo / top, grid.r_hi / top, grid.n_cells + 1)
    a, b = edges[:-1], edges[1:]
    # cell variance int_a^b r^{-1-K} dr and mass-weighted mean point
    mass = (a ** (-k) - b ** (-k)) / k
    mean = (a ** (1 - k) - b ** (1 - k)) / (k - 1) / mass
    tail_mass = edges[-1] ** (-k) / k
    r = np.append(mean, np.inf)
    m = np.append(mass, tail_mass)
    with np.errstate(invalid="ignore"):
        kern = -np.expm1(-np.multiply.outer(clock, r))
    kern[:, -1] = np.where(clock > 0, 1.0, 0.0)
    # below r_lo the kernel is r c, so the cell contributes c_i c_j r_lo^{2-K} / (2-K);
    # for K near 2 this is far from negligible
    head = clock * math.sqrt(edges[0] ** (2.0 - k) / (2.0 - k))
    return np.column_stack([head, kern * np.sqrt(m)])


def x0_covariance(k, s, t):
    """Covariance of X0^(K) for 1 < K < 2: Gamma(-K) ((s+t)^K - s^K - t^K)."""
    if not 1.0 < k < 2.0:
        raise DomainError("X0 needs 1 < K < 2")
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    return gamma_fn(2.0 - k) / (k * (k - 1.0)) * ((s + t) ** k - s**k - t**k)


def decomposition_coefficients(h, k):
    """Weights of X0^(H,K) and W^(HK) in bfBm = c1 X0 + c2 W."""
    c1 = math.sqrt(k * (k - 1.0) / (2.0**k * gamma_fn(2.0 - k)))
    c2 = math.sqrt(2.0 ** (1.0 - k))
    return c1, c2


class _DecompositionPlan:
    def __init__(self, p, times, grid, jitter):
        h, k = p.h, p.k
        if not 1.0 < k < 2.0:
            raise DomainError("the decomposition sampler needs 1 < K < 2")
        if not 0.0 < h * k <= 1.0:
            raise DomainError(f"the decomposition sampler needs HK <= 1, got {h * k:g}")
        self.p = p
        self.times = _check_times(times)
        self.c1, self.c2 = decomposition_coefficients(h, k)
        clock = self.times ** (2.0 * h)
        self.w_x0 = _x0_weights(k, clock, grid) if clock.max() > 0 else np.zeros((clock.size, 1))
        self.fbm = _CholeskyPlan(KernelId.FBM, Params(h * k), self.times, jitter)

    def draw(self, gen):
        z = gen.standard_normal(self.w_x0.shape[1])
        x0 = self.w_x0 @ z
        w = self.fbm.draw(gen)
        return self.c1 * x0 + self.c2 * w, {"x0": x0, "w": w}


def sample_decomposition(p, times, rng, grid=DecompositionGrid(), jitter=1e-8, components=False):
    """bfBm with 1 < K < 2, HK <= 1 as c1 X0^(H,K) + c2 W^(HK).

    X0^(K)(t) = int_0^inf (1 - e^{-rt}) r^{-(1+K)/2} W(dr) is discretized on a
    log-r grid with one independent normal per cell. X0^(H,K)(t) is X0^(K)
    at t^2H. With ``components`` the unscaled X0 and W values are kept in
    ``parts``.
    """
    plan = _DecompositionPlan(p, times, grid, jitter)
    vals, parts = plan.draw(rng.generator())
    return PathSample(plan.times, vals, Method.DECOMPOSITION, rng.seed, p, rng.stream,
                      parts if components else {})


# ---------------------------------------------------------------------------
# series representation at H = 1


@dataclass(frozen=True)
class SeriesGrid:
    """Trapezoid nodes in log x for the series integrals.

    The range runs from ``lo / max(t)^2`` to ``(n_terms + hi_margin) / min(t)^2``;
    the mass below the range becomes one extra normal per term.
    """

    nodes_per_decade: int = 24
    lo: float = 1e-16
    hi_margin: float = 60.0


def h1_term_variance_fraction(k, n_terms):
    """Share of Var B(s) carried by terms n > n_terms; it does not depend on s.

    The n-th term has variance K/Gamma(1-K) * Gamma(n-K)/n! * s^{2K}, so the
    omitted share is 1 - K/Gamma(1-K) * sum_{n <= N} Gamma(n-K)/n!.
    """
    if n_terms <= 0:
        return 1.0
    n = np.arange(1, n_terms + 1)
    logs = gammaln(n - k) - gammaln(n + 1.0) + math.log(k) - gammaln(1.0 - k)
    return max(1.0 - math.fsum(np.exp(logs)), 0.0)


def h1_truncated_cov(k, n_terms, s, t):
    """Covariance of the series truncated after ``n_terms`` terms."""
    s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    out = np.zeros(s.shape)
    q = s * s + t * t
    pos = (s > 0) & (t > 0)
    base = math.log(k) - k * math.log(2.0) - gammaln(1.0 - k)
    for n in range(1, n_terms + 1):
        lg = (base + n * np.log(2.0 * s[pos] * t[pos]) + gammaln(n - k) - gammaln(n + 1.0)
              - (n - k) * np.log(q[pos]))
        out[pos] += np.exp(lg)
    return out


def _h1_weights(k, times, n_terms, grid):
    # one block of columns per term, rows per time
    t_lo, t_hi = float(times.min()), float(times.max())
    y_lo = math.log(grid.lo / t_hi**2)
    y_hi = math.log((n_terms + grid.hi_margin) / t_lo**2)
    n_nodes = int(math.ceil(grid.nodes_per_decade * (y_hi - y_lo) / math.log(10.0))) + 1
    y = np.linspace(y_lo, y_hi, n_nodes)
    step = y[1] - y[0]
    lw_node = np.full(n_nodes, math.log(step))
    lw_node[-1] -= math.log(2.0)
    x = np.exp(y)
    x_tail = 0.5 * x[0]
    base = 0.5 * (math.log(k) - k * math.log(2.0) - gammaln(1.0 - k))
    log_t = np.log(times)
    sq = times**2
    blocks = []
    for n in range(1, n_terms + 1):
        e = n - k
        # trapezoid in y = log x for int x^{n-1-K} (.) dx, continued to y = -inf where
        # the integrand is e^{e y}; the nodes left of y_lo sum to step e^{e y_lo} / expm1(e step)
        log_mass = np.append(lw_node + e * y, math.log(step) + e * y_lo - math.log(math.expm1(e * step)))
        pts = np.append(x, x_tail)
        coef = base + 0.5 * (n * math.log(2.0) - gammaln(n + 1.0))
        lw = coef + n * log_t[:, None] + 0.5 * log_mass[None, :] - np.outer(sq, pts)
        blocks.append(np.exp(lw))
    return np.hstack(blocks)


class _SeriesPlan:
    def __init__(self, k, times, n_terms, tail, grid):
        if not 0.0 < k < 1.0:
            raise DomainError("the H = 1 series needs 0 < K < 1")
        if n_terms < 0:
            raise DomainError("n_terms must be nonnegative")
        if tail not in ("exact", "error", "ignore"):
            raise DomainError(f"unknown tail mode {tail!r}")
        self.k, self.n_terms = k, int(n_terms)
        self.times = _check_times(times)
        if self.times[0] <= 0:
            raise DomainError("the H = 1 series sampler needs times > 0")
        self.omitted = h1_term_variance_fraction(k, self.n_terms)
        if tail == "error" and self.n_terms > 0 and self.omitted > 1e-4:
            raise TruncationError(
                f"{self.n_terms} terms leave {self.omitted:.3g} of the variance unsampled"
            )
        self.weights = (_h1_weights(k, self.times, self.n_terms, grid) if self.n_terms
                        else np.zeros((self.times.size, 0)))
        self.tail_factor = None
        # an empty series is the zero path; the remainder is only added to real terms
        if tail == "exact" and self.n_terms > 0 and self.omitted > 0:
            t = self.times
            full = kernels.cov_bfbm(1.0, k, t[:, None], t[None, :])
            rest = full - h1_truncated_cov(k, self.n_terms, t[:, None], t[None, :])
            rest = 0.5 * (rest + rest.T)
            lam, vec = np.linalg.eigh(rest)
            self.tail_factor = vec * np.sqrt(np.clip(lam, 0.0, None))

    def draw(self, gen):
        vals = self.weights @ gen.standard_normal(self.weights.shape[1])
        if self.tail_factor is not None:
            vals = vals + self.tail_factor @ gen.standard_normal(self.tail_factor.shape[1])
        return vals


def sample_h1_series(k, times, rng, n_terms=40, tail="exact", grid=SeriesGrid()):
    """bfBm with H = 1 and 0 < K < 1 from its series representation.

    The first ``n_terms`` stochastic integrals are discretized on a log-x grid.
    The terms decay only like n^{-1-K} in variance, so the remainder is not
    negligible for any practical ``n_terms``. ``tail`` controls it:

    * "exact": add an independent Gaussian with the closed-form covariance of
      the omitted terms,
    * "error": raise TruncationError when the omitted share exceeds 1e-4,
    * "ignore": return the truncated sum.

    ``n_terms=0`` is the empty sum and gives the zero path in every mode.
    """
    plan = _SeriesPlan(k, times, n_terms, tail, grid)
    vals = plan.draw(rng.generator())
    return PathSample(plan.times, vals, Method.H1_SERIES, rng.seed, Params(1.0, k), rng.stream)


# ---------------------------------------------------------------------------
# batches


def _batch(plan, method, p, rng, n_paths, workers, with_parts=False):
    def one(i):
        r = rng.spawn(rng.stream + i)
        out = plan.draw(r.generator())
        vals, parts = out if with_parts else (out, {})
        return PathSample(plan.times, vals, method, r.seed, p, r.stream, parts)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(n_paths)))
    return [one(i) for i in range(n_paths)]


def sample_cholesky_many(kind, p, times, rng, n_paths, jitter=1e-8, bernstein=None, workers=1):
    """``n_paths`` Cholesky paths; path i uses stream ``rng.stream + i``."""
    plan = _CholeskyPlan(kind, p, times, jitter, bernstein)
    return _batch(plan, Method.CHOLESKY, p, rng, n_paths, workers)


def sample_decomposition_many(p, times, rng, n_paths, grid=DecompositionGrid(), jitter=1e-8,
                              components=False, workers=1):
    plan = _DecompositionPlan(p, times, grid, jitter)
    paths = _batch(plan, Method.DECOMPOSITION, p, rng, n_paths, workers, with_parts=True)
    if not components:
        paths = [PathSample(x.times, x.values, x.method, x.seed, x.params, x.stream) for x in paths]
    return paths


def sample_h1_series_many(k, times, rng, n_paths, n_terms=40, tail="exact", grid=SeriesGrid(),
                          workers=1):
    plan = _SeriesPlan(k, times, n_terms, tail, grid)
    return _batch(plan, Method.H1_SERIES, Params(1.0, k), rng, n_paths, workers)


# ---------------------------------------------------------------------------


def values_matrix(paths):
    """Stack path values into an (n_paths, n_times) array after checking grids."""
    if len(paths) < 2:
        raise DomainError("need at least two paths")
    t0, p0 = paths[0].times, paths[0].params
    for x in paths[1:]:
        if x.params != p0 or x.times.shape != t0.shape or not np.array_equal(x.times, t0):
            raise DomainError("paths do not share times and parameters")
    return np.vstack([x.values for x in paths])


def empirical_cov(paths, i, j):
    """Unbiased sample covariance of values[i] and values[j] across paths."""
    v = values_matrix(paths)
    n = v.shape[1]
    if not (-n <= i < n and -n <= j < n):
        raise DomainError("time index out of range")
    a, b = v[:, i], v[:, j]
    return float(np.sum((a - a.mean()) * (b - b.mean())) / (v.shape[0] - 1))


def empirical_cov_matrix(paths):
    return np.cov(values_matrix(paths), rowvar=False)
