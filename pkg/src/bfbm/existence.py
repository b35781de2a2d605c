"""Existence tests for bfBm at a parameter pair (H, K).

Three families of checks are available:

* closed-form necessary conditions (K <= 2, HK <= 1 on the half line;
  (2H - 1) K <= 1 on the whole line),
* the covariance bound: the stationary covariance may not exceed its value
  at lag zero, which yields K-hat(H),
* the spectral criterion for 0 < K < 1: the Lei-Nualart density must stay
  below twice the fOU density at every frequency, which yields K-bar(H).

All comparisons of densities happen on log scale. Grids are fixed, so results
do not depend on evaluation order.
"""

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import kernels, spectra
from .errors import DomainError, NonMonotoneError, NumericalError, ScanError

LOG2 = math.log(2.0)
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Status(str, enum.Enum):
    EXISTS = "exists"
    NOT_EXISTS = "not-exists"
    UNDECIDED = "undecided"


class Reason(str, enum.Enum):
    PROP_NECESSARY = "necessary-condition"
    COVARIANCE_BOUND = "covariance-bound"
    SPECTRAL = "spectral-criterion"
    FBM_LINE = "fbm-line"
    KNOWN_ZONE = "known-zone"


@dataclass(frozen=True)
class Witness:
    """Where a criterion was evaluated: coordinate name, location, and the two
    compared quantities (lhs must not exceed rhs)."""

    coord: str
    at: float
    lhs: float
    rhs: float

    @property
    def gap(self):
        return self.rhs - self.lhs


@dataclass(frozen=True)
class Verdict:
    status: Status
    reason: Reason
    domain: str = "R+"
    witness: Witness | None = None
    detail: str = ""

    @property
    def exists(self):
        return self.status is Status.EXISTS

    def to_dict(self):
        w = self.witness
        return {
            "status": self.status.value,
            "reason": self.reason.value,
            "domain": self.domain,
            "witness_u": w.at if w is not None and w.coord == "u" else None,
            "witness_tau": w.at if w is not None and w.coord == "tau" else None,
            "gap": w.gap if w is not None else None,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class ScanConfig:
    """Grid settings. Defaults copy the published scan: u in [0, 50] at
    step 0.01 and K resolved to 0.001."""

    u_max: float = 50.0
    u_step: float = 0.01
    tau_max: float = 50.0
    tau_step: float = 1e-3
    tau_min: float = 1e-6
    k_tol: float = 1e-3
    refine: bool = False
    gap_tol: float = 1e-12

    def __post_init__(self):
        if not (self.u_step > 0 and self.tau_step > 0 and self.k_tol > 0):
            raise DomainError("scan steps must be positive")
        if self.u_max < 1:
            raise DomainError("u_max must be at least 1")
        if not 0 < self.tau_min < self.tau_max:
            raise DomainError("need 0 < tau_min < tau_max")


@dataclass(frozen=True)
class BoundaryRow:
    h: float
    k_bar: float
    k_hat: float

    def as_dict(self):
        return asdict(self)


# ---------------------------------------------------------------------------
# closed-form necessary conditions


def check_necessary(p):
    """K <= 2 and HK <= 1 are necessary on the half line."""
    if p.k > 2.0:
        return Verdict(Status.NOT_EXISTS, Reason.PROP_NECESSARY, detail=f"K = {p.k:g} > 2")
    if p.hk > 1.0:
        return Verdict(Status.NOT_EXISTS, Reason.PROP_NECESSARY, detail=f"HK = {p.hk:g} > 1")
    return Verdict(Status.UNDECIDED, Reason.PROP_NECESSARY, detail="K <= 2 and HK <= 1")


def check_cov_bound_r(p):
    """(2H - 1) K <= 1 is necessary on the whole line, since R(1, -1) >= -1."""
    r = kernels.cov_bfbm(p.h, p.k, 1.0, -1.0)
    w = Witness("st", -1.0, -1.0, r)
    if (2.0 * p.h - 1.0) * p.k > 1.0:
        return Verdict(Status.NOT_EXISTS, Reason.COVARIANCE_BOUND, "R", w,
                       f"R(1,-1) = {r:.6g} < -1")
    return Verdict(Status.UNDECIDED, Reason.COVARIANCE_BOUND, "R", w, "R(1,-1) >= -1")


# ---------------------------------------------------------------------------
# covariance bound


def _golden_max(f, a, b, tol):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _tau_grid(cfg):
    n = int(round((cfg.tau_max - cfg.tau_min) / cfg.tau_step))
    return cfg.tau_min + cfg.tau_step * np.arange(n + 1)


def stat_cov_sup(h, k, cfg=ScanConfig()):
    """(tau*, max) of the stationary bfBm covariance over tau > 0.

    Dense grid followed by golden-section refinement to 1e-10 in tau.
    """
    tau = _tau_grid(cfg)
    vals = kernels.stat_cov("bfbm", h, k, tau)
    if not np.all(np.isfinite(vals)):
        raise ScanError(f"non-finite stationary covariance for H={h:g}, K={k:g}")
    i = int(np.argmax(vals))
    lo = tau[max(i - 1, 0)]
    hi = tau[min(i + 1, len(tau) - 1)]
    x, fx = _golden_max(lambda t: kernels.stat_cov("bfbm", h, k, t), lo, hi, 1e-10)
    if fx >= vals[i]:
        return float(x), float(fx)
    return float(tau[i]), float(vals[i])


def cov_bound_holds(h, k, cfg=ScanConfig()):
    return stat_cov_sup(h, k, cfg)[1] <= 1.0 + 1e-12


def _grid_sup(pred, n_max):
    """Largest n in [0, n_max] with pred(n) true, given pred(0) true and a
    single switch from true to false."""
    if pred(n_max):
        return n_max
    lo, hi = 0, n_max
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def khat(h, cfg=ScanConfig()):
    """Covariance bound K-hat(H) on the grid of multiples of ``cfg.k_tol``.

    Returns the largest grid value of K whose stationary covariance never
    exceeds 1; the condition is monotone in K, so bisection applies.
    """
    if not h >= 1.0:
        raise DomainError("khat is defined here for h >= 1")
    step = cfg.k_tol
    n_max = int(math.floor(min(1.0, 1.0 / h) / step + 1e-9))
    n = _grid_sup(lambda n: n == 0 or cov_bound_holds(h, n * step, cfg), n_max)
    return round(n * step, 12)


# ---------------------------------------------------------------------------
# spectral criterion


def spectral_gap(p, u):
    """log(2 f_fOU(HK, u)) - log(f_LN(H, K, u)); existence needs this >= 0."""
    h, k = p.h, p.k
    if not 0.0 < k < 1.0:
        raise DomainError("the spectral criterion needs 0 < K < 1")
    if not 0.0 < h * k < 1.0:
        raise DomainError("the spectral criterion needs 0 < HK < 1")
    return LOG2 + spectra.log_f_ou(h * k, u) - spectra.log_f_ln_rescaled(h, k, u)


def _u_grid(cfg):
    n = int(round(cfg.u_max / cfg.u_step))
    return cfg.u_step * np.arange(n + 1)


def _spectral_witness(h, k, u):
    lhs = float(spectra.log_f_ln_rescaled(h, k, u))
    rhs = LOG2 + float(spectra.log_f_ou(h * k, u))
    return Witness("u", float(u), lhs, rhs)


def check_spectral(p, cfg=ScanConfig()):
    """Scan the spectral inequality over u in [0, u_max]."""
    h, k = p.h, p.k
    u = _u_grid(cfg)
    gaps = spectral_gap(p, u)
    if not np.all(np.isfinite(gaps)):
        raise ScanError(f"non-finite spectral gap for H={h:g}, K={k:g}")
    i = int(np.argmin(gaps))
    u_min, g_min = float(u[i]), float(gaps[i])
    if cfg.refine:
        fine = np.linspace(max(u_min - cfg.u_step, 0.0), u_min + cfg.u_step, 21)
        fg = spectral_gap(p, fine)
        j = int(np.argmin(fg))
        if fg[j] < g_min:
            u_min, g_min = float(fine[j]), float(fg[j])
    w = _spectral_witness(h, k, u_min)
    scan = f"u in [0, {cfg.u_max:g}]"
    if g_min < -cfg.gap_tol:
        return Verdict(Status.NOT_EXISTS, Reason.SPECTRAL, "R+", w,
                       f"spectral inequality fails at u = {u_min:.6g}, {scan}")
    return Verdict(Status.EXISTS, Reason.SPECTRAL, "R+", w, f"spectral criterion, {scan}")


def kbar(h, cfg=ScanConfig(), k_hat=None):
    """Spectral existence boundary K-bar(H) for H > 1.

    Bisection over multiples of ``cfg.k_tol`` for the largest K at which the
    spectral inequality still holds on the scan grid. A single crossing is
    assumed and then checked at K-bar +/- 2 k_tol.
    """
    if not h > 1.0:
        raise DomainError("kbar needs h > 1")
    step = cfg.k_tol
    if k_hat is None:
        k_hat = khat(h, cfg)

    def holds(kk):
        if kk <= 0.0:
            return True
        if h * kk >= 1.0:
            return False
        return check_spectral(kernels.Params(h, kk), cfg).exists

    n_cap = int(math.ceil(1.0 / (h * step))) - 1
    n_max = min(n_cap, int(round(k_hat / step)) + 2)
    if holds(n_max * step):
        raise NonMonotoneError(
            f"spectral criterion holds at K={n_max * step:g}, above the covariance bound {k_hat:g}"
        )
    n = _grid_sup(lambda n: holds(n * step), n_max)
    k_bar = round(n * step, 12)

    below = k_bar - 2 * step
    above = k_bar + 2 * step
    if (below > 0 and not holds(below)) or holds(above):
        raise NonMonotoneError(f"spectral predicate is not single-crossing near K={k_bar:g}")
    return k_bar


def _row(args):
    h, cfg = args
    k_hat = khat(h, cfg)
    return BoundaryRow(h, kbar(h, cfg, k_hat=k_hat), k_hat)


def boundary_table(h_values, cfg=ScanConfig(), workers=1):
    """Rows (h, K-bar, K-hat) in input order."""
    h_values = [float(h) for h in h_values]
    for h in h_values:
        if not h > 1.0:
            raise DomainError("boundary_table needs every h > 1")
    jobs = [(h, cfg) for h in h_values]
    if workers <= 1 or len(jobs) <= 1:
        return [_row(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_row, jobs))


# ---------------------------------------------------------------------------
# finite-dimensional probe


def gram_matrix(kind, p, points, bernstein=None):
    pts = np.asarray(points, dtype=float)
    return np.asarray(kernels.covariance(kind, p, pts[:, None], pts[None, :], bernstein))


def gram_psd_probe(kind, p, points, jitter_tol=1e-10, bernstein=None):
    """Smallest eigenvalue of the Gram matrix R(points_i, points_j).

    ``psd`` is true when that eigenvalue is at least -jitter_tol times the
    largest diagonal entry.
    """
    pts = np.asarray(points, dtype=float).ravel()
    if pts.size == 0 or pts.size > 2000:
        raise DomainError("need between 1 and 2000 points")
    if np.unique(pts).size != pts.size:
        raise DomainError("points must be distinct")
    g = gram_matrix(kind, p, pts, bernstein)
    try:
        eig = np.linalg.eigvalsh(g)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    min_eig = float(eig[0])
    scale = float(np.max(np.diag(g)))
    return min_eig, bool(min_eig >= -jitter_tol * scale)


# ---------------------------------------------------------------------------


def check(p, cfg=ScanConfig()):
    """Overall verdict for existence on the half line.

    Necessary conditions first, then the fBm line and the known zone, then
    the spectral criterion, which decides every remaining pair with K < 1.
    """
    nec = check_necessary(p)
    if nec.status is Status.NOT_EXISTS:
        return nec
    if p.k == 1.0:
        return Verdict(Status.EXISTS, Reason.FBM_LINE, detail="K = 1 gives fBm")
    if p.h <= 1.0:
        return Verdict(Status.EXISTS, Reason.KNOWN_ZONE,
                       detail="0 < H <= 1, 0 < K <= min(2, 1/H)")
    if p.k < 1.0 and p.hk < 1.0:
        return check_spectral(p, cfg)
    # only HK = 1 with H > 1 is left; the covariance bound settles it
    tau_star, sup = stat_cov_sup(p.h, p.k, cfg)
    if sup > 1.0 + 1e-12:
        return Verdict(Status.NOT_EXISTS, Reason.COVARIANCE_BOUND, "R+",
                       Witness("tau", tau_star, sup, 1.0),
                       f"stationary covariance reaches {sup:.6g} > 1 at tau = {tau_star:.6g}")
    return Verdict(Status.UNDECIDED, Reason.COVARIANCE_BOUND, detail="no criterion applies")


def with_overrides(cfg, **kw):
    """Copy of ``cfg`` with the non-None keyword values applied."""
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
