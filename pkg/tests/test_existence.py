import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from bfbm import existence, kernels, spectra
from bfbm.errors import DomainError, NonMonotoneError
from bfbm.existence import (
    Reason,
    ScanConfig,
    Status,
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
from bfbm.kernels import Params


def bfbm_density_by_quadrature(h, k, u):
    """(1/pi) int_0^inf cos(u tau) R(tau) dtau, straight from the covariance."""
    val = quad(lambda t: kernels.stat_cov("bfbm", h, k, t), 0, np.inf, weight="cos", wvar=u, limlst=200)
    return val[0] / math.pi


def known_zone_params(seed, n=50):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        h = rng.uniform(0.01, 1.0)
        k = rng.uniform(0.01, min(2.0, 1.0 / h))
        out.append(Params(h, k))
    return out


def test_necessary_examples():
    assert check_necessary(Params(0.5, 2.1)).status is Status.NOT_EXISTS
    v = check_necessary(Params(1.2, 0.9))
    assert v.status is Status.NOT_EXISTS and "HK" in v.detail
    assert check_necessary(Params(0.5, 2.0)).status is Status.UNDECIDED


def test_cov_bound_on_whole_line():
    v = check_cov_bound_r(Params(1.0, 1.5))
    assert v.status is Status.NOT_EXISTS and v.domain == "R"
    for k in (0.1, 1.0, 2.0, 5.0):
        assert check_cov_bound_r(Params(0.5, k)).status is Status.UNDECIDED
    assert check_cov_bound_r(Params(2.0, 1 / 3)).status is Status.UNDECIDED


@pytest.mark.parametrize("h,ref", [(2.0, 0.440), (1.01, 0.988), (10.0, 0.070)])
def test_khat_examples(h, ref):
    assert abs(khat(h) - ref) <= 1e-3 + 1e-12


def test_khat_boundary_and_domain():
    assert khat(1.0) == 1.0
    with pytest.raises(DomainError):
        khat(0.9)


@pytest.mark.parametrize("h", [1.3, 2.0, 5.0])
def test_khat_is_last_passing_grid_point(h):
    kh = khat(h)
    cfg = ScanConfig()
    assert stat_cov_sup(h, kh)[1] <= 1 + 1e-12
    assert stat_cov_sup(h, kh + cfg.k_tol)[1] > 1


def test_stat_cov_sup_witness():
    tau, val = stat_cov_sup(2.0, 0.48)
    assert val > 1
    assert kernels.stat_cov("bfbm", 2.0, 0.48, tau) == pytest.approx(val, rel=1e-14)
    # golden-section refinement cannot do worse than the grid
    grid = kernels.stat_cov("bfbm", 2.0, 0.48, np.arange(1e-6, 50, 1e-3))
    assert val >= grid.max()


def test_spectral_gap_examples():
    assert spectral_gap(Params(1.0, 0.5), 1.0) >= 0
    u = np.arange(0, 50, 0.01)
    assert np.min(spectral_gap(Params(2.0, 0.43), u)) < 0
    np.testing.assert_array_equal(spectral_gap(Params(2.0, 0.43), u), spectral_gap(Params(2.0, 0.43), -u))
    with pytest.raises(DomainError):
        spectral_gap(Params(2.0, 0.6), 1.0)
    with pytest.raises(DomainError):
        spectral_gap(Params(0.5, 1.2), 1.0)


def test_spectral_gap_matches_direct_transform():
    # the density of bfBm is (2 f_fOU - f_LN) / 2^K; its sign must agree with the
    # cosine transform of the covariance itself
    for h, k, u in [(2.0, 0.3, 0.5), (2.0, 0.43, 1.8), (1.5, 0.59, 1.2), (1.5, 0.603, 1.2)]:
        direct = bfbm_density_by_quadrature(h, k, u)
        gap = spectral_gap(Params(h, k), u)
        assert (gap >= 0) == (direct >= 0)
        closed = (2 * spectra.f_ou(h * k, u) - spectra.f_ln_rescaled(h, k, u)) / 2**k
        assert closed == pytest.approx(direct, abs=1e-10)


@pytest.mark.parametrize("h,k,status", [(0.9, 0.5, Status.EXISTS), (2.0, 0.40, Status.EXISTS),
                                        (2.0, 0.45, Status.NOT_EXISTS)])
def test_check_spectral_examples(h, k, status):
    v = check_spectral(Params(h, k))
    assert v.status is status
    assert v.reason is Reason.SPECTRAL
    assert v.witness is not None and v.witness.coord == "u"
    if status is Status.NOT_EXISTS:
        assert v.witness.gap < 0
        assert v.to_dict()["witness_u"] == v.witness.at


def test_witness_stability():
    p = Params(2.0, 0.45)
    v = check_spectral(p)
    u = v.witness.at
    fine = np.linspace(u - 0.01, u + 0.01, 21)
    assert np.all(spectral_gap(p, fine) < 0)
    refined = check_spectral(p, ScanConfig(refine=True))
    assert refined.status is Status.NOT_EXISTS
    assert refined.witness.gap <= v.witness.gap


@pytest.mark.parametrize("h,ref,tol", [(3.0, 0.260, 0.003), (100.0, 0.006, 0.002)])
def test_kbar_examples(h, ref, tol):
    assert abs(kbar(h) - ref) <= tol + 1e-12


@pytest.mark.parametrize("h,published", [(1.5, 0.603), (1.7, 0.519)])
def test_published_boundary_is_above_true_boundary(h, published):
    # at these H the printed boundary already has a negative spectral density;
    # the covariance transform confirms it without the closed-form densities
    us = np.arange(0.5, 2.5, 0.05)
    assert min(bfbm_density_by_quadrature(h, published, u) for u in us) < 0
    kb = kbar(h)
    assert kb < published
    assert check_spectral(Params(h, kb)).exists


def test_kbar_is_last_passing_grid_point():
    h = 2.5
    kb = kbar(h)
    assert check_spectral(Params(h, kb)).exists
    assert not check_spectral(Params(h, kb + 1e-3)).exists


def test_kbar_detects_non_monotone_predicate(monkeypatch):
    real = existence.check_spectral

    def fake(p, cfg=ScanConfig()):
        # alternates with the K grid, so the crossing is not unique
        if round(p.k * 1000) % 2 == 0 and p.k < 0.4:
            return real(Params(2.0, 0.3), cfg)
        return real(Params(2.0, 0.45), cfg)

    monkeypatch.setattr(existence, "check_spectral", fake)
    with pytest.raises(NonMonotoneError):
        kbar(2.0)


def test_kbar_domain():
    with pytest.raises(DomainError):
        kbar(1.0)


@pytest.mark.parametrize("h", [1.1, 1.5, 2.0, 3.0, 5.0, 10.0])
def test_ordering(h):
    kh = khat(h)
    assert 0 < kbar(h, k_hat=kh) <= kh < 1 / h


def test_boundary_table():
    assert boundary_table([]) == []
    hs = [1.2, 1.6, 2.2, 4.0, 9.0]
    rows = boundary_table(hs)
    assert [r.h for r in rows] == hs
    kb = [r.k_bar for r in rows]
    assert all(a >= b for a, b in zip(kb, kb[1:]))
    assert boundary_table(hs, workers=3) == rows
    with pytest.raises(DomainError):
        boundary_table([1.0])


def test_psd_probe_examples():
    min_eig, psd = gram_psd_probe("bfbm", Params(0.5, 1.0), np.linspace(2 / 64, 2, 64))
    assert psd and min_eig > 0
    tau, val = stat_cov_sup(2.0, 0.48)
    assert val > 1
    min_eig, psd = gram_psd_probe("bfbm", Params(2.0, 0.48), [1.0, math.exp(tau)])
    assert min_eig < 0 and not psd


def test_psd_probe_between_boundaries():
    # K = 0.55 sits below the computed K-bar(1.5), so the probe should find
    # nothing and the spectral criterion agrees
    p = Params(1.5, 0.55)
    min_eig, psd = gram_psd_probe("bfbm", p, np.geomspace(0.01, 100, 128))
    assert psd
    assert check_spectral(p).exists
    # above the boundary a dense enough probe does find a negative direction
    min_eig, psd = gram_psd_probe("bfbm", Params(1.5, 0.603), np.geomspace(0.01, 100, 128))
    assert not psd


def test_psd_probe_validation():
    with pytest.raises(DomainError):
        gram_psd_probe("bfbm", Params(0.5, 1.0), [1.0, 1.0])
    with pytest.raises(DomainError):
        gram_psd_probe("bfbm", Params(0.5, 1.0), np.arange(1, 2002.0))


def test_known_zone_agreement():
    for p in known_zone_params(2024):
        v = check(p)
        assert v.status is not Status.NOT_EXISTS
        assert check_necessary(p).status is not Status.NOT_EXISTS
        assert check_cov_bound_r(p).status is not Status.NOT_EXISTS
        if p.k < 1:
            assert check_spectral(p).exists
        assert gram_psd_probe("bfbm", p, np.geomspace(0.01, 100, 128))[1]


@settings(max_examples=12, deadline=None)
@given(st.floats(1.05, 5.0), st.floats(0.05, 0.98), st.integers(2, 256), st.integers(0, 2**32 - 1))
def test_spectral_exists_implies_psd(h, frac, n, seed):
    k = frac * kbar(h)
    if k <= 0:
        return
    p = Params(h, k)
    assert check_spectral(p).exists
    pts = np.unique(np.random.default_rng(seed).uniform(1e-3, 100, n))
    assert gram_psd_probe("bfbm", p, pts, jitter_tol=1e-10)[1]


def test_check_routing():
    assert check(Params(0.7, 1.0)).reason is Reason.FBM_LINE
    assert check(Params(0.5, 1.8)).reason is Reason.KNOWN_ZONE
    assert check(Params(3.0, 0.5)).reason is Reason.PROP_NECESSARY
    v = check(Params(2.0, 0.45))
    assert v.status is Status.NOT_EXISTS and v.witness.coord == "u"
    v = check(Params(2.0, 0.5))
    assert v.status is Status.NOT_EXISTS and v.reason is Reason.COVARIANCE_BOUND
    assert v.witness.coord == "tau"


def test_scan_config_validation():
    with pytest.raises(DomainError):
        ScanConfig(u_step=0)
    with pytest.raises(DomainError):
        ScanConfig(u_max=0.5)
    assert existence.with_overrides(ScanConfig(), u_max=None, k_tol=0.01).k_tol == 0.01
