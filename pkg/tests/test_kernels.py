import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from bfbm import kernels
from bfbm.errors import DomainError
from bfbm.kernels import (
    BernsteinSpec,
    KernelId,
    Params,
    cov_antisym_fbm,
    cov_bernstein,
    cov_bfbm,
    cov_fbm,
    cov_lei_nualart,
    cov_lei_nualart_rescaled,
    stat_cov,
)

# stationary bfBm covariance from mpmath at 400 digits (direct cosh/sinh form)
STAT_BFBM_REF = [
    (2.0, 0.3, 1.0, 0.6345537283336600948),
    (2.0, 0.3, 40.0, 1.0968835840810294318e-7),
    (0.7, 0.8, 5.0, 0.078137124355140986713),
    (1.5, 0.5, 200.0, 2.0457481450617132255e-22),
    (3.0, 0.2, 300.0, 8.0100904196822339845e-53),
    (2.0, 0.3, 500.0, 1.3488879241811684523e-87),
    (0.5, 1.0, 3.0, 0.22313016014842982893),
]
STAT_LN_REF = [(0.5, 1.0, 0.56107657668186334925), (0.3, 60.0, 0.00012340980408667959058)]

pos = st.floats(0.05, 3.0)
times = st.floats(-5.0, 5.0)


def test_params_validation_and_zone():
    with pytest.raises(DomainError):
        Params(0.0, 1.0)
    with pytest.raises(DomainError):
        Params(0.5, float("nan"))
    assert Params(0.7).zone == "fbm-line"
    assert Params(2.0, 0.4).zone == "candidate"
    assert Params(0.5, 2.1).zone == "forbidden"
    assert Params(1.2, 0.9).zone == "forbidden"
    assert Params(2.0, 0.3).hk == pytest.approx(0.6)


def test_fbm_examples():
    assert cov_fbm(0.5, 1, 1) == 1.0
    assert cov_fbm(0.5, 1, 2) == 1.0
    assert cov_fbm(0.75, 1, -1) == pytest.approx(0.5 * (2 - 2**1.5), rel=1e-15)
    with pytest.raises(DomainError):
        cov_fbm(1.2, 1, 1)


@pytest.mark.parametrize("h,k", [(0.3, 0.4), (2.0, 0.3), (1.0, 1.9), (5.0, 0.1)])
def test_bfbm_examples(h, k):
    assert cov_bfbm(h, k, 1, 1) == pytest.approx(1.0, rel=1e-15)
    assert cov_bfbm(h, k, 1, -1) == pytest.approx(1 - 2 ** ((2 * h - 1) * k), rel=1e-13)


def test_bfbm_reduces_to_fbm():
    assert cov_bfbm(0.6, 1.0, 0.3, 0.7) == pytest.approx(cov_fbm(0.6, 0.3, 0.7), rel=1e-14)


def test_bfbm_equal_times_small_exponent():
    # |t - s|^(2HK) is 0 at s = t even when 2HK < 1
    assert cov_bfbm(0.1, 0.5, 2.0, 2.0) == pytest.approx(2.0 ** 0.1, rel=1e-15)


def test_antisym_examples():
    assert cov_antisym_fbm(0.5, 1, 1) == 2.0
    assert cov_antisym_fbm(0.3, 1.7, 0) == 0.0
    assert cov_antisym_fbm(0.25, 1, 2) == pytest.approx(3**0.5 - 1, rel=1e-15)
    with pytest.raises(DomainError):
        cov_antisym_fbm(0.5, -1, 1)


def test_lei_nualart_examples():
    assert cov_lei_nualart(0.3, 0, 2.5) == 0.0
    assert cov_lei_nualart(0.5, 1, 1) == pytest.approx(2 - 2**0.5, rel=1e-15)
    assert cov_lei_nualart(0.5, 4, 0) == 0.0
    assert cov_lei_nualart_rescaled(0.7, 0.4, 0, 3.0) == 0.0
    assert cov_lei_nualart_rescaled(1.0, 0.5, 1, 1) == pytest.approx(2 - 2**0.5, rel=1e-15)
    for bad in (1.0, 1.5, 0.0):
        with pytest.raises(DomainError):
            cov_lei_nualart(bad, 1, 1)


def test_bernstein_examples():
    h = 0.65
    lin = BernsteinSpec(0.0, 1.0, (), kernels.fbm_variance(h))
    s, t = 0.4, 1.7
    assert cov_bernstein(lin, s, t) == pytest.approx(2 * cov_fbm(h, s, t), rel=1e-14)
    assert cov_bernstein(lin, 0.0, 0.0) == 0.0
    atom = BernsteinSpec(0.0, 0.0, ((1.0, 1.0),), lambda x: np.abs(x))
    assert cov_bernstein(atom, 1.0, 1.0) == pytest.approx(1 - math.exp(-2), rel=1e-15)
    with pytest.raises(DomainError):
        BernsteinSpec(-1.0, 0.0)


def test_bernstein_power_quadrature():
    rng = np.random.default_rng(3)
    for h, k in [(0.7, 0.5), (2.0, 0.3), (0.3, 0.9)]:
        spec = kernels.power_bernstein(k, kernels.fbm_variance(h))
        s, t = rng.uniform(-3, 3, 20), rng.uniform(-3, 3, 20)
        got = cov_bernstein(spec, s, t)
        ref = 2**k * cov_bfbm(h, k, s, t)
        np.testing.assert_allclose(got, ref, rtol=1e-4)


@pytest.mark.parametrize("h,k,tau,ref", STAT_BFBM_REF)
def test_stat_bfbm_frozen(h, k, tau, ref):
    assert stat_cov("bfbm", h, k, tau) == pytest.approx(ref, rel=1e-12)
    assert stat_cov("bfbm", h, k, -tau) == stat_cov("bfbm", h, k, tau)


@pytest.mark.parametrize("k,tau,ref", STAT_LN_REF)
def test_stat_ln_frozen(k, tau, ref):
    assert stat_cov("ln", 0.0, k, tau) == pytest.approx(ref, rel=1e-12)


def test_stat_examples():
    tau = np.linspace(-20, 20, 81)
    np.testing.assert_allclose(stat_cov("fbm", 0.5, 1.0, tau), np.exp(-np.abs(tau) / 2), rtol=1e-14)
    for h, k in [(0.3, 0.4), (2, 0.3), (1, 1.5)]:
        assert stat_cov("bfbm", h, k, 0.0) == pytest.approx(1.0, rel=1e-15)
    np.testing.assert_array_equal(stat_cov("lnr", 1.7, 0.3, tau), stat_cov("ln", 0, 0.3, 3.4 * tau))
    assert stat_cov("ln", 0, 0.4, 0.0) == pytest.approx(2 - 2**0.4, rel=1e-15)
    with pytest.raises(DomainError):
        stat_cov("antisym", 0.5, 1.0, 1.0)


def test_stat_large_lag_finite():
    tau = np.linspace(0, 500, 5001)
    for h, k in [(2, 0.44), (0.2, 1.9), (10, 0.07), (0.9, 1.1)]:
        v = stat_cov("bfbm", h, k, tau)
        assert np.all(np.isfinite(v))


@pytest.mark.parametrize("h", [1.5, 2.0, 4.0])
def test_limit_at_hk_one(h):
    # at K = 1/H the stationary covariance tends to 2^(1-K)
    k = 1 / h
    assert stat_cov("bfbm", h, k, 200.0) == pytest.approx(2 ** (1 - k), abs=1e-6)


@settings(max_examples=300, deadline=None)
@given(pos, pos, times, times)
def test_symmetry(h, k, s, t):
    assert cov_bfbm(h, k, s, t) == cov_bfbm(h, k, t, s)
    assert stat_cov("bfbm", h, k, s) == stat_cov("bfbm", h, k, -s)
    if h <= 1:
        assert cov_fbm(h, s, t) == cov_fbm(h, t, s)
    if k < 1:
        assert cov_lei_nualart_rescaled(h, k, s, t) == cov_lei_nualart_rescaled(h, k, t, s)


@settings(max_examples=200, deadline=None)
@given(pos, pos, times, times, st.sampled_from([0.1, 2.0, 10.0]))
def test_self_similarity(h, k, s, t, c):
    base = cov_bfbm(h, k, s, t)
    scaled = cov_bfbm(h, k, c * s, c * t)
    # the two terms of the kernel can cancel; allow roundoff relative to their size
    size = c ** (2 * h * k) * (abs(s) ** (2 * h) + abs(t) ** (2 * h)) ** k
    assert scaled == pytest.approx(c ** (2 * h * k) * base, rel=1e-10, abs=1e-13 * size)


@settings(max_examples=200, deadline=None)
@given(pos, st.floats(0.05, 0.95), st.floats(-4, 4), st.floats(-4, 4))
def test_lamperti_consistency(h, k, t1, t2):
    # lags below the resolution of exp() would probe rounding, not the kernel
    assume(t1 == t2 or abs(t1 - t2) > 1e-6)
    s, t = math.exp(t1), math.exp(t2)
    hk = h * k
    lhs = math.exp(-hk * (t1 + t2)) * cov_bfbm(h, k, s, t)
    assert lhs == pytest.approx(stat_cov("bfbm", h, k, t2 - t1), rel=1e-10, abs=1e-14)
    lhs = math.exp(-hk * (t1 + t2)) * cov_lei_nualart_rescaled(h, k, s, t)
    assert lhs == pytest.approx(stat_cov("lnr", h, k, t2 - t1), rel=1e-9, abs=1e-13)
    hf = min(h, 1.0)
    lhs = math.exp(-hf * (t1 + t2)) * cov_fbm(hf, s, t)
    assert lhs == pytest.approx(stat_cov("fbm", hf, 1.0, t2 - t1), rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("h,k", [(0.5, 0.5), (1.2, 0.4), (2.0, 0.3), (0.9, 0.99), (8.0, 0.1)])
def test_decomposition_identity(h, k):
    g = np.linspace(-5, 5, 41)
    s, t = np.meshgrid(g, g)
    resid = 2 * cov_fbm(h * k, s, t) - cov_lei_nualart_rescaled(h, k, s, t) - 2**k * cov_bfbm(h, k, s, t)
    assert np.max(np.abs(resid)) <= 1e-11
    tau = np.linspace(-30, 30, 601)
    resid = (2 * stat_cov("fbm", h * k, 1, tau) - stat_cov("lnr", h, k, tau)
             - 2**k * stat_cov("bfbm", h, k, tau))
    assert np.max(np.abs(resid)) <= 1e-12


def test_covariance_dispatch():
    p = Params(0.6, 0.7)
    assert kernels.covariance("bfbm", p, 1, 2) == cov_bfbm(0.6, 0.7, 1, 2)
    assert kernels.covariance(KernelId.LNR, p, 1, 2) == cov_lei_nualart_rescaled(0.6, 0.7, 1, 2)
    assert kernels.covariance("fbm", p, 1, 2) == cov_fbm(0.6, 1, 2)
    with pytest.raises(DomainError):
        kernels.covariance("bernstein", p, 1, 2)
    assert kernels.lamperti_exponent("ln", 0.6, 0.7) == pytest.approx(0.35)


def test_scalar_and_array_outputs():
    assert isinstance(cov_bfbm(0.5, 0.5, 1.0, 2.0), float)
    out = cov_bfbm(0.5, 0.5, np.ones(3), np.arange(3.0))
    assert out.shape == (3,)
    with pytest.raises(DomainError):
        cov_bfbm(0.5, 0.5, np.inf, 1.0)
