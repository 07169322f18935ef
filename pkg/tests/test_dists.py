import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from cbound.dists import (
    BinomSum,
    CenteredPoisson,
    Empirical,
    Gaussian,
    Lattice,
    MGFDiverges,
    ParseError,
    TwoPoint,
    UnsupportedOrder,
    Weibull,
    convolve_iid,
    parse_dist,
    _phi,
    _std_plus_moment_int,
)

SQRT_2PI = math.sqrt(2 * math.pi)


# ---------------------------------------------------------------------------
# survival
# ---------------------------------------------------------------------------


def test_survival_gaussian_symmetry():
    assert Gaussian(0, 1).survival(0.0) == pytest.approx(0.5, abs=1e-15)


def test_survival_twopoint_reads_top_atom():
    assert TwoPoint(-0.25, 1.0, 0.2).survival(0.0) == pytest.approx(0.2, abs=1e-15)


def test_survival_centered_poisson():
    # P(Poisson(1) >= 3) = 1 - e^{-1} (1 + 1 + 1/2)
    expected = 1.0 - 2.5 / math.e
    assert CenteredPoisson(1.0, 1.0).survival(1.5) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize(
    "d",
    [
        TwoPoint(-0.25, 1.0, 0.2),
        CenteredPoisson(2.0),
        Gaussian(0.3, 1.7),
        Weibull(2.0, 1.5),
        Lattice([-1.0, 0.0, 2.5], [0.25, 0.5, 0.25]),
    ],
)
def test_survival_monotone_and_bounded(d):
    ts = np.linspace(-4, 6, 41)
    vals = [d.survival(float(t)) for t in ts]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# plus moments
# ---------------------------------------------------------------------------


def test_gaussian_fifth_plus_moment_at_zero():
    # E[Z^5 1{Z>0}] = 8 phi(0)
    assert Gaussian(0, 1).plus_moment(0.0, 5) == pytest.approx(8.0 / SQRT_2PI, rel=1e-14)


def test_plus_moment_single_atom_above():
    assert TwoPoint(-1.0, 1.0, 0.5).plus_moment(0.0, 1) == pytest.approx(0.5, abs=1e-15)


def test_plus_moment_far_left_asymptote():
    # with the positive part inactive, E[(X - t)_+] = mean - t
    for d in (TwoPoint.zero_mean(-0.5, 1.0), CenteredPoisson(1.5), Gaussian(0, 2)):
        t = -1e6
        assert d.plus_moment(t, 1) == pytest.approx(-t, rel=1e-9)


def test_gaussian_recurrence_matches_quadrature():
    # the closed-form recursion must agree with an independent quadrature
    # oracle to 1e-9 relative on the working range
    for alpha in (1, 2, 5):
        for t in np.linspace(-6.0, 6.0, 25):
            ref, _ = integrate.quad(
                lambda z: (z - t) ** alpha * _phi(z), t, np.inf,
                epsabs=1e-300, epsrel=1e-13, limit=400,
            )
            got = _std_plus_moment_int(float(t), alpha)
            assert got == pytest.approx(ref, rel=1e-9)


def test_gaussian_non_integer_order_against_quad():
    g = Gaussian(0.2, 1.3)
    for alpha in (1.5, 3.25):
        for t in (-2.0, 0.0, 1.5):
            ref, _ = integrate.quad(
                lambda z: (z - t) ** alpha * _phi((z - 0.2) / 1.3) / 1.3,
                t, np.inf, epsabs=1e-13, epsrel=1e-11, limit=300,
            )
            assert g.plus_moment(t, alpha) == pytest.approx(ref, rel=1e-8)


def test_weibull_plus_moment_against_quad():
    w = Weibull(2.0, 1.5)
    for t in (-0.5, 0.0, 1.0, 3.0):
        ref, _ = integrate.quad(
            lambda x: (x - t) * 2.0 / 1.5 * (x / 1.5) * math.exp(-((x / 1.5) ** 2)),
            max(t, 0.0), np.inf, epsabs=1e-13, epsrel=1e-11, limit=300,
        )
        assert w.plus_moment(t, 1) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("alpha", [1.0, 2.0, 5.0])
def test_plus_moment_monotone_in_threshold(alpha):
    d = CenteredPoisson(2.0)
    ts = np.linspace(-3, 8, 45)
    vals = [d.plus_moment(float(t), alpha) for t in ts]
    assert all(a >= b - 1e-13 for a, b in zip(vals, vals[1:]))


@given(
    st.lists(st.floats(-10, 10), min_size=2, max_size=6, unique=True),
    st.integers(1, 1000),
)
@settings(max_examples=60, deadline=None)
def test_first_moment_identity_random_lattices(values, seed):
    # E[(X-t)_+] - E[(t-X)_+] = mean - t, from x = x_+ - (-x)_+
    rng = np.random.default_rng(seed)
    w = rng.random(len(values)) + 0.05
    d = Lattice(values, w / w.sum())
    mean = d.mean()
    for t in np.linspace(min(values) - 1, max(values) + 1, 13):
        lhs = d.plus_moment(float(t), 1) - d.neg_plus_moment(float(t))
        assert lhs == pytest.approx(mean - t, abs=1e-10)


def test_plus_moment_order_zero_is_survival():
    d = Lattice([-1, 0, 2], [0.3, 0.3, 0.4])
    for t in (-2.0, -1.0, 0.0, 1.9, 2.0, 3.0):
        assert d.plus_moment(t, 0) == d.survival(t)


def test_unsupported_order_rejected():
    d = Gaussian(0, 1)
    for alpha in (0.5, -1.0, 9.0):
        with pytest.raises(UnsupportedOrder):
            d.plus_moment(0.0, alpha)


# ---------------------------------------------------------------------------
# moments, quantiles
# ---------------------------------------------------------------------------


def test_mean_var_examples():
    d = TwoPoint.zero_mean(-0.25, 1.0)  # the worst-case increment at v2/n = 1/4
    assert d.p == pytest.approx(0.2, abs=1e-15)
    m, v = d.mean_var()
    assert m == pytest.approx(0.0, abs=1e-15)
    assert v == pytest.approx(0.25, abs=1e-15)
    assert CenteredPoisson(2.0, 1.0).mean_var() == (0.0, 2.0)
    assert Gaussian(0.0, 3.0).mean_var() == (0.0, 9.0)


def test_quantile_examples():
    assert Gaussian(0, 1).quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    # staircase convention: inf{x : F(x) >= p}
    assert TwoPoint(-1.0, 1.0, 0.5).quantile(0.5) == -1.0
    assert Lattice([0.0, 1.0], [0.3, 0.7]).quantile(0.3) == 0.0
    assert Lattice([0.0, 1.0], [0.3, 0.7]).quantile(0.30000001) == 1.0


def test_quantile_endpoints():
    assert Gaussian(0, 1).quantile(0.0) == -math.inf
    assert Gaussian(0, 1).quantile(1.0) == math.inf
    lat = Lattice([-2.0, 5.0], [0.5, 0.5])
    assert lat.quantile(0.0) == -2.0
    assert lat.quantile(1.0) == 5.0


def test_partial_quantile_integral_is_mean_at_one():
    for d in (Gaussian(0.7, 2.0), Weibull(2.0, 1.3), Lattice([-1, 2], [0.25, 0.75])):
        assert d.partial_quantile_integral(1.0) == pytest.approx(d.mean(), rel=1e-12, abs=1e-12)


def test_partial_quantile_integral_matches_quadrature():
    g = Gaussian(-0.5, 1.5)
    for u in (0.1, 0.5, 0.9):
        ref, _ = integrate.quad(g.quantile, 1e-12, u, epsabs=1e-12, epsrel=1e-10, limit=300)
        assert g.partial_quantile_integral(u) == pytest.approx(ref, abs=1e-8)
    w = Weibull(1.5, 2.0)
    for u in (0.2, 0.7):
        ref, _ = integrate.quad(w.quantile, 0.0, u, epsabs=1e-12, epsrel=1e-10, limit=300)
        assert w.partial_quantile_integral(u) == pytest.approx(ref, rel=1e-9)


# ---------------------------------------------------------------------------
# convolution of i.i.d. two-point laws
# ---------------------------------------------------------------------------


def test_convolve_iid_two_fair_coins():
    d = convolve_iid(TwoPoint.zero_mean(-1.0, 1.0), 2)
    xs, ps = d.atoms()
    assert list(xs) == [-2.0, 0.0, 2.0]
    assert list(ps) == pytest.approx([0.25, 0.5, 0.25], abs=1e-15)


def test_convolve_iid_binomial_formula():
    # n=4 worst-case law with v2=1: five atoms with binomial(0.2) weights
    d = convolve_iid(TwoPoint.zero_mean(-0.25, 1.0), 4)
    xs, ps = d.atoms()
    assert xs.size == 5
    for k in range(5):
        assert xs[k] == pytest.approx(k - 0.25 * (4 - k), abs=1e-12)
        expected = math.comb(4, k) * 0.2**k * 0.8 ** (4 - k)
        assert ps[k] == pytest.approx(expected, rel=1e-12)


def test_convolve_iid_identity_and_scaling():
    base = TwoPoint.zero_mean(-0.5, 1.0)
    assert convolve_iid(base, 1) is base
    for n in (2, 7, 100):
        m0, v0 = base.mean_var()
        m, v = convolve_iid(base, n).mean_var()
        assert m == pytest.approx(n * m0, abs=1e-12)
        assert v == pytest.approx(n * v0, rel=1e-12)


def test_centered_poisson_truncation_mass():
    for v2, y in ((0.5, 1.0), (4.0, 1.0), (4.0, 2.0), (25.0, 1.0)):
        d = CenteredPoisson(v2, y)
        assert math.fsum(d.ps) >= 1.0 - 1e-15
        m, var = float(np.dot(d.ps, d.xs)), float(np.dot(d.ps, d.xs**2))
        assert m == pytest.approx(0.0, abs=1e-12)
        assert var == pytest.approx(y * v2, rel=1e-12)


def test_empirical_is_uniform_over_sample():
    d = Empirical([3.0, 1.0, 3.0, 2.0])
    xs, ps = d.atoms()
    assert list(xs) == [1.0, 2.0, 3.0]
    assert list(ps) == pytest.approx([0.25, 0.25, 0.5], abs=1e-15)


def test_finite_view_preserves_mean():
    for d in (Gaussian(0.4, 2.0), Weibull(2.0, 1.0)):
        view = d.finite_view(512)
        assert view.mean() == pytest.approx(d.mean(), abs=1e-9)
        assert abs(view.mean_var()[1] - d.mean_var()[1]) < 2e-4 * d.mean_var()[1] + 1e-9


# ---------------------------------------------------------------------------
# MGF and validation
# ---------------------------------------------------------------------------


def test_log_mgf_closed_forms():
    lam = 0.7
    assert Gaussian(0.2, 1.5).log_mgf(lam) == pytest.approx(0.2 * lam + 0.5 * (1.5 * lam) ** 2)
    # the closed form covers the whole law; the atom sum misses the
    # truncated tail, which the exponential weight inflates to ~1e-9
    d = CenteredPoisson(2.0, 1.0)
    xs, ps = d.atoms()
    brute = math.log(float(np.dot(ps, np.exp(lam * xs))))
    assert d.log_mgf(lam) == pytest.approx(brute, rel=1e-8)
    assert d.log_mgf(lam) >= brute
    b = BinomSum(5, TwoPoint.zero_mean(-0.5, 1.0))
    xs, ps = b.atoms()
    brute = math.log(float(np.dot(ps, np.exp(lam * xs))))
    assert b.log_mgf(lam) == pytest.approx(brute, rel=1e-12)


def test_weibull_mgf_diverges_below_shape_one():
    with pytest.raises(MGFDiverges):
        Weibull(0.5, 1.0).log_mgf(0.1)


def test_two_point_requires_straddling_zero():
    with pytest.raises(ValueError):
        TwoPoint(0.5, 1.0, 0.5)
    with pytest.raises(ValueError):
        TwoPoint(-1.0, -0.5, 0.5)


def test_probability_sum_validated():
    with pytest.raises(ValueError):
        Lattice([0.0, 1.0], [0.5, 0.6])


# ---------------------------------------------------------------------------
# mini-language
# ---------------------------------------------------------------------------


def test_parse_dist_round_trips():
    d = parse_dist("twopoint:a=-0.25,b=1,p=0.2")
    assert isinstance(d, TwoPoint) and d.p == 0.2
    d = parse_dist("binomsum:n=100,a=-0.01,b=1")
    assert isinstance(d, BinomSum) and d.n == 100
    assert d.base.p == pytest.approx(0.01 / 1.01)
    d = parse_dist("cpoisson:v2=4,y=1")
    assert isinstance(d, CenteredPoisson) and d.v2 == 4.0
    d = parse_dist("gauss:mu=0,sd=2")
    assert isinstance(d, Gaussian) and d.sd == 2.0
    d = parse_dist("weibull:shape=2,scale=1.5")
    assert isinstance(d, Weibull) and d.scale == 1.5


def test_parse_dist_reports_token_and_position():
    with pytest.raises(ParseError) as exc:
        parse_dist("gauss:mu=0,zz=1")
    assert "zz" in str(exc.value) and "position 11" in str(exc.value)
    with pytest.raises(ParseError) as exc:
        parse_dist("nosuch:a=1")
    assert "position 0" in str(exc.value)
    with pytest.raises(ParseError):
        parse_dist("gauss:mu=0")  # missing sd
    with pytest.raises(ParseError) as exc:
        parse_dist("gauss:mu=zzz,sd=1")
    assert "zzz" in str(exc.value)


def test_lattice_csv_round_trip(tmp_path):
    path = tmp_path / "law.csv"
    d = Lattice([-1.5, 0.25, 3.0], [0.2, 0.45, 0.35])
    d.to_csv(str(path))
    back = parse_dist(f"lattice:file={path}")
    assert np.array_equal(back.xs, d.xs)
    assert np.array_equal(back.ps, d.ps)
