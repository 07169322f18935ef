import math

import numpy as np
import pytest

from cbound.bounds import (
    AZUMA5_CAP,
    BadTail,
    EmptyInput,
    OPTIMALITY_CAP,
    XNotInSupport,
    _lambda_form,
    _t_form,
    azuma_bentkus5,
    bentkus,
    chernoff,
    fan_chernoff,
    freedman_bentkus_binom,
    freedman_bentkus_poisson,
    fuk_nagaev_threshold,
    log_concave_majorant,
    optimality_factor_check,
    poisson_majorant_bound,
    q_alpha,
    winsorized_freedman,
)
from cbound.dists import (
    CenteredPoisson,
    Gaussian,
    Lattice,
    MGFDiverges,
    TwoPoint,
    UnsupportedOrder,
    Weibull,
    convolve_iid,
)

E2_HALF = math.e**2 / 2.0

# Regression constants pinned from independent dense-grid oracles (the
# oracle evaluations are repeated below at lower resolution).
BENTKUS_CPOIS1_X3_A2 = 0.0320529895148001
WINSORIZED_4_5_2_001 = 0.19136340911339156
AZUMA5_1_3 = 0.006479974236621922


# ---------------------------------------------------------------------------
# Cramer-Chernoff
# ---------------------------------------------------------------------------


def test_chernoff_gaussian_closed_form():
    for v, x in ((1.0, 2.0), (2.0, 3.0), (0.5, 0.7)):
        res = chernoff(Gaussian(0, v), x)
        assert res.raw == pytest.approx(math.exp(-(x * x) / (2 * v * v)), rel=1e-10)


def test_chernoff_poisson_closed_form():
    # inf_lam E[exp(lam (Pi_v2 - x))] = e^x (v2/(v2+x))^(v2+x)
    for v2, x in ((1.0, 1.0), (1.0, 3.0), (4.0, 2.5), (0.5, 0.25)):
        res = chernoff(CenteredPoisson(v2), x)
        closed = math.exp(x) * (v2 / (v2 + x)) ** (v2 + x)
        assert res.raw == pytest.approx(closed, rel=1e-10)


def test_chernoff_at_zero_is_one():
    for d in (Gaussian(0, 1), CenteredPoisson(2.0), TwoPoint.zero_mean(-0.5, 1.0)):
        assert chernoff(d, 0.0).raw == pytest.approx(1.0, abs=1e-12)


def test_chernoff_mgf_divergence():
    with pytest.raises(MGFDiverges):
        chernoff(Weibull(0.5, 1.0), 1.0)


def test_chernoff_above_support_is_zero():
    d = convolve_iid(TwoPoint.zero_mean(-1.0, 1.0), 4)
    assert chernoff(d, 5.0).raw == pytest.approx(0.0, abs=1e-300)


# ---------------------------------------------------------------------------
# Bentkus bounds
# ---------------------------------------------------------------------------


def test_bentkus_is_one_at_zero():
    d = convolve_iid(TwoPoint.zero_mean(-0.25, 1.0), 4)
    for alpha in (1, 2, 5):
        assert bentkus(d, 0.0, alpha).raw == pytest.approx(1.0, abs=1e-12)


def test_bentkus_below_chernoff_on_grid():
    d = convolve_iid(TwoPoint.zero_mean(-0.25, 1.0), 8)
    for x in np.linspace(0.0, 4.0, 15):
        b = bentkus(d, float(x), 2).raw
        c = chernoff(d, float(x)).raw
        assert b <= c + 1e-9


def test_bentkus_cpoisson_regression_and_grid_oracle():
    got = bentkus(CenteredPoisson(1.0), 3.0, 2).raw
    assert got == pytest.approx(BENTKUS_CPOIS1_X3_A2, rel=1e-9)
    # independent oracle: direct objective on a dense lambda grid; a grid
    # minimum can only sit above the true infimum
    xs, ps = CenteredPoisson(1.0).atoms()
    lams = np.linspace(0.2, 3.0, 200_001)
    vals = (np.clip(1.0 + 0.5 * np.outer(lams, xs - 3.0), 0.0, None) ** 2 * ps).sum(axis=1)
    grid_min = float(vals.min())
    assert got <= grid_min + 1e-12
    assert grid_min - got <= 1e-7


def test_bentkus_lambda_vs_t_form_agreement():
    laws = [
        convolve_iid(TwoPoint.zero_mean(-0.2, 1.0), 10),
        CenteredPoisson(2.0),
        Gaussian(0.0, 1.5),
    ]
    for d in laws:
        for alpha in (1.0, 2.0, 5.0):
            for x in np.linspace(0.0, 4.0, 9):
                a = _lambda_form(d, float(x), alpha).value
                b = _t_form(d, float(x), alpha).value
                assert abs(a - b) <= 1e-8 * max(a, b, 1e-300)


def test_bentkus_order_validation():
    with pytest.raises(UnsupportedOrder):
        bentkus(Gaussian(0, 1), 1.0, 3)


# ---------------------------------------------------------------------------
# Freedman-style wrappers
# ---------------------------------------------------------------------------


def test_freedman_binom_at_zero_and_single_step():
    assert freedman_bentkus_binom(5, 1.0, 0.0).raw == pytest.approx(1.0, abs=1e-12)
    # n=1, v2=1: the increment is a fair coin on {-1, 1}; the bound must
    # dominate P(G >= 1) = 1/2
    assert freedman_bentkus_binom(1, 1.0, 1.0).raw >= 0.5 - 1e-12


def test_freedman_binom_sandwiched_by_exact_tail():
    n, v2, x = 50, 4.0, 6.0
    d = convolve_iid(TwoPoint.zero_mean(-v2 / n, 1.0), n)
    xs, _ = d.atoms()
    support_below = float(xs[xs <= x + 1e-12][-1])
    tail_at_x = d.survival(x - 1e-12) if x in xs else d.survival(x)
    tail_closed = d.survival(support_below - 1e-9)
    got = freedman_bentkus_binom(n, v2, x).raw
    assert tail_at_x <= got <= E2_HALF * tail_closed


def test_freedman_poisson_dominates_binom():
    for v2 in (0.5, 2.0):
        fp = freedman_bentkus_poisson(v2, 2.0).raw
        prev = 0.0
        for n in (1, 2, 5, 20, 100):
            fb = freedman_bentkus_binom(n, v2, 2.0).raw
            assert fb <= fp + 1e-9
            assert fb >= prev - 1e-9  # non-decreasing toward the Poisson limit
            prev = fb


def test_fan_chain_and_examples():
    assert fan_chernoff(5, 1.0, 0.0).raw == pytest.approx(1.0, abs=1e-12)
    # fair-coin case: inf_lam (e^{-2 lam} + 1)/2 = 1/2 in the limit
    assert fan_chernoff(1, 1.0, 1.0).raw == pytest.approx(0.5, abs=1e-12)
    for x in np.linspace(0.0, 3.0, 7):
        assert freedman_bentkus_binom(8, 1.5, float(x)).raw <= fan_chernoff(8, 1.5, float(x)).raw + 1e-9


# ---------------------------------------------------------------------------
# majorant
# ---------------------------------------------------------------------------


def test_majorant_identity_on_log_concave_input():
    xs = np.arange(6.0)
    s = np.exp(-0.5 * xs**2)  # log-concave sequence
    m = log_concave_majorant(xs, s)
    for x, v in zip(xs, s):
        assert m(float(x)) == pytest.approx(float(v), rel=1e-12)


def test_majorant_lifts_convex_kink():
    # knot 1 sits below the chord from knot 0 to knot 2 in log space, so
    # the hull keeps {0, 2, 3} and lifts the value at 1 to the chord
    m = log_concave_majorant([0, 1, 2, 3], [1.0, 0.1, 0.09, 0.001])
    assert list(m.hull_x) == [0.0, 2.0, 3.0]
    assert m(1.0) == pytest.approx(math.sqrt(0.09), rel=1e-12)
    assert m(2.0) == pytest.approx(0.09, rel=1e-12)


def test_majorant_dominates_and_is_concave():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = rng.integers(3, 30)
        s = np.sort(rng.random(n))[::-1] + 1e-6
        m = log_concave_majorant(np.arange(n, dtype=float), s)
        # pointwise domination, contact at two or more knots
        contacts = 0
        for x, v in zip(np.arange(n, dtype=float), s):
            assert m(float(x)) >= v * (1.0 - 1e-12)
            if m(float(x)) <= v * (1.0 + 1e-12):
                contacts += 1
        assert contacts >= 2
        # hull slopes non-increasing (second differences <= 0)
        slopes = np.diff(m.hull_log) / np.diff(m.hull_x)
        assert np.all(np.diff(slopes) <= 1e-12)


def test_majorant_extrapolates_with_last_slope():
    m = log_concave_majorant([0, 1, 2], [1.0, 0.1, 0.01])
    assert m(4.0) == pytest.approx(1e-4, rel=1e-9)
    assert m(-3.0) == pytest.approx(1.0, rel=1e-12)


def test_majorant_rejects_bad_input():
    with pytest.raises(EmptyInput):
        log_concave_majorant([], [])
    with pytest.raises(ValueError):
        log_concave_majorant([0, 1], [0.5, 0.7])  # increasing
    with pytest.raises(ValueError):
        log_concave_majorant([0, 1], [0.5, 0.0])  # non-positive


def test_poisson_majorant_caps_the_poisson_bound():
    for v2 in (0.5, 1.0, 4.0):
        for x in range(0, 15):
            fp = freedman_bentkus_poisson(v2, float(x)).raw
            cap = poisson_majorant_bound(v2, float(x)).raw
            assert fp <= cap + 1e-9


# ---------------------------------------------------------------------------
# fifth-order Gaussian bound
# ---------------------------------------------------------------------------


def test_azuma5_at_zero_and_cap_constant():
    assert azuma_bentkus5(1.0, 0.0).raw == pytest.approx(1.0, abs=1e-12)
    assert AZUMA5_CAP == pytest.approx(5.699, abs=5e-4)
    assert AZUMA5_CAP == pytest.approx(120.0 * (math.e / 5.0) ** 5, rel=1e-15)


def test_azuma5_regression_and_caps():
    res = azuma_bentkus5(1.0, 3.0)
    assert res.raw == pytest.approx(AZUMA5_1_3, rel=1e-9)
    assert res.raw <= min(math.exp(-4.5), AZUMA5_CAP * Gaussian(0, 1).survival(3.0)) + 1e-12
    for v in (0.5, 2.0):
        for x in np.linspace(0.0, 4 * v, 9):
            r = azuma_bentkus5(v, float(x))
            assert r.raw <= r.extras["cap_tail"] + 1e-9
            assert r.raw <= r.extras["cap_exp"] + 1e-9


# ---------------------------------------------------------------------------
# quantile functional
# ---------------------------------------------------------------------------


def test_q_alpha_positive_homogeneity():
    base = q_alpha(Gaussian(0, 1), 0.05, 5)
    for r in (0.5, 2.0, 10.0):
        assert q_alpha(Gaussian(0, r), 0.05, 5) == pytest.approx(r * base, rel=1e-9)


def test_q5_gaussian_quantile_caps():
    for delta in (0.1, 0.05, 0.01):
        q = q_alpha(Gaussian(0, 1), delta / 2.0, 5)
        cap = min(
            math.sqrt(2.0 * math.log(2.0 / delta)),
            Gaussian(0, 1).quantile(1.0 - delta / 11.4),
        )
        assert q <= cap + 1e-8


def test_q_alpha_degenerate_point_mass():
    d = Lattice([1.7], [1.0])
    for delta in (0.3, 0.05):
        for alpha in (1, 2, 5):
            assert q_alpha(d, delta, alpha) == pytest.approx(1.7, abs=1e-9)


# ---------------------------------------------------------------------------
# winsorized bound and Fuk-Nagaev threshold
# ---------------------------------------------------------------------------


def test_winsorized_reduces_to_poisson_at_unit_level():
    a = winsorized_freedman(2.0, 1.5, 1.0, 0.0).raw
    b = freedman_bentkus_poisson(2.0, 1.5).raw
    assert a == pytest.approx(b, rel=1e-12)
    shifted = winsorized_freedman(2.0, 1.5, 1.0, 0.25)
    assert shifted.raw == pytest.approx(a + 0.25, rel=1e-12)


def test_winsorized_at_zero():
    assert winsorized_freedman(1.0, 0.0, 2.0, 0.0).raw == pytest.approx(1.0, abs=1e-12)


def test_winsorized_regression_and_grid_oracle():
    got = winsorized_freedman(4.0, 5.0, 2.0, 0.01).raw
    assert got == pytest.approx(WINSORIZED_4_5_2_001, rel=1e-9)
    xs, ps = CenteredPoisson(4.0, 2.0).atoms()
    lams = np.linspace(0.05, 2.0, 100_001)
    vals = (np.clip(1.0 + 0.5 * np.outer(lams, xs - 5.0), 0.0, None) ** 2 * ps).sum(axis=1)
    assert got - 0.01 <= float(vals.min()) + 1e-12
    assert float(vals.min()) - (got - 0.01) <= 1e-7


def test_fuk_nagaev_power_law_arithmetic():
    # q=2, v=1, y=10, delta=0.1: g(10) = 1/10, x2 = 4 * 0.1 / (10 * 0.1) = 0.4,
    # matching the direct form 4 v^2 / ((q-1) delta y^q)
    x1, x2 = fuk_nagaev_threshold(1.0, 0.1, 10.0, 2.0)
    assert x2 == pytest.approx(0.4, rel=1e-12)
    assert x2 == pytest.approx(4.0 / ((2.0 - 1.0) * 0.1 * 10.0**2), rel=1e-12)
    assert x1 == pytest.approx(q_alpha(Gaussian(0, 1), 0.05, 5), rel=1e-12)


def test_fuk_nagaev_bounded_case_and_homogeneity():
    x1, x2 = fuk_nagaev_threshold(1.0, 0.1, 5.0, lambda t: 0.0)
    assert x2 == 0.0
    a1, a2 = fuk_nagaev_threshold(2.0, 0.1, 10.0, 2.0)
    b1, b2 = fuk_nagaev_threshold(1.0, 0.1, 10.0, 2.0)
    assert a1 == pytest.approx(2.0 * b1, rel=1e-10)
    assert a2 == pytest.approx(4.0 * b2, rel=1e-12)


def test_fuk_nagaev_rejects_increasing_tail():
    with pytest.raises(BadTail):
        fuk_nagaev_threshold(1.0, 0.1, 5.0, lambda t: t)
    with pytest.raises(BadTail):
        fuk_nagaev_threshold(1.0, 0.1, 5.0, 1.5)


# ---------------------------------------------------------------------------
# optimality factor
# ---------------------------------------------------------------------------


def test_optimality_caps_constants():
    assert OPTIMALITY_CAP(1) == pytest.approx(2.71828, abs=1e-5)
    assert OPTIMALITY_CAP(2) == pytest.approx(3.69453, abs=1e-5)


def test_optimality_factor_on_worst_case_lattice():
    d = convolve_iid(TwoPoint.zero_mean(-0.2, 1.0), 5)  # v2 = 1, n = 5
    xs, _ = d.atoms()
    for x in xs[xs >= -1e-12]:
        ratio = optimality_factor_check(d, 2, float(x))
        assert 1.0 - 1e-9 <= ratio <= OPTIMALITY_CAP(2) + 1e-9


def test_optimality_factor_single_atom():
    assert optimality_factor_check(Lattice([0.0], [1.0]), 2, 0.0) == pytest.approx(1.0, rel=1e-9)


def test_optimality_factor_rejects_off_support():
    d = convolve_iid(TwoPoint.zero_mean(-0.5, 1.0), 3)
    with pytest.raises(XNotInSupport):
        optimality_factor_check(d, 2, 0.1234)
