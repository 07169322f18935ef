"""Tail bounds built from positive-part moments and their Chernoff twins.

The central object is the order-a bound

    P(S >= x)  <=  inf_{lam >= 0} E[(1 + (lam/a) (S - x))_+^a]
               <=  inf_{lam >= 0} E[exp(lam (S - x))],

valid pointwise in lam because 1{u >= 0} <= (1 + lam u / a)_+^a <= e^{lam u}.
The middle infimum is evaluated twice, over lam and over the substituted
threshold t = x - a/lam (the two parametrizations must agree, which is a
permanent cross-check on the optimizer), and the smaller value is kept.
Since the optimizer only ever returns values it has evaluated, computed
bounds never undershoot the true infimum: approximation error is always
on the conservative side.

Named wrappers cover the variance-gated martingale bound with binomial
and centered-Poisson reference laws, the Gaussian fifth-order bound with
its explicit caps, the log-concave tail majorant, the winsorized variant
for unbounded increments, the quantile functional Q_a, and a
Fuk-Nagaev-style deviation threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from .dists import (
    CenteredPoisson,
    Dist,
    Gaussian,
    TwoPoint,
    UnsupportedOrder,
    convolve_iid,
    _norm_sf,
)
from .optim import MinimizeResult, minimize_convex

__all__ = [
    "BoundResult",
    "MajorantFn",
    "chernoff",
    "bentkus",
    "freedman_bentkus_binom",
    "freedman_bentkus_poisson",
    "fan_chernoff",
    "log_concave_majorant",
    "poisson_majorant_bound",
    "azuma_bentkus5",
    "q_alpha",
    "winsorized_freedman",
    "fuk_nagaev_threshold",
    "optimality_factor_check",
    "CrossCheckError",
    "XNotInSupport",
    "BadTail",
    "EmptyInput",
    "AZUMA5_CAP",
    "OPTIMALITY_CAP",
]

# 5! (e/5)^5, the constant tying the fifth-order Gaussian bound to the
# plain Gaussian tail.
AZUMA5_CAP = math.factorial(5) * (math.e / 5.0) ** 5


def OPTIMALITY_CAP(alpha: float) -> float:
    """e^a / a, the worst-case looseness of the order-a bound at support points."""
    return math.exp(alpha) / alpha


class CrossCheckError(RuntimeError):
    """The lam-form and t-form optimizations disagreed beyond tolerance."""


class XNotInSupport(ValueError):
    """Requested threshold is not a support point of the lattice law."""


class BadTail(ValueError):
    """Supplied tail-control function is not non-increasing and non-negative."""


class EmptyInput(ValueError):
    """No knots supplied to the majorant constructor."""


@dataclass(frozen=True)
class BoundResult:
    """An optimized tail bound plus its optimizer and convergence status.

    ``raw`` may exceed one (e.g. after adding an exceedance term); ``bound``
    is the usable min(1, raw).  ``extras`` carries method-specific
    diagnostics (caps, split terms) and stays out of the JSON schema.
    """

    method: str
    raw: float
    bound: float
    optimizer: float
    status: str
    extras: dict = field(default_factory=dict, compare=False, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "raw": self.raw,
            "bound": self.bound,
            "optimizer": self.optimizer,
            "status": self.status,
        }


def _result(method: str, raw: float, optimizer: float, status: str, **extras) -> BoundResult:
    raw = float(raw)
    return BoundResult(
        method=method,
        raw=raw,
        bound=min(1.0, raw),
        optimizer=float(optimizer),
        status=status,
        extras=extras,
    )


# ---------------------------------------------------------------------------
# Cramer-Chernoff
# ---------------------------------------------------------------------------


def chernoff(d: Dist, x: float) -> BoundResult:
    """inf over lam >= 0 of E[exp(lam (X - x))].

    The expectation is assembled in log space and exponentiated before the
    minimization, so an infimum reached only as lam grows without bound
    (x at or above the essential supremum) resolves to its limit instead
    of chasing -inf.  Raises :class:`~cbound.dists.MGFDiverges` for laws
    without a finite moment generating function near zero.
    """

    def objective(lam: float) -> float:
        if lam == 0.0:
            return 1.0
        return math.exp(min(d.log_mgf(lam) - lam * x, 709.0))

    res = minimize_convex(objective, lo=0.0, hi=None, init=1.0 / (1.0 + abs(x)))
    return _result("Chernoff", res.value, res.argmin, res.status)


# ---------------------------------------------------------------------------
# Bentkus positive-part bounds
# ---------------------------------------------------------------------------

_BENTKUS_ORDERS = (1.0, 2.0, 5.0)
_CROSS_CHECK_RTOL = 1e-8


def _lambda_form(d: Dist, x: float, alpha: float) -> MinimizeResult:
    def objective(lam: float) -> float:
        if lam == 0.0:
            return 1.0
        scale = lam / alpha
        return scale**alpha * d.plus_moment(x - 1.0 / scale, alpha)

    return minimize_convex(objective, lo=0.0, hi=None, init=alpha / (1.0 + abs(x)))


def _t_form(d: Dist, x: float, alpha: float) -> MinimizeResult:
    eps = 1e-12 * (1.0 + abs(x))

    def objective(t: float) -> float:
        return d.plus_moment(t, alpha) / (x - t) ** alpha

    return minimize_convex(objective, lo=None, hi=x - eps, init=x - (1.0 + abs(x)))


def bentkus(d: Dist, x: float, alpha: float) -> BoundResult:
    """inf over lam >= 0 of E[(1 + (lam/a)(X - x))_+^a] for a in {1, 2, 5}.

    Both the lam parametrization and the threshold parametrization
    t = x - a/lam are minimized independently; they must agree to 1e-8
    relative, and the numerically smaller value is reported.
    """
    alpha = float(alpha)
    if alpha not in _BENTKUS_ORDERS:
        raise UnsupportedOrder(f"bentkus order must be one of {_BENTKUS_ORDERS}, got {alpha}")
    lam_res = _lambda_form(d, x, alpha)
    t_res = _t_form(d, x, alpha)
    gap = abs(lam_res.value - t_res.value)
    if gap > _CROSS_CHECK_RTOL * max(lam_res.value, t_res.value, 1e-300):
        raise CrossCheckError(
            f"lam-form {lam_res.value!r} vs t-form {t_res.value!r} "
            f"disagree at x={x!r}, order {alpha:g}"
        )
    if t_res.value < lam_res.value:
        value = t_res.value
        optimizer = alpha / (x - t_res.argmin)
    else:
        value = lam_res.value
        optimizer = lam_res.argmin
    status = lam_res.status if lam_res.status == t_res.status else "converged"
    return _result(f"Bentkus{alpha:g}", value, optimizer, status)


# ---------------------------------------------------------------------------
# Variance-gated martingale bounds (binomial / Poisson reference laws)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _freedman_lattice(n: int, v2: float) -> Dist:
    # sum of n i.i.d. mean-zero two-point laws on {-v2/n, 1}
    return convolve_iid(TwoPoint.zero_mean(-v2 / n, 1.0), n)


@lru_cache(maxsize=256)
def _centered_poisson(v2: float, y: float) -> CenteredPoisson:
    return CenteredPoisson(v2, y)


def freedman_bentkus_binom(n: int, v2: float, x: float) -> BoundResult:
    """Order-2 bound with the extremal n-step binomial reference law.

    The reference is the sum of n i.i.d. mean-zero two-point variables on
    {-v2/n, 1}, the worst case among supermartingales with increments
    bounded by one and accumulated conditional variance at most v2.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if v2 <= 0.0:
        raise ValueError("v2 must be positive")
    res = bentkus(_freedman_lattice(n, float(v2)), x, 2)
    return _result("FreedmanBinom", res.raw, res.optimizer, res.status)


def freedman_bentkus_poisson(v2: float, x: float) -> BoundResult:
    """Horizon-free order-2 bound with the centered Poisson reference law."""
    if v2 <= 0.0:
        raise ValueError("v2 must be positive")
    res = bentkus(_centered_poisson(float(v2), 1.0), x, 2)
    return _result("FreedmanPoisson", res.raw, res.optimizer, res.status)


def fan_chernoff(n: int, v2: float, x: float) -> BoundResult:
    """Exponential counterpart of :func:`freedman_bentkus_binom`."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    res = chernoff(_freedman_lattice(n, float(v2)), x)
    return _result("Fan", res.raw, res.optimizer, res.status)


# ---------------------------------------------------------------------------
# Least log-concave majorant
# ---------------------------------------------------------------------------


class MajorantFn:
    """Least log-concave majorant of tabulated survival values.

    Stores the input knots (x_j, log s_j) and the upper concave hull in
    log space.  Evaluation interpolates linearly between hull vertices,
    holds the first hull value to the left, and extrapolates with the
    final hull slope to the right.
    """

    def __init__(self, knots_x: np.ndarray, knots_log: np.ndarray):
        self.knots_x = knots_x
        self.knots_log = knots_log
        hull = [(float(knots_x[0]), float(knots_log[0]))]
        for xj, yj in zip(knots_x[1:], knots_log[1:]):
            p = (float(xj), float(yj))
            while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) >= 0.0:
                hull.pop()
            hull.append(p)
        self.hull_x = np.array([p[0] for p in hull])
        self.hull_log = np.array([p[1] for p in hull])

    def log_eval(self, x: float) -> float:
        hx, hy = self.hull_x, self.hull_log
        if x <= hx[0]:
            return float(hy[0])
        if x >= hx[-1]:
            if hx.size == 1:
                return float(hy[-1])
            slope = (hy[-1] - hy[-2]) / (hx[-1] - hx[-2])
            return float(hy[-1] + slope * (x - hx[-1]))
        return float(np.interp(x, hx, hy))

    def __call__(self, x: float) -> float:
        return math.exp(self.log_eval(x))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def log_concave_majorant(knots_x, survival) -> MajorantFn:
    """Upper concave hull of (x_j, log s_j) for positive, non-increasing s_j."""
    knots_x = np.asarray(knots_x, dtype=np.float64)
    survival = np.asarray(survival, dtype=np.float64)
    if knots_x.size == 0:
        raise EmptyInput("majorant requires at least one knot")
    if knots_x.shape != survival.shape:
        raise ValueError("knots and survival values must have equal length")
    if np.any(np.diff(knots_x) <= 0):
        raise ValueError("knots must be strictly increasing")
    if np.any(survival <= 0.0):
        raise ValueError("survival values must be positive")
    if np.any(np.diff(survival) > 1e-15):
        raise ValueError("survival values must be non-increasing")
    return MajorantFn(knots_x, np.log(survival))


@lru_cache(maxsize=64)
def _poisson_majorant(v2: float) -> MajorantFn:
    law = _centered_poisson(v2, 1.0)
    xs, _ = law.atoms()
    sf = np.minimum(np.cumsum(law.ps[::-1])[::-1], 1.0)
    return log_concave_majorant(xs, sf)


def poisson_majorant_bound(v2: float, x: float) -> BoundResult:
    """(e^2/2) times the least log-concave majorant of P(centered Poisson >= x)."""
    if v2 <= 0.0:
        raise ValueError("v2 must be positive")
    raw = 0.5 * math.e**2 * _poisson_majorant(float(v2))(x)
    return _result("PoissonMajorant", raw, x, "closed-form")


# ---------------------------------------------------------------------------
# Fifth-order Gaussian bound
# ---------------------------------------------------------------------------


def azuma_bentkus5(v: float, x: float) -> BoundResult:
    """Order-5 bound with the N(0, v^2) reference law.

    For x >= 0 the value is checked against both of its analytic caps,
        exp(-x^2 / (2 v^2))     and     5!(e/5)^5 P(vZ >= x),
    which are reported in ``extras``.
    """
    if v <= 0.0:
        raise ValueError("v must be positive")
    res = bentkus(Gaussian(0.0, float(v)), x, 5)
    extras = {}
    if x >= 0.0:
        cap_tail = AZUMA5_CAP * _norm_sf(x / v)
        cap_exp = math.exp(-(x * x) / (2.0 * v * v))
        if res.raw > cap_tail + 1e-9:
            raise CrossCheckError(
                f"fifth-order bound {res.raw!r} exceeds its Gaussian-tail cap {cap_tail!r}"
            )
        extras = {"cap_tail": cap_tail, "cap_exp": cap_exp}
    return _result("AzumaGauss5", res.raw, res.optimizer, res.status, **extras)


# ---------------------------------------------------------------------------
# Quantile functional and Fuk-Nagaev threshold
# ---------------------------------------------------------------------------


def q_alpha(d: Dist, delta: float, alpha: float) -> float:
    """Q_a(X; delta) = inf_t  t + E[(X - t)_+^a]^{1/a} / delta^{1/a}.

    Positively homogeneous: Q_a(rX; delta) = r Q_a(X; delta) for r >= 0.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    alpha = float(alpha)
    if not 1.0 <= alpha <= 8.0:
        raise UnsupportedOrder(f"q_alpha order must lie in [1, 8], got {alpha}")
    inv = delta ** (-1.0 / alpha)

    def objective(t: float) -> float:
        return t + d.plus_moment(t, alpha) ** (1.0 / alpha) * inv

    init = d.quantile(1.0 - delta)
    if not math.isfinite(init):
        init = 0.0
    res = minimize_convex(objective, lo=None, hi=None, init=init)
    return res.value


TailSpec = Union[Callable[[float], float], float]


def fuk_nagaev_threshold(
    v: float, delta: float, y: float, tail: TailSpec
) -> tuple[float, float]:
    """Deviation threshold (x1, x2) guaranteeing tail probability <= delta.

    x1 = v Q_5(Z; delta/2) is the Gaussian leading term and
    x2 = 4 v^2 g(y) / (y delta) the heavy-tail correction, where g controls
    the normalized upper partial moments of the increments:
    E[(X_i / sbar_i - t)_+ | past] <= g(t) for t >= 0.  ``tail`` is either
    g itself or a power-law exponent q >= 2, which stands for
    g(t) = t^(1-q) / (q - 1).
    """
    if v <= 0.0 or y <= 0.0:
        raise ValueError("v and y must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if callable(tail):
        g = tail
        grid = np.linspace(0.0, 2.0 * y, 33)[1:]
        vals = np.array([g(float(t)) for t in grid])
        if np.any(vals < -1e-12):
            raise BadTail("tail-control function takes negative values")
        if np.any(np.diff(vals) > 1e-12):
            raise BadTail("tail-control function increases on the sampled grid")
    else:
        q = float(tail)
        if q < 2.0:
            raise BadTail(f"power-law exponent must be >= 2, got {q}")

        def g(t: float) -> float:
            return t ** (1.0 - q) / (q - 1.0)

    x1 = v * q_alpha(Gaussian(0.0, 1.0), delta / 2.0, 5)
    x2 = 4.0 * v * v * g(y) / (y * delta)
    return x1, x2


# ---------------------------------------------------------------------------
# Winsorized bound and optimality audit
# ---------------------------------------------------------------------------


def winsorized_freedman(v2: float, x: float, y: float, p_exceed: float) -> BoundResult:
    """Order-2 bound for increments winsorized at level y.

    The reference law is the scaled centered Poisson y * (Poi(v2/y) - v2/y);
    the caller supplies (an upper bound on) the probability that some raw
    increment exceeds y, which is added on top.  y = 1 with p_exceed = 0
    reduces to :func:`freedman_bentkus_poisson`.
    """
    if y <= 0.0:
        raise ValueError("y must be positive")
    if not 0.0 <= p_exceed <= 1.0:
        raise ValueError("p_exceed must lie in [0, 1]")
    res = bentkus(_centered_poisson(float(v2), float(y)), x, 2)
    return _result(
        "Winsorized",
        res.raw + p_exceed,
        res.optimizer,
        res.status,
        moment_term=res.raw,
        exceed_term=p_exceed,
    )


def optimality_factor_check(d: Dist, alpha: float, x: float) -> float:
    """Ratio of the order-a bound to the closed tail P(X >= x) at a support point.

    The ratio is at least one (the bound dominates the tail it controls)
    and can never exceed e^a / a for a in {1, 2}; callers assert the cap.
    """
    alpha = float(alpha)
    if alpha not in (1.0, 2.0):
        raise UnsupportedOrder(f"optimality factor applies to orders 1 and 2, got {alpha}")
    if not d.is_finite():
        raise XNotInSupport("optimality check requires a lattice law")
    xs, _ = d.atoms()
    scale = max(1.0, float(np.max(np.abs(xs))))
    if not np.any(np.abs(xs - x) <= 1e-9 * scale):
        raise XNotInSupport(f"x={x!r} is not a support point")
    gaps = np.diff(xs)
    eps = 0.5 * float(gaps.min()) if gaps.size else 0.5
    closed_tail = d.survival(x - eps)  # includes the atom at x
    return bentkus(d, x, alpha).raw / closed_tail
