"""One-dimensional minimization and monotone root finding.

Every tail bound in this package is an infimum of a convex (or at least
unimodal) function over a half line, and the splice construction needs
the rightmost zero of a non-decreasing function.  Both engines work from
function values only: the objectives built from positive-part moments of
lattice laws are piecewise polynomial with kinks, so derivative-based
methods gain nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

__all__ = [
    "MinimizeResult",
    "minimize_convex",
    "find_root_monotone",
    "NoDescent",
    "BadBracket",
]

_GOLDEN = 2.0 / (1.0 + math.sqrt(5.0))  # 0.618..., the section ratio
_EXPANSION_CAP = 2.0**60


class NoDescent(Exception):
    """Bracket expansion hit its cap while the objective kept descending."""


class BadBracket(Exception):
    """Root bracket does not satisfy f(lo) <= 0 <= f(hi)."""


@dataclass(frozen=True)
class MinimizeResult:
    argmin: float
    value: float
    status: str  # 'converged' | 'max-iter' | 'unbounded-descent'
    nfev: int


def minimize_convex(
    objective: Callable[[float], float],
    lo: Optional[float] = 0.0,
    hi: Optional[float] = None,
    *,
    init: Optional[float] = None,
    rel_tol: float = 1e-10,
    max_iter: int = 200,
    check_unimodal: bool = False,
) -> MinimizeResult:
    """Minimize a convex (unimodal is enough) function on an interval.

    ``lo`` / ``hi`` may be ``None`` for an unbounded side; the bracket is
    then grown by geometric doubling from ``init`` before golden-section
    shrinking.  The returned value is the best objective value actually
    evaluated, so it never undershoots the true infimum, and equals it to
    within ``rel_tol * (1 + |value|)``.

    When the doubling reaches 2**60 times the initial step and the
    objective is still descending by a vanishing relative amount, the
    infimum is taken to be attained in the limit and the last value is
    returned with status ``'unbounded-descent'``.  A persistent,
    non-vanishing descent instead raises :class:`NoDescent`.
    """
    if lo is not None and hi is not None and not lo < hi:
        raise ValueError(f"empty domain [{lo}, {hi}]")

    evals = [0]

    def f(x: float) -> float:
        evals[0] += 1
        return objective(x)

    status = "converged"

    if lo is not None and hi is not None:
        a, b = lo, hi
        best_x, best_f = lo, f(lo)
        fb = f(hi)
        if fb < best_f:
            best_x, best_f = hi, fb
    else:
        bracket = _expand_bracket(f, lo, hi, init)
        if bracket.unbounded:
            return MinimizeResult(bracket.best_x, bracket.best_f, "unbounded-descent", evals[0])
        a, b = bracket.a, bracket.b
        best_x, best_f = bracket.best_x, bracket.best_f
    a0, b0 = a, b

    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    iters = 0
    while iters < max_iter:
        for x, fx in ((x1, f1), (x2, f2)):
            if fx < best_f:
                best_x, best_f = x, fx
        if abs(b - a) <= rel_tol * (1.0 + abs(x1)):
            break
        if f2 > f1:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        iters += 1
    else:
        status = "max-iter"

    if check_unimodal:
        _assert_midpoint_convex(objective, a0, b0, best_f, rel_tol)
    return MinimizeResult(best_x, best_f, status, evals[0])


@dataclass
class _Bracket:
    a: float = 0.0
    b: float = 0.0
    best_x: float = 0.0
    best_f: float = math.inf
    unbounded: bool = False


def _expand_bracket(f, lo, hi, init) -> _Bracket:
    """Geometric doubling away from the bounded side (or both sides)."""
    if lo is not None:
        anchor, direction = lo, 1.0
        step0 = (init - lo) if (init is not None and init > lo) else 1.0
    elif hi is not None:
        anchor, direction = hi, -1.0
        step0 = (hi - init) if (init is not None and init < hi) else 1.0
    else:
        return _expand_two_sided(f, 0.0 if init is None else init)

    br = _Bracket()
    prev_x, prev_f = anchor, f(anchor)
    br.best_x, br.best_f = prev_x, prev_f
    prev2_x = anchor
    step = step0
    while True:
        x = anchor + direction * step
        fx = f(x)
        if fx < br.best_f:
            br.best_x, br.best_f = x, fx
        if fx >= prev_f:
            # turned upward (or flattened): bracket the minimum
            br.a, br.b = min(prev2_x, x), max(prev2_x, x)
            return br
        if step > _EXPANSION_CAP * step0:
            if abs(prev_f - fx) <= 1e-10 * (1.0 + abs(fx)):
                br.unbounded = True
                return br
            raise NoDescent(
                f"objective still descending after expanding {_EXPANSION_CAP:g}x"
            )
        prev2_x, prev_x, prev_f = prev_x, x, fx
        step *= 2.0


def _expand_two_sided(f, x0: float) -> _Bracket:
    br = _Bracket()
    step = 1.0
    f0 = f(x0)
    f_left, f_right = f(x0 - step), f(x0 + step)
    br.best_x, br.best_f = min(
        ((x0, f0), (x0 - step, f_left), (x0 + step, f_right)), key=lambda t: t[1]
    )
    if f0 <= f_left and f0 <= f_right:
        br.a, br.b = x0 - step, x0 + step
        return br
    direction = 1.0 if f_right < f_left else -1.0
    prev2_x = x0
    prev_x = x0 + direction * step
    prev_f = f_right if direction > 0 else f_left
    while True:
        step *= 2.0
        x = x0 + direction * step
        fx = f(x)
        if fx < br.best_f:
            br.best_x, br.best_f = x, fx
        if fx >= prev_f:
            br.a, br.b = min(prev2_x, x), max(prev2_x, x)
            return br
        if step > _EXPANSION_CAP:
            if abs(prev_f - fx) <= 1e-10 * (1.0 + abs(fx)):
                br.unbounded = True
                return br
            raise NoDescent(
                f"objective still descending after expanding {_EXPANSION_CAP:g}x"
            )
        prev2_x, prev_x, prev_f = prev_x, x, fx


def _assert_midpoint_convex(objective, a, b, best_f, rel_tol):
    """Debug aid: sample 16 midpoint-convexity triples across [a, b]."""
    if not (math.isfinite(a) and math.isfinite(b)) or b <= a:
        return
    import numpy as np

    xs = np.linspace(a, b, 18)
    vals = [objective(float(x)) for x in xs]
    for i in range(1, len(xs) - 1):
        mid_bound = 0.5 * (vals[i - 1] + vals[i + 1])
        if vals[i] > mid_bound + 1e-7 * (1.0 + abs(mid_bound)):
            raise AssertionError(
                f"objective not midpoint-convex near x={xs[i]:g} "
                f"({vals[i]:g} > {mid_bound:g})"
            )
    if min(vals) < best_f - rel_tol * (1.0 + abs(best_f)):
        raise AssertionError("sampled value undercuts returned minimum")


def find_root_monotone(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    x_tol: float = 1e-13,
    f_tol: float = 0.0,
) -> float:
    """Rightmost zero of a non-decreasing function on [lo, hi].

    Returns sup{q in [lo, hi] : f(q) <= f_tol} to within ``x_tol``, so a
    flat zero interval resolves deterministically to its right endpoint.
    Requires f(lo) <= f_tol; raises :class:`BadBracket` otherwise.
    """
    if not lo < hi:
        raise BadBracket(f"empty bracket [{lo}, {hi}]")
    if f(lo) > f_tol:
        raise BadBracket(f"f(lo)={f(lo)!r} > {f_tol!r}: no admissible point in bracket")
    if f(hi) <= f_tol:
        return hi
    a, b = lo, hi
    while b - a > x_tol:
        mid = 0.5 * (a + b)
        if f(mid) <= f_tol:
            a = mid
        else:
            b = mid
    return a
