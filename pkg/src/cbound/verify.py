"""Ground truth for the bounds: exact enumeration and seeded Monte Carlo.

A :class:`StrategyTree` is a finite-horizon, finitely supported,
possibly adaptive supermartingale increment strategy: at every node the
conditional law has mean <= 0.  Exact union probabilities

    P( union over k of { S_k >= x  and  variance gate at k <= v2 } )

are computed by depth-first enumeration with first-hitting pruning and
compensated summation, so they are exact up to float rounding and
invariant under path reordering.  Monte Carlo estimates are sharded over
64 fixed substreams derived from the seed, which makes reports
byte-identical for a given (seed, trials) regardless of worker count.

Four event gates are supported:

* ``freedman``    sum of conditional second moments <= v2
* ``azuma``       sum of s_i^2 <= v2 with s_i = (B_i + sigma_i^2/B_i)/2
* ``winsorized``  same gate as ``freedman``; the level y enters through
                  the matching bound (scaled Poisson term plus the
                  probability that some increment exceeds y)
* ``conjecture``  sum of E[X_i^2 1{X_i <= y}] plus realized X_i^2 1{X_i > y} <= v2
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

import numpy as np
from scipy import stats

from .bounds import BoundResult, azuma_bentkus5, bentkus, freedman_bentkus_binom, winsorized_freedman, _result
from .dists import CenteredPoisson, Dist, Lattice

__all__ = [
    "StrategyTree",
    "EventSpec",
    "VerifyReport",
    "ProbeReport",
    "exact_union_prob",
    "exact_exceed_prob",
    "exact_report",
    "mc_union_prob",
    "adversarial_search",
    "conjecture_probe",
    "doob_demo",
    "matching_bound",
    "clopper_pearson_upper",
    "iid_two_point_family",
    "TreeTooLarge",
]

MAX_HORIZON = 12
MAX_PATHS = 10_000_000
_N_SHARDS = 64
_CI_LEVEL = 1e-6  # one-sided Clopper-Pearson at confidence 1 - 1e-6

# bounds are evaluated to ~1 ulp; equality-tight cases (the bound is sharp
# at support points) must not flip on that noise
_PASS_SLACK = 1e-12


def _passes(prob: float, bound: float) -> bool:
    return prob <= bound + _PASS_SLACK * (1.0 + bound)

EVENT_KINDS = ("freedman", "azuma", "winsorized", "conjecture")


class TreeTooLarge(ValueError):
    """Enumeration would exceed the path or horizon budget."""


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Node:
    law: Dist
    children: Optional[tuple[Optional["_Node"], ...]]  # None -> stop after this step


class StrategyTree:
    """Adaptive increment strategy over a finite horizon.

    Backed either by per-step laws (non-adaptive, enables the vectorized
    Monte Carlo fast path), by an explicit node tree whose children are
    indexed by outcome rank, or by a callable ``fn(step, history) ->
    law or None`` which is materialized on demand.  A ``None`` law or a
    missing child stops the strategy early (all later increments zero).
    """

    def __init__(self, horizon: int, *, step_laws=None, root: Optional[_Node] = None,
                 law_fn=None):
        horizon = int(horizon)
        if not 1 <= horizon <= MAX_HORIZON:
            raise TreeTooLarge(f"horizon must lie in [1, {MAX_HORIZON}], got {horizon}")
        given = sum(v is not None for v in (step_laws, root, law_fn))
        if given != 1:
            raise ValueError("exactly one of step_laws, root, law_fn is required")
        self.horizon = horizon
        self.step_laws = list(step_laws) if step_laws is not None else None
        self.root = root
        self.law_fn = law_fn
        if self.step_laws is not None:
            if len(self.step_laws) != horizon:
                raise ValueError("need one law per step")
            for law in self.step_laws:
                _check_node_law(law)
        if self.root is not None:
            _walk_validate(self.root, horizon)

    # -- constructors --------------------------------------------------------

    @classmethod
    def iid(cls, law: Dist, horizon: int) -> "StrategyTree":
        return cls(horizon, step_laws=[law] * int(horizon))

    @classmethod
    def from_steps(cls, laws: Sequence[Dist]) -> "StrategyTree":
        return cls(len(laws), step_laws=list(laws))

    @classmethod
    def adaptive(cls, horizon: int, law_fn: Callable[[int, tuple], Optional[Dist]]) -> "StrategyTree":
        return cls(horizon, law_fn=law_fn)

    # -- JSON round trip ------------------------------------------------------

    @classmethod
    def from_json_dict(cls, data: dict) -> "StrategyTree":
        horizon = data["horizon"]
        if "iid" in data:
            return cls.iid(_law_from_json(data["iid"]), horizon)
        if "steps" in data:
            return cls.from_steps([_law_from_json(law) for law in data["steps"]])
        if "root" in data:
            return cls(horizon, root=_node_from_json(data["root"]))
        raise ValueError("strategy JSON needs one of 'iid', 'steps', 'root'")

    @classmethod
    def from_json_file(cls, path: str) -> "StrategyTree":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def to_json_dict(self) -> dict:
        if self.step_laws is not None:
            laws = [_law_to_json(law) for law in self.step_laws]
            if all(law == laws[0] for law in laws[1:]):
                return {"horizon": self.horizon, "iid": laws[0]}
            return {"horizon": self.horizon, "steps": laws}
        return {"horizon": self.horizon, "root": _node_to_json(self._materialize())}

    # -- structure ------------------------------------------------------------

    def law_at(self, step: int, history: tuple) -> Optional[Dist]:
        """Conditional increment law after ``history`` (outcome indices)."""
        if step >= self.horizon:
            return None
        if self.step_laws is not None:
            return self.step_laws[step]
        if self.root is not None:
            node = self.root
            for idx in history:
                if node.children is None:
                    return None
                node = node.children[idx]
                if node is None:
                    return None
            return node.law
        values = []
        node_law = None
        for depth, idx in enumerate(history + (None,)):
            node_law = self.law_fn(depth, tuple(values))
            if node_law is None:
                return None
            if idx is None:
                break
            values.append(float(node_law.atoms()[0][idx]))
        _check_node_law(node_law)
        return node_law

    def is_memoryless(self) -> bool:
        return self.step_laws is not None

    def _materialize(self) -> _Node:
        """Explicit node tree (needed for tree-walk Monte Carlo and JSON)."""
        if self.root is not None:
            return self.root
        count = [0]

        def build(step: int, history: tuple) -> Optional[_Node]:
            law = self.law_at(step, history)
            if law is None:
                return None
            count[0] += 1
            if count[0] > MAX_PATHS:
                raise TreeTooLarge("materialized tree exceeds the path budget")
            if step + 1 == self.horizon:
                return _Node(law, None)
            kids = tuple(build(step + 1, history + (i,)) for i in range(law.atoms()[0].size))
            return _Node(law, kids)

        root = build(0, ())
        if root is None:
            raise ValueError("strategy stops before its first step")
        return root


def _check_node_law(law: Dist) -> None:
    if not law.is_finite():
        raise ValueError("node laws must be finitely supported")
    mean = law.mean()
    _, var = law.mean_var()
    if mean > 1e-12 * (1.0 + math.sqrt(var)):
        raise ValueError(f"node law has positive conditional mean {mean:g}")


def _walk_validate(node: _Node, horizon: int, depth: int = 0) -> None:
    if depth >= horizon:
        raise TreeTooLarge("tree deeper than its declared horizon")
    _check_node_law(node.law)
    if node.children is not None:
        n_out = node.law.atoms()[0].size
        if len(node.children) != n_out:
            raise ValueError("children must align with the sorted node support")
        for child in node.children:
            if child is not None:
                _walk_validate(child, horizon, depth + 1)


def _law_to_json(law: Dist) -> dict:
    xs, ps = law.atoms()
    return {"values": [float(v) for v in xs], "probs": [float(p) for p in ps]}


def _law_from_json(data: dict) -> Lattice:
    return Lattice(data["values"], data["probs"])


def _node_to_json(node: _Node) -> dict:
    out = {"law": _law_to_json(node.law)}
    if node.children is not None:
        out["children"] = [None if c is None else _node_to_json(c) for c in node.children]
    return out


def _node_from_json(data: dict) -> _Node:
    law = _law_from_json(data["law"])
    children = data.get("children")
    if children is None:
        return _Node(law, None)
    return _Node(law, tuple(None if c is None else _node_from_json(c) for c in children))


# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EventSpec:
    """Union event: some prefix has S_k >= x while its variance gate holds."""

    kind: str
    x: float
    v2: float
    y: Optional[float] = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.x < 0.0 or self.v2 <= 0.0:
            raise ValueError("require x >= 0 and v2 > 0")
        if self.kind in ("winsorized", "conjecture") and (self.y is None or self.y <= 0.0):
            raise ValueError(f"{self.kind} events need a winsorization level y > 0")

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "x": self.x, "v2": self.v2, "y": self.y}


def _node_gate_stats(law: Dist, ev: EventSpec) -> tuple[float, float]:
    """Per-node deterministic gate increment and helper constant.

    Returns (gate_step, threshold_y): for 'freedman'/'winsorized' the
    conditional second moment; for 'azuma' s_i^2; for 'conjecture' the
    truncated second moment E[X^2 1{X <= y}] (realized spikes are added
    path by path).
    """
    xs, ps = law.atoms()
    second = float(np.dot(ps, xs * xs))
    if ev.kind == "azuma":
        b = float(xs[-1])
        if b <= 0.0:
            # any positive a.s. bound is legal; B = sigma minimizes s_i
            b = math.sqrt(second) if second > 0.0 else 1.0
        s = 0.5 * (b + second / b)
        return s * s, math.inf
    if ev.kind == "conjecture":
        mask = xs <= ev.y
        return float(np.dot(ps[mask], xs[mask] ** 2)), ev.y
    return second, math.inf


def matching_bound(ev: EventSpec, horizon: int, p_exceed: Optional[float] = None) -> BoundResult:
    """The bound each event kind is verified against."""
    if ev.kind == "freedman":
        return freedman_bentkus_binom(horizon, ev.v2, ev.x)
    if ev.kind == "azuma":
        return azuma_bentkus5(math.sqrt(ev.v2), ev.x)
    if ev.kind == "winsorized":
        if p_exceed is None:
            raise ValueError("winsorized bound needs p_exceed")
        return winsorized_freedman(ev.v2, ev.x, ev.y, p_exceed)
    res = bentkus(CenteredPoisson(ev.v2, ev.y), ev.x, 2)
    return _result("Winsorized", res.raw, res.optimizer, res.status)


# ---------------------------------------------------------------------------
# Exact enumeration
# ---------------------------------------------------------------------------


def exact_union_prob(strat: StrategyTree, ev: EventSpec) -> float:
    """Exact P(union of prefix events) by first-hitting path enumeration.

    Each path's probability is accumulated at the first prefix where the
    event holds; the hit probabilities are combined with exactly rounded
    summation, so the result does not depend on traversal order.
    """
    hits: list[float] = []
    paths = [0]

    def rec(step: int, history: tuple, s: float, gate: float, p: float) -> None:
        law = strat.law_at(step, history)
        if law is None:
            return
        gate_step, y = _node_gate_stats(law, ev)
        xs, ps = law.atoms()
        for i in range(xs.size):
            pi = float(ps[i])
            if pi == 0.0:
                continue
            xi = float(xs[i])
            s2 = s + xi
            gate2 = gate + gate_step
            if ev.kind == "conjecture" and xi > y:
                gate2 += xi * xi
            if s2 >= ev.x and gate2 <= ev.v2:
                hits.append(p * pi)
                continue
            paths[0] += 1
            if paths[0] > MAX_PATHS:
                raise TreeTooLarge("path count exceeds the enumeration budget")
            rec(step + 1, history + (i,), s2, gate2, p * pi)

    rec(0, (), 0.0, 0.0, 1.0)
    return math.fsum(hits)


def exact_exceed_prob(strat: StrategyTree, y: float) -> float:
    """Exact P(some increment exceeds y), for winsorized bound assembly."""
    hits: list[float] = []

    def rec(step: int, history: tuple, p: float) -> None:
        law = strat.law_at(step, history)
        if law is None:
            return
        xs, ps = law.atoms()
        for i in range(xs.size):
            pi = float(ps[i])
            if pi == 0.0:
                continue
            if float(xs[i]) > y:
                hits.append(p * pi)
                continue
            rec(step + 1, history + (i,), p * pi)

    rec(0, (), 1.0)
    return math.fsum(hits)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerifyReport:
    """Exact or estimated event probability against a bound."""

    event: dict
    bound: float
    passed: bool
    exact: Optional[float] = None
    estimate: Optional[float] = None
    ci_upper: Optional[float] = None
    trials: Optional[int] = None
    seed: Optional[int] = None

    def to_json_dict(self) -> dict:
        return {
            "event": self.event,
            "exact": self.exact,
            "estimate": self.estimate,
            "ci_upper": self.ci_upper,
            "trials": self.trials,
            "seed": self.seed,
            "bound": self.bound,
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(", ", ": "))


def clopper_pearson_upper(successes: int, trials: int, level: float = _CI_LEVEL) -> float:
    """One-sided exact binomial upper confidence bound at confidence 1 - level."""
    if successes >= trials:
        return 1.0
    return float(stats.beta.ppf(1.0 - level, successes + 1, trials - successes))


def _shard_sizes(trials: int) -> list[int]:
    base, rem = divmod(trials, _N_SHARDS)
    return [base + (1 if i < rem else 0) for i in range(_N_SHARDS)]


def _simulate_shard_steps(strat: StrategyTree, ev: EventSpec, size: int, rng) -> int:
    """Vectorized union-event count for per-step (non-adaptive) strategies."""
    if size == 0:
        return 0
    s = np.zeros(size)
    hit = np.zeros(size, dtype=bool)
    extra = np.zeros(size)  # realized conjecture spikes
    gate = 0.0
    for law in strat.step_laws:
        xs, ps = law.atoms()
        cdf = np.cumsum(ps)
        gate_step, y = _node_gate_stats(law, ev)
        gate += gate_step
        draws = xs[np.searchsorted(cdf, rng.random(size), side="right").clip(max=xs.size - 1)]
        s += draws
        if ev.kind == "conjecture":
            extra += np.where(draws > y, draws * draws, 0.0)
        hit |= (s >= ev.x) & (gate + extra <= ev.v2)
    return int(hit.sum())


def _simulate_shard_tree(strat: StrategyTree, ev: EventSpec, size: int, rng) -> int:
    """Adaptive fallback: walk the materialized tree with node-pointer blocks."""
    if size == 0:
        return 0
    root = strat._materialize()
    nodes: list[_Node] = []

    def index(node: _Node) -> int:
        nodes.append(node)
        return len(nodes) - 1

    root_id = index(root)
    s = np.zeros(size)
    gate = np.zeros(size)
    hit = np.zeros(size, dtype=bool)
    cur = np.full(size, root_id, dtype=np.int64)
    child_ids: dict[tuple[int, int], int] = {}
    for _ in range(strat.horizon):
        active = np.flatnonzero((cur >= 0) & ~hit)
        if active.size == 0:
            break
        # process node blocks in sorted id order so the rng call sequence
        # is a pure function of the seed
        order = np.argsort(cur[active], kind="stable")
        active = active[order]
        for node_id in np.unique(cur[active]):
            block = active[cur[active] == node_id]
            node = nodes[node_id]
            xs, ps = node.law.atoms()
            cdf = np.cumsum(ps)
            gate_step, y = _node_gate_stats(node.law, ev)
            idx = np.searchsorted(cdf, rng.random(block.size), side="right").clip(max=xs.size - 1)
            draws = xs[idx]
            s[block] += draws
            gate[block] += gate_step
            if ev.kind == "conjecture":
                spike = np.where(draws > y, draws * draws, 0.0)
                gate[block] += spike
            hit[block] |= (s[block] >= ev.x) & (gate[block] <= ev.v2)
            if node.children is None:
                cur[block] = -1
            else:
                for out in range(xs.size):
                    sub = block[idx == out]
                    if sub.size == 0:
                        continue
                    key = (node_id, out)
                    if key not in child_ids:
                        child = node.children[out]
                        child_ids[key] = -1 if child is None else index(child)
                    cur[sub] = child_ids[key]
    return int(hit.sum())


def mc_union_prob(
    strat: StrategyTree,
    ev: EventSpec,
    trials: int,
    seed: int,
    *,
    bound: Optional[float] = None,
    p_exceed: Optional[float] = None,
    workers: Optional[int] = None,
) -> VerifyReport:
    """Seeded Monte Carlo estimate of the union event, with exact CI.

    Trials are split across 64 fixed substreams (spawn keys of ``seed``),
    each simulated independently; counts merge in substream order, so the
    report is byte-identical for any worker count.  ``workers`` defaults
    to the CBOUND_THREADS environment variable, then 1.
    """
    trials = int(trials)
    if trials < 10_000:
        raise ValueError("trials must be at least 10^4")
    if bound is None:
        if ev.kind == "winsorized" and p_exceed is None:
            p_exceed = exact_exceed_prob(strat, ev.y)
        bound = matching_bound(ev, strat.horizon, p_exceed).bound
    sizes = _shard_sizes(trials)
    simulate = _simulate_shard_steps if strat.is_memoryless() else _simulate_shard_tree

    def run_shard(i: int) -> int:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        return simulate(strat, ev, sizes[i], rng)

    if workers is None:
        workers = int(os.environ.get("CBOUND_THREADS", "1"))
    if workers <= 1:
        counts = [run_shard(i) for i in range(_N_SHARDS)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run_shard, range(_N_SHARDS)))
    successes = int(sum(counts))
    estimate = successes / trials
    ci = clopper_pearson_upper(successes, trials)
    return VerifyReport(
        event=ev.to_json_dict(),
        bound=float(bound),
        passed=_passes(ci, bound),
        estimate=estimate,
        ci_upper=ci,
        trials=trials,
        seed=int(seed),
    )


def exact_report(strat: StrategyTree, ev: EventSpec, *, bound: Optional[float] = None,
                 p_exceed: Optional[float] = None) -> VerifyReport:
    """Exact enumeration wrapped in the same report schema as Monte Carlo."""
    if bound is None:
        if ev.kind == "winsorized" and p_exceed is None:
            p_exceed = exact_exceed_prob(strat, ev.y)
        bound = matching_bound(ev, strat.horizon, p_exceed).bound
    prob = exact_union_prob(strat, ev)
    return VerifyReport(
        event=ev.to_json_dict(), bound=float(bound), passed=_passes(prob, float(bound)), exact=prob
    )


# ---------------------------------------------------------------------------
# Adversarial search and the conjecture probe
# ---------------------------------------------------------------------------


def iid_two_point_family(
    n: int, grid: int = 33, b: float = 1.0, a_lo: float = -2.0, a_hi: float = -0.01
) -> Iterator[StrategyTree]:
    """i.i.d. mean-zero two-point strategies {a, b} over a grid of a."""
    from .dists import TwoPoint

    for a in np.linspace(a_lo, a_hi, grid):
        yield StrategyTree.iid(TwoPoint.zero_mean(float(a), b), n)


def adversarial_search(
    family: Iterable[StrategyTree],
    ev: EventSpec,
    budget: int,
    *,
    bound: Optional[float] = None,
) -> tuple[StrategyTree, float]:
    """Maximize the exact union probability over a strategy family.

    Evaluates at most ``budget`` members (a non-positive budget falls
    back to the family's first member).  When ``bound`` is given, a
    maximizer exceeding it raises, since that would disprove the bound.
    """
    it = iter(family)
    first = next(it)
    best, best_prob = first, exact_union_prob(first, ev)
    evaluated = 1
    for strat in it:
        if evaluated >= budget:
            break
        prob = exact_union_prob(strat, ev)
        evaluated += 1
        if prob > best_prob:
            best, best_prob = strat, prob
    if bound is not None and best_prob > bound + 1e-12:
        raise AssertionError(
            f"adversarial strategy beats the bound: {best_prob!r} > {bound!r}"
        )
    return best, best_prob


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of a conjecture exploration: max LHS/RHS ratio over a family.

    ``flagged`` means some float-precision ratio exceeded 1 + 1e-6;
    ``confirmed`` reports whether the 50-digit recheck still exceeds one
    (None when nothing was flagged).  A flagged probe is a counterexample
    *candidate*, never an automatic disproof.
    """

    max_ratio: float
    rhs: float
    best_lhs: float
    n_evaluated: int
    flagged: bool
    confirmed: Optional[bool] = None
    best_strategy: Optional[dict] = None

    def to_json_dict(self) -> dict:
        return {
            "max_ratio": self.max_ratio,
            "rhs": self.rhs,
            "best_lhs": self.best_lhs,
            "n_evaluated": self.n_evaluated,
            "flagged": self.flagged,
            "confirmed": self.confirmed,
            "best_strategy": self.best_strategy,
        }


def conjecture_probe(
    family: Iterable[StrategyTree], x: float, v2: float, y: float, budget: int
) -> ProbeReport:
    """Probe the conjectured second-order bound for randomly gated variance.

    The candidate inequality bounds the union event with gate
    sum E[X^2 1{X<=y}] + sum X^2 1{X>y} <= v2 by the order-2 moment bound
    at the scaled centered Poisson law.  The probe reports the largest
    exact-LHS / RHS ratio across the family; the RHS evaluation can only
    overestimate the true infimum, so any reported ratio above one is a
    genuine float-level candidate and is escalated to 50-digit
    arithmetic before being confirmed.
    """
    ev = EventSpec("conjecture", x, v2, y)
    rhs_res = bentkus(CenteredPoisson(v2, y), x, 2)
    rhs = rhs_res.raw
    best_ratio, best_lhs, best_strat = -math.inf, 0.0, None
    evaluated = 0
    for strat in family:
        if evaluated >= max(budget, 1):
            break
        lhs = exact_union_prob(strat, ev)
        evaluated += 1
        ratio = lhs / rhs if rhs > 0 else math.inf
        if ratio > best_ratio:
            best_ratio, best_lhs, best_strat = ratio, lhs, strat
    flagged = best_ratio > 1.0 + 1e-6
    confirmed = None
    if flagged:
        confirmed = _recheck_mpmath(best_strat, ev, rhs_res.optimizer)
    return ProbeReport(
        max_ratio=float(best_ratio),
        rhs=float(rhs),
        best_lhs=float(best_lhs),
        n_evaluated=evaluated,
        flagged=flagged,
        confirmed=confirmed,
        best_strategy=None if best_strat is None else best_strat.to_json_dict(),
    )


def _recheck_mpmath(strat: StrategyTree, ev: EventSpec, lam_star: float) -> bool:
    """50-digit recheck of a flagged ratio; True only if it survives.

    The RHS is re-minimized on a multiplicative lambda grid around the
    float optimizer; a grid minimum can only overestimate the infimum, so
    LHS > grid minimum still implies LHS > infimum.
    """
    import mpmath as mp

    with mp.workdps(50):
        hits = []

        def rec(step, history, s, gate, p):
            law = strat.law_at(step, history)
            if law is None:
                return
            gate_step, y = _node_gate_stats(law, ev)
            xs, ps = law.atoms()
            for i in range(xs.size):
                pi = mp.mpf(float(ps[i]))
                xi = float(xs[i])
                s2, gate2 = s + xi, gate + gate_step
                if xi > y:
                    gate2 += xi * xi
                if s2 >= ev.x and gate2 <= ev.v2:
                    hits.append(p * pi)
                    continue
                rec(step + 1, history + (i,), s2, gate2, p * pi)

        rec(0, (), 0.0, 0.0, mp.mpf(1))
        lhs = mp.fsum(hits)

        m = mp.mpf(ev.v2) / mp.mpf(ev.y)
        pmf, k = [], 0
        term = mp.e ** (-m)
        total = term
        while total < 1 - mp.mpf("1e-40"):
            pmf.append(term)
            k += 1
            term = term * m / k
            total += term
        pmf.append(term)
        vals = [ev.y * (j - m) for j in range(len(pmf))]

        def rhs_at(lam):
            lam = mp.mpf(lam)
            return mp.fsum(
                p * max(0, 1 + lam / 2 * (v - ev.x)) ** 2 for p, v in zip(pmf, vals)
            )

        grid = [lam_star * (10 ** (e / 40.0)) for e in range(-80, 81)]
        rhs = min(rhs_at(l) for l in grid if l > 0)
        return lhs > rhs


# ---------------------------------------------------------------------------
# Doob decomposition demo for functions of independent inputs
# ---------------------------------------------------------------------------


def doob_demo(
    f: Callable[[np.ndarray], np.ndarray],
    input_sampler: Callable[[np.random.Generator, int], np.ndarray],
    xi_laws: Sequence[Dist],
    x: float,
    trials: int,
    seed: int,
) -> VerifyReport:
    """Estimate P(F(inputs) - E[F] >= x) against the envelope-splice bound.

    E[F] is estimated on an independent substream; the tail is counted
    against a 6-standard-error *lower* confidence value for the mean, so
    the counted event contains the true one and the Clopper-Pearson upper
    bound stays conservative.
    """
    from .dominance import corollary_bound

    trials = int(trials)
    rng_mean = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    rng_tail = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    m = max(trials // 4, 10_000)
    z_mean = np.asarray(f(input_sampler(rng_mean, m)), dtype=np.float64)
    mean_hat = float(z_mean.mean())
    mean_lo = mean_hat - 6.0 * float(z_mean.std(ddof=1)) / math.sqrt(m)
    z = np.asarray(f(input_sampler(rng_tail, trials)), dtype=np.float64)
    successes = int(np.count_nonzero(z - mean_lo >= x))
    estimate = successes / trials
    ci = clopper_pearson_upper(successes, trials)
    bound = corollary_bound(xi_laws, x)
    return VerifyReport(
        event={"kind": "doob", "x": float(x), "v2": None, "y": None},
        bound=bound.bound,
        passed=_passes(ci, bound.bound),
        estimate=estimate,
        ci_upper=ci,
        trials=trials,
        seed=int(seed),
    )
