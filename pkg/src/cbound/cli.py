"""cbound: scriptable front end for the bound, splice, and verify layers.

Subcommands
    bound     evaluate one named bound at one threshold
    sweep     CSV table of bounds over an x grid
    majorant  least log-concave majorant of the centered-Poisson tail
    xi        zero-mean (or fixed-q) quantile splice as lattice CSV
    qalpha    the quantile functional Q_a(X; delta)
    verify    dp (exact enumeration) / mc (seeded Monte Carlo) / probe
    probe     alias for ``verify probe``

Outputs are JSON or CSV on stdout; every run echoes its resolved
configuration (JSON key "config", or a leading ``#`` line in CSV mode).
Exit codes: 0 success / bound holds, 1 argument or parse errors,
2 numeric failure, 3 bound violated.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from . import bounds as B
from .dists import DistError, ParseError, parse_dist
from .dominance import splice, xi_zero_mean
from .optim import NoDescent
from .verify import (
    EventSpec,
    StrategyTree,
    conjecture_probe,
    exact_report,
    iid_two_point_family,
    mc_union_prob,
)

_EXIT_OK = 0
_EXIT_USAGE = 1
_EXIT_NUMERIC = 2
_EXIT_VIOLATED = 3


class CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems via exit code 1."""

    def error(self, message):
        raise CLIError(message)


_BOUND_METHODS = (
    "chernoff",
    "bentkus",
    "freedman-binom",
    "freedman-poisson",
    "fan",
    "poisson-majorant",
    "azuma5",
    "winsorized",
    "fuk-nagaev",
)


def _build_parser() -> _Parser:
    p = _Parser(prog="cbound", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("bound", help="evaluate one bound")
    sp.add_argument("method", choices=_BOUND_METHODS)
    sp.add_argument("--x", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--v2", type=float)
    sp.add_argument("--v", type=float)
    sp.add_argument("--y", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--p-exceed", type=float, default=0.0)
    sp.add_argument("--tail-q", type=float, help="power-law tail exponent q >= 2")
    sp.add_argument("--tail-zero", action="store_true", help="bounded case g == 0")
    sp.add_argument("--dist", type=str, help="distribution mini-language spec")
    add_common(sp)

    sp = sub.add_parser("sweep", help="bounds over an x grid, CSV rows x,method,bound,optimizer")
    sp.add_argument("--methods", type=str, required=True, help="comma-separated method names")
    sp.add_argument("--x-grid", type=str, required=True, help="lo:hi:step inclusive")
    sp.add_argument("--n", type=int)
    sp.add_argument("--v2", type=float)
    sp.add_argument("--v", type=float)
    sp.add_argument("--y", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--p-exceed", type=float, default=0.0)
    sp.add_argument("--dist", type=str)
    add_common(sp)

    sp = sub.add_parser("majorant", help="least log-concave majorant of the centered-Poisson tail")
    sp.add_argument("--v2", type=float, required=True)
    sp.add_argument("--x-grid", type=str, help="optional lo:hi:step evaluation grid")
    add_common(sp)

    sp = sub.add_parser("xi", help="quantile splice of an envelope pair as lattice CSV")
    sp.add_argument("--t-dist", type=str, required=True)
    sp.add_argument("--w-dist", type=str, required=True)
    sp.add_argument("--q", type=float, help="splice level; omit for the zero-mean splice")
    add_common(sp)

    sp = sub.add_parser("qalpha", help="quantile functional Q_a(X; delta)")
    sp.add_argument("--dist", type=str, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    add_common(sp)

    for name in ("verify", "probe"):
        sp = sub.add_parser(name, help="check events against bounds")
        if name == "verify":
            sp.add_argument("mode", choices=("dp", "mc", "probe"))
        sp.add_argument("--strategy", type=str, help="strategy JSON file (dp/mc)")
        sp.add_argument("--event", choices=("freedman", "azuma", "winsorized", "conjecture"),
                        default="freedman")
        sp.add_argument("--x", type=float)
        sp.add_argument("--v2", type=float)
        sp.add_argument("--y", type=float)
        sp.add_argument("--trials", type=int, default=100_000)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--budget", type=int, default=64)
        sp.add_argument("--n", type=int, default=4, help="probe family horizon")
        sp.add_argument("--p-exceed", type=float)
        add_common(sp)
    return p


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise CLIError(f"--x-grid must be lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(v) for v in parts)
    except ValueError:
        raise CLIError(f"--x-grid has non-numeric component in {text!r}")
    if hi < lo:
        raise CLIError(f"--x-grid has hi < lo in {text!r}")
    if lo == hi:
        return [lo]
    if step <= 0.0:
        raise CLIError(f"--x-grid needs step > 0 in {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(count)]


def _require(args, flag: str):
    value = getattr(args, flag.lstrip("-").replace("-", "_"))
    if value is None:
        raise CLIError(f"missing required flag {flag}")
    return value


def _eval_bound(method: str, args, x: float) -> B.BoundResult:
    if method == "chernoff":
        return B.chernoff(parse_dist(_require(args, "--dist")), x)
    if method == "bentkus":
        return B.bentkus(parse_dist(_require(args, "--dist")), x, _require(args, "--alpha"))
    if method == "freedman-binom":
        return B.freedman_bentkus_binom(_require(args, "--n"), _require(args, "--v2"), x)
    if method == "freedman-poisson":
        return B.freedman_bentkus_poisson(_require(args, "--v2"), x)
    if method == "fan":
        return B.fan_chernoff(_require(args, "--n"), _require(args, "--v2"), x)
    if method == "poisson-majorant":
        return B.poisson_majorant_bound(_require(args, "--v2"), x)
    if method == "azuma5":
        return B.azuma_bentkus5(_require(args, "--v"), x)
    if method == "winsorized":
        return B.winsorized_freedman(
            _require(args, "--v2"), x, _require(args, "--y"), args.p_exceed
        )
    raise CLIError(f"method {method!r} is not available here")


def _config_dict(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "command" and v is not None}
    cfg["command"] = args.command
    return cfg


def _emit_json(args, payload: dict) -> None:
    print(json.dumps({"config": _config_dict(args), **payload}, separators=(", ", ": ")))


def _emit_csv(args, header: str, rows: list[str]) -> None:
    print("# config:", json.dumps(_config_dict(args), separators=(",", ":")))
    print(header)
    for row in rows:
        print(row)


# ---------------------------------------------------------------------------
# Subcommand drivers
# ---------------------------------------------------------------------------


def _cmd_bound(args) -> int:
    if args.method == "fuk-nagaev":
        v = _require(args, "--v")
        delta = _require(args, "--delta")
        y = _require(args, "--y")
        if args.tail_zero:
            tail = lambda t: 0.0
        else:
            tail = _require(args, "--tail-q")
        x1, x2 = B.fuk_nagaev_threshold(v, delta, y, tail)
        result = {
            "method": "FukNagaev",
            "raw": delta,
            "bound": delta,
            "optimizer": x1 + x2,
            "status": "closed-form",
        }
        payload = {"result": result, "x1": x1, "x2": x2}
        see_status = "closed-form"
    else:
        x = _require(args, "--x")
        res = _eval_bound(args.method, args, x)
        payload = {"result": res.to_json_dict()}
        see_status = res.status
    if args.format == "csv":
        r = payload["result"]
        _emit_csv(args, "x,method,bound,optimizer",
                  [f"{getattr(args, 'x', 0.0) or 0.0:.17g},{r['method']},{r['bound']:.17g},{r['optimizer']:.17g}"])
    else:
        _emit_json(args, payload)
    return _EXIT_OK if see_status != "max-iter" else _EXIT_NUMERIC


def _cmd_sweep(args) -> int:
    methods = [m for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise CLIError("--methods must name at least one method")
    for m in methods:
        if m not in _BOUND_METHODS or m == "fuk-nagaev":
            raise CLIError(f"unknown sweep method {m!r}")
    grid = _parse_grid(args.x_grid)
    rows = []
    for x in grid:
        for method in sorted(methods):
            res = _eval_bound(method, args, x)
            rows.append((x, method, res.bound, res.optimizer))
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = [f"{x:.17g},{m},{b:.17g},{o:.17g}" for x, m, b, o in rows]
    if args.format == "json":
        _emit_json(args, {"rows": [
            {"x": x, "method": m, "bound": b, "optimizer": o} for x, m, b, o in rows
        ]})
    else:
        _emit_csv(args, "x,method,bound,optimizer", lines)
    return _EXIT_OK


def _cmd_majorant(args) -> int:
    maj = B._poisson_majorant(args.v2)
    knots = [[float(x), float(math.exp(l))] for x, l in zip(maj.knots_x, maj.knots_log)]
    hull = [[float(x), float(l)] for x, l in zip(maj.hull_x, maj.hull_log)]
    values = None
    if args.x_grid:
        values = [[x, maj(x)] for x in _parse_grid(args.x_grid)]
    if args.format == "csv":
        pts = values if values is not None else [[x, math.exp(l)] for x, l in hull]
        _emit_csv(args, "x,majorant", [f"{x:.17g},{s:.17g}" for x, s in pts])
    else:
        payload = {"knots": knots, "hull": hull}
        if values is not None:
            payload["values"] = values
        _emit_json(args, payload)
    return _EXIT_OK


def _cmd_xi(args) -> int:
    T = parse_dist(args.t_dist)
    W = parse_dist(args.w_dist)
    sp = splice(T, W, args.q) if args.q is not None else xi_zero_mean(T, W)
    xs, ps = sp.law.atoms()
    if args.format == "json":
        _emit_json(args, {
            "q": sp.q, "a_q": sp.a_q, "b_q": sp.b_q,
            "lower_tail_caveat": sp.lower_tail_caveat,
            "values": [float(v) for v in xs], "probs": [float(p) for p in ps],
        })
    else:
        _emit_csv(args, "value,prob", [f"{v:.17g},{p:.17g}" for v, p in zip(xs, ps)])
    return _EXIT_OK


def _cmd_qalpha(args) -> int:
    value = B.q_alpha(parse_dist(args.dist), args.delta, args.alpha)
    if args.format == "csv":
        _emit_csv(args, "delta,alpha,q_alpha", [f"{args.delta:.17g},{args.alpha:.17g},{value:.17g}"])
    else:
        _emit_json(args, {"q_alpha": value})
    return _EXIT_OK


def _cmd_verify(args) -> int:
    mode = getattr(args, "mode", "probe")
    if mode == "probe":
        x = _require(args, "--x")
        v2 = _require(args, "--v2")
        y = _require(args, "--y")
        family = iid_two_point_family(args.n, grid=max(args.budget, 1), a_lo=-v2, a_hi=-0.01)
        report = conjecture_probe(family, x, v2, y, args.budget)
        _emit_json(args, {"result": report.to_json_dict()})
        return _EXIT_OK
    strategy = StrategyTree.from_json_file(_require(args, "--strategy"))
    ev = EventSpec(args.event, _require(args, "--x"), _require(args, "--v2"), args.y)
    if mode == "dp":
        report = exact_report(strategy, ev, p_exceed=args.p_exceed)
    else:
        report = mc_union_prob(
            strategy, ev, args.trials, args.seed,
            p_exceed=args.p_exceed, workers=args.workers,
        )
    _emit_json(args, {"result": report.to_json_dict()})
    return _EXIT_OK if report.passed else _EXIT_VIOLATED


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except CLIError as exc:
        print(f"cbound: error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    try:
        if args.command == "bound":
            return _cmd_bound(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "majorant":
            return _cmd_majorant(args)
        if args.command == "xi":
            return _cmd_xi(args)
        if args.command == "qalpha":
            return _cmd_qalpha(args)
        return _cmd_verify(args)
    except (CLIError, ParseError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"cbound: error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except (DistError, NoDescent, B.CrossCheckError, ValueError, OverflowError) as exc:
        print(f"cbound: numeric failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
