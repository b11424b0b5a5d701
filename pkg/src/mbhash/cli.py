"""
Command-line front end.

Every subcommand accepts ``--config FILE`` with ``key=value`` lines whose keys
are the long flag names (``fmin=0.9``); explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import serialize
from ._validation import ParameterError
from .bell import q_to_fidelity, werner
from .bounds import BoundInputs, iid_bound
from .graph import GraphDiagonal, read_edge_list
from .hashing import ProtocolConfig, monte_carlo
from .multiparty import MultiConfig, monte_carlo_multi
from .oracle import verify
from .regimes import grid, regime_map, regime_map_csv

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def _int_like(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    return int(value)


def _int_list(text: str) -> list[int]:
    return [_int_like(t) for t in str(text).split(",") if t.strip()]


def _grid(text: str) -> np.ndarray:
    try:
        a, b, step = (float(x) for x in str(text).split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid {text!r} is not a:b:step") from None
    try:
        return grid(a, b, step)
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _common(p: argparse.ArgumentParser, formats=("csv", "json"), default="json") -> None:
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbhash", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="tabulate the finite-size confidentiality bounds")
    _common(b, default="csv")
    b.add_argument("--n", type=_int_list, default="100000", help="comma-separated list of n")
    b.add_argument("--k", type=float, default=1.0)
    b.add_argument("--fmin", type=float, default=0.90)
    b.add_argument("--fmax", type=float, default=0.95)
    b.add_argument("--delta", type=float, default=None, help="default n^(-1/5)")
    b.add_argument("--d", type=int, default=4)
    b.add_argument("--exact", action="store_true", help="exact binomial post-selection factor")

    r = sub.add_parser("regime-map", help="classify an (alpha, q) grid")
    _common(r, default="csv")
    r.add_argument("--grid", type=_grid, default="0:1:0.01", help="a:b:step for both axes")
    r.add_argument("--alpha-grid", type=_grid, default=None)
    r.add_argument("--q-grid", type=_grid, default=None)

    s = sub.add_parser("simulate", help="Monte Carlo of bipartite hashing")
    _common(s)
    s.add_argument("--n", type=_int_like, default=20)
    s.add_argument("--k", type=float, default=100.0)
    s.add_argument("--fmin", type=float, default=0.91)
    s.add_argument("--fmax", type=float, default=0.99)
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--q", type=float, default=None, help="input Werner retention (overrides --fidelity)")
    s.add_argument("--fidelity", type=float, default=0.95, help="input Werner fidelity")
    s.add_argument("--rounds", type=_int_like, default=None)
    s.add_argument("--trials", type=_int_like, default=100)
    s.add_argument("--seed", type=_int_like, default=0)
    s.add_argument("--pe-mode", choices=("raw", "calibrated"), default="calibrated")
    s.add_argument("--decode-mode", choices=("exhaustive", "typical"), default="exhaustive")
    s.add_argument("--budget", type=_int_like, default=1 << 20)
    s.add_argument("--workers", type=_int_like, default=None)
    s.add_argument("--transcript", help="line-delimited JSON per trial")

    m = sub.add_parser("simulate-multi", help="Monte Carlo of multiparty graph-state hashing")
    _common(m)
    m.add_argument("--graph", required=False, help="edge-list file")
    m.add_argument("--n", type=_int_like, default=16)
    m.add_argument("--k", type=float, default=100.0)
    m.add_argument("--delta", type=float, default=None)
    m.add_argument("--rounds-p1", type=_int_like, default=None)
    m.add_argument("--rounds-p2", type=_int_like, default=None)
    m.add_argument("--mu-flip", type=float, default=0.0, help="flip probability of each color-A bit")
    m.add_argument("--nu-flip", type=float, default=0.0, help="flip probability of each color-B bit")
    m.add_argument("--eps-mix", type=float, default=1e-3)
    m.add_argument("--eta", type=float, default=0.05)
    m.add_argument("--trials", type=_int_like, default=100)
    m.add_argument("--seed", type=_int_like, default=0)
    m.add_argument("--decode-mode", choices=("exhaustive", "typical"), default="exhaustive")
    m.add_argument("--budget", type=_int_like, default=1 << 20)
    m.add_argument("--workers", type=_int_like, default=None)
    m.add_argument("--transcript", help="line-delimited JSON per trial")

    v = sub.add_parser("verify", help="run the statevector oracle suite")
    _common(v, formats=("text", "json"), default="text")
    return parser


BOUND_COLUMNS = [
    "n", "k", "F_min", "F_max", "delta", "d",
    "a_max", "g_max", "V_at_Fmin", "x1", "log_p1", "log_p2", "log_p3",
    "log_iid_bound", "log_postselect_factor", "log_diamond_bound", "m_yield", "zero_yield",
]


def cmd_bounds(args) -> tuple[str, int]:
    rows = []
    for n in args.n:
        inputs = BoundInputs(n=n, k=args.k, F_min=args.fmin, F_max=args.fmax, delta=args.delta, d=args.d)
        row = {"n": inputs.n, "k": float(inputs.k), "F_min": inputs.F_min, "F_max": inputs.F_max, "delta": inputs.delta, "d": inputs.d}
        row.update(iid_bound(inputs, exact=args.exact).as_dict())
        rows.append(row)
    if args.format == "json":
        return serialize.dumps(rows) + "\n", EXIT_OK
    return serialize.to_csv(rows, BOUND_COLUMNS), EXIT_OK


def cmd_regime_map(args) -> tuple[str, int]:
    alphas = args.alpha_grid if args.alpha_grid is not None else args.grid
    qs = args.q_grid if args.q_grid is not None else args.grid
    points = regime_map(alphas, qs)
    if args.format == "json":
        return serialize.dumps([{"alpha": p.alpha, "q": p.q, "class": p.classification.value} for p in points]) + "\n", EXIT_OK
    return regime_map_csv(points), EXIT_OK


def _write_transcript(path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(serialize.dumps(rec.transcript()) + "\n")


def _stats_output(stats, fmt: str, header: dict) -> str:
    payload = dict(header)
    payload.update(stats.as_dict())
    if fmt == "json":
        return serialize.dumps(payload) + "\n"
    row = dict(header)
    row["trials"] = stats.trials
    for cause, count in stats.counts.items():
        row[f"count_{cause}"] = count
        row[f"rate_{cause}"] = stats.rates[cause]
    row["budget_exceeded"] = stats.budget_exceeded
    row["mean_infidelity"] = stats.mean_infidelity
    return serialize.to_csv([row], list(row))


def cmd_simulate(args) -> tuple[str, int]:
    F = q_to_fidelity(args.q) if args.q is not None else args.fidelity
    config = ProtocolConfig(
        n=args.n, k=args.k, F_min=args.fmin, F_max=args.fmax, delta=args.delta, rounds=args.rounds,
        seed=args.seed, alpha=args.alpha, pe_mode=args.pe_mode, decode_mode=args.decode_mode, budget=args.budget,
    )
    stats = monte_carlo(config, werner(F), args.trials, workers=args.workers)
    if args.transcript:
        _write_transcript(args.transcript, stats.records)
    header = {"n": config.n, "k": float(config.k), "F_min": config.F_min, "F_max": config.F_max, "delta": config.delta,
              "alpha": config.alpha, "input_fidelity": F, "seed": config.seed}
    return _stats_output(stats, args.format, header), EXIT_OK


def cmd_simulate_multi(args) -> tuple[str, int]:
    if not args.graph:
        raise ParameterError("--graph is required")
    graph = read_edge_list(args.graph)
    flips = [args.mu_flip if c == "A" else args.nu_flip for c in graph.colors]
    from .graph import product_lambda

    lam = product_lambda(flips) if any(flips) else GraphDiagonal.pure(graph.n_vertices)
    config = MultiConfig(
        n=args.n, k=args.k, delta=args.delta, rounds_p1=args.rounds_p1, rounds_p2=args.rounds_p2,
        eps_mix=args.eps_mix, eta=args.eta, seed=args.seed, decode_mode=args.decode_mode, budget=args.budget,
    )
    stats = monte_carlo_multi(config, lam, graph, args.trials, workers=args.workers)
    if args.transcript:
        _write_transcript(args.transcript, stats.records)
    header = {"n": config.n, "k": float(config.k), "delta": config.delta, "vertices": graph.n_vertices,
              "edges": [list(e) for e in graph.edges], "seed": config.seed}
    if args.format == "csv":
        header.pop("edges")
    return _stats_output(stats, args.format, header), EXIT_OK


def cmd_verify(args) -> tuple[str, int]:
    report = verify()
    code = EXIT_OK if report.ok else EXIT_CHECK_FAILED
    if args.format == "json":
        body = {"ok": report.ok, "counts": {k: list(v) for k, v in sorted(report.counts.items())}, "failures": report.failures}
        return serialize.dumps(body) + "\n", code
    lines = report.lines() + [f"overall: {'PASS' if report.ok else 'FAIL'}"]
    return "\n".join(lines) + "\n", code


COMMANDS = {
    "bounds": cmd_bounds,
    "regime-map": cmd_regime_map,
    "simulate": cmd_simulate,
    "simulate-multi": cmd_simulate_multi,
    "verify": cmd_verify,
}


def parse(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        values = read_config(args.config)
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
        for action in sub._actions:
            if isinstance(action, argparse._StoreTrueAction) and action.dest in values:
                text = values[action.dest].lower()
                if text not in ("true", "false", "1", "0", "yes", "no"):
                    raise ParameterError(f"config key {action.dest} needs a boolean, got {text!r}")
                values[action.dest] = text in ("true", "1", "yes")
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse(argv)
        text, code = COMMANDS[args.command](args)
    except (ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
