"""Command-line entry point.

Exit codes: 0 success, 1 invalid input (bad flags, malformed files), 2 a
``verify`` suite reported failures.
"""
from __future__ import annotations

import argparse
import io
import secrets
import sys
import time
from contextlib import contextmanager

from .lpsolver import load_lp, solve_lp
from .lpsolver import summary_csv as lp_summary_csv
from .lpsolver import write_trace_csv as lp_write_trace
from .model import load_scenario
from .oracle import SUITES, run_suite
from .policy import PolicyKind
from .simulator import run, summary_csv, sweep_v, write_trace_csv

DEFAULT_SEED = 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class UsageError(ValueError):
    pass


RANDOM = "random"


def _seed(text: str) -> "int | str":
    if text == RANDOM:
        return RANDOM
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer or 'random', got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError("V must be >= 0")
    return v


def _split(values: list[str]) -> list[str]:
    return [p for v in values for p in v.split(",") if p]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qoisim", description="Quality-of-information network simulator and LP solver.")
    sub = p.add_subparsers(dest="verb", metavar="{simulate,sweep,lp-solve,verify}")
    sub.required = True

    s = sub.add_parser("simulate", help="run one scenario under one policy")
    s.add_argument("scenario")
    s.add_argument("--policy", default="quadratic")
    s.add_argument("--V", type=_nonneg_float, default=None, help="defaults to the scenario's V")
    s.add_argument("--horizon", type=_positive_int, default=None)
    s.add_argument("--seed", type=_seed, default=None,
                   help="integer or 'random'; defaults to the scenario's seed")
    s.add_argument("--burn-in", type=int, default=0)
    s.add_argument("--trace", action="store_true", help="emit the per-slot trace before the summary")
    s.add_argument("--output", default=None, help="write CSV here instead of stdout")

    w = sub.add_parser("sweep", help="run the V x policy x seed grid")
    w.add_argument("scenario")
    w.add_argument("--V", nargs="+", required=True, help="values, space or comma separated")
    w.add_argument("--policy", nargs="+", default=["quadratic", "maxweight"])
    w.add_argument("--seed", nargs="+", default=None,
                   help="one or more seeds or 'random'; defaults to the scenario's seed")
    w.add_argument("--horizon", type=_positive_int, default=None)
    w.add_argument("--burn-in", type=int, default=0)
    w.add_argument("--output", default=None)

    lp = sub.add_parser("lp-solve", help="solve an LP by virtual-queue iteration")
    lp.add_argument("lp")
    lp.add_argument("--policy", default="quadratic")
    lp.add_argument("--V", type=_nonneg_float, required=True)
    lp.add_argument("--iters", type=_positive_int, required=True)
    lp.add_argument("--trace", action="store_true", help="emit per-iteration rows before the summary")
    lp.add_argument("--output", default=None)

    v = sub.add_parser("verify", help="run randomized self-checks")
    v.add_argument("--suite", choices=("all",) + SUITES, default="all")
    v.add_argument("--samples", type=_positive_int, default=None)
    v.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    return p


DEFAULT_SAMPLES = {"oracle": 200, "lemma1": 10000, "lemma3": 20, "drift": 2000}


@contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        # build in memory so a failed run leaves no partial file
        buf = io.StringIO()
        yield buf
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())


def _resolve_seed(seed: "int | str | None") -> int | None:
    return secrets.randbits(32) if seed == RANDOM else seed


def _policy(text: str) -> PolicyKind:
    try:
        return PolicyKind.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario)
    res = run(sc, _policy(args.policy), V=args.V, horizon=args.horizon, seed=_resolve_seed(args.seed),
              burn_in=args.burn_in, trace=args.trace)
    with _sink(args.output) as out:
        if res.trace is not None:
            write_trace_csv(out, res.trace)
            out.write("\n")
        out.write(summary_csv([res.metrics]))
    return 0


def _cmd_sweep(args) -> int:
    sc = load_scenario(args.scenario)
    try:
        vs = [float(v) for v in _split(args.V)]
        seeds = None if args.seed is None else [_resolve_seed(_seed(s)) for s in _split(args.seed)]
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(str(exc)) from None
    if any(v < 0 for v in vs):
        raise UsageError("V must be >= 0")
    kinds = [_policy(k) for k in _split(args.policy)]
    rows = sweep_v(sc, kinds, vs, seeds=seeds, horizon=args.horizon, burn_in=args.burn_in)
    with _sink(args.output) as out:
        out.write(summary_csv(rows))
    return 0


def _cmd_lp(args) -> int:
    inst = load_lp(args.lp)
    rep = solve_lp(inst, args.V, args.iters, _policy(args.policy), trace=args.trace)
    with _sink(args.output) as out:
        if rep.trace is not None:
            lp_write_trace(out, rep.trace)
            out.write("\n")
        out.write(lp_summary_csv(rep))
    return 0


def _cmd_verify(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    seed = _resolve_seed(args.seed)
    failed = False
    for name in suites:
        t0 = time.perf_counter()
        res = run_suite(name, args.samples or DEFAULT_SAMPLES[name], seed)
        print(f"{res.line()} ({time.perf_counter() - t0:.1f}s)")
        for info in res.failures:
            print(f"  failure: {info!r}", file=sys.stderr)
        failed |= not res.ok
    return 2 if failed else 0


_COMMANDS = {"simulate": _cmd_simulate, "sweep": _cmd_sweep, "lp-solve": _cmd_lp, "verify": _cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.verb](args)
    except (OSError, ValueError) as exc:
        # ScenarioError, LpFormatError and UsageError are ValueErrors
        print(f"qoisim {args.verb}: error: {exc}", file=sys.stderr)
        return 1
