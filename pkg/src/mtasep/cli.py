"""Command-line front end: ``mtasep exact|sample|verify|stats|simulate``.

Exit codes: 0 success, 2 verification failure, 3 inconclusive statistics,
64 usage error, 65 infeasible or oversized input.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from typing import Optional, Sequence

from .core import HOLE, InfeasibleError, MtasepError, ResourceError, RingConfig
from .core import config_to_json, from_codes
from .exact import (
    DEFAULT_CAP,
    distribution_to_csv,
    distribution_to_json,
    stationary_weights,
    verify_balance,
    verify_minimal_weights,
)
from .multiline import MultiLineConfig, multiline_to_json
from .simulate import (
    default_burn_in,
    gillespie_multiline,
    gillespie_tasep,
    make_rng,
    sample_stationary_ring,
    sample_stationary_window,
)
from . import stats
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_FAIL = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64
EXIT_INFEASIBLE = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


# -- exact -----------------------------------------------------------------

def cmd_exact(args) -> int:
    if len(args.counts) != args.classes:
        raise UsageError(f"--counts needs {args.classes} entries, got {len(args.counts)}")
    dist = stationary_weights(args.sites, args.classes, args.counts, cap=args.cap)
    ok = True
    extra = {}
    if args.check_balance:
        extra["balance"] = verify_balance(dist)
        ok &= extra["balance"]
    if args.list_minimal:
        extra["minimal"] = [u.codes() for u in dist.minimal_states()]
        extra["minimal_check"] = verify_minimal_weights(dist)
        ok &= extra["minimal_check"]
    with _output(args.output) as out:
        if args.format == "json":
            doc = distribution_to_json(dist)
            doc.update(extra)
            json.dump(doc, out)
            out.write("\n")
        else:
            out.write(distribution_to_csv(dist))
            for key, val in extra.items():
                out.write(f"# {key}: {json.dumps(val)}\n")
    return EXIT_OK if ok else EXIT_FAIL


# -- sample ----------------------------------------------------------------

def cmd_sample(args) -> int:
    rng = make_rng(args.seed)
    with _output(args.output) as out:
        if args.kind == "ring":
            if args.sites is None or args.classes is None or args.counts is None:
                raise UsageError("sample ring needs --sites, --classes and --counts")
            if len(args.counts) != args.classes:
                raise UsageError(f"--counts needs {args.classes} entries")
            for _ in range(args.samples):
                u = sample_stationary_ring(args.sites, args.classes, args.counts, rng)
                out.write(json.dumps(config_to_json(u)) + "\n")
        else:
            if args.rates is None or args.window is None:
                raise UsageError("sample line needs --rates and --window")
            burn = args.burnin if args.burnin is not None else default_burn_in(args.rates)
            for _ in range(args.samples):
                w = sample_stationary_window(args.window, args.rates, burn, rng)
                out.write(json.dumps(config_to_json(w)) + "\n")
    return EXIT_OK


# -- verify ----------------------------------------------------------------

def cmd_verify(args) -> int:
    exhaustive = args.trials is None or args.exhaustive
    res = run_suite(args.suite, args.sites, args.lines, exhaustive, args.trials, args.seed)
    with _output(args.output) as out:
        out.write(json.dumps(res.to_json()) + "\n")
    return EXIT_OK if res.passed else EXIT_FAIL


# -- stats -----------------------------------------------------------------

def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"stats {args.test} needs {', '.join(missing)}")


def _stats_reports(args) -> list:
    t = args.test
    if t == "burke":
        _need(args, "arrival", "service")
        return [stats.burke_test(args.arrival, args.service, args.steps, args.seed)]
    if t == "qlen":
        _need(args, "rates")
        if len(args.rates) != 2:
            raise UsageError("--rates needs two entries: first and second class")
        return [stats.queue_length_fit(*args.rates, steps=args.steps, seed=args.seed)]
    if t == "coupling":
        _need(args, "rates")
        if len(args.rates) != 2:
            raise UsageError("--rates needs two entries: first and second class")
        K = args.window if args.window is not None else 1000
        return [stats.coupling_experiment(*args.rates, K=K, paths=args.paths, seed=args.seed)]
    if t == "renewal":
        _need(args, "rates", "string")
        K = args.window if args.window is not None else 10**5
        out = [stats.renewal_emptiness_check(args.rates, K, args.seed, args.string, args.burnin)]
        samples = 5000 if args.samples is None else args.samples
        if samples:
            out.append(stats.factorization_test(
                args.rates, args.string, args.left, args.right, samples,
                args.seed, args.burnin))
        return out
    if t == "factorization":
        _need(args, "rates", "string")
        return [stats.factorization_test(
            args.rates, args.string, args.left, args.right, args.samples or 20000,
            args.seed, args.burnin, require_renewal=not args.control)]
    if t == "independence":
        _need(args, "rates")
        K = args.window if args.window is not None else 5
        return [stats.hole_independence_test(
            args.rates, K, args.samples or 10**5, args.seed, args.burnin)]
    if t == "marginal":
        _need(args, "sites", "particles")
        return [stats.line_marginal_test(
            args.sites, args.particles, args.line, args.lag, args.samples or 20000, args.seed)]
    raise UsageError(f"unknown statistics test {t!r}")


def cmd_stats(args) -> int:
    reports = _stats_reports(args)
    with _output(args.output) as out:
        for r in reports:
            out.write(json.dumps(r.to_json()) + "\n")
    if any(r.status == stats.FAIL for r in reports):
        return EXIT_FAIL
    if any(r.status == stats.INCONCLUSIVE for r in reports):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# -- simulate --------------------------------------------------------------

def _packed_ring(N: int, counts: Sequence[int]) -> RingConfig:
    sites = []
    for r, c in enumerate(counts, start=1):
        sites += [r] * c
    if len(sites) > N:
        raise InfeasibleError(f"{len(sites)} particles do not fit on {N} sites")
    return RingConfig(tuple(sites + [HOLE] * (N - len(sites))), len(counts))


def _packed_multiline(N: int, q: Sequence[int]) -> MultiLineConfig:
    lines = []
    for qm in q:
        if not 0 <= qm <= N:
            raise InfeasibleError(f"cannot place {qm} particles on {N} sites")
        lines.append(tuple([1] * qm + [HOLE] * (N - qm)))
    return MultiLineConfig(tuple(lines))


def cmd_simulate(args) -> int:
    if (args.events is None) == (args.time is None):
        raise UsageError("give exactly one of --events or --time")
    if args.process == "tasep":
        if args.state is not None:
            n = args.classes if args.classes is not None else max(args.state)
            u0 = RingConfig(from_codes(args.state), n)
        else:
            _need_sim(args, "sites", "counts")
            u0 = _packed_ring(args.sites, args.counts)
        trace, _ = gillespie_tasep(u0, args.events, args.time, args.seed, args.record_every)
    else:
        _need_sim(args, "sites", "particles")
        x0 = _packed_multiline(args.sites, args.particles)
        trace, _ = gillespie_multiline(x0, args.events, args.time, args.seed, args.record_every)
    with _output(args.output) as out:
        for line in trace.to_jsonl():
            out.write(line + "\n")
        end = float(trace.times[-1]) if trace.n_events else 0.0
        if args.time is not None:
            end = args.time
        if isinstance(trace.final, RingConfig):
            final = config_to_json(trace.final)
        else:
            final = multiline_to_json(trace.final)
        out.write(json.dumps({"t": end, "event": trace.n_events, "snapshot": final,
                              "final": True}) + "\n")
    return EXIT_OK


def _need_sim(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"simulate {args.process} needs {', '.join(missing)}")


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mtasep", description="Multi-type TASEP: exact laws, sampling, checks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("exact", help="exact integer stationary weights on a ring")
    e.add_argument("--sites", type=int, required=True, help="ring size N")
    e.add_argument("--classes", type=int, required=True, help="number of classes n")
    e.add_argument("--counts", type=_int_list, required=True,
                   help="particles per class, e.g. 1,2")
    e.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    e.add_argument("--check-balance", action="store_true",
                   help="verify global balance and report it")
    e.add_argument("--list-minimal", action="store_true",
                   help="list weight-1 states and check them against the local rule")
    e.add_argument("--cap", type=int, default=DEFAULT_CAP,
                   help="refuse enumerations larger than this (default %(default)s)")
    e.add_argument("--output", help="write here instead of stdout")
    e.set_defaults(func=cmd_exact)

    s = sub.add_parser("sample", help="draw stationary configurations")
    s.add_argument("kind", choices=("ring", "line"),
                   help="ring: exact sample on Z_N; line: window of Z")
    s.add_argument("--sites", type=int, help="ring size N (ring)")
    s.add_argument("--classes", type=int, help="number of classes (ring)")
    s.add_argument("--counts", type=_int_list, help="particles per class (ring)")
    s.add_argument("--rates", type=_float_list, help="class densities (line)")
    s.add_argument("--window", type=int, help="half-width K; the window is [-K, K] (line)")
    s.add_argument("--burnin", type=int, help="extra sites run before the window (line)")
    s.add_argument("--samples", type=int, default=1, help="number of samples")
    s.add_argument("--seed", type=int, default=0, help="random seed")
    s.add_argument("--output", help="write here instead of stdout")
    s.set_defaults(func=cmd_sample)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=sorted(SUITES), help="which invariant to check")
    v.add_argument("--sites", type=int, required=True, help="ring size N")
    v.add_argument("--lines", type=int, required=True,
                   help="number of lines / classes (queues: largest class count)")
    v.add_argument("--exhaustive", action="store_true",
                   help="enumerate every case (default unless --trials is given)")
    v.add_argument("--trials", type=int, help="number of random cases instead")
    v.add_argument("--seed", type=int, default=0, help="seed for random cases")
    v.add_argument("--output", help="write here instead of stdout")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("stats", help="statistical checks; prints JSON reports")
    t.add_argument("test", choices=("burke", "qlen", "coupling", "renewal", "factorization",
                                     "independence", "marginal"), help="which check")
    t.add_argument("--arrival", type=float, help="arrival probability (burke)")
    t.add_argument("--service", type=float, help="service probability (burke)")
    t.add_argument("--rates", type=_float_list, help="class densities")
    t.add_argument("--steps", type=int, default=10**6, help="queue time steps (burke, qlen)")
    t.add_argument("--window", type=int,
                   help="coupling: sites; renewal: half-width; independence: cylinder length")
    t.add_argument("--paths", type=int, default=10**4, help="coupled paths (coupling)")
    t.add_argument("--string", type=_int_list, help="renewal string, e.g. 3,2")
    t.add_argument("--left", type=int, default=2, help="left cylinder length")
    t.add_argument("--right", type=int, default=2, help="right cylinder length")
    t.add_argument("--samples", type=int,
                   help="samples or occurrences; renewal: factorization occurrences "
                        "(default 5000, 0 skips)")
    t.add_argument("--control", action="store_true",
                   help="factorization on a non-renewal string, reported without a verdict")
    t.add_argument("--burnin", type=int, help="window burn-in")
    t.add_argument("--sites", type=int, help="ring size (marginal)")
    t.add_argument("--particles", type=_int_list, help="particles per line (marginal)")
    t.add_argument("--line", type=int, default=1, help="line to compare (marginal)")
    t.add_argument("--lag", type=float, default=0.5, help="time lag (marginal)")
    t.add_argument("--seed", type=int, default=0, help="random seed")
    t.add_argument("--output", help="write here instead of stdout")
    t.set_defaults(func=cmd_stats, samples=None)

    m = sub.add_parser("simulate", help="continuous-time simulation; prints a JSONL trace")
    m.add_argument("process", choices=("tasep", "multiline"), help="which process")
    m.add_argument("--state", type=_int_list,
                   help="initial TASEP state as codes, 0 = hole (tasep)")
    m.add_argument("--classes", type=int, help="number of classes for --state")
    m.add_argument("--sites", type=int, help="ring size N")
    m.add_argument("--counts", type=_int_list,
                   help="particles per class, packed from site 0 (tasep)")
    m.add_argument("--particles", type=_int_list,
                   help="particles per line, packed from site 0 (multiline)")
    m.add_argument("--events", type=int, help="stop after this many bells")
    m.add_argument("--time", type=float, help="stop at this time")
    m.add_argument("--record-every", type=int, help="snapshot every k events")
    m.add_argument("--seed", type=int, default=0, help="random seed")
    m.add_argument("--output", help="write here instead of stdout")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mtasep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleError, ResourceError) as exc:
        print(f"mtasep: infeasible input: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (MtasepError, ValueError) as exc:
        print(f"mtasep: invalid input: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
