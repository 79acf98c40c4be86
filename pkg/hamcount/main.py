"""hamcount: exact counts of Smirnov words and Hamiltonian cycles in complete multipartite graphs."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from pydantic import ValidationError

from hamcount import __version__
from hamcount.cache import open_cache
from hamcount.core import Composition, count_to_decimal, parse_endpoints
from hamcount.counting import choose_strategy, evaluate
from hamcount.errors import DomainError, HamcountError, InconsistencyError, UsageError
from hamcount.reports import (
    benchmark,
    build_table,
    calibrate,
    parse_range,
    parts_report,
    render,
    run_verification,
    uniform_report,
    verification_frame,
)
from hamcount.schemas import CountObject, CountQuery, OutputFormat, Quantity, Strategy, TableRequest, Variant
from hamcount.settings import LOG_LEVELS, Settings, get_settings


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _enum_values(enum) -> list[str]:
    return [member.value for member in enum]


def _parts_from_args(args: argparse.Namespace) -> Composition:
    if args.parts:
        if args.m is not None or args.n is not None:
            raise UsageError("use either --parts or --m/--n, not both")
        return Composition.parse(args.parts)
    if args.m is None or args.n is None:
        raise UsageError("give --parts A,B,... or both --m and --n")
    return Composition.uniform(args.m, args.n)


def _workers(args: argparse.Namespace, settings: Settings) -> int:
    return args.workers if args.workers is not None else settings.worker_count()


def cmd_count(args: argparse.Namespace, settings: Settings) -> int:
    parts = _parts_from_args(args)
    endpoints = parse_endpoints(args.endpoints) if args.endpoints else None
    query = CountQuery.build(parts, CountObject(args.object), endpoints)
    strategy = Strategy(args.strategy)
    cache_path = None if args.no_cache else Path(args.cache or settings.cache_path)

    with open_cache(cache_path) as store:
        started = time.perf_counter()
        value = store.get(query)
        used = "cache"
        if value is None:
            used = choose_strategy(parts, strategy).value
            value = evaluate(query, strategy)
            store.put(query, value)
        elapsed = time.perf_counter() - started

    if args.cross_check:
        closed = evaluate(query, Strategy.closed)
        recurrence = evaluate(query, Strategy.recurrence)
        if not value == closed == recurrence:
            raise InconsistencyError(
                f"parts ({parts}), {query.object.value}: reported {value}, "
                f"closed {closed}, recurrence {recurrence}"
            )

    print(count_to_decimal(value))
    if args.timing:
        print(f"strategy: {used}, elapsed: {elapsed:.6f}s")
    return 0


def cmd_table(args: argparse.Namespace, settings: Settings) -> int:
    try:
        request = TableRequest(
            quantity=Quantity(args.quantity),
            m_range=parse_range(args.m),
            n_range=parse_range(args.n),
            format=OutputFormat(args.format),
        )
    except ValidationError as exc:
        raise UsageError(exc.errors()[0]["msg"]) from exc

    budget = args.time_budget if args.time_budget is not None else settings.time_budget
    frame, incomplete = build_table(request, Strategy(args.strategy), _workers(args, settings), budget)
    print(render(frame, request.format))
    if incomplete is not None:
        raise incomplete
    return 0


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    results = run_verification(args.max_n, args.max_m, _workers(args, settings))
    print(render(verification_frame(results), OutputFormat(args.format)))
    failed = [result for result in results if not result.passed]
    if failed:
        first = failed[0]
        raise InconsistencyError(f"{len(failed)} suite(s) failed; first: {first.name}: {first.counterexample}")
    print("all suites pass")
    return 0


def cmd_asympt(args: argparse.Namespace, settings: Settings) -> int:
    fmt = OutputFormat(args.format)
    if args.parts:
        print(render(parts_report(Composition.parse(args.parts)), fmt))
        return 0
    if args.m is None:
        raise UsageError("give --m (and --n) or --parts")

    variants = list(Variant) if args.variant == "both" else [Variant(args.variant)]
    if Variant.paper in variants and args.m < 3:
        raise DomainError(f"m={args.m}: the paper variant needs m >= 3 (1 - 1/(m-1) = 0)")

    if args.calibrate:
        low, high = parse_range(args.calibrate_n)
        results_path = Path(args.results or settings.results_path)
        record, created = calibrate(args.m, low, high, results_path)
        state = "stored" if created else "matches stored goldens"
        print(f"m={record.m} n={record.n_low}..{record.n_high} c_m={record.c_m!r} ({state})")
        for variant, golden in record.goldens.items():
            print(f"  {variant.value}: rel_log_error={golden!r}")
        if args.n is None:
            return 0

    if args.n is None:
        raise UsageError("give --n")
    print(render(uniform_report(args.m, args.n, variants, args.stirling), fmt))
    return 0


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    m_low, m_high = parse_range(args.m)
    n_low, n_high = parse_range(args.n)
    if m_low < 1 or n_low < 1 or m_high < m_low or n_high < n_low:
        raise UsageError("bench ranges must be non-empty with lower bounds >= 1")
    frame = benchmark(list(range(m_low, m_high + 1)), list(range(n_low, n_high + 1)))
    print(render(frame, OutputFormat(args.format)))
    return 0


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="hamcount", description=__doc__)
    parser.add_argument("--version", action="version", version=f"hamcount {__version__}")
    parser.add_argument(
        "--log-level", type=str.upper, choices=LOG_LEVELS, default=None, help="overrides HAMCOUNT_LOG_LEVEL"
    )
    parser.add_argument("--workers", type=int, default=None, help="worker processes (default: all cores)")
    commands = parser.add_subparsers(dest="command", required=True)

    count = commands.add_parser("count", help="exact count for one composition")
    count.add_argument("--parts", help="part sizes, e.g. 3,3,4")
    count.add_argument("--m", type=int, help="number of parts (uniform shorthand)")
    count.add_argument("--n", type=int, help="size of every part (uniform shorthand)")
    count.add_argument("--object", choices=_enum_values(CountObject), default=CountObject.ham_cycles.value)
    count.add_argument("--endpoints", help="S,R | S (same endpoint) | all")
    count.add_argument("--strategy", choices=_enum_values(Strategy), default=Strategy.auto.value)
    count.add_argument("--cache", help="cache file (default: HAMCOUNT_CACHE)")
    count.add_argument("--no-cache", action="store_true")
    count.add_argument("--timing", action="store_true", help="also print strategy and elapsed time")
    count.add_argument("--cross-check", action="store_true", help="recompute with both strategies")
    count.set_defaults(handler=cmd_count)

    table = commands.add_parser("table", help="grid of S_m(n) or H_m(n)")
    table.add_argument("--quantity", choices=_enum_values(Quantity), required=True)
    table.add_argument("--m", required=True, help="range A..B")
    table.add_argument("--n", required=True, help="range A..B")
    table.add_argument("--format", choices=_enum_values(OutputFormat), default=OutputFormat.text.value)
    table.add_argument("--strategy", choices=_enum_values(Strategy), default=Strategy.auto.value)
    table.add_argument("--time-budget", type=float, default=None, help="seconds (default: HAMCOUNT_TIME_BUDGET)")
    table.set_defaults(handler=cmd_table)

    verify = commands.add_parser("verify", help="run every oracle and identity suite")
    verify.add_argument("--max-n", type=int, default=9)
    verify.add_argument("--max-m", type=int, default=4)
    verify.add_argument("--format", choices=_enum_values(OutputFormat), default=OutputFormat.text.value)
    verify.set_defaults(handler=cmd_verify)

    asympt = commands.add_parser("asympt", help="asymptotic estimates against exact counts")
    asympt.add_argument("--m", type=int)
    asympt.add_argument("--n", type=int)
    asympt.add_argument("--parts", help="non-uniform parts, e.g. 2,3,4")
    asympt.add_argument("--variant", choices=_enum_values(Variant) + ["both"], default="both")
    asympt.add_argument("--stirling", action="store_true", help="Stirling instead of exact factorial logs")
    asympt.add_argument("--calibrate", action="store_true", help="fit C_m and freeze goldens")
    asympt.add_argument("--calibrate-n", default="4..7", help="n range for --calibrate")
    asympt.add_argument("--results", help="results file (default: HAMCOUNT_RESULTS)")
    asympt.add_argument("--format", choices=_enum_values(OutputFormat), default=OutputFormat.text.value)
    asympt.set_defaults(handler=cmd_asympt)

    bench = commands.add_parser("bench", help="time closed formula against recurrence")
    bench.add_argument("--m", default="3..5", help="range A..B")
    bench.add_argument("--n", default="1..7", help="range A..B")
    bench.add_argument("--format", choices=_enum_values(OutputFormat), default=OutputFormat.text.value)
    bench.set_defaults(handler=cmd_bench)

    return parser


def _load_settings() -> Settings:
    try:
        return get_settings()
    except ValidationError as exc:
        raise UsageError(f"invalid HAMCOUNT_* setting: {exc.errors()[0]['msg']}") from exc


def main(argv: list[str] | None = None) -> int:
    try:
        settings = _load_settings()
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=args.log_level or settings.log_level,
            stream=sys.stderr,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return args.handler(args, settings)
    except HamcountError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
