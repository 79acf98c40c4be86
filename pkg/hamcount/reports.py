from __future__ import annotations

import itertools
import logging
import math
import multiprocessing as mp
import time
from collections.abc import Callable, Iterable, Iterator
from pathlib import Path
from typing import Any

import pandas as pd

from hamcount import counting
from hamcount.asymptotics import (
    compact_log_form,
    error_report,
    exact_ratio,
    fit_compact_constant,
    h_asymptotic,
    log_h_expansion,
    nonuniform_log_estimate,
    ratio_estimate,
    s_asymptotic,
    variant_gap,
)
from hamcount.cache import read_calibrations, write_calibration
from hamcount.core import AllDistinctPairs, Composition, compositions, count_to_decimal, log_count
from hamcount.counting import (
    MemoTable,
    admissible_word_count,
    circular_positioned_count,
    cut_sum,
    directed_cycles_from_circular,
    f_endpoint_closed,
    f_endpoint_recurrence,
    hamiltonian_cycles,
    hamiltonian_cycles_directed,
    hamiltonian_paths,
    knuth_tripartite,
    necklace_count,
    s_count,
)
from hamcount.errors import BudgetExceededError, HamcountError, InconsistencyError, UsageError
from hamcount.oracle import (
    count_cyclic_orbits_bruteforce,
    count_ham_cycles_bruteforce,
    count_ham_paths_bruteforce,
    enumerate_smirnov,
)
from hamcount.schemas import (
    CalibrationRecord,
    OutputFormat,
    Quantity,
    Strategy,
    SuiteResult,
    TableRequest,
    Variant,
)
from hamcount.settings import get_settings


logger = logging.getLogger(__name__)

GOLDEN_TOLERANCE = 1e-9


def run_parallel(
    func: Callable[[Any], Any],
    items: Iterable[Any],
    workers: int,
    time_budget: float | None = None,
) -> Iterator[Any]:
    """Yield ``func(item)`` in input order; stop with BudgetExceededError once the budget is spent."""
    items = list(items)
    deadline = time.monotonic() + time_budget if time_budget is not None else None

    def remaining() -> float | None:
        return None if deadline is None else deadline - time.monotonic()

    if workers <= 1 or len(items) <= 1:
        for done, item in enumerate(items):
            left = remaining()
            if left is not None and left <= 0:
                raise BudgetExceededError(f"time budget spent after {done} of {len(items)} tasks")
            yield func(item)
        return

    with mp.Pool(processes=min(workers, len(items))) as pool:
        results = pool.imap(func, items)
        for done in range(len(items)):
            left = remaining()
            try:
                yield results.next(timeout=None if left is None else max(left, 0.0))
            except mp.TimeoutError:
                pool.terminate()
                raise BudgetExceededError(
                    f"time budget spent after {done} of {len(items)} tasks"
                ) from None


def parse_range(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            low, high = text.split("..", 1)
            return int(low), int(high)
        value = int(text)
    except ValueError as exc:
        raise UsageError(f"invalid range {text!r}; use A..B or A") from exc
    return value, value


def table_cell(cell: tuple[Quantity, int, int, Strategy]) -> tuple[int, int, str]:
    quantity, m, n, strategy = cell
    parts = Composition.uniform(m, n)
    memo = MemoTable()
    if quantity == Quantity.S:
        value = s_count(parts, strategy, memo)
    else:
        value = hamiltonian_cycles(parts, strategy, memo)
    return m, n, count_to_decimal(value)


def build_table(
    request: TableRequest,
    strategy: Strategy = Strategy.auto,
    workers: int = 1,
    time_budget: float | None = None,
) -> tuple[pd.DataFrame, BudgetExceededError | None]:
    cells = [
        (request.quantity, m, n, strategy)
        for m, n in itertools.product(request.m_values, request.n_values)
    ]
    frame = pd.DataFrame(
        index=pd.Index(request.m_values, name="m"),
        columns=pd.Index(request.n_values, name="n"),
        dtype=object,
    )
    incomplete = None
    try:
        for m, n, value in run_parallel(table_cell, cells, workers, time_budget):
            frame.loc[m, n] = value
    except BudgetExceededError as exc:
        logger.error("table %s: %s", request.quantity.value, exc)
        incomplete = exc
    return frame, incomplete


def render(frame: pd.DataFrame, fmt: OutputFormat, index_label: str | None = None) -> str:
    if fmt == OutputFormat.csv:
        return frame.to_csv(index_label=index_label or frame.index.name).rstrip("\n")
    if fmt == OutputFormat.json:
        if isinstance(frame.index, pd.MultiIndex):
            return frame.reset_index().to_json(orient="records")
        return frame.to_json(orient="index")
    return frame.fillna("-").to_string()


def _pairs(parts: Composition) -> Iterator[tuple[int, int]]:
    return itertools.product(range(1, parts.m + 1), repeat=2)


def check_word_oracle(parts: Composition) -> str | None:
    brute = enumerate_smirnov(parts, AllDistinctPairs())
    closed = s_count(parts, Strategy.closed)
    recurrence = s_count(parts, Strategy.recurrence)
    if not brute == closed == recurrence:
        return f"oracle {brute}, closed {closed}, recurrence {recurrence}"
    return None


def check_endpoint_equivalence(parts: Composition) -> str | None:
    for s, r in _pairs(parts):
        closed = f_endpoint_closed(parts, s, r)
        recurrence = f_endpoint_recurrence(parts, s, r)
        if closed != recurrence:
            return f"({s},{r}): closed {closed}, recurrence {recurrence}"
    return None


def check_reversal(parts: Composition) -> str | None:
    for s, r in _pairs(parts):
        forward = f_endpoint_recurrence(parts, s, r)
        backward = f_endpoint_recurrence(parts, r, s)
        if forward != backward:
            return f"({s},{r}) gives {forward}, ({r},{s}) gives {backward}"
    return None


def check_relabeling(parts: Composition) -> str | None:
    order = list(range(parts.m, 0, -1))
    relabeled = parts.permuted(order)
    position = {color: index for index, color in enumerate(order, 1)}
    for s, r in _pairs(parts):
        original = f_endpoint_recurrence(parts, s, r)
        moved = f_endpoint_closed(relabeled, position[s], position[r])
        if original != moved:
            return f"({s},{r}) gives {original}, relabeled gives {moved}"
    base = s_count(parts)
    for variant in (relabeled, parts.canonical()):
        if s_count(variant) != base:
            return f"s_count changes under reordering to ({variant})"
    return None


def check_graph_cycles(parts: Composition) -> str | None:
    brute = count_ham_cycles_bruteforce(parts)
    exact = hamiltonian_cycles(parts)
    if brute != exact:
        return f"oracle {brute}, formula {exact}"
    if parts.m == 3 and knuth_tripartite(*parts.parts) != brute:
        return f"tripartite alias disagrees with oracle {brute}"
    return None


def check_graph_paths(parts: Composition) -> str | None:
    paths = count_ham_paths_bruteforce(parts)
    exact = hamiltonian_paths(parts)
    if paths != exact:
        return f"oracle {paths}, formula {exact}"
    if parts.total >= 3:
        cycles = count_ham_cycles_bruteforce(parts)
        if paths != 2 * parts.total * cycles:
            return f"paths {paths} != 2N x cycles {cycles}"
    return None


def check_divisibility(parts: Composition) -> str | None:
    product = admissible_word_count(parts)
    divisor = counting.cycle_divisor(parts.total)
    if product % divisor:
        return f"{divisor} does not divide {product}"
    return None


def check_directed(parts: Composition) -> str | None:
    directed = hamiltonian_cycles_directed(parts)
    undirected = hamiltonian_cycles(parts)
    if directed != 2 * undirected:
        return f"directed {directed} != 2 x {undirected}"
    via_circular = directed_cycles_from_circular(parts)
    if via_circular != directed:
        return f"circular mapping gives {via_circular}, expected {directed}"
    return None


def check_cut_identity(parts: Composition) -> str | None:
    cuts = cut_sum(parts)
    total = s_count(parts)
    if cuts != total:
        return f"cut sum {cuts} != s_count {total}"
    return None


def check_circular(parts: Composition) -> str | None:
    positioned, orbits = count_cyclic_orbits_bruteforce(parts)
    exact = (circular_positioned_count(parts, cross_check=True), necklace_count(parts))
    if (positioned, orbits) != exact:
        return f"oracle ({positioned}, {orbits}), formulas {exact}"
    return None


def _within_graph_bound(parts: Composition) -> bool:
    return parts.total <= get_settings().graph_oracle_bound


SUITES: list[tuple[str, Callable[[Composition], str | None], Callable[[Composition], bool]]] = [
    ("word-oracle", check_word_oracle, lambda parts: True),
    ("endpoint-equivalence", check_endpoint_equivalence, lambda parts: True),
    ("reversal-symmetry", check_reversal, lambda parts: True),
    ("relabeling", check_relabeling, lambda parts: True),
    ("graph-cycles", check_graph_cycles, _within_graph_bound),
    ("graph-paths", check_graph_paths, _within_graph_bound),
    ("divisibility", check_divisibility, lambda parts: parts.total >= 3),
    ("directed-doubling", check_directed, lambda parts: parts.total >= 3),
    ("cut-identity", check_cut_identity, lambda parts: True),
    ("circular-orbits", check_circular, lambda parts: parts.total >= 2),
]


def verify_composition(parts: Composition) -> list[tuple[str, bool, str | None]]:
    outcomes = []
    for name, check, applies in SUITES:
        if not applies(parts):
            outcomes.append((name, False, None))
            continue
        try:
            failure = check(parts)
        except HamcountError as exc:
            failure = str(exc)
        outcomes.append((name, True, failure))
    return outcomes


def run_verification(max_n: int, max_m: int, workers: int = 1) -> list[SuiteResult]:
    bound = get_settings().word_oracle_bound
    if max_n > bound:
        raise UsageError(f"--max-n {max_n} exceeds the word oracle bound {bound}")
    if max_n < 1 or max_m < 1:
        raise UsageError("--max-n and --max-m must be >= 1")

    sweep = [parts for total in range(1, max_n + 1) for parts in compositions(total, max_m)]
    results = {name: SuiteResult(name=name) for name, _, _ in SUITES}
    for parts, outcomes in zip(sweep, run_parallel(verify_composition, sweep, workers)):
        for name, applied, failure in outcomes:
            result = results[name]
            if not applied:
                continue
            result.checked += 1
            if failure is not None:
                result.failures += 1
                if result.counterexample is None:
                    result.counterexample = f"parts ({parts}): {failure}"
                    logger.error("suite %s failed on parts (%s): %s", name, parts, failure)
    return list(results.values())


def verification_frame(results: list[SuiteResult]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "suite": result.name,
                "checked": result.checked,
                "failures": result.failures,
                "counterexample": result.counterexample or "",
            }
            for result in results
        ]
    ).set_index("suite")


def benchmark(m_values: list[int], n_values: list[int]) -> pd.DataFrame:
    rows = []
    for m, n in itertools.product(m_values, n_values):
        parts = Composition.uniform(m, n)
        started = time.perf_counter()
        closed = s_count(parts, Strategy.closed)
        closed_seconds = time.perf_counter() - started

        started = time.perf_counter()
        recurrence = s_count(parts, Strategy.recurrence, MemoTable())
        recurrence_seconds = time.perf_counter() - started

        rows.append({
            "m": m,
            "n": n,
            "closed_s": round(closed_seconds, 6),
            "recurrence_s": round(recurrence_seconds, 6),
            "agree": closed == recurrence,
        })
    return pd.DataFrame(rows).set_index(["m", "n"])


def _error_row(label: str, variant: Variant | None, exact: int, log_value: float, estimate=None) -> dict:
    row = {
        "estimate": f"{label} {variant.value}" if variant else label,
        "variant": variant.value if variant else "-",
        "exact_log": log_count(exact) if exact > 0 else math.nan,
        "estimate_log": log_value,
    }
    if estimate is not None:
        report = error_report(exact, estimate)
        row["abs_log_error"] = report.abs_log_error
        row["rel_log_error"] = report.rel_log_error
    return row


def uniform_report(m: int, n: int, variants: list[Variant], use_stirling: bool = False) -> pd.DataFrame:
    parts = Composition.uniform(m, n)
    exact_s = s_count(parts)
    exact_h = hamiltonian_cycles(parts)
    rows = []
    for variant in variants:
        estimate = s_asymptotic(m, n, variant, use_stirling)
        rows.append(_error_row("S", variant, exact_s, estimate.log_value, estimate))
        estimate = h_asymptotic(m, n, variant, use_stirling)
        rows.append(_error_row("H", variant, exact_h, estimate.log_value, estimate))
    if m >= 3:
        rows.append(_error_row("H expansion", None, exact_h, log_h_expansion(m, n)))
        rows.append(_error_row("H compact (C_m=0)", None, exact_h, compact_log_form(m, n)))
        rows.append({
            "estimate": "ratio H(n+1)/H(n)",
            "variant": "-",
            "exact_log": math.log(exact_ratio(m, n)),
            "estimate_log": math.log(ratio_estimate(m, n)),
        })
        rows.append({
            "estimate": "log gap alternative/paper",
            "variant": "-",
            "exact_log": math.nan,
            "estimate_log": variant_gap(m, n),
        })
    return pd.DataFrame(rows).set_index("estimate")


def parts_report(parts: Composition) -> pd.DataFrame:
    exact = hamiltonian_cycles(parts)
    rows = [
        _error_row("H proportions", None, exact, nonuniform_log_estimate(parts)),
        _error_row("H proportions (displayed form)", None, exact, nonuniform_log_estimate(parts, True)),
    ]
    frame = pd.DataFrame(rows).set_index("estimate")
    frame["abs_log_error"] = (frame["exact_log"] - frame["estimate_log"]).abs()
    return frame


def calibration_goldens(m: int, n: int) -> dict[Variant, float]:
    exact = hamiltonian_cycles(Composition.uniform(m, n))
    return {
        variant: error_report(exact, h_asymptotic(m, n, variant)).rel_log_error
        for variant in Variant
    }


def calibrate(m: int, n_low: int, n_high: int, results_path: Path) -> tuple[CalibrationRecord, bool]:
    """Fit C_m and freeze per-variant errors at n_high; a stored record must be reproduced."""
    if n_low < 1 or n_high < n_low:
        raise UsageError(f"invalid calibration range {n_low}..{n_high}")
    record = CalibrationRecord(
        m=m,
        n_low=n_low,
        n_high=n_high,
        c_m=fit_compact_constant(m, range(n_low, n_high + 1)),
        goldens=calibration_goldens(m, n_high),
    )
    stored = read_calibrations(results_path).get(record.key)
    if stored is None:
        write_calibration(results_path, record)
        logger.info("stored calibration for m=%d in %s", m, results_path)
        return record, True

    drift = [
        variant.value
        for variant, golden in stored.goldens.items()
        if abs(record.goldens.get(variant, math.inf) - golden) > GOLDEN_TOLERANCE
    ]
    if abs(record.c_m - stored.c_m) > GOLDEN_TOLERANCE:
        drift.append("c_m")
    if drift:
        raise InconsistencyError(
            f"calibration for m={m}, n={n_low}..{n_high} no longer matches its goldens: {', '.join(drift)}"
        )
    return stored, False
