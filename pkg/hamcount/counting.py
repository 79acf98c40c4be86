from __future__ import annotations

import itertools
import logging
import math
import threading
from collections import Counter
from fractions import Fraction

from sympy import divisors, totient

from hamcount.core import (
    AllDistinctPairs,
    Composition,
    Count,
    Pair,
    SameEndpoint,
    binomial,
    factorial,
)
from hamcount.errors import InconsistencyError, UsageError
from hamcount.schemas import CountObject, CountQuery, Strategy
from hamcount.settings import get_settings


logger = logging.getLogger(__name__)

# (current color left, target color left or None when current is the target,
#  sorted nonzero counts of every other color)
State = tuple[int, int | None, tuple[int, ...]]


class MemoTable:
    """Write-once cache of recurrence states, shared by all threads of a process.

    Entries are never evicted. The process-wide table grows with every
    composition evaluated until ``clear_memo()``; drivers that evaluate many
    independent compositions pass a private table per task instead.
    """

    def __init__(self) -> None:
        self._entries: dict[State, Count] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: State) -> bool:
        return key in self._entries

    def get(self, key: State) -> Count | None:
        return self._entries.get(key)

    def put(self, key: State, value: Count) -> Count:
        with self._lock:
            return self._entries.setdefault(key, value)

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()


_memo = MemoTable()


def memo_size() -> int:
    return len(_memo)


def clear_memo() -> None:
    _memo.clear()


def _others(values) -> tuple[int, ...]:
    return tuple(sorted(value for value in values if value > 0))


def _remove_one(others: tuple[int, ...], value: int) -> list[int]:
    rest = list(others)
    rest.remove(value)
    return rest


def _expand(state: State) -> tuple[Count, list[tuple[int, State]]]:
    current_left, target_left, others = state
    if current_left == 0 and not target_left and not others:
        return (1 if target_left is None else 0), []
    if target_left == 0:
        return 0, []

    moves: list[tuple[int, State]] = []
    if target_left is not None:
        # next letter is the target color
        moves.append((1, (target_left - 1, None, _others(others + (current_left,)))))
    for value, multiplicity in Counter(others).items():
        rest = _remove_one(others, value)
        if target_left is None:
            child = (value - 1, current_left, _others(rest))
        else:
            child = (value - 1, target_left, _others(rest + [current_left]))
        moves.append((multiplicity, child))
    return 0, moves


def _evaluate(root: State, memo: MemoTable) -> Count:
    stack = [root]
    while stack:
        state = stack[-1]
        if state in memo:
            stack.pop()
            continue
        base, moves = _expand(state)
        missing = [child for _, child in moves if child not in memo]
        if missing:
            stack.extend(missing)
            continue
        memo.put(state, base + sum(multiplicity * memo.get(child) for multiplicity, child in moves))
        stack.pop()
    return memo.get(root)


def f_endpoint_recurrence(parts: Composition, s: int, r: int, memo: MemoTable | None = None) -> Count:
    """Smirnov color-words with multiplicities ``parts``, first color s and last color r.

    ``parts`` are total multiplicities; the first letter consumes one s and the
    memoized recurrence runs on what is left after it.
    """
    parts.check_color(s)
    parts.check_color(r)
    left = list(parts.parts)
    if left[s - 1] == 0:
        return 0
    left[s - 1] -= 1
    if s == r:
        root = (left[s - 1], None, _others(v for i, v in enumerate(left, 1) if i != s))
    else:
        root = (
            left[s - 1],
            left[r - 1],
            _others(v for i, v in enumerate(left, 1) if i not in (s, r)),
        )
    memo = memo if memo is not None else _memo
    value = _evaluate(root, memo)
    logger.debug("parts (%s), %d -> %d: memo holds %d states", parts, s, r, len(memo))
    return value


def f_endpoint_closed(parts: Composition, s: int, r: int) -> Count:
    """Inclusion-exclusion over merged equal adjacencies, first color s, last color r."""
    parts.check_color(s)
    parts.check_color(r)
    total = parts.total
    adjusted = [
        part - (color == s) - (color == r) for color, part in enumerate(parts.parts, 1)
    ]

    result = 0
    if s == r and parts.m == 1:
        # a single s-block is both the first and the last block
        result += (-1) ** (parts.parts[0] - 1)
    if any(value < 0 for value in adjusted):
        return result

    facts = [factorial(k) for k in range(total + 1)]
    ranges = [
        range(min(part - 1, low) + 1) for part, low in zip(parts.parts, adjusted)
    ]
    binomials = [[binomial(part - 1, k) for k in span] for part, span in zip(parts.parts, ranges)]

    # colexicographic: the first color's merge count varies fastest
    for reversed_ks in itertools.product(*reversed(ranges)):
        ks = reversed_ks[::-1]
        merged = sum(ks)
        term = facts[total - 2 - merged]
        for color, k in enumerate(ks):
            term //= facts[adjusted[color] - k]
        for color, k in enumerate(ks):
            term *= binomials[color][k]
        result += -term if merged % 2 else term
    return result


def closed_summands(parts: Composition) -> int:
    return math.prod(parts.parts)


def choose_strategy(parts: Composition, strategy: Strategy = Strategy.auto) -> Strategy:
    if strategy != Strategy.auto:
        return strategy
    limit = get_settings().closed_formula_max_summands
    chosen = Strategy.closed if closed_summands(parts) <= limit else Strategy.recurrence
    logger.debug("parts (%s): %s strategy", parts, chosen.value)
    return chosen


def f_endpoint(
    parts: Composition,
    s: int,
    r: int,
    strategy: Strategy = Strategy.auto,
    memo: MemoTable | None = None,
) -> Count:
    if choose_strategy(parts, strategy) == Strategy.closed:
        return f_endpoint_closed(parts, s, r)
    return f_endpoint_recurrence(parts, s, r, memo)


def s_count(parts: Composition, strategy: Strategy = Strategy.auto, memo: MemoTable | None = None) -> Count:
    """Smirnov color-words of type ``parts`` whose first and last colors differ."""
    m = parts.m
    if m < 2:
        return 0
    strategy = choose_strategy(parts, strategy)
    if parts.is_uniform:
        return m * (m - 1) * f_endpoint(parts, 1, 2, strategy, memo)

    # f only depends on the endpoint multiplicities once the rest is a multiset
    groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for s, r in itertools.permutations(range(1, m + 1), 2):
        groups.setdefault((parts.part(s), parts.part(r)), []).append((s, r))
    total = 0
    for pairs in groups.values():
        s, r = pairs[0]
        total += len(pairs) * f_endpoint(parts, s, r, strategy, memo)
    return total


def balanced_word_count(m: int, n: int) -> Count:
    return factorial(m * n) // factorial(n) ** m


def admissible_word_count(
    parts: Composition,
    strategy: Strategy = Strategy.auto,
    memo: MemoTable | None = None,
) -> Count:
    return parts.letter_filling() * s_count(parts, strategy, memo)


def hamiltonian_paths(parts: Composition, strategy: Strategy = Strategy.auto) -> Count:
    """Directed Hamiltonian paths of K_{parts} whose endpoints lie in different parts."""
    return admissible_word_count(parts, strategy)


def cycle_divisor(total: int) -> int:
    # two directions times N starting vertices
    return 2 * total


def hamiltonian_cycles(
    parts: Composition,
    strategy: Strategy = Strategy.auto,
    memo: MemoTable | None = None,
) -> Count:
    total = parts.total
    if total < 3 or parts.m < 2:
        return 0
    product = admissible_word_count(parts, strategy, memo)
    divisor = cycle_divisor(total)
    quotient, remainder = divmod(product, divisor)
    if remainder:
        raise InconsistencyError(
            f"parts ({parts}): {divisor} does not divide the directed path count {product}"
        )
    return quotient


def hamiltonian_cycles_directed(parts: Composition, strategy: Strategy = Strategy.auto) -> Count:
    return 2 * hamiltonian_cycles(parts, strategy)


def knuth_tripartite(p: int, q: int, r: int, strategy: Strategy = Strategy.auto) -> Count:
    return hamiltonian_cycles(Composition.of((p, q, r)), strategy)


def f_same_endpoint_closure(parts: Composition, s: int, strategy: Strategy = Strategy.auto) -> Count:
    """Words of length N+1 starting and ending with s: a cyclic word cut open at an s."""
    closed = parts.with_extra(s)
    return f_endpoint(closed, s, s, strategy)


def cut_sum(parts: Composition, strategy: Strategy = Strategy.auto) -> Count:
    return sum(f_same_endpoint_closure(parts, s, strategy) for s in range(1, parts.m + 1))


def _require_cyclic(parts: Composition) -> None:
    if parts.total < 2:
        raise UsageError(f"cyclic words need N >= 2, got parts ({parts})")


def circular_positioned_count(
    parts: Composition,
    strategy: Strategy = Strategy.auto,
    cross_check: bool = False,
) -> Count:
    """Cyclic Smirnov words with a marked starting position."""
    _require_cyclic(parts)
    positioned = s_count(parts, strategy)
    if cross_check:
        cuts = cut_sum(parts, strategy)
        if cuts != positioned:
            raise InconsistencyError(
                f"parts ({parts}): positioned count {positioned} != cut sum {cuts}"
            )
    return positioned


def necklace_count(parts: Composition, strategy: Strategy = Strategy.auto) -> Count:
    """Cyclic Smirnov words up to rotation, by averaging fixed points over rotations."""
    _require_cyclic(parts)
    total = parts.total
    fixed_sum = 0
    for period in divisors(total):
        repeats = total // period
        if period == 1 or any(part % repeats for part in parts.parts):
            continue
        fixed = circular_positioned_count(parts.scaled(repeats), strategy)
        fixed_sum += int(totient(repeats)) * fixed
    orbits, remainder = divmod(fixed_sum, total)
    if remainder:
        raise InconsistencyError(
            f"parts ({parts}): rotation average {fixed_sum}/{total} is not an integer"
        )
    return orbits


def cut_average(parts: Composition, strategy: Strategy = Strategy.auto) -> Fraction:
    """(1/N) times the cut sum; not an orbit count when words have rotational symmetry."""
    _require_cyclic(parts)
    return Fraction(cut_sum(parts, strategy), parts.total)


def directed_cycles_from_circular(parts: Composition, strategy: Strategy = Strategy.auto) -> Count:
    if parts.total < 3 or parts.m < 2:
        return 0
    product = parts.letter_filling() * circular_positioned_count(parts, strategy)
    quotient, remainder = divmod(product, parts.total)
    if remainder:
        raise InconsistencyError(
            f"parts ({parts}): N does not divide the filled positioned count {product}"
        )
    return quotient


def evaluate(query: CountQuery, strategy: Strategy = Strategy.auto) -> Count:
    parts = query.parts
    endpoints = query.endpoints
    match query.object:
        case CountObject.smirnov_endpoint:
            if isinstance(endpoints, Pair):
                return f_endpoint(parts, endpoints.s, endpoints.r, strategy)
            if isinstance(endpoints, SameEndpoint):
                return f_endpoint(parts, endpoints.s, endpoints.s, strategy)
            if isinstance(endpoints, AllDistinctPairs):
                return s_count(parts, strategy)
        case CountObject.smirnov_total:
            return s_count(parts, strategy)
        case CountObject.admissible_words:
            return admissible_word_count(parts, strategy)
        case CountObject.ham_paths:
            return hamiltonian_paths(parts, strategy)
        case CountObject.ham_cycles:
            return hamiltonian_cycles(parts, strategy)
        case CountObject.ham_cycles_directed:
            return hamiltonian_cycles_directed(parts, strategy)
        case CountObject.circular_positioned:
            return circular_positioned_count(parts, strategy)
        case CountObject.necklaces:
            return necklace_count(parts, strategy)
        case CountObject.cut_closure:
            return f_same_endpoint_closure(parts, endpoints.s, strategy)
    raise UsageError(f"unsupported query {query.object.value}")
