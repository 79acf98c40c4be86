"""Log-space growth estimates for S_m(n) and H_m(n) and their errors against exact counts.

Every estimate is a natural log. Two adjacency-avoidance factors are carried
side by side: ``paper`` uses 1 - 1/(m-1) as in the stated growth law,
``alternative`` uses 1 - 1/m as the probabilistic derivation produces.
"""

from __future__ import annotations

import math
from collections.abc import Iterable

import numpy as np

from hamcount.core import Composition, Count, factorial, log_count
from hamcount.counting import balanced_word_count, hamiltonian_cycles
from hamcount.errors import DomainError, UsageError
from hamcount.schemas import ErrorReport, LogEstimate, ProportionVector, Variant


LOG_2PI = math.log(2.0 * math.pi)


def _require(m: int, n: int, minimum_m: int = 3) -> None:
    if m < minimum_m:
        raise DomainError(f"m={m}: the estimate needs m >= {minimum_m}")
    if n < 1:
        raise UsageError(f"n={n}: the estimate needs n >= 1")


def stirling_log_factorial(k: int) -> float:
    if k < 1:
        raise UsageError(f"Stirling's formula here needs k >= 1, got {k}")
    return k * math.log(k) - k + 0.5 * (LOG_2PI + math.log(k))


def exact_log_factorial(k: int) -> float:
    return log_count(factorial(k))


def avoidance_ratio(m: int, variant: Variant) -> float:
    rho = 1.0 - 1.0 / (m - 1) if variant == Variant.paper else 1.0 - 1.0 / m
    if rho <= 0.0:
        raise DomainError(f"m={m}, variant {variant.value}: avoidance factor {rho} has no logarithm")
    return rho


def balanced_log(m: int, n: int, use_stirling: bool = False) -> float:
    """log T_m(n) = log((mn)! / (n!)^m)."""
    if use_stirling:
        return stirling_log_factorial(m * n) - m * stirling_log_factorial(n)
    return log_count(balanced_word_count(m, n))


def stirling_balanced_log(m: int, n: int) -> float:
    # the closed form (2 pi n)^((1-m)/2) m^(mn+1/2)
    return 0.5 * (1 - m) * (LOG_2PI + math.log(n)) + (m * n + 0.5) * math.log(m)


def s_asymptotic(m: int, n: int, variant: Variant, use_stirling: bool = False) -> LogEstimate:
    _require(m, n, 3 if variant == Variant.paper else 2)
    rho = avoidance_ratio(m, variant)
    value = math.log(m * (m - 1)) + balanced_log(m, n, use_stirling) + (m * n - 1) * math.log(rho)
    return LogEstimate(log_value=value, variant=variant, m=m, n=n)


def h_asymptotic(m: int, n: int, variant: Variant, use_stirling: bool = False) -> LogEstimate:
    _require(m, n, 3 if variant == Variant.paper else 2)
    rho = avoidance_ratio(m, variant)
    log_factorial = stirling_log_factorial(m * n) if use_stirling else exact_log_factorial(m * n)
    value = math.log(m - 1) + log_factorial - math.log(2 * n) + (m * n - 1) * math.log(rho)
    return LogEstimate(log_value=value, variant=variant, m=m, n=n)


def variant_gap(m: int, n: int) -> float:
    """log of the factor between the alternative and paper estimates."""
    _require(m, n)
    return (m * n - 1) * math.log((m - 1) ** 2 / (m * (m - 2)))


def log_h_expansion(m: int, n: int) -> float:
    _require(m, n)
    bracket = m * math.log(m) + m * math.log(1.0 - 1.0 / (m - 1)) - m
    return m * n * math.log(n) + n * bracket - math.log(2 * m * n)


def compact_log_form(m: int, n: int, c_m: float = 0.0) -> float:
    _require(m, n)
    return m * n * math.log(n) + n * math.log(math.factorial(m)) - math.log(2 * m * n) - n + c_m


def fit_compact_constant(m: int, n_values: Iterable[int]) -> float:
    """Least-squares C_m: the offset minimizing residuals against exact log H_m(n)."""
    ns = list(n_values)
    if not ns:
        raise UsageError("fitting C_m needs at least one n")
    residuals = np.array(
        [log_count(hamiltonian_cycles(Composition.uniform(m, n))) - compact_log_form(m, n) for n in ns]
    )
    design = np.ones((len(ns), 1))
    solution, *_ = np.linalg.lstsq(design, residuals, rcond=None)
    return float(solution[0])


def ratio_estimate(m: int, n: int) -> float:
    _require(m, n)
    polynomial = math.prod(m * n + k for k in range(1, m + 1))
    return polynomial * (n / (n + 1)) * (1.0 - 1.0 / (m - 1)) ** m


def exact_ratio(m: int, n: int) -> float:
    current = hamiltonian_cycles(Composition.uniform(m, n))
    following = hamiltonian_cycles(Composition.uniform(m, n + 1))
    if current == 0:
        raise DomainError(f"H_{m}({n}) = 0, the ratio is undefined")
    return following / current


def proportions(parts: Composition) -> ProportionVector:
    sizes = np.array(parts.parts, dtype=float)
    return ProportionVector(values=tuple(float(p) for p in sizes / sizes.sum()))


def nonuniform_log_estimate(parts: Composition, as_displayed: bool = False) -> float:
    """log H for arbitrary parts from the proportion heuristic.

    The multinomial times (1 - sum p_i^2)^(N-1) estimates S; letter filling
    cancels the multinomial's denominator. ``as_displayed`` adds sum log n_i!
    once more, reproducing the displayed form for comparison.
    """
    collision = proportions(parts).collision()
    if collision >= 1.0:
        raise DomainError(f"parts ({parts}): sum of squared proportions is 1, no estimate")
    total = parts.total
    value = exact_log_factorial(total) - math.log(2 * total) + (total - 1) * math.log1p(-collision)
    if as_displayed:
        value += sum(exact_log_factorial(part) for part in parts.parts)
    return value


def error_report(exact: Count, estimate: LogEstimate) -> ErrorReport:
    if exact < 0:
        raise UsageError(f"counts are nonnegative, got {exact}")
    if exact == 0:
        return ErrorReport(exact=exact, estimate=estimate, abs_log_error=math.inf)
    exact_log = log_count(exact)
    abs_error = abs(exact_log - estimate.log_value)
    if exact == 1:
        return ErrorReport(exact=exact, estimate=estimate, abs_log_error=abs_error)
    return ErrorReport(
        exact=exact,
        estimate=estimate,
        abs_log_error=abs_error,
        rel_log_error=abs_error / exact_log,
    )
