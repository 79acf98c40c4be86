from __future__ import annotations

import math
import re
from collections import Counter
from collections.abc import Iterable, Iterator
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, field_validator

from hamcount.errors import DomainError, UsageError


Count = int

LOG2 = math.log(2.0)
_DECIMAL = re.compile(r"[0-9]+")


def count_to_decimal(value: Count) -> str:
    if value < 0:
        raise UsageError(f"counts are nonnegative, got {value}")
    return str(value)


def count_from_decimal(text: str) -> Count:
    if not isinstance(text, str) or not _DECIMAL.fullmatch(text):
        raise UsageError(f"not a decimal count: {text!r}")
    return int(text)


def log_count(value: Count) -> float:
    """Natural log of an exact count of any size.

    Keeps the top 53 bits and adds the shifted-out power of two back in log
    space, so the result never depends on float parsing of huge integers.
    """
    if value <= 0:
        raise DomainError(f"log of a count needs a positive value, got {value}")
    shift = max(value.bit_length() - 53, 0)
    return math.log(value >> shift) + shift * LOG2


def factorial(k: int) -> Count:
    if k < 0:
        raise UsageError(f"factorial needs k >= 0, got {k}")
    return math.factorial(k)


def binomial(n: int, k: int) -> Count:
    if n < 0 or k < 0:
        raise UsageError(f"binomial needs nonnegative arguments, got ({n}, {k})")
    return math.comb(n, k)


def multinomial(parts: Composition) -> Count:
    result = factorial(parts.total)
    for part in parts.parts:
        result //= factorial(part)
    return result


class Composition(BaseModel):
    """Part sizes (n_1, ..., n_m) of K_{n_1,...,n_m}; colors are 1-based."""

    model_config = ConfigDict(frozen=True)

    parts: tuple[PositiveInt, ...]

    @field_validator("parts")
    @classmethod
    def _non_empty(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value:
            raise ValueError("a composition needs at least one part")
        return value

    @classmethod
    def of(cls, parts: Iterable[int]) -> Composition:
        try:
            return cls(parts=tuple(parts))
        except ValidationError as exc:
            raise UsageError(f"invalid composition {tuple(parts)!r}: parts must be >= 1") from exc

    @classmethod
    def uniform(cls, m: int, n: int) -> Composition:
        return cls.of([n] * m)

    @classmethod
    def parse(cls, text: str) -> Composition:
        try:
            values = [int(item) for item in text.replace(" ", "").split(",") if item]
        except ValueError as exc:
            raise UsageError(f"invalid --parts value {text!r}") from exc
        return cls.of(values)

    @property
    def m(self) -> int:
        return len(self.parts)

    @property
    def total(self) -> int:
        return sum(self.parts)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.parts)) == 1

    def __str__(self) -> str:
        return ",".join(str(part) for part in self.parts)

    def part(self, color: int) -> int:
        self.check_color(color)
        return self.parts[color - 1]

    def check_color(self, color: int) -> None:
        if not 1 <= color <= self.m:
            raise UsageError(f"color {color} outside 1..{self.m} for parts ({self})")

    def canonical_key(self) -> tuple[int, ...]:
        return tuple(sorted(self.parts))

    def canonical(self) -> Composition:
        return Composition(parts=self.canonical_key())

    def with_extra(self, color: int) -> Composition:
        self.check_color(color)
        parts = list(self.parts)
        parts[color - 1] += 1
        return Composition(parts=tuple(parts))

    def scaled(self, divisor: int) -> Composition:
        if any(part % divisor for part in self.parts):
            raise UsageError(f"parts ({self}) are not all divisible by {divisor}")
        return Composition(parts=tuple(part // divisor for part in self.parts))

    def permuted(self, order: Iterable[int]) -> Composition:
        """Reorder parts; ``order`` lists old 1-based colors in their new positions."""
        return Composition(parts=tuple(self.parts[color - 1] for color in order))

    def letter_filling(self) -> Count:
        result = 1
        for part in self.parts:
            result *= factorial(part)
        return result


def compositions(total: int, max_parts: int | None = None) -> Iterator[Composition]:
    """All ordered compositions of ``total``, optionally with at most ``max_parts`` parts."""
    limit = total if max_parts is None else min(total, max_parts)

    def extend(prefix: tuple[int, ...], remaining: int) -> Iterator[tuple[int, ...]]:
        if remaining == 0:
            yield prefix
            return
        if len(prefix) == limit:
            return
        for first in range(1, remaining + 1):
            yield from extend(prefix + (first,), remaining - first)

    for parts in extend((), total):
        yield Composition(parts=parts)


class Pair(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["pair"] = "pair"
    s: PositiveInt
    r: PositiveInt

    def __str__(self) -> str:
        return f"{self.s},{self.r}"


class AllDistinctPairs(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["all"] = "all"

    def __str__(self) -> str:
        return "all"


class SameEndpoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["same"] = "same"
    s: PositiveInt

    def __str__(self) -> str:
        return str(self.s)


EndpointSpec = Annotated[Union[Pair, AllDistinctPairs, SameEndpoint], Field(discriminator="kind")]


def parse_endpoints(text: str) -> Pair | AllDistinctPairs | SameEndpoint:
    value = text.strip().lower()
    if value == "all":
        return AllDistinctPairs()
    try:
        colors = [int(item) for item in value.split(",")]
    except ValueError as exc:
        raise UsageError(f"invalid endpoints {text!r}; use S,R or S or all") from exc
    if any(color < 1 for color in colors):
        raise UsageError(f"endpoint colors are 1-based, got {text!r}")
    if len(colors) == 2:
        return Pair(s=colors[0], r=colors[1])
    if len(colors) == 1:
        return SameEndpoint(s=colors[0])
    raise UsageError(f"invalid endpoints {text!r}; use S,R or S or all")


def check_endpoints(endpoints: Pair | AllDistinctPairs | SameEndpoint, parts: Composition) -> None:
    if isinstance(endpoints, Pair):
        parts.check_color(endpoints.s)
        parts.check_color(endpoints.r)
    elif isinstance(endpoints, SameEndpoint):
        parts.check_color(endpoints.s)


class ColorWord(BaseModel):
    model_config = ConfigDict(frozen=True)

    letters: tuple[PositiveInt, ...]

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        separator = "" if max(self.letters, default=0) < 10 else " "
        return separator.join(str(letter) for letter in self.letters)

    def is_smirnov(self) -> bool:
        return all(a != b for a, b in zip(self.letters, self.letters[1:]))

    def is_cyclic_smirnov(self) -> bool:
        return len(self.letters) >= 2 and self.is_smirnov() and self.letters[0] != self.letters[-1]

    def multiplicities(self, m: int) -> tuple[int, ...]:
        counts = Counter(self.letters)
        return tuple(counts.get(color, 0) for color in range(1, m + 1))

    def matches(self, parts: Composition) -> bool:
        return len(self.letters) == parts.total and self.multiplicities(parts.m) == parts.parts

    def rotations(self) -> list[tuple[int, ...]]:
        letters = self.letters
        return [letters[shift:] + letters[:shift] for shift in range(len(letters))]

    def canonical_rotation(self) -> tuple[int, ...]:
        return min(self.rotations())
