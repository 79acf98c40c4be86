from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence

import networkx as nx
from pydantic import BaseModel, ConfigDict, model_validator

from hamcount.core import (
    AllDistinctPairs,
    ColorWord,
    Composition,
    Count,
    Pair,
    SameEndpoint,
    check_endpoints,
)
from hamcount.errors import BoundExceededError
from hamcount.settings import get_settings


logger = logging.getLogger(__name__)


def _check_bound(what: str, parts: Composition, bound: int) -> None:
    if parts.total > bound:
        raise BoundExceededError(what, parts.total, bound)


def _word_bound(bound: int | None) -> int:
    return bound if bound is not None else get_settings().word_oracle_bound


def _graph_bound(bound: int | None) -> int:
    return bound if bound is not None else get_settings().graph_oracle_bound


def iter_smirnov_words(
    parts: Composition,
    endpoints: Pair | AllDistinctPairs | SameEndpoint,
    bound: int | None = None,
) -> Iterator[ColorWord]:
    _check_bound("enumerate_smirnov", parts, _word_bound(bound))
    check_endpoints(endpoints, parts)
    for letters in _smirnov_letters(parts, endpoints):
        yield ColorWord(letters=letters)


def _smirnov_letters(
    parts: Composition,
    endpoints: Pair | AllDistinctPairs | SameEndpoint,
) -> Iterator[tuple[int, ...]]:
    total = parts.total
    remaining = list(parts.parts)
    word: list[int] = []

    if isinstance(endpoints, Pair):
        firsts = [endpoints.s]
    elif isinstance(endpoints, SameEndpoint):
        firsts = [endpoints.s]
    else:
        firsts = list(range(1, parts.m + 1))

    def accept(first: int, last: int) -> bool:
        if isinstance(endpoints, Pair):
            return last == endpoints.r
        if isinstance(endpoints, SameEndpoint):
            return last == first
        return last != first

    def extend() -> Iterator[tuple[int, ...]]:
        if len(word) == total:
            if accept(word[0], word[-1]):
                yield tuple(word)
            return
        previous = word[-1]
        for color in range(1, parts.m + 1):
            if color == previous or remaining[color - 1] == 0:
                continue
            remaining[color - 1] -= 1
            word.append(color)
            yield from extend()
            word.pop()
            remaining[color - 1] += 1

    for first in firsts:
        remaining[first - 1] -= 1
        word.append(first)
        yield from extend()
        word.pop()
        remaining[first - 1] += 1


def enumerate_smirnov(
    parts: Composition,
    endpoints: Pair | AllDistinctPairs | SameEndpoint,
    bound: int | None = None,
) -> Count:
    _check_bound("enumerate_smirnov", parts, _word_bound(bound))
    check_endpoints(endpoints, parts)
    return sum(1 for _ in _smirnov_letters(parts, endpoints))


def build_graph(parts: Composition) -> nx.Graph:
    """K_{n_1,...,n_m} on vertices 0..N-1; node attribute ``subset`` is the 0-based part."""
    return nx.complete_multipartite_graph(*parts.parts)


class CycleCanonicalForm(BaseModel):
    """Starts at the smallest vertex, second vertex smaller than the last."""

    model_config = ConfigDict(frozen=True)

    vertices: tuple[int, ...]

    @model_validator(mode="after")
    def _check_canonical(self) -> CycleCanonicalForm:
        vertices = self.vertices
        if vertices and vertices[0] != min(vertices):
            raise ValueError("a canonical cycle starts at its smallest vertex")
        if len(vertices) >= 3 and vertices[1] > vertices[-1]:
            raise ValueError("a canonical cycle has its second vertex below its last")
        return self

    @classmethod
    def from_cycle(cls, cycle: Sequence[int]) -> CycleCanonicalForm:
        start = cycle.index(min(cycle))
        rotated = tuple(cycle[start:]) + tuple(cycle[:start])
        if len(rotated) >= 3 and rotated[1] > rotated[-1]:
            rotated = (rotated[0],) + rotated[:0:-1]
        return cls(vertices=rotated)


def _adjacency(graph: nx.Graph) -> dict[int, list[int]]:
    return {vertex: sorted(graph.adj[vertex]) for vertex in graph.nodes}


def iter_ham_cycles(parts: Composition, bound: int | None = None) -> Iterator[CycleCanonicalForm]:
    for path in _cycle_paths(parts, bound):
        yield CycleCanonicalForm(vertices=path)


def _cycle_paths(parts: Composition, bound: int | None) -> Iterator[tuple[int, ...]]:
    _check_bound("count_ham_cycles_bruteforce", parts, _graph_bound(bound))
    graph = build_graph(parts)
    total = graph.number_of_nodes()
    if total < 3:
        return
    adjacency = _adjacency(graph)
    closing = set(adjacency[0])
    path = [0]
    visited = [False] * total
    visited[0] = True

    def extend() -> Iterator[tuple[int, ...]]:
        if len(path) == total:
            if path[-1] in closing and path[1] < path[-1]:
                yield tuple(path)
            return
        for vertex in adjacency[path[-1]]:
            if visited[vertex]:
                continue
            visited[vertex] = True
            path.append(vertex)
            yield from extend()
            path.pop()
            visited[vertex] = False

    yield from extend()


def count_ham_cycles_bruteforce(parts: Composition, bound: int | None = None) -> Count:
    return sum(1 for _ in _cycle_paths(parts, bound))


def count_ham_paths_bruteforce(parts: Composition, bound: int | None = None) -> Count:
    """Directed Hamiltonian paths whose two ends lie in different parts."""
    _check_bound("count_ham_paths_bruteforce", parts, _graph_bound(bound))
    graph = build_graph(parts)
    total = graph.number_of_nodes()
    adjacency = _adjacency(graph)
    part_of = nx.get_node_attributes(graph, "subset")
    visited = [False] * total
    count = 0

    def extend(start: int, last: int, depth: int) -> None:
        nonlocal count
        if depth == total:
            if part_of[start] != part_of[last]:
                count += 1
            return
        for vertex in adjacency[last]:
            if visited[vertex]:
                continue
            visited[vertex] = True
            extend(start, vertex, depth + 1)
            visited[vertex] = False

    for start in range(total):
        visited[start] = True
        extend(start, start, 1)
        visited[start] = False
    return count


def count_cyclic_orbits_bruteforce(parts: Composition, bound: int | None = None) -> tuple[Count, Count]:
    """(positioned cyclic Smirnov words, their rotation classes)."""
    _check_bound("count_cyclic_orbits_bruteforce", parts, _word_bound(bound))
    positioned = 0
    orbits: set[tuple[int, ...]] = set()
    for letters in _smirnov_letters(parts, AllDistinctPairs()):
        positioned += 1
        orbits.add(min(letters[shift:] + letters[:shift] for shift in range(len(letters))))
    logger.debug("parts (%s): %d positioned words in %d orbits", parts, positioned, len(orbits))
    return positioned, len(orbits)
