"""Exhaustive enumeration of abstract witness trees rooted at a node.

Trees are emitted as canonical shapes: nested (event, children) tuples with
children sorted, so unordered trees are produced exactly once.  A second,
independent enumerator recurses over labeled parent vectors and deduplicates;
the two must agree exactly in the tractable regime.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .errors import RegimeError
from .instance import DependencyGraph

MAX_ENUM_SIZE = 8
MAX_ENUM_DEGREE = 4


def _check_regime(graph: DependencyGraph, max_size: int) -> None:
    if max_size > MAX_ENUM_SIZE or graph.d > MAX_ENUM_DEGREE:
        raise RegimeError(
            f"exhaustive enumeration limited to size <= {MAX_ENUM_SIZE} and "
            f"degree <= {MAX_ENUM_DEGREE}; use tree_count_bound for larger regimes")


def _n2plus(graph: DependencyGraph, label: int) -> tuple[int, ...]:
    # candidate child labels: everything within distance 2, plus a copy of self
    return tuple(sorted({label, *graph.adjacency[label], *graph.square_adjacency[label]}))


def enumerate_trees(graph: DependencyGraph, v: int, max_size: int):
    """Yield every witness-tree shape rooted at v with size <= max_size, once each."""
    _check_regime(graph, max_size)

    @lru_cache(maxsize=None)
    def forms(label: int, size: int) -> tuple:
        if size == 1:
            return ((label, ()),)
        candidates = []
        for child in _n2plus(graph, label):
            for s in range(1, size):
                for shape in forms(child, s):
                    candidates.append((shape, s))
        candidates.sort(key=lambda c: c[0])
        out = []
        for kids in _multisets(candidates, 0, size - 1):
            out.append((label, kids))
        return tuple(out)

    def _multisets(candidates, start, budget):
        if budget == 0:
            yield ()
            return
        for i in range(start, len(candidates)):
            shape, sz = candidates[i]
            if sz > budget:
                continue
            for rest in _multisets(candidates, i, budget - sz):
                yield (shape,) + rest

    for size in range(1, max_size + 1):
        yield from forms(v, size)


def brute_force_shapes(graph: DependencyGraph, v: int, max_size: int) -> set[tuple]:
    """Independent oracle: all parent vectors x label assignments, deduplicated."""
    _check_regime(graph, max_size)
    shapes: set[tuple] = set()
    for size in range(1, max_size + 1):
        for parents in itertools.product(*[range(j) for j in range(1, size)]):
            _assign_labels(graph, v, parents, size, shapes)
    return shapes


def _assign_labels(graph: DependencyGraph, v: int, parents: tuple[int, ...],
                   size: int, shapes: set[tuple]) -> None:
    labels = [v] + [0] * (size - 1)

    def rec(j: int) -> None:
        if j == size:
            shapes.add(_canon(parents, labels, size))
            return
        for lab in _n2plus(graph, labels[parents[j - 1]]):
            labels[j] = lab
            rec(j + 1)

    rec(1)


def _canon(parents: tuple[int, ...], labels: list[int], size: int) -> tuple:
    kids: list[list[int]] = [[] for _ in range(size)]
    for j in range(1, size):
        kids[parents[j - 1]].append(j)

    def canon(i: int) -> tuple:
        return (labels[i], tuple(sorted(canon(c) for c in kids[i])))

    return canon(0)


def tree_count_bound(d: int, k: int) -> float:
    """Counting bound (5 d^2)^k; meaningful for d >= 1."""
    return float(5 * d * d) ** k


def count_trees(graph: DependencyGraph, v: int, max_size: int) -> int:
    return sum(1 for _ in enumerate_trees(graph, v, max_size))
