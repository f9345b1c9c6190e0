"""Multigraphs built from sequences of index pairs: weights, counts, structure checks.

A sequence of 2m pairs over {1..d} induces a multigraph whose expected signed
collision product is nonzero only when every vertex degree is even. The
functions here construct those graphs, compute their component-wise weights,
and exactly enumerate the sequence classes grouped by vertex count and number
of connected components.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Sequence

import numpy as np

CLASS_ENUM_BUDGET = 10 ** 9
ASSIGNMENT_ENUM_BUDGET = 10 ** 8

_CHUNK = 1 << 18


class BudgetExceededError(RuntimeError):
    """An exact enumeration would exceed its configured budget."""


@dataclass(frozen=True)
class PairSequence:
    """An even-length sequence of strictly increasing 1-based index pairs."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs or len(pairs) % 2:
            raise ValueError("need an even, positive number of pairs")
        for a, b in pairs:
            if not 1 <= a < b:
                raise ValueError(f"pair ({a}, {b}) must be strictly increasing and 1-based")

    @property
    def m(self) -> int:
        return len(self.pairs) // 2


class UnionFind:
    """Union-find with path compression over a fixed vertex set."""

    def __init__(self, items):
        self.parent = {v: v for v in items}

    def find(self, v):
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass(frozen=True, eq=False)
class Multigraph:
    vertices: frozenset[int]
    edges: tuple[tuple[int, int], ...]
    degree: dict[int, int]
    components: tuple[frozenset[int], ...]


def build_multigraph(seq: PairSequence) -> Multigraph:
    """Multigraph whose edge multiset is the sequence; only used vertices appear."""
    degree: Counter[int] = Counter()
    for a, b in seq.pairs:
        degree[a] += 1
        degree[b] += 1
    vertices = sorted(degree)
    uf = UnionFind(vertices)
    for a, b in seq.pairs:
        uf.union(a, b)
    groups: dict[int, list[int]] = {}
    for v in vertices:
        groups.setdefault(uf.find(v), []).append(v)
    components = tuple(sorted((frozenset(g) for g in groups.values()), key=min))
    return Multigraph(vertices=frozenset(vertices), edges=tuple(seq.pairs),
                      degree=dict(degree), components=components)


def weight(graph: Multigraph, x: Sequence[float], k: int) -> float:
    """Product over components of k^-(size-1) * prod x_v^deg(v); 0 on any odd degree."""
    for v in graph.vertices:
        if not 1 <= v <= len(x):
            raise ValueError(f"vertex {v} outside the coefficient vector")
    total = 1.0
    for component in graph.components:
        if any(graph.degree[v] % 2 for v in component):
            return 0.0
        part = float(k) ** -(len(component) - 1)
        for v in component:
            part *= x[v - 1] ** graph.degree[v]
        total *= part
    return total


def squares(vertices, x: Sequence[float]) -> float:
    """Product of squared coefficients over a vertex set; empty product is 1."""
    out = 1.0
    for v in vertices:
        if not 1 <= v <= len(x):
            raise ValueError(f"vertex {v} outside the coefficient vector")
        out *= x[v - 1] ** 2
    return out


def sequence_expectation(seq: PairSequence, x: Sequence[float], k: int, d: int) -> float:
    """Exact mean of the signed collision product over every (hash, sign) assignment.

    Enumerates all k^d bucket maps and 2^d sign patterns; budget-guarded.
    """
    if d < 1 or k < 1:
        raise ValueError("d and k must be positive")
    if len(x) < d:
        raise ValueError("x must cover all d coordinates")
    if any(b > d for _, b in seq.pairs):
        raise ValueError("sequence uses vertices beyond d")
    total = (2 ** d) * (k ** d)
    if total > ASSIGNMENT_ENUM_BUDGET:
        raise BudgetExceededError(
            f"{total} assignments exceed the enumeration budget {ASSIGNMENT_ENUM_BUDGET}")
    pair_list = seq.pairs

    def terms():
        for hashes in product(range(k), repeat=d):
            for signs in product((1, -1), repeat=d):
                value = 1.0
                for a, b in pair_list:
                    if hashes[a - 1] != hashes[b - 1]:
                        value = 0.0
                        break
                    value *= x[a - 1] * x[b - 1] * signs[a - 1] * signs[b - 1]
                yield value

    return math.fsum(terms()) / total


def _eligible_sequences(vertices: tuple[int, ...], two_m: int):
    # Yields pair lists whose multigraph covers every vertex with even degree.
    # Parity is tracked by XOR of per-pair bitmasks: a vertex bit ends at zero
    # exactly when its degree is even.
    vs = tuple(sorted(vertices))
    pairs = [(a, b) for ia, a in enumerate(vs) for b in vs[ia + 1:]]
    pair_count = len(pairs)
    total = pair_count ** two_m
    if total > CLASS_ENUM_BUDGET:
        raise BudgetExceededError(
            f"{total} sequences exceed the class enumeration budget {CLASS_ENUM_BUDGET}")
    if pair_count == 0:
        return
    position = {v: i for i, v in enumerate(vs)}
    full = (1 << len(vs)) - 1
    masks = np.array([(1 << position[a]) | (1 << position[b]) for a, b in pairs],
                     dtype=np.int64)
    for start in range(0, total, _CHUNK):
        block = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        quotient = block.copy()
        parity = np.zeros(block.shape, dtype=np.int64)
        cover = np.zeros(block.shape, dtype=np.int64)
        for _ in range(two_m):
            chosen = masks[quotient % pair_count]
            quotient //= pair_count
            parity ^= chosen
            cover |= chosen
        for code in block[(parity == 0) & (cover == full)].tolist():
            digits = []
            rest = code
            for _ in range(two_m):
                digits.append(rest % pair_count)
                rest //= pair_count
            yield [pairs[digit] for digit in reversed(digits)]


def _components_of(pair_list) -> tuple[tuple[int, ...], ...]:
    uf = UnionFind({v for ab in pair_list for v in ab})
    for a, b in pair_list:
        uf.union(a, b)
    groups: dict[int, list[int]] = {}
    for v in sorted(uf.parent):
        groups.setdefault(uf.find(v), []).append(v)
    return tuple(sorted((tuple(g) for g in groups.values()), key=lambda g: g[0]))


@lru_cache(maxsize=32)
def _census(vertices: tuple[int, ...], two_m: int):
    """Counts by component number plus each member's component tuple."""
    counts: Counter[int] = Counter()
    members: list[tuple[tuple[int, ...], ...]] = []
    for pair_list in _eligible_sequences(vertices, two_m):
        components = _components_of(pair_list)
        counts[len(components)] += 1
        members.append(components)
    return dict(counts), tuple(members)


@dataclass(frozen=True)
class ClassCount:
    i: int
    t: int
    m: int
    count: int

    def __post_init__(self) -> None:
        if self.t > self.i // 2 and self.count != 0:
            raise ValueError("classes with more than i/2 components cannot exist")


def class_histogram(i: int, m: int) -> dict[int, int]:
    """Eligible sequence counts on vertex set {1..i}, grouped by component number."""
    if i < 1 or m < 1:
        raise ValueError("i and m must be positive")
    counts, _ = _census(tuple(range(1, i + 1)), 2 * m)
    return dict(counts)


def class_count(i: int, t: int, m: int) -> ClassCount:
    """Exact number of 2m-pair sequences covering {1..i} with t even components."""
    if min(i, t, m) < 1:
        raise ValueError("i, t and m must be positive")
    return ClassCount(i=i, t=t, m=m, count=class_histogram(i, m).get(t, 0))


def class_count_over(vertices, t: int, m: int) -> int:
    """Same count over an arbitrary vertex set; equals class_count by relabeling."""
    counts, _ = _census(tuple(sorted(set(vertices))), 2 * m)
    return counts.get(t, 0)


def _pairings(elems: tuple[int, ...]):
    if not elems:
        yield ()
        return
    first, rest = elems[0], elems[1:]
    for j, partner in enumerate(rest):
        for tail in _pairings(rest[:j] + rest[j + 1:]):
            yield ((first, partner),) + tail


def disjoint_pair_families(i: int, u: int) -> tuple[frozenset[frozenset[int]], ...]:
    """Every set of u vertex-disjoint unordered pairs drawn from {1..i}."""
    if u < 1:
        raise ValueError("u must be positive")
    families = []
    for chosen in combinations(range(1, i + 1), 2 * u):
        for pairing in _pairings(chosen):
            families.append(frozenset(frozenset(p) for p in pairing))
    return tuple(families)


def pair_family_bound(i: int, u: int) -> int:
    """Binomial cap on the number of disjoint pair families."""
    return math.comb(i, 2 * u) * math.factorial(2 * u) // math.factorial(u)


@dataclass(frozen=True)
class StructReport:
    """Size-2-component structure of one enumerated class."""

    i: int
    t: int
    m: int
    applicable: bool
    member_count: int
    min_pair_components: int | None
    pair_component_deficits: int
    uncovered_members: int
    family_count: int | None
    family_bound: int | None

    @property
    def ok(self) -> bool:
        if not self.applicable:
            return True
        if self.pair_component_deficits or self.uncovered_members:
            return False
        return self.family_count is not None and self.family_count <= self.family_bound


def check_structure(i: int, t: int, m: int) -> StructReport:
    """Verify that every class member carries at least 3t - i two-vertex components
    and that those components realize membership in some disjoint pair family."""
    if min(i, t, m) < 1:
        raise ValueError("i, t and m must be positive")
    _, members = _census(tuple(range(1, i + 1)), 2 * m)
    selected = [comps for comps in members if len(comps) == t]
    u = 3 * t - i
    if u <= 0:
        return StructReport(i, t, m, False, len(selected), None, 0, 0, None, None)
    families = set(disjoint_pair_families(i, u))
    bound = pair_family_bound(i, u)
    deficits = 0
    uncovered = 0
    min_pairs: int | None = None
    for components in selected:
        pair_components = [c for c in components if len(c) == 2]
        count = len(pair_components)
        min_pairs = count if min_pairs is None else min(min_pairs, count)
        if count < u:
            deficits += 1
            uncovered += 1
            continue
        family = frozenset(frozenset(c) for c in pair_components[:u])
        if family not in families:
            uncovered += 1
    return StructReport(i, t, m, True, len(selected), min_pairs, deficits, uncovered,
                        len(families), bound)
