"""Simple digraphs on dense integer vertex ids, plus cycle and girth routines.

A :class:`Digraph` is loopless and has no parallel arcs, but both ``uv`` and
``vu`` may be present (a digon).  Arcs are kept sorted so that two equal
digraphs always serialize to the same bytes.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

__all__ = [
    "INFINITE",
    "Digraph",
    "is_induced_acyclic",
    "girth",
    "short_cycles",
    "count_short_cycles",
    "intersecting_short_cycle_pairs",
    "induced_subdigraph",
    "directed_cycle",
    "transitive_tournament",
    "digon",
    "all_labeled_digraphs",
]

#: Girth of an acyclic digraph.  Compares above every integer.
INFINITE = math.inf

Arc = tuple[int, int]


@dataclass(frozen=True)
class Digraph:
    order: int
    arcs: tuple[Arc, ...] = field(default=())

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"negative order {self.order}")
        arcs = sorted((int(u), int(v)) for u, v in self.arcs)
        for i, (u, v) in enumerate(arcs):
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < self.order and 0 <= v < self.order):
                raise ValueError(f"arc {u} {v} out of range for order {self.order}")
            if i and arcs[i - 1] == (u, v):
                raise ValueError(f"duplicate arc {u} {v}")
        object.__setattr__(self, "arcs", tuple(arcs))

    @classmethod
    def _trusted(cls, order, sorted_arcs):
        # Skips validation; caller guarantees sorted, unique, loop-free, in range.
        obj = object.__new__(cls)
        object.__setattr__(obj, "order", order)
        object.__setattr__(obj, "arcs", tuple(sorted_arcs))
        return obj

    @property
    def size(self) -> int:
        return len(self.arcs)

    @cached_property
    def arc_set(self) -> frozenset[Arc]:
        return frozenset(self.arcs)

    @cached_property
    def out_neighbours(self) -> tuple[tuple[int, ...], ...]:
        out = [[] for _ in range(self.order)]
        for u, v in self.arcs:
            out[u].append(v)
        return tuple(tuple(vs) for vs in out)

    @cached_property
    def in_neighbours(self) -> tuple[tuple[int, ...], ...]:
        inn = [[] for _ in range(self.order)]
        for u, v in self.arcs:
            inn[v].append(u)
        return tuple(tuple(us) for us in inn)

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self.arc_set

    def degree(self, v: int) -> int:
        return len(self.out_neighbours[v]) + len(self.in_neighbours[v])

    def remove_arcs(self, arcs: Iterable[Arc]) -> "Digraph":
        drop = set(arcs)
        return Digraph._trusted(self.order, [a for a in self.arcs if a not in drop])

    def __repr__(self):
        return f"Digraph(order={self.order}, arcs={list(self.arcs)!r})"


def _check_vertices(D: Digraph, S: Iterable[int]) -> list[int]:
    verts = sorted(set(int(v) for v in S))
    for v in verts:
        if not 0 <= v < D.order:
            raise ValueError(f"vertex {v} out of range for order {D.order}")
    return verts


def is_induced_acyclic(D: Digraph, S: Iterable[int]) -> bool:
    """True iff the subdigraph of ``D`` induced by ``S`` has no directed cycle."""
    verts = _check_vertices(D, S)
    inside = set(verts)
    indeg = {v: 0 for v in verts}
    for v in verts:
        for w in D.out_neighbours[v]:
            if w in inside:
                indeg[w] += 1
    queue = deque(v for v in verts if indeg[v] == 0)
    seen = 0
    while queue:
        v = queue.popleft()
        seen += 1
        for w in D.out_neighbours[v]:
            if w in inside:
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
    return seen == len(verts)


def girth(D: Digraph):
    """Length of a shortest directed cycle, or :data:`INFINITE`."""
    best = INFINITE
    out = D.out_neighbours
    for s in range(D.order):
        # BFS from s; the first arc back into s closes a shortest cycle through s.
        dist = {s: 0}
        queue = deque([s])
        found = False
        while queue and not found:
            u = queue.popleft()
            if dist[u] + 1 >= best:
                break
            for w in out[u]:
                if w == s:
                    best = dist[u] + 1
                    found = True
                    break
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if best == 2:
            break
    return best


def _walk_short_cycles(D: Digraph, ell: int):
    out = D.out_neighbours
    for s in range(D.order):
        path = [s]
        on_path = {s}
        stack = [iter(out[s])]
        while stack:
            w = next(stack[-1], None)
            if w is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if w == s:
                yield tuple(path)
            elif w > s and w not in on_path and len(path) + 1 < ell:
                path.append(w)
                on_path.add(w)
                stack.append(iter(out[w]))


def short_cycles(D: Digraph, ell: int) -> list[tuple[int, ...]]:
    """All directed cycles of length < ``ell``, smallest vertex first.

    Each cycle is found only from its minimum vertex, so rotations never
    repeat.  The result is sorted by (length, vertex sequence).
    """
    if ell < 2:
        raise ValueError("ell must be at least 2")
    cycles = list(_walk_short_cycles(D, ell))
    cycles.sort(key=lambda c: (len(c), c))
    return cycles


def count_short_cycles(D: Digraph, ell: int) -> int:
    if ell < 2:
        raise ValueError("ell must be at least 2")
    return sum(1 for _ in _walk_short_cycles(D, ell))


def intersecting_short_cycle_pairs(D: Digraph, ell: int) -> int:
    """Number of unordered pairs of distinct short cycles sharing a vertex."""
    cycles = short_cycles(D, ell)
    by_vertex: dict[int, list[int]] = {}
    for idx, cyc in enumerate(cycles):
        for v in cyc:
            by_vertex.setdefault(v, []).append(idx)
    pairs = set()
    for members in by_vertex.values():
        pairs.update(combinations(members, 2))
    return len(pairs)


def induced_subdigraph(D: Digraph, S: Iterable[int]) -> Digraph:
    """Subdigraph induced by ``S``, relabelled 0..|S|-1 in increasing id order."""
    verts = _check_vertices(D, S)
    relabel = {v: i for i, v in enumerate(verts)}
    arcs = [
        (relabel[u], relabel[w])
        for u in verts
        for w in D.out_neighbours[u]
        if w in relabel
    ]
    return Digraph._trusted(len(verts), arcs)


def directed_cycle(m: int) -> Digraph:
    if m < 2:
        raise ValueError("a directed cycle needs at least 2 vertices")
    return Digraph(m, [(i, (i + 1) % m) for i in range(m)])


def digon() -> Digraph:
    return directed_cycle(2)


def transitive_tournament(m: int) -> Digraph:
    return Digraph(m, [(i, j) for i in range(m) for j in range(i + 1, m)])


def all_labeled_digraphs(order: int):
    """Yield every loopless labeled digraph on ``order`` vertices.

    There are 2**(order*(order-1)) of them; arc subsets are produced in
    binary counting order over the sorted list of ordered pairs.
    """
    pairs: Sequence[Arc] = [(u, v) for u in range(order) for v in range(order) if u != v]
    for mask in range(1 << len(pairs)):
        yield Digraph._trusted(order, [pairs[i] for i in range(len(pairs)) if mask >> i & 1])
