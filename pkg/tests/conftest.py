"""Shared brute-force oracles, hypothesis strategies and the acceptance summary.

The oracles deliberately avoid the package's own algorithms: cycles come
from networkx or from permutations, acyclicity from networkx, and girth
from traces of adjacency-matrix powers.
"""

from __future__ import annotations

import itertools
import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import strategies as st

from girthforge.digraph import Digraph


# ---------------------------------------------------------------- generators


def random_digraph(rng: random.Random, order: int, density: float) -> Digraph:
    arcs = [(u, v) for u in range(order) for v in range(order) if u != v and rng.random() < density]
    return Digraph(order, arcs)


@st.composite
def digraphs(draw, min_order=0, max_order=6):
    order = draw(st.integers(min_order, max_order))
    pairs = [(u, v) for u in range(order) for v in range(order) if u != v]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Digraph(order, [a for a, k in zip(pairs, keep) if k])


@st.composite
def digraph_with_subset(draw, max_order=6):
    D = draw(digraphs(max_order=max_order))
    S = draw(st.sets(st.integers(0, max(D.order - 1, 0)), max_size=D.order)) if D.order else set()
    return D, sorted(S)


# ---------------------------------------------------------------- oracles


def to_nx(D: Digraph) -> nx.DiGraph:
    G = nx.DiGraph()
    G.add_nodes_from(range(D.order))
    G.add_edges_from(D.arcs)
    return G


def rotate_min(cycle) -> tuple:
    i = cycle.index(min(cycle))
    return tuple(cycle[i:] + cycle[:i])


def nx_cycles(D: Digraph) -> set[tuple]:
    """Every directed cycle, canonically rotated (networkx enumeration)."""
    return {rotate_min(list(c)) for c in nx.simple_cycles(to_nx(D))}


def permutation_cycles(D: Digraph, max_len: int) -> set[tuple]:
    """Cycles of length <= max_len by scanning every vertex sequence."""
    found = set()
    for length in range(2, max_len + 1):
        for seq in itertools.permutations(range(D.order), length):
            if all(D.has_arc(seq[i], seq[(i + 1) % length]) for i in range(length)):
                found.add(rotate_min(list(seq)))
    return found


def trace_girth(D: Digraph):
    """Smallest L with trace(A^L) > 0; a shortest closed walk is a cycle."""
    A = np.zeros((D.order, D.order), dtype=np.int64)
    for u, v in D.arcs:
        A[u, v] = 1
    P = np.eye(D.order, dtype=np.int64)
    for L in range(1, D.order + 1):
        P = np.minimum(P @ A, 1)
        if np.trace(P) > 0:
            return L
    return float("inf")


def nx_acyclic_on(D: Digraph, S) -> bool:
    return nx.is_directed_acyclic_graph(to_nx(D).subgraph(S))


def brute_force_homs(D: Digraph, C: Digraph) -> list[tuple]:
    """Filter all |C|^|D| maps through the two colouring conditions."""
    G = to_nx(D)
    out = []
    for img in itertools.product(range(C.order), repeat=D.order):
        if any(img[u] != img[v] and not C.has_arc(img[u], img[v]) for u, v in D.arcs):
            continue
        if all(nx.is_directed_acyclic_graph(G.subgraph([v for v in range(D.order) if img[v] == x]))
               for x in range(C.order)):
            out.append(img)
    return out


# ---------------------------------------------------------------- fixtures


@pytest.fixture
def rng():
    return random.Random(20240611)


# ---------------------------------------------------------------- acceptance summary

ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, summary: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {summary}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
