"""The block blow-up ``D0`` of a pattern digraph and its random subdigraphs.

Block ``i`` of the blow-up holds vertices ``i*n .. i*n + n - 1``; position
``t`` inside the block is vertex ``i*n + t``.  Cross arcs copy every pattern
arc ``ij`` onto all of ``V_i x V_j`` and each block carries the transitive
tournament along increasing positions.

Sampling keeps arc number ``idx`` (its rank in the sorted arc list) iff
``uniform(seed, idx) < p``, where ``uniform`` is a SplitMix64 hash.  The
decision for one arc therefore never depends on which other arcs are drawn,
so any sub-collection of arcs can be sampled on its own and will agree with
a full sample under the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable

import numpy as np

from .digraph import Digraph, short_cycles

__all__ = [
    "ModelParams",
    "BlockDigraph",
    "SampledDigraph",
    "LargeSetCertificate",
    "BadPair",
    "mix64",
    "hash_uniforms",
    "build_blowup",
    "sample",
    "sample_arc_mask",
    "classify_large",
    "good_arc_load",
    "find_bad_pair",
    "extract_cycle_matching",
    "BAD_PAIR_MAX_N",
]

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
BAD_PAIR_MAX_N = 12


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def _mix64_array(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> np.uint64(30))
    x = x * np.uint64(0xBF58476D1CE4E5B9)
    x = x ^ (x >> np.uint64(27))
    x = x * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def hash_uniforms(seed: int, indices) -> np.ndarray:
    """Uniforms in [0, 1) keyed by ``(seed, index)``."""
    key = np.uint64(mix64(seed))
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _mix64_array(key + (idx + np.uint64(1)) * np.uint64(_GOLDEN))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the random model; ``p = n**(eps - 1)``.

    ``0 < eps < 1/(4*ell)`` is enforced unless ``unsafe`` is set.  With
    ``unsafe`` one may also force ``p`` directly through ``p_override``.
    """

    n: int
    ell: int
    k: int
    eps: float
    seed: int = 0
    unsafe: bool = False
    p_override: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("block size n must be positive")
        if self.ell < 2:
            raise ValueError("girth target ell must be at least 2")
        if self.k < 1:
            raise ValueError("k must be positive")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.p_override is not None:
            if not self.unsafe:
                raise ValueError("p_override requires unsafe=True")
            if not 0.0 <= self.p_override <= 1.0:
                raise ValueError("p_override must lie in [0, 1]")
        if not self.unsafe:
            if not 0 < self.eps < 1 / (4 * self.ell):
                raise ValueError(f"eps={self.eps} outside (0, 1/(4*ell)) = (0, {1 / (4 * self.ell)})")
            if not 0 < self.p < 1:
                raise ValueError(f"derived p={self.p} is not in (0, 1); n must be at least 2")

    @property
    def p(self) -> float:
        if self.p_override is not None:
            return float(self.p_override)
        return float(self.n) ** (self.eps - 1.0)

    def with_seed(self, seed: int) -> "ModelParams":
        return ModelParams(self.n, self.ell, self.k, self.eps, seed & MASK64, self.unsafe, self.p_override)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "ell": self.ell,
            "k": self.k,
            "eps": self.eps,
            "seed": self.seed,
            "unsafe": self.unsafe,
            "p_override": self.p_override,
            "p": self.p,
        }


@dataclass(frozen=True, eq=False)
class BlockDigraph:
    """The blow-up ``D0`` of ``base`` with blocks of size ``n``."""

    base: Digraph
    n: int
    src: np.ndarray = field(repr=False)
    dst: np.ndarray = field(repr=False)

    @property
    def a(self) -> int:
        return self.base.order

    @property
    def order(self) -> int:
        return self.a * self.n

    @property
    def size(self) -> int:
        return len(self.src)

    def block(self, i: int) -> range:
        return range(i * self.n, (i + 1) * self.n)

    def block_of(self, x: int) -> int:
        return x // self.n

    @cached_property
    def digraph(self) -> Digraph:
        return Digraph._trusted(self.order, list(zip(self.src.tolist(), self.dst.tolist())))

    @cached_property
    def _keys(self) -> np.ndarray:
        return self.src.astype(np.int64) * self.order + self.dst

    def arc_indices(self, src, dst) -> np.ndarray:
        """Rank of each arc ``(src[i], dst[i])`` in the sorted arc list of ``D0``."""
        keys = np.asarray(src, dtype=np.int64) * self.order + np.asarray(dst, dtype=np.int64)
        idx = np.searchsorted(self._keys, keys)
        if np.any(idx >= len(self._keys)) or np.any(self._keys[np.minimum(idx, len(self._keys) - 1)] != keys):
            raise ValueError("some arcs are not arcs of D0")
        return idx

    def induced_arc_indices(self, vertices: Iterable[int]) -> np.ndarray:
        inside = np.zeros(self.order, dtype=bool)
        inside[np.fromiter(vertices, dtype=np.int64)] = True
        return np.flatnonzero(inside[self.src] & inside[self.dst])

    def cross_arc_indices(self, tails: Iterable[int], heads: Iterable[int]) -> np.ndarray:
        """Indices of arcs of ``D0`` from ``tails`` into ``heads``."""
        t = np.zeros(self.order, dtype=bool)
        h = np.zeros(self.order, dtype=bool)
        t[np.fromiter(tails, dtype=np.int64)] = True
        h[np.fromiter(heads, dtype=np.int64)] = True
        return np.flatnonzero(t[self.src] & h[self.dst])


def build_blowup(D: Digraph, n: int) -> BlockDigraph:
    """Blow ``D`` up into ``D0`` with ``a*C(n,2) + q*n**2`` arcs."""
    if n < 1:
        raise ValueError("block size n must be positive")
    a = D.order
    pos = np.arange(n, dtype=np.int64)
    t_in, h_in = np.triu_indices(n, k=1)
    src_parts, dst_parts = [], []
    for i in range(a):
        src_parts.append(i * n + t_in)
        dst_parts.append(i * n + h_in)
    for i, j in D.arcs:
        src_parts.append(np.repeat(i * n + pos, n))
        dst_parts.append(np.tile(j * n + pos, n))
    if src_parts:
        src = np.concatenate(src_parts).astype(np.int64)
        dst = np.concatenate(dst_parts).astype(np.int64)
    else:
        src = dst = np.zeros(0, dtype=np.int64)
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    src.setflags(write=False)
    dst.setflags(write=False)
    return BlockDigraph(D, n, src, dst)


@dataclass(frozen=True, eq=False)
class SampledDigraph:
    model: BlockDigraph
    arcs: Digraph
    seed_used: int
    p: float


def sample_arc_mask(seed: int, p: float, indices) -> np.ndarray:
    return hash_uniforms(seed, indices) < p


def sample(D0: BlockDigraph, params: ModelParams) -> SampledDigraph:
    """Keep each arc of ``D0`` independently with probability ``params.p``."""
    if params.n != D0.n:
        raise ValueError(f"params.n={params.n} does not match block size {D0.n}")
    keep = sample_arc_mask(params.seed, params.p, np.arange(D0.size))
    arcs = list(zip(D0.src[keep].tolist(), D0.dst[keep].tolist()))
    return SampledDigraph(D0, Digraph._trusted(D0.order, arcs), params.seed, params.p)


@dataclass(frozen=True)
class LargeSetCertificate:
    set: frozenset
    good_arcs: tuple[tuple[int, int], ...]
    k: int


def classify_large(S: Iterable[int], D0: BlockDigraph, k: int) -> LargeSetCertificate | None:
    """Certificate listing every good arc for ``S``, or None if ``S`` is not large.

    A pattern arc ``ij`` is good when ``k*|S ∩ V_i| >= n`` and
    ``k*|S ∩ V_j| >= n`` (integer arithmetic, no division).
    """
    members = frozenset(int(x) for x in S)
    for x in members:
        if not 0 <= x < D0.order:
            raise ValueError(f"vertex {x} outside D0")
    counts = [0] * D0.a
    for x in members:
        counts[D0.block_of(x)] += 1
    big = [k * c >= D0.n for c in counts]
    good = tuple((i, j) for i, j in D0.base.arcs if big[i] and big[j])
    if not good:
        return None
    return LargeSetCertificate(members, good, k)


def good_arc_load(Dhat: SampledDigraph, cert: LargeSetCertificate) -> int:
    """``|Dhat / A|``: fewest sampled arcs inside ``A`` along any good arc."""
    if not cert.good_arcs:
        raise ValueError("certificate has no good arcs")
    D0 = Dhat.model
    members = cert.set
    loads = []
    for i, j in cert.good_arcs:
        tails = {x for x in members if D0.block_of(x) == i}
        heads = {y for y in members if D0.block_of(y) == j}
        loads.append(sum(1 for x in tails for y in Dhat.arcs.out_neighbours[x] if y in heads))
    return min(loads)


@dataclass(frozen=True)
class BadPair:
    """Sets ``A`` and ``B`` witnessing a rare event: a large set with few arcs towards a small one.

    ``pattern_arc`` is the arc ``ij`` of the pattern; ``A`` lives in the tail
    block when ``direction == "A->B"`` and in the head block otherwise.
    ``arcs`` lists the sampled arcs between the two sets in that direction.
    """

    pattern_arc: tuple[int, int]
    direction: str
    A: tuple[int, ...]
    B: tuple[int, ...]
    arcs: tuple[tuple[int, int], ...]


def _bad_pair_cap(params: ModelParams, b: int) -> int:
    return min(b, math.ceil(params.n ** (params.eps * params.ell)))


def find_bad_pair(Dhat: SampledDigraph, params: ModelParams, require_matching: bool = True) -> BadPair | None:
    """Search exhaustively over ``B`` for a pair ``A``, ``B`` with few arcs between them.

    Needs ``|A| = n - (k-1)|B|``, ``1 <= |B| <= n/k`` and at most
    ``min(|B|, ceil(n**(eps*ell)))`` arcs from ``A`` to ``B`` (or ``B`` to ``A``
    for the reversed role), forming a matching unless ``require_matching`` is
    False.  For a fixed ``B`` the best ``A`` is picked greedily, so only the
    subsets ``B`` are enumerated.
    """
    D0 = Dhat.model
    n, k = D0.n, params.k
    if n > BAD_PAIR_MAX_N:
        raise ValueError(f"find_bad_pair is exhaustive and limited to n <= {BAD_PAIR_MAX_N}")
    if params.n != n:
        raise ValueError("params.n does not match the sampled model")
    arcset = Dhat.arcs.arc_set
    for i, j in D0.base.arcs:
        for direction in ("A->B", "B->A"):
            a_block, b_block = (i, j) if direction == "A->B" else (j, i)
            a_verts = list(D0.block(a_block))
            b_verts = list(D0.block(b_block))
            for b in range(1, n // k + 1):
                m = n - (k - 1) * b
                if m < 1:
                    break
                cap = _bad_pair_cap(params, b)
                for B in combinations(b_verts, b):
                    found = _best_A(a_verts, B, m, cap, arcset, direction, require_matching)
                    if found is not None:
                        A, arcs = found
                        return BadPair((i, j), direction, A, B, arcs)
    return None


def _best_A(a_verts, B, m, cap, arcset, direction, require_matching):
    # Neighbours in B of each candidate A-vertex, along the relevant direction.
    nbrs = {}
    for x in a_verts:
        if direction == "A->B":
            nbrs[x] = [y for y in B if (x, y) in arcset]
        else:
            nbrs[x] = [y for y in B if (y, x) in arcset]
    chosen = [x for x in a_verts if not nbrs[x]][:m]
    used = 0
    if require_matching:
        hit = set()
        for x in a_verts:
            if len(chosen) >= m or used >= cap:
                break
            if len(nbrs[x]) == 1 and nbrs[x][0] not in hit:
                hit.add(nbrs[x][0])
                chosen.append(x)
                used += 1
    else:
        for x in sorted((x for x in a_verts if nbrs[x]), key=lambda x: (len(nbrs[x]), x)):
            if len(chosen) >= m or used + len(nbrs[x]) > cap:
                break
            chosen.append(x)
            used += len(nbrs[x])
    if len(chosen) < m:
        return None
    A = tuple(sorted(chosen))
    if direction == "A->B":
        arcs = tuple((x, y) for x in A for y in nbrs[x])
    else:
        arcs = tuple(sorted((y, x) for x in A for y in nbrs[x]))
    return A, arcs


def extract_cycle_matching(Dprime: Digraph, ell: int) -> frozenset | None:
    """One arc per short cycle, or None when the short cycles overlap.

    Each cycle contributes its lexicographically smallest arc.  Returns None
    ("not disjoint") when two cycles of length < ``ell`` share a vertex.
    """
    if isinstance(Dprime, SampledDigraph):
        Dprime = Dprime.arcs
    cycles = short_cycles(Dprime, ell)
    used: set[int] = set()
    M = set()
    for cyc in cycles:
        if used.intersection(cyc):
            return None
        used.update(cyc)
        M.add(min(zip(cyc, cyc[1:] + cyc[:1])))
    return frozenset(M)
