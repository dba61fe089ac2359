"""Acyclic homomorphisms between digraphs and the properties built on them.

A map ``rho: V(D) -> V(C)`` is an acyclic homomorphism (a *C-colouring* of
``D``) when every arc ``uv`` of ``D`` either collapses (``rho(u) == rho(v)``)
or lands on an arc of ``C``, and every colour class induces an acyclic
subdigraph of ``D``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterator, NamedTuple, Sequence

from .digraph import Digraph, short_cycles, induced_subdigraph
from .errors import DimensionMismatch, EnumerationTruncated

__all__ = [
    "VertexMapping",
    "HomViolation",
    "compose",
    "check_acyclic_hom",
    "is_acyclic_hom",
    "find_acyclic_hom",
    "iter_acyclic_homs",
    "enumerate_acyclic_homs",
    "automorphisms",
    "is_automorphism",
    "is_core",
    "core_witness",
    "pointed_witness",
    "is_pointed",
    "differ_by_automorphism",
    "UniqueColourability",
    "is_uniquely_colourable",
]


@dataclass(frozen=True)
class VertexMapping:
    domain_order: int
    codomain_order: int
    image: tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(x) for x in self.image)
        if len(image) != self.domain_order:
            raise DimensionMismatch(
                f"image has {len(image)} entries, domain has {self.domain_order} vertices"
            )
        for x in image:
            if not 0 <= x < self.codomain_order:
                raise DimensionMismatch(f"image vertex {x} outside codomain of order {self.codomain_order}")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, order: int) -> "VertexMapping":
        return cls(order, order, tuple(range(order)))

    @classmethod
    def constant(cls, domain_order: int, codomain_order: int, x: int) -> "VertexMapping":
        return cls(domain_order, codomain_order, (x,) * domain_order)

    def __call__(self, v: int) -> int:
        return self.image[v]

    @property
    def is_surjective(self) -> bool:
        return len(set(self.image)) == self.codomain_order

    def preimage(self, x: int) -> list[int]:
        return [v for v, y in enumerate(self.image) if y == x]


def compose(outer: VertexMapping, inner: VertexMapping) -> VertexMapping:
    """``outer ∘ inner``: apply ``inner`` first."""
    if inner.codomain_order != outer.domain_order:
        raise DimensionMismatch("inner codomain does not match outer domain")
    return VertexMapping(
        inner.domain_order, outer.codomain_order, tuple(outer.image[x] for x in inner.image)
    )


class HomViolation(NamedTuple):
    kind: str  # "ArcNotPreserved" or "PreimageCyclic"
    witness: tuple  # the offending arc, or the vertex sequence of a cycle


def _check_dims(D: Digraph, C: Digraph, rho: VertexMapping):
    if rho.domain_order != D.order or rho.codomain_order != C.order:
        raise DimensionMismatch(
            f"mapping {rho.domain_order}->{rho.codomain_order} does not fit "
            f"digraphs of order {D.order} and {C.order}"
        )


def check_acyclic_hom(D: Digraph, C: Digraph, rho: VertexMapping) -> HomViolation | None:
    """Return the first violation of the two colouring conditions, or None."""
    _check_dims(D, C, rho)
    img = rho.image
    for u, v in D.arcs:
        if img[u] != img[v] and not C.has_arc(img[u], img[v]):
            return HomViolation("ArcNotPreserved", (u, v))
    for x in range(C.order):
        cls = rho.preimage(x)
        if len(cls) < 2:
            continue
        sub = induced_subdigraph(D, cls)
        cycles = short_cycles(sub, len(cls) + 1)
        if cycles:
            return HomViolation("PreimageCyclic", tuple(cls[i] for i in cycles[0]))
    return None


def is_acyclic_hom(D: Digraph, C: Digraph, rho: VertexMapping) -> bool:
    return check_acyclic_hom(D, C, rho) is None


class _Search:
    """Backtracking over vertex assignments with incremental class acyclicity."""

    def __init__(self, D: Digraph, C: Digraph, order: Sequence[int]):
        self.D, self.C = D, C
        self.order = list(order)
        self.img = [-1] * D.order
        self.classes: list[set[int]] = [set() for _ in range(C.order)]
        self.out, self.inn = D.out_neighbours, D.in_neighbours
        self.c_arcs = C.arc_set

    def _arcs_ok(self, v, x):
        img, arcs = self.img, self.c_arcs
        for w in self.out[v]:
            y = img[w]
            if y >= 0 and y != x and (x, y) not in arcs:
                return False
        for w in self.inn[v]:
            y = img[w]
            if y >= 0 and y != x and (y, x) not in arcs:
                return False
        return True

    def _closes_cycle(self, v, x):
        # Adding v to class x makes a cycle iff some out-neighbour of v in the
        # class reaches v's in-neighbours in the class (or is one of them).
        cls = self.classes[x]
        targets = {w for w in self.inn[v] if w in cls}
        if not targets:
            return False
        stack = [w for w in self.out[v] if w in cls]
        seen = set(stack)
        while stack:
            u = stack.pop()
            if u in targets:
                return True
            for w in self.out[u]:
                if w in cls and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def run(self) -> Iterator[tuple[int, ...]]:
        n_c = self.C.order
        if not self.order:
            yield ()
            return
        if n_c == 0:
            return
        depth = 0
        choice = [-1] * len(self.order)
        while depth >= 0:
            v = self.order[depth]
            prev = choice[depth]
            if prev >= 0:
                self.classes[prev].discard(v)
                self.img[v] = -1
            x = prev + 1
            while x < n_c and not (self._arcs_ok(v, x) and not self._closes_cycle(v, x)):
                x += 1
            if x == n_c:
                choice[depth] = -1
                depth -= 1
                continue
            choice[depth] = x
            self.img[v] = x
            self.classes[x].add(v)
            if depth == len(self.order) - 1:
                yield tuple(self.img)
            else:
                depth += 1


def _degree_order(D: Digraph) -> list[int]:
    return sorted(range(D.order), key=lambda v: (-D.degree(v), v))


def find_acyclic_hom(D: Digraph, C: Digraph) -> VertexMapping | None:
    """First acyclic homomorphism found, or None when ``D`` does not map to ``C``.

    Vertices are assigned in descending-degree order, candidates in ascending
    id, so the answer is deterministic.
    """
    for image in _Search(D, C, _degree_order(D)).run():
        return VertexMapping(D.order, C.order, image)
    return None


def iter_acyclic_homs(D: Digraph, C: Digraph) -> Iterator[VertexMapping]:
    """All acyclic homomorphisms ``D -> C`` in lexicographic order of image."""
    for image in _Search(D, C, range(D.order)).run():
        yield VertexMapping(D.order, C.order, image)


def enumerate_acyclic_homs(D: Digraph, C: Digraph, limit: int | None = None) -> list[VertexMapping]:
    """List of acyclic homomorphisms in lexicographic order, at most ``limit`` long."""
    if limit is not None and limit <= 0:
        return []
    out = []
    for rho in iter_acyclic_homs(D, C):
        out.append(rho)
        if limit is not None and len(out) >= limit:
            break
    return out


def _capped(D, C, limit):
    # Full enumeration or EnumerationTruncated; never a silent partial list.
    homs = enumerate_acyclic_homs(D, C, None if limit is None else limit + 1)
    if limit is not None and len(homs) > limit:
        raise EnumerationTruncated(limit)
    return homs


def is_automorphism(C: Digraph, f: VertexMapping) -> bool:
    if f.domain_order != C.order or f.codomain_order != C.order:
        return False
    if len(set(f.image)) != C.order:
        return False
    return {(f.image[u], f.image[v]) for u, v in C.arcs} == C.arc_set


def automorphisms(C: Digraph) -> list[VertexMapping]:
    """Arc-preserving bijections of ``C`` (brute force over all permutations)."""
    out = []
    degs = [(len(C.out_neighbours[v]), len(C.in_neighbours[v])) for v in range(C.order)]
    for perm in permutations(range(C.order)):
        if any(degs[v] != degs[perm[v]] for v in range(C.order)):
            continue
        if all(C.has_arc(perm[u], perm[v]) for u, v in C.arcs):
            out.append(VertexMapping(C.order, C.order, perm))
    return out


def core_witness(D: Digraph) -> VertexMapping | None:
    """A self-colouring of ``D`` that is not an automorphism, if any."""
    for rho in iter_acyclic_homs(D, D):
        if not is_automorphism(D, rho):
            return rho
    return None


def is_core(D: Digraph) -> bool:
    return core_witness(D) is None


def pointed_witness(C: Digraph, D: Digraph, limit: int | None = None):
    """Two C-colourings of ``D`` that differ at exactly one vertex, or None.

    Colourings are bucketed by their image with one coordinate blanked out;
    a bucket collision is exactly a pair at Hamming distance one.
    """
    seen: dict[tuple, VertexMapping] = {}
    count = 0
    for rho in iter_acyclic_homs(D, C):
        count += 1
        if limit is not None and count > limit:
            raise EnumerationTruncated(limit)
        img = rho.image
        for v in range(D.order):
            key = (v, img[:v], img[v + 1:])
            other = seen.get(key)
            if other is not None:
                return other, rho
            seen[key] = rho
    return None


def is_pointed(C: Digraph, D: Digraph, limit: int | None = None) -> bool:
    """True iff no two C-colourings of ``D`` differ at exactly one vertex."""
    return pointed_witness(C, D, limit) is None


def differ_by_automorphism(psi: VertexMapping, phi: VertexMapping, C: Digraph, auts=None) -> bool:
    """True iff ``phi == f ∘ psi`` for some automorphism ``f`` of ``C``."""
    if psi.domain_order != phi.domain_order:
        raise DimensionMismatch("colourings have different domains")
    if psi.codomain_order != C.order or phi.codomain_order != C.order:
        raise DimensionMismatch("colourings do not map into C")
    forced: dict[int, int] = {}
    for x, y in zip(psi.image, phi.image):
        if forced.setdefault(x, y) != y:
            return False
    if auts is None:
        auts = automorphisms(C)
    return any(all(f.image[x] == y for x, y in forced.items()) for f in auts)


class UniqueColourability(NamedTuple):
    unique: bool
    reason: str | None  # None, "NoSurjectiveColouring" or "NonEquivalentPair"
    pair: tuple[VertexMapping, VertexMapping] | None


def is_uniquely_colourable(Dstar: Digraph, D: Digraph, limit: int | None = None) -> UniqueColourability:
    """Decide whether ``Dstar`` is uniquely ``D``-colourable.

    Every colouring is compared with the lexicographically first surjective
    one; by transitivity of "differ by an automorphism" that suffices.
    Raises :class:`EnumerationTruncated` when more than ``limit`` colourings
    would have to be examined.
    """
    homs = _capped(Dstar, D, limit)
    rep = next((h for h in homs if h.is_surjective), None)
    if rep is None:
        return UniqueColourability(False, "NoSurjectiveColouring", None)
    auts = automorphisms(D)
    for phi in homs:
        if not differ_by_automorphism(rep, phi, D, auts):
            return UniqueColourability(False, "NonEquivalentPair", (rep, phi))
    return UniqueColourability(True, None, None)
