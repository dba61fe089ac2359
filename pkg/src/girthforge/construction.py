"""Build a high-girth digraph ``D*`` with a block projection onto a pattern ``D``.

The pipeline samples ``D'`` from the random blow-up model, insists that its
short cycles be vertex-disjoint (resampling with the next seed otherwise),
removes one arc from every short cycle and keeps the block projection
``psi``.  :func:`verify_theorem1` then checks, instance by instance, whether
small codomains ``C`` see ``D*`` the same way they see ``D``.  Those claims
are only guaranteed for very large ``n``; at desk scale the verifier reports
what it finds, attaching witnesses that can be re-checked independently.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .digraph import Digraph, all_labeled_digraphs, girth
from .errors import (
    EnumerationTruncated,
    InvalidColouring,
    NoMajorityColour,
    RetriesExhausted,
)
from .homs import (
    VertexMapping,
    check_acyclic_hom,
    compose,
    enumerate_acyclic_homs,
    find_acyclic_hom,
    is_acyclic_hom,
    is_core,
    is_pointed,
    is_uniquely_colourable,
    iter_acyclic_homs,
)
from .model import (
    ModelParams,
    SampledDigraph,
    build_blowup,
    extract_cycle_matching,
    sample,
)
from .textio import (
    canonical_json,
    dump_digraph,
    format_map,
    parse_digraph,
    parse_map,
)

__all__ = [
    "ConstructionArtifact",
    "VerificationReport",
    "construct",
    "block_projection",
    "derive_f",
    "labeled_codomains",
    "verify_theorem1",
    "recheck_witness",
    "check_unique_colourability_of_artifact",
    "save_artifact",
    "load_artifact",
    "DEFAULT_ENUMERATION_LIMIT",
]

DEFAULT_ENUMERATION_LIMIT = 10_000


@dataclass(frozen=True, eq=False)
class ConstructionArtifact:
    pattern: Digraph
    params: ModelParams
    Dprime: SampledDigraph
    M: frozenset
    Dstar: Digraph
    psi: VertexMapping
    attempts: int

    @property
    def n(self) -> int:
        return self.Dprime.model.n

    def problems(self) -> list[str]:
        """Violated artifact invariants (empty when the artifact is sound)."""
        out = []
        expected = set(self.Dprime.arcs.arcs) - set(self.M)
        if set(self.Dstar.arcs) != expected:
            out.append("Dstar arcs differ from Dprime minus M")
        if girth(self.Dstar) < self.params.ell:
            out.append("girth(Dstar) below ell")
        if check_acyclic_hom(self.Dstar, self.pattern, self.psi) is not None:
            out.append("psi is not an acyclic homomorphism")
        if not self.psi.is_surjective:
            out.append("psi is not surjective")
        if any(self.psi(x) != x // self.n for x in range(self.Dstar.order)):
            out.append("psi is not the block projection")
        return out


def block_projection(a: int, n: int) -> VertexMapping:
    return VertexMapping(a * n, a, tuple(x // n for x in range(a * n)))


def construct(D: Digraph, params: ModelParams, max_retries: int = 100) -> ConstructionArtifact:
    """Sample ``D'`` until its short cycles are disjoint, then drop a matching.

    Attempt ``t`` (0-based) uses seed ``params.seed + t``; at most
    ``max_retries`` resamples follow the first draw.
    """
    if D.order == 0:
        raise ValueError("pattern digraph must have at least one vertex")
    D0 = build_blowup(D, params.n)
    for attempt in range(max_retries + 1):
        Dprime = sample(D0, params.with_seed(params.seed + attempt))
        M = extract_cycle_matching(Dprime.arcs, params.ell)
        if M is None:
            continue
        Dstar = Dprime.arcs.remove_arcs(M)
        psi = block_projection(D.order, params.n)
        return ConstructionArtifact(D, params, Dprime, M, Dstar, psi, attempt + 1)
    raise RetriesExhausted(
        f"no sample with vertex-disjoint short cycles in {max_retries + 1} attempts"
    )


def derive_f(phi: VertexMapping, artifact: ConstructionArtifact, C: Digraph, k: int | None = None) -> VertexMapping:
    """Pigeonhole map ``f: D -> C`` read off a colouring ``phi`` of ``D*``.

    ``f(i)`` is the smallest colour ``x`` with ``k * |V_i ∩ phi^-1(x)| >= n``.
    """
    if k is None:
        k = artifact.params.k
    violation = check_acyclic_hom(artifact.Dstar, C, phi)
    if violation is not None:
        raise InvalidColouring(f"phi is not a C-colouring of D*: {violation.kind} at {violation.witness}")
    n = artifact.n
    image = []
    for i in range(artifact.pattern.order):
        counts = [0] * C.order
        for x in range(i * n, (i + 1) * n):
            counts[phi(x)] += 1
        colour = next((x for x in range(C.order) if k * counts[x] >= n), None)
        if colour is None:
            raise NoMajorityColour(f"no colour covers n/k of block {i} (counts {counts})")
        image.append(colour)
    return VertexMapping(artifact.pattern.order, C.order, image)


def labeled_codomains(k: int) -> list[Digraph]:
    """Every labeled loopless digraph of order 1..k (1, 4, 64 for orders 1-3)."""
    if k > 3:
        raise ValueError("exhaustive codomain enumeration is limited to k <= 3")
    return [C for m in range(1, k + 1) for C in all_labeled_digraphs(m)]


def _codomain_dict(C: Digraph) -> dict:
    return {"order": C.order, "arcs": [list(a) for a in C.arcs]}


@dataclass
class VerificationReport:
    girth: float
    girth_ok: bool
    psi_ok: bool
    part_ii: list = field(default_factory=list)
    part_iii: list = field(default_factory=list)

    @property
    def all_verified(self) -> bool:
        entries = self.part_ii + self.part_iii
        return self.girth_ok and self.psi_ok and all(e["status"] == "Verified" for e in entries)

    def failures(self) -> list[dict]:
        return [e for e in self.part_ii + self.part_iii if e["status"] == "FailedWithWitness"]

    def to_dict(self) -> dict:
        return {
            "girth": self.girth,
            "girth_ok": self.girth_ok,
            "psi_ok": self.psi_ok,
            "part_ii": self.part_ii,
            "part_iii": self.part_iii,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


def _part_ii_entry(artifact, C):
    f = find_acyclic_hom(artifact.pattern, C)
    phi = find_acyclic_hom(artifact.Dstar, C)
    entry = {
        "part": "ii",
        "codomain": _codomain_dict(C),
        "hom_D": f is not None,
        "hom_Dstar": phi is not None,
        "agree": (f is None) == (phi is None),
    }
    if entry["agree"]:
        entry["status"] = "Verified"
        entry["witness"] = None
    elif phi is not None:
        entry["status"] = "FailedWithWitness"
        entry["witness"] = {"kind": "DstarColourableOnly", "map": list(phi.image)}
    else:
        entry["status"] = "FailedWithWitness"
        entry["witness"] = {"kind": "DColourableOnly", "map": list(f.image)}
    return entry


def _part_iii_entry(artifact, C, k, limit):
    D, psi = artifact.pattern, artifact.psi
    homs_D = enumerate_acyclic_homs(D, C)
    entry = {"part": "iii", "codomain": _codomain_dict(C), "checked": 0, "witness": None}
    truncated = False
    for count, phi in enumerate(iter_acyclic_homs(artifact.Dstar, C)):
        if limit is not None and count >= limit:
            truncated = True
            break
        entry["checked"] = count + 1
        try:
            f = derive_f(phi, artifact, C, k)
        except NoMajorityColour:
            f = None
        matching = [g for g in homs_D if compose(g, psi).image == phi.image]
        ok = (
            f is not None
            and is_acyclic_hom(D, C, f)
            and compose(f, psi).image == phi.image
            and len(matching) == 1
        )
        if not ok:
            entry["status"] = "FailedWithWitness"
            entry["witness"] = {
                "kind": "NoFactorization" if not matching else "NonUniqueFactorization",
                "map": list(phi.image),
                "derived_f": None if f is None else list(f.image),
                "factorizations": [list(g.image) for g in matching],
            }
            return entry
    entry["status"] = "Truncated" if truncated else "Verified"
    return entry


def verify_theorem1(
    artifact: ConstructionArtifact,
    k: int,
    codomains: Sequence[Digraph] | None = None,
    limit: int | None = DEFAULT_ENUMERATION_LIMIT,
) -> VerificationReport:
    """Check the three conclusions of the construction on one artifact.

    ``codomains=None`` means every labeled digraph of order at most ``k``
    (``k <= 3``).  Part (iii) enumerates colourings of ``D*`` and stops
    after ``limit`` of them, reporting ``Truncated`` rather than guessing.
    """
    if codomains is None:
        codomains = labeled_codomains(k)
    g = girth(artifact.Dstar)
    report = VerificationReport(
        girth=g,
        girth_ok=g >= artifact.params.ell,
        psi_ok=artifact.psi.is_surjective
        and check_acyclic_hom(artifact.Dstar, artifact.pattern, artifact.psi) is None,
    )
    for C in codomains:
        if C.order > k:
            raise ValueError(f"codomain of order {C.order} exceeds k={k}")
        report.part_ii.append(_part_ii_entry(artifact, C))
        if is_pointed(C, artifact.pattern):
            report.part_iii.append(_part_iii_entry(artifact, C, k, limit))
    return report


def recheck_witness(artifact: ConstructionArtifact, entry: dict) -> bool:
    """Independently confirm that a failed report entry is a real counterexample."""
    w = entry.get("witness")
    if entry.get("status") != "FailedWithWitness" or w is None:
        return False
    C = Digraph(entry["codomain"]["order"], [tuple(a) for a in entry["codomain"]["arcs"]])
    D, Dstar, psi = artifact.pattern, artifact.Dstar, artifact.psi
    if w["kind"] == "DstarColourableOnly":
        phi = VertexMapping(Dstar.order, C.order, w["map"])
        return is_acyclic_hom(Dstar, C, phi) and not enumerate_acyclic_homs(D, C, limit=1)
    if w["kind"] == "DColourableOnly":
        f = VertexMapping(D.order, C.order, w["map"])
        return is_acyclic_hom(D, C, f) and find_acyclic_hom(Dstar, C) is None
    phi = VertexMapping(Dstar.order, C.order, w["map"])
    if not is_acyclic_hom(Dstar, C, phi):
        return False
    matching = [g for g in enumerate_acyclic_homs(D, C) if compose(g, psi).image == phi.image]
    if w["kind"] == "NoFactorization":
        return not matching
    if w["kind"] == "NonUniqueFactorization":
        return len(matching) > 1
    return False


def check_unique_colourability_of_artifact(artifact: ConstructionArtifact, limit: int | None = None):
    """Is ``D*`` uniquely ``D``-colourable?  Warns when ``D`` is not a core."""
    if not is_core(artifact.pattern):
        warnings.warn("pattern digraph is not a core; unique colourability is not expected", stacklevel=2)
    return is_uniquely_colourable(artifact.Dstar, artifact.pattern, limit)


def save_artifact(artifact: ConstructionArtifact, directory) -> Path:
    """Write the artifact directory (digraph files, matching, psi, meta)."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    a, n = artifact.pattern.order, artifact.n
    (out / "pattern.dg").write_text(dump_digraph(artifact.pattern, "pattern"))
    (out / "dprime.dg").write_text(
        dump_digraph(artifact.Dprime.arcs, "dprime", {"blocks": (a, n), "seed": artifact.Dprime.seed_used})
    )
    M = sorted(artifact.M)
    (out / "matching.txt").write_text(f"arcs {len(M)}\n" + "".join(f"{u} {v}\n" for u, v in M))
    (out / "dstar.dg").write_text(dump_digraph(artifact.Dstar, "dstar"))
    (out / "psi.txt").write_text(format_map(artifact.psi.image) + "\n")
    meta = {
        "params": artifact.params.as_dict(),
        "seed_used": artifact.Dprime.seed_used,
        "attempts": artifact.attempts,
    }
    (out / "meta").write_text(canonical_json(meta))
    return out


def load_artifact(directory) -> ConstructionArtifact:
    d = Path(directory)
    meta = json.loads((d / "meta").read_text())
    pm = meta["params"]
    params = ModelParams(
        pm["n"], pm["ell"], pm["k"], float(pm["eps"]), pm["seed"], pm["unsafe"], pm["p_override"]
    )
    _, pattern, _ = parse_digraph((d / "pattern.dg").read_text())
    _, dprime, headers = parse_digraph((d / "dprime.dg").read_text())
    if headers.get("blocks") != (pattern.order, params.n):
        raise ValueError("dprime.dg blocks header does not match pattern and params")
    D0 = build_blowup(pattern, params.n)
    if not set(dprime.arcs) <= D0.digraph.arc_set:
        raise ValueError("dprime.dg contains arcs outside the blow-up")
    lines = (d / "matching.txt").read_text().split("\n")
    m = int(lines[0].split()[1])
    M = frozenset(tuple(int(t) for t in line.split()) for line in lines[1 : 1 + m])
    _, Dstar, _ = parse_digraph((d / "dstar.dg").read_text())
    psi_img = parse_map((d / "psi.txt").read_text().strip())
    psi = VertexMapping(Dstar.order, pattern.order, psi_img)
    Dprime = SampledDigraph(D0, dprime, headers["seed"], params.p)
    return ConstructionArtifact(pattern, params, Dprime, M, Dstar, psi, meta["attempts"])
