"""Acceptance criteria 1-12, one test each, with pinned seeds.

Every test prints a ``criterion N: PASS/FAIL`` line; the same lines are
collected into a summary section at the end of the pytest run.
"""

import itertools
import math
import random
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import mpmath
import pytest

from girthforge.construction import construct, derive_f, labeled_codomains, save_artifact, verify_theorem1
from girthforge.digraph import INFINITE, Digraph, all_labeled_digraphs, digon, directed_cycle, girth, transitive_tournament
from girthforge.homs import (
    VertexMapping,
    check_acyclic_hom,
    enumerate_acyclic_homs,
    find_acyclic_hom,
    is_core,
    is_pointed,
)
from girthforge.model import ModelParams, build_blowup
from girthforge.montecarlo import (
    chernoff_check,
    mc_good_arc_load,
    mc_intersecting_pairs,
    mc_short_cycles,
    mc_zU_acyclic,
)
from girthforge.textio import canonical_json

from conftest import brute_force_homs, nx_cycles, random_digraph, record_criterion

SEED = 20240611
REPORTS: dict[int, str] = {}


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def conclude(number, passed, summary, seconds, limit):
    in_time = seconds < limit
    record_criterion(number, passed and in_time, f"{summary} [{seconds:.1f}s < {limit}s]")
    assert passed, summary
    assert in_time, f"runtime {seconds:.1f}s exceeds {limit}s"


# ---------------------------------------------------------------- 1-4: exact


def test_criterion_01_solver_matches_brute_force():
    rng = random.Random(SEED + 1)
    mismatches = 0
    with Timer() as t:
        for _ in range(200):
            D = random_digraph(rng, rng.randint(1, 5), rng.choice([0.15, 0.3, 0.5]))
            C = random_digraph(rng, rng.randint(1, 3), rng.choice([0.25, 0.5, 0.75]))
            got = {r.image for r in enumerate_acyclic_homs(D, C)}
            if got != set(brute_force_homs(D, C)):
                mismatches += 1
    conclude(1, mismatches == 0, f"200 random pairs, {mismatches} mismatches", t.seconds, 60)


def test_criterion_02_girth_matches_exhaustive_enumeration():
    rng = random.Random(SEED + 2)
    mismatches = 0
    with Timer() as t:
        for _ in range(500):
            D = random_digraph(rng, rng.randint(1, 8), rng.choice([0.1, 0.2, 0.3, 0.5]))
            expected = min((len(c) for c in nx_cycles(D)), default=INFINITE)
            if girth(D) != expected:
                mismatches += 1
    conclude(2, mismatches == 0, f"500 random digraphs, {mismatches} mismatches", t.seconds, 30)


def test_criterion_03_core_and_pointed_facts():
    with Timer() as t:
        c3 = is_core(directed_cycle(3))
        tt3 = is_core(transitive_tournament(3))
        cores = [D for order in (1, 2, 3) for D in all_labeled_digraphs(order) if is_core(D)]
        unpointed = [D for D in cores if not is_pointed(D, D)]
    passed = c3 and not tt3 and cores and not unpointed
    conclude(3, passed, f"C3 core={c3}, TT3 core={tt3}, {len(cores)} cores of order <= 3, "
             f"{len(unpointed)} not self-pointed", t.seconds, 60)


def test_criterion_04_blowup_arc_counts():
    rng = random.Random(SEED + 4)
    grid = [(random_digraph(rng, rng.randint(1, 5), 0.4), rng.randint(1, 12)) for _ in range(18)]
    grid += [(Digraph(2, [(0, 1)]), 3), (digon(), 2)]
    bad = 0
    with Timer() as t:
        for D, n in grid:
            D0 = build_blowup(D, n)
            if D0.size != D.order * math.comb(n, 2) + D.size * n * n or D0.digraph.size != D0.size:
                bad += 1
    conclude(4, bad == 0 and len(grid) == 20, f"{len(grid)} (D, n) pairs, {bad} wrong counts", t.seconds, 5)


# ---------------------------------------------------------------- 5-10: seeded runs


def run_05():
    return mc_short_cycles(digon(), ModelParams(150, 4, 2, 0.06, seed=SEED + 5), 2000)


def run_06():
    return [
        mc_intersecting_pairs(digon(), ModelParams(n, 3, 2, 0.06, seed=SEED + 6), 2000)
        for n in (150, 100)
    ]


def run_07():
    return mc_good_arc_load(digon(), ModelParams(60, 4, 3, 0.06, seed=SEED + 7), "full", 5000)


def run_08():
    return [chernoff_check(m, prob, gamma)
            for m in (10, 100, 1000, 10_000)
            for prob in (0.01, 0.1, 0.5)
            for gamma in (0.1, 0.5, 1.0, 1.4)]


def run_09():
    with pytest.warns(UserWarning):
        return mc_zU_acyclic(ModelParams(40, 4, 2, 0.06, seed=SEED + 9), 2, 10, 10_000)


PIPELINE_COMBOS = [(D, n, ell) for D in ("digon", "c3") for n in (4, 6, 8) for ell in (3, 4)]
PATTERNS = {"digon": digon(), "c3": directed_cycle(3)}


def run_10():
    arts = []
    for r in range(25):
        name, n, ell = PIPELINE_COMBOS[r % len(PIPELINE_COMBOS)]
        eps = 0.08 if ell == 3 else 0.06
        arts.append((name, construct(PATTERNS[name], ModelParams(n, ell, 2, eps, seed=SEED + 100 + r))))
    return arts


def artifact_bytes(arts) -> str:
    with tempfile.TemporaryDirectory() as tmp:
        chunks = []
        for r, (_, art) in enumerate(arts):
            d = save_artifact(art, Path(tmp) / str(r))
            for name in sorted(p.name for p in d.iterdir()):
                chunks.append(f"== {r}/{name}\n" + (d / name).read_text())
        return "".join(chunks)


def report_of(number, result) -> str:
    if number in (5,):
        return result.to_json()
    if number == 6:
        return canonical_json([e.to_report() for e in result])
    if number == 7:
        return canonical_json(result.to_report())
    if number == 8:
        return canonical_json([r.to_report() for r in result])
    if number == 9:
        return canonical_json([e.to_report() for e in result])
    return artifact_bytes(result)


RUNNERS = {5: run_05, 6: run_06, 7: run_07, 8: run_08, 9: run_09, 10: run_10}


def test_criterion_05_short_cycle_first_moment():
    with Timer() as t:
        est = run_05()
    REPORTS[5] = report_of(5, est)
    passed = est.verdict == "WithinBound" and est.mean <= est.bound_value + 3 * est.standard_error and est.recheck()
    conclude(5, passed, f"mean {est.mean:.4f} <= bound {est.bound_value:.4f} + 3*SE ({est.standard_error:.4f})",
             t.seconds, 300)


def test_criterion_06_intersecting_pairs_first_moment():
    with Timer() as t:
        ests = run_06()
    REPORTS[6] = report_of(6, ests)
    passed = all(e.mean <= e.bound_value + 3 * e.standard_error and e.recheck() for e in ests)
    text = "; ".join(f"n={e.params['n']}: mean {e.mean:.4f} <= bound {e.bound_value:.4f} + 3*SE" for e in ests)
    conclude(6, passed, text, t.seconds, 300)


def test_criterion_07_good_arc_load_is_binomial():
    with Timer() as t:
        res = run_07()
    REPORTS[7] = report_of(7, res)
    p = res.estimate.params["p"]
    means_ok = all(
        abs(e.mean - 3600 * p) <= 3 * e.standard_error and e.bound_value == 3600 * p
        for e in res.arc_estimates.values()
    )
    passed = means_ok and res.distribution_ok
    text = ", ".join(f"arc {a}: {e.mean:.3f} vs {3600 * p:.3f}" for a, e in res.arc_estimates.items())
    conclude(7, passed, f"{text}; CDF max deviation {res.max_deviation:.4f}", t.seconds, 120)


def mp_tail(m, prob, gamma):
    mpmath.mp.dps = 40
    mean = Fraction(m) * Fraction(prob)
    dev = Fraction(gamma) * mean
    pr = mpmath.mpf(Fraction(prob).numerator) / Fraction(prob).denominator
    lo = math.floor(mean - dev)
    hi = math.ceil(mean + dev)
    terms = [j for j in range(m + 1) if j <= lo or j >= hi]
    return mpmath.fsum(mpmath.binomial(m, j) * pr**j * (1 - pr) ** (m - j) for j in terms)


def test_criterion_08_chernoff_grid():
    with Timer() as t:
        rows = run_08()
        worst = 0.0
        for r in rows:
            exact = mp_tail(r.m, r.prob, r.gamma)
            if exact > 0:
                worst = max(worst, abs(r.log_exact_tail - float(mpmath.log(exact))))
    REPORTS[8] = report_of(8, rows)
    passed = len(rows) == 48 and all(r.holds for r in rows) and worst < 1e-8
    conclude(8, passed, f"{sum(r.holds for r in rows)}/48 cells hold; "
             f"max |log tail error| vs 40-digit sum {worst:.1e}", t.seconds, 60)


def test_criterion_09_cycles_through_z_expectation():
    with Timer() as t:
        p_est, y_est = run_09()
    REPORTS[9] = report_of(9, (p_est, y_est))
    p = y_est.params["p"]
    expected = math.comb(10, 2) * p**3
    passed = abs(y_est.mean - expected) <= 3 * y_est.standard_error and math.isclose(y_est.bound_value, expected)
    conclude(9, passed, f"Y mean {y_est.mean:.6f} vs 45*p^3 = {expected:.6f} (SE {y_est.standard_error:.6f})",
             t.seconds, 120)


@pytest.fixture(scope="module")
def pipeline_runs():
    with Timer() as t:
        arts = run_10()
    return arts, t.seconds


def test_criterion_10_construction_soundness(pipeline_runs):
    arts, seconds = pipeline_runs
    REPORTS[10] = report_of(10, arts)
    failures = []
    with Timer() as t:
        for r, (name, art) in enumerate(arts):
            D = PATTERNS[name]
            ok = (
                girth(art.Dstar) >= art.params.ell
                and art.psi.is_surjective
                and check_acyclic_hom(art.Dstar, D, art.psi) is None
                and derive_f(art.psi, art, D).image == tuple(range(D.order))
            )
            if not ok:
                failures.append(r)
    conclude(10, len(arts) == 25 and not failures, f"25 runs, failing runs {failures}", seconds + t.seconds, 120)


def independent_recheck(art, entry) -> bool:
    """Confirm a failed entry from scratch, using brute force on the pattern side."""
    w = entry["witness"]
    C = Digraph(entry["codomain"]["order"], [tuple(a) for a in entry["codomain"]["arcs"]])
    D, Dstar = art.pattern, art.Dstar
    pattern_homs = brute_force_homs(D, C)
    if w["kind"] == "DstarColourableOnly":
        phi = VertexMapping(Dstar.order, C.order, w["map"])
        return check_acyclic_hom(Dstar, C, phi) is None and not pattern_homs
    if w["kind"] == "DColourableOnly":
        f = VertexMapping(D.order, C.order, w["map"])
        return tuple(w["map"]) in pattern_homs and find_acyclic_hom(Dstar, C) is None and f is not None
    phi = VertexMapping(Dstar.order, C.order, w["map"])
    if check_acyclic_hom(Dstar, C, phi) is not None:
        return False
    factorisations = [g for g in pattern_homs if tuple(g[x // art.n] for x in range(Dstar.order)) == phi.image]
    if w["kind"] == "NoFactorization":
        return not factorisations
    return len(factorisations) > 1


def test_criterion_11_verifier_witnesses(pipeline_runs):
    arts, _ = pipeline_runs
    counts = {"Verified": 0, "FailedWithWitness": 0, "Truncated": 0}
    bogus = 0
    codomains = labeled_codomains(2)
    with Timer() as t:
        for _, art in arts:
            report = verify_theorem1(art, 2, codomains)
            for entry in report.part_ii + report.part_iii:
                counts[entry["status"]] += 1
                if entry["status"] == "FailedWithWitness" and not independent_recheck(art, entry):
                    bogus += 1
    passed = bogus == 0 and len(codomains) == 5
    conclude(11, passed, f"{len(arts)} artifacts x {len(codomains)} labeled codomains: {counts}; "
             f"{bogus} witnesses failed re-check", t.seconds, 120)


def test_criterion_12_reports_are_reproducible():
    differing = []
    with Timer() as t:
        for number, runner in RUNNERS.items():
            first = REPORTS.get(number) or report_of(number, runner())
            second = report_of(number, runner())
            if first != second:
                differing.append(number)
    conclude(12, not differing, f"criteria 5-10 rerun, differing reports: {differing}", t.seconds, 600)
