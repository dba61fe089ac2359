import itertools
import math
from fractions import Fraction

import mpmath
import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from girthforge.digraph import Digraph, digon, directed_cycle
from girthforge.errors import NotLarge
from girthforge.model import ModelParams, build_blowup
from girthforge.montecarlo import (
    ASYMPTOTIC,
    EXACT,
    Estimate,
    chernoff_check,
    eval_bounds,
    log_double_cycle_bound,
    log_short_cycle_bound,
    mc_good_arc_load,
    mc_intersecting_pairs,
    mc_Pr,
    mc_short_cycles,
    mc_zU_acyclic,
    trial_seed,
)

from conftest import nx_cycles

ARC = Digraph(2, [(0, 1)])


def unsafe(n, p, ell=3, k=2, eps=0.08, seed=0):
    return ModelParams(n, ell, k, eps, seed, unsafe=True, p_override=p)


def within(est, exact):
    return abs(est.mean - exact) <= 3 * est.standard_error


def cycle_arcs(c):
    return {(c[i], c[(i + 1) % len(c)]) for i in range(len(c))}


# ---------------------------------------------------------------- formulas


def test_short_cycle_bound_exact_sum():
    n, a, ell, p = 7, 2, 5, Fraction(1, 3)
    exact = sum(math.comb(n * a, i) * math.factorial(i - 1) * p**i for i in range(2, ell))
    assert math.isclose(math.exp(log_short_cycle_bound(n, a, ell, float(p))), float(exact), rel_tol=1e-12)


def test_short_cycle_sum_bounds_true_expectation():
    # Expected short-cycle count of the blow-up is at most the first-moment sum.
    for D, n, ell in ((digon(), 3, 4), (directed_cycle(3), 2, 4), (ARC, 3, 3)):
        D0 = build_blowup(D, n).digraph
        cycles = [c for c in nx_cycles(D0) if len(c) < ell]
        p = 0.4
        expectation = sum(p ** len(c) for c in cycles)
        assert expectation <= math.exp(log_short_cycle_bound(n, D.order, ell, p)) + 1e-12


def test_double_cycle_bound_against_true_expectation():
    D0 = build_blowup(digon(), 3).digraph
    cycles = [c for c in nx_cycles(D0) if len(c) < 4]
    p = 0.3
    expectation = sum(
        p ** len(cycle_arcs(c1) | cycle_arcs(c2))
        for c1, c2 in itertools.combinations(cycles, 2)
        if set(c1) & set(c2)
    )
    assert expectation <= math.exp(log_double_cycle_bound(3, 2, 4, p))


# ---------------------------------------------------------------- short cycles


class TestShortCycles:
    def test_p_zero(self):
        est = mc_short_cycles(digon(), unsafe(4, 0.0), 50)
        assert est.mean == 0 and est.variance == 0

    def test_p_one_is_exact_count(self):
        est = mc_short_cycles(digon(), unsafe(2, 1.0), 20)
        assert est.mean == 4 and est.variance == 0

    def test_mean_matches_exact_expectation(self):
        D, n, ell, p = digon(), 3, 4, 0.35
        cycles = [c for c in nx_cycles(build_blowup(D, n).digraph) if len(c) < ell]
        exact = sum(p ** len(c) for c in cycles)
        est = mc_short_cycles(D, unsafe(n, p, ell=ell, seed=17), 4000)
        assert within(est, exact)
        assert est.verdict == "WithinBound" and est.recheck()

    def test_jobs_do_not_change_result(self):
        params = ModelParams(20, 3, 2, 0.08, seed=9)
        a = mc_short_cycles(digon(), params, 60, jobs=1)
        b = mc_short_cycles(digon(), params, 60, jobs=3)
        assert a.to_json() == b.to_json()


class TestIntersectingPairs:
    def test_p_zero(self):
        assert mc_intersecting_pairs(digon(), unsafe(4, 0.0), 20).mean == 0

    def test_mean_matches_exact_expectation(self):
        D0 = build_blowup(digon(), 3).digraph
        cycles = [c for c in nx_cycles(D0) if len(c) < 3]
        p = 0.5
        exact = sum(
            p ** len(cycle_arcs(c1) | cycle_arcs(c2))
            for c1, c2 in itertools.combinations(cycles, 2)
            if set(c1) & set(c2)
        )
        est = mc_intersecting_pairs(digon(), unsafe(3, p, seed=4), 4000)
        assert within(est, exact)


# ---------------------------------------------------------------- good-arc load


class TestGoodArcLoad:
    def test_p_one(self):
        res = mc_good_arc_load(ARC, unsafe(4, 1.0), "full", 30)
        assert set(res.loads.tolist()) == {16} and res.prob_load_at_least_n == 1.0

    def test_p_zero(self):
        res = mc_good_arc_load(ARC, unsafe(4, 0.0), "full", 30)
        assert res.estimate.mean == 0 and res.prob_load_at_least_n == 0.0

    def test_not_large(self):
        with pytest.raises(NotLarge):
            mc_good_arc_load(ARC, ModelParams(6, 3, 2, 0.08), [0], 10)

    def test_binomial_law(self):
        params = ModelParams(20, 3, 2, 0.08, seed=2)
        res = mc_good_arc_load(directed_cycle(3), params, "full", 3000)
        assert len(res.arc_estimates) == 3
        for arc, est in res.arc_estimates.items():
            assert math.isclose(est.bound_value, 400 * params.p)
            assert est.verdict == "WithinBound"
        assert res.distribution_ok

    def test_explicit_set(self):
        params = ModelParams(6, 3, 2, 0.08, seed=2)
        res = mc_good_arc_load(ARC, params, [0, 1, 2, 6, 7, 8], 200)
        assert math.isclose(res.estimate.bound_value, 9 * params.p)


# ---------------------------------------------------------------- P_r


def exact_pr_digon(w, p, n):
    """Probability that prefix sets of size w in both digon blocks induce an acyclic digraph."""
    D0 = build_blowup(digon(), n)
    verts = list(range(w)) + [n + t for t in range(w)]
    arcs = [(u, v) for u in verts for v in verts if D0.digraph.has_arc(u, v)]
    total = Fraction(0)
    pf = Fraction(p)
    for mask in range(1 << len(arcs)):
        kept = [arcs[i] for i in range(len(arcs)) if mask >> i & 1]
        G = nx.DiGraph()
        G.add_nodes_from(verts)
        G.add_edges_from(kept)
        if nx.is_directed_acyclic_graph(G):
            total += pf ** len(kept) * (1 - pf) ** (len(arcs) - len(kept))
    return float(total)


class TestPr:
    def test_p_zero(self):
        est = mc_Pr(digon(), unsafe(5, 0.0), [0, 1], 2, 20)
        assert est.mean == 1.0 and est.verdict == "Informational"

    def test_p_one(self):
        assert mc_Pr(digon(), unsafe(5, 1.0), [0, 1], 1, 20).mean == 0.0

    def test_rejects_non_cycle(self):
        with pytest.raises(ValueError):
            mc_Pr(ARC, ModelParams(5, 3, 2, 0.08), [0, 1], 2, 5)

    def test_exact_enumeration_oracle(self):
        p = 0.25
        exact = exact_pr_digon(2, p, 30)
        est = mc_Pr(digon(), unsafe(30, p, seed=8), [0, 1], 2, 5000)
        assert within(est, exact)

    def test_dual_simulation(self):
        n, w, trials = 30, 5, 5000
        params = ModelParams(n, 3, 2, 0.08, seed=21)
        est = mc_Pr(digon(), params, [0, 1], w, trials)
        D0 = build_blowup(digon(), n).digraph
        verts = list(range(w)) + [n + t for t in range(w)]
        arcs = [(u, v) for u in verts for v in verts if D0.has_arc(u, v)]
        rng = np.random.Generator(np.random.PCG64(12345))
        hits = np.empty(trials)
        for t in range(trials):
            keep = rng.random(len(arcs)) < params.p
            G = nx.DiGraph()
            G.add_nodes_from(verts)
            G.add_edges_from(a for a, k in zip(arcs, keep) if k)
            hits[t] = nx.is_directed_acyclic_graph(G)
        other_mean = hits.mean()
        other_se = hits.std(ddof=1) / math.sqrt(trials)
        assert abs(est.mean - other_mean) <= 3 * math.hypot(est.standard_error, other_se)

    def test_random_sets_flag(self):
        params = ModelParams(12, 3, 2, 0.08, seed=3)
        est = mc_Pr(digon(), params, [0, 1], 4, 100, random_sets=True)
        assert est.details["random_sets"] is True and 0 <= est.mean <= 1


# ---------------------------------------------------------------- z and U


def exact_ey_by_enumeration(U_size, tau, p):
    # Vertex 0 is z; 1..U_size lie in the other block in increasing order.
    verts = range(U_size + 1)
    arcs = [(0, u) for u in range(1, U_size + 1)] + [(u, 0) for u in range(1, U_size + 1)]
    arcs += [(u, v) for u in range(1, U_size + 1) for v in range(u + 1, U_size + 1)]
    total = Fraction(0)
    pf = Fraction(p)
    for mask in range(1 << len(arcs)):
        kept = [arcs[i] for i in range(len(arcs)) if mask >> i & 1]
        G = nx.DiGraph()
        G.add_nodes_from(verts)
        G.add_edges_from(kept)
        y = sum(1 for c in nx.simple_cycles(G) if 0 in c and len(c) == tau + 1)
        total += y * pf ** len(kept) * (1 - pf) ** (len(arcs) - len(kept))
    return total


@pytest.mark.filterwarnings("ignore:tau=")
class TestZU:
    def test_p_one(self):
        p_est, y_est = mc_zU_acyclic(unsafe(5, 1.0, eps=0.5), 2, 3, 10)
        assert y_est.mean == 3 and y_est.variance == 0 and p_est.mean == 0

    def test_p_zero(self):
        p_est, y_est = mc_zU_acyclic(unsafe(5, 0.0, eps=0.5), 2, 3, 10)
        assert y_est.mean == 0 and p_est.mean == 1

    def test_closed_form_matches_enumeration(self):
        assert exact_ey_by_enumeration(3, 2, Fraction(1, 3)) == math.comb(3, 2) * Fraction(1, 3) ** 3

    def test_mean_against_closed_form(self):
        p = 0.3
        with pytest.warns(UserWarning):
            _, y_est = mc_zU_acyclic(unsafe(6, p, ell=4, eps=0.06, seed=5), 2, 4, 5000)
        assert within(y_est, math.comb(4, 2) * p**3)


# ---------------------------------------------------------------- Chernoff


def mp_tail(m, prob, gamma):
    mpmath.mp.dps = 50
    mean = Fraction(m) * Fraction(prob)
    dev = Fraction(gamma) * mean
    pr = mpmath.mpf(Fraction(prob).numerator) / Fraction(prob).denominator
    return sum(
        mpmath.binomial(m, j) * pr**j * (1 - pr) ** (m - j)
        for j in range(m + 1)
        if abs(Fraction(j) - mean) >= dev
    )


class TestChernoff:
    def test_frozen_example(self):
        res = chernoff_check(1000, 0.5, 0.2)
        assert math.isclose(res.bound, 2 * math.exp(-20 / 3), rel_tol=1e-14)
        assert math.isclose(res.bound, 2.5452676026796158e-3, rel_tol=1e-12)
        assert math.isclose(res.exact_tail, 1.8016825412560716e-10, rel_tol=1e-9)
        assert res.holds

    def test_small_gamma(self):
        res = chernoff_check(50, 0.3, 1e-9)
        assert res.exact_tail <= 1 < 2 <= res.bound * (1 + 1e-9) and res.holds

    @pytest.mark.parametrize("m", [10, 100, 1000])
    @pytest.mark.parametrize("prob", [0.01, 0.1, 0.5])
    @pytest.mark.parametrize("gamma", [0.1, 0.5, 1.0, 1.4])
    def test_against_high_precision_sum(self, m, prob, gamma):
        res = chernoff_check(m, prob, gamma)
        exact = mp_tail(m, prob, gamma)
        if exact == 0:
            assert res.exact_tail == 0
        else:
            assert abs(res.log_exact_tail - float(mpmath.log(exact))) <= 1e-9 * max(1, abs(res.log_exact_tail))
        assert res.holds

    @pytest.mark.parametrize("bad", [(0, 0.5, 0.5), (10, 0.0, 0.5), (10, 0.5, 1.5), (10, 0.5, 0.0)])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            chernoff_check(*bad)


# ---------------------------------------------------------------- bound table


class TestEvalBounds:
    def test_ey_row(self):
        t = eval_bounds(ModelParams(40, 4, 2, 0.06), 2, {"p": 0.1, "U_size": 10, "tau": 2})
        assert math.isclose(t["EY"].value, 0.045, rel_tol=1e-12)

    def test_degenerate_b(self):
        t = eval_bounds(ModelParams(40, 4, 2, 0.06), 2, {"b": 0})
        row = t["L_bs[b=0,s=0]"]
        assert row.flag is not None and row.value is None

    def test_chernoff_row(self):
        t = eval_bounds(ModelParams(40, 4, 2, 0.06), 2, {"m": 1000, "prob": 0.5, "gamma": 1.0})
        assert math.isclose(t["chernoff"].log_value, math.log(2) - 500 / 3, rel_tol=1e-14)

    def test_reproduces_and_finite(self):
        t = eval_bounds(ModelParams(100, 3, 2, 0.05), 3, {"b": 2, "s": 1, "w": 7, "tau": 3})
        assert t.reproduces()
        for row in t.rows:
            assert row.flag is not None or row.log_value is not None

    def test_short_cycle_row_matches_estimator_bound(self):
        params = ModelParams(50, 4, 2, 0.06, seed=1)
        est = mc_short_cycles(digon(), params, 5)
        assert math.isclose(eval_bounds(params, 2)["short_cycle_sum"].value, est.bound_value)


# ---------------------------------------------------------------- estimates


class TestEstimate:
    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=60),
        st.floats(-1e6, 1e6),
        st.sampled_from(["upper", "two-sided"]),
    )
    def test_within_bound_is_rechecked(self, values, bound, comparison):
        est = Estimate.from_samples("x", {}, 0, values, bound, EXACT, comparison=comparison)
        assert est.recheck()
        if est.verdict == "WithinBound":
            assert est.mean <= est.bound_value + 3 * est.standard_error

    def test_asymptotic_is_informational(self):
        est = Estimate.from_samples("x", {}, 0, [5.0, 6.0], 0.0, ASYMPTOTIC)
        assert est.verdict == "Informational"

    def test_csv(self):
        est = Estimate.from_samples("x", {}, 0, [1, 2], 3.0, EXACT, keep_raw=True)
        assert est.to_csv() == "trial,value\n0,1\n1,2\n"

    def test_trial_seeds_distinct(self):
        seeds = {trial_seed(7, t) for t in range(10_000)}
        assert len(seeds) == 10_000
