"""Monte Carlo estimators for the random blow-up model and exact bound formulas.

Each estimator draws ``trials`` independent samples; trial ``t`` uses the
seed ``trial_seed(params.seed, t)``, so results do not depend on trial order
or on how many worker processes are used.  Only bounds that hold for every
``n`` are compared against; asymptotic forms are attached for information.
All bound arithmetic is done with natural logarithms.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .digraph import Digraph, count_short_cycles, intersecting_short_cycle_pairs, is_induced_acyclic
from .errors import NotLarge
from .model import (
    BlockDigraph,
    ModelParams,
    build_blowup,
    classify_large,
    mix64,
    sample_arc_mask,
    MASK64,
)
from .textio import canonical_json

__all__ = [
    "Estimate",
    "GoodArcLoadResult",
    "ChernoffResult",
    "BoundRow",
    "BoundTable",
    "trial_seed",
    "mc_short_cycles",
    "mc_intersecting_pairs",
    "mc_good_arc_load",
    "mc_Pr",
    "mc_zU_acyclic",
    "chernoff_check",
    "eval_bounds",
    "log_binom",
    "log_short_cycle_bound",
    "log_double_cycle_bound",
]

EXACT = "exact-expectation"
ASYMPTOTIC = "asymptotic-informational"


def trial_seed(seed: int, t: int) -> int:
    return mix64((mix64(seed) + (t + 1) * 0x9E3779B97F4A7C15) & MASK64)


@dataclass
class Estimate:
    """Sample mean of a per-trial statistic and its comparison value.

    ``comparison`` is ``"upper"`` when ``bound_value`` bounds the mean from
    above and ``"two-sided"`` when it is the exact expectation.  Either way a
    ``WithinBound`` verdict guarantees ``mean <= bound_value + 3*standard_error``.
    """

    operation: str
    params: dict
    trials: int
    seed: int
    mean: float
    variance: float
    standard_error: float
    bound_value: float
    bound_kind: str
    verdict: str
    comparison: str = "upper"
    details: dict = field(default_factory=dict)
    raw: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_samples(cls, operation, params, seed, values, bound_value, bound_kind,
                     comparison="upper", details=None, keep_raw=False):
        values = np.asarray(values, dtype=np.float64)
        trials = len(values)
        mean = float(values.mean())
        variance = float(values.var(ddof=1)) if trials > 1 else 0.0
        se = math.sqrt(variance / trials)
        if bound_kind == ASYMPTOTIC:
            verdict = "Informational"
        elif comparison == "two-sided":
            verdict = "WithinBound" if abs(mean - bound_value) <= 3 * se else "ExceedsBound"
        else:
            verdict = "WithinBound" if mean <= bound_value + 3 * se else "ExceedsBound"
        return cls(operation, params, trials, seed, mean, variance, se, float(bound_value),
                   bound_kind, verdict, comparison, dict(details or {}),
                   values if keep_raw else None)

    def recheck(self) -> bool:
        """Re-derive the verdict from the stored fields."""
        se_ok = math.isclose(self.standard_error, math.sqrt(self.variance / self.trials), rel_tol=1e-12, abs_tol=0)
        if self.verdict == "WithinBound":
            return se_ok and self.mean <= self.bound_value + 3 * self.standard_error
        return se_ok

    def to_report(self) -> dict:
        return {
            "operation": self.operation,
            "params": self.params,
            "trials": self.trials,
            "seed": self.seed,
            "mean": self.mean,
            "variance": self.variance,
            "standard_error": self.standard_error,
            "bound_value": self.bound_value,
            "bound_kind": self.bound_kind,
            "verdict": self.verdict,
            "comparison": self.comparison,
            "details": self.details,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_report())

    def to_csv(self) -> str:
        if self.raw is None:
            raise ValueError("estimate was computed without keep_raw=True")
        rows = ["trial,value"] + [f"{t},{format(float(v), '.17g')}" for t, v in enumerate(self.raw)]
        return "\n".join(rows) + "\n"


def _run_trials(worker: Callable[[int], float], trials: int, jobs: int = 1) -> np.ndarray:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if jobs <= 1 or trials < 2 * jobs:
        return np.array([worker(t) for t in range(trials)], dtype=np.float64)
    bounds = np.linspace(0, trials, jobs + 1).astype(int)
    chunks = [range(bounds[i], bounds[i + 1]) for i in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_run_chunk, [worker] * jobs, chunks))
    return np.concatenate(parts)


def _run_chunk(worker, chunk):
    return np.array([worker(t) for t in chunk], dtype=np.float64)


# ---------------------------------------------------------------- log-space formulas


def log_binom(n: float, k: float) -> float:
    if k < 0 or k > n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _log_p(p: float) -> float:
    return math.log(p) if p > 0 else -math.inf


def _lse(terms: Iterable[float]) -> float:
    terms = [t for t in terms if t != -math.inf]
    if not terms:
        return -math.inf
    return float(logsumexp(terms))


def _exp(log_value: float) -> float:
    if log_value == -math.inf:
        return 0.0
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


def log_short_cycle_bound(n: int, a: int, ell: int, p: float) -> float:
    """log of sum_{i=2}^{ell-1} C(na, i) (i-1)! p^i."""
    N = n * a
    lp = _log_p(p)
    return _lse(
        log_binom(N, i) + math.lgamma(i) + i * lp if p > 0 else -math.inf
        for i in range(2, ell)
    )


def log_double_cycle_bound(n: int, a: int, ell: int, p: float) -> float:
    """log of the double-cycle sum over 2 <= l1 < ell, 1 <= l2 < ell.

    Each term is ``2 C(an,l1) (l1-1)! l1^2 C(an,l2-1) (l2-1)! p^(l1+l2)``.
    """
    N = n * a
    lp = _log_p(p)
    if p <= 0:
        return -math.inf
    terms = []
    for l1 in range(2, ell):
        for l2 in range(1, ell):
            terms.append(
                math.log(2) + log_binom(N, l1) + math.lgamma(l1) + 2 * math.log(l1)
                + log_binom(N, l2 - 1) + math.lgamma(l2) + (l1 + l2) * lp
            )
    return _lse(terms)


# ---------------------------------------------------------------- estimators


def _full_sample(D0: BlockDigraph, p: float, seed: int) -> Digraph:
    keep = sample_arc_mask(seed, p, np.arange(D0.size))
    return Digraph._trusted(D0.order, list(zip(D0.src[keep].tolist(), D0.dst[keep].tolist())))


def _short_cycle_worker(D0, p, ell, seed, t):
    return count_short_cycles(_full_sample(D0, p, trial_seed(seed, t)), ell)


def _pair_worker(D0, p, ell, seed, t):
    return intersecting_short_cycle_pairs(_full_sample(D0, p, trial_seed(seed, t)), ell)


def mc_short_cycles(D: Digraph, params: ModelParams, trials: int, jobs: int = 1, keep_raw: bool = False) -> Estimate:
    """Mean number of cycles of length < ell in a sample, against the exact first-moment sum."""
    D0 = build_blowup(D, params.n)
    worker = partial(_short_cycle_worker, D0, params.p, params.ell, params.seed)
    values = _run_trials(worker, trials, jobs)
    log_bound = log_short_cycle_bound(params.n, D.order, params.ell, params.p)
    eps, ell = params.eps, params.ell
    details = {
        "log_bound": log_bound,
        "asymptotic_bound": float(params.n) ** (eps * ell - eps / 2),
        "asymptotic_kind": ASYMPTOTIC,
    }
    return Estimate.from_samples("mc_short_cycles", params.as_dict(), params.seed, values,
                                 _exp(log_bound), EXACT, details=details, keep_raw=keep_raw)


def mc_intersecting_pairs(D: Digraph, params: ModelParams, trials: int, jobs: int = 1, keep_raw: bool = False) -> Estimate:
    """Mean number of intersecting short-cycle pairs, against the double-cycle sum."""
    D0 = build_blowup(D, params.n)
    worker = partial(_pair_worker, D0, params.p, params.ell, params.seed)
    values = _run_trials(worker, trials, jobs)
    log_bound = log_double_cycle_bound(params.n, D.order, params.ell, params.p)
    details = {
        "log_bound": log_bound,
        "asymptotic_bound": float(params.n) ** -0.5,
        "asymptotic_kind": ASYMPTOTIC,
    }
    return Estimate.from_samples("mc_intersecting_pairs", params.as_dict(), params.seed, values,
                                 _exp(log_bound), EXACT, details=details, keep_raw=keep_raw)


@dataclass
class GoodArcLoadResult:
    """Per-good-arc cross-arc counts compared with their exact binomial law.

    ``estimate`` covers the first good arc; ``arc_estimates`` has one entry
    per good arc.  ``cdf_checks`` lists, per good arc, the evaluated points
    ``(x, exact_cdf, empirical_cdf, tolerance)``.
    """

    estimate: Estimate
    arc_estimates: dict
    cdf_checks: dict
    max_deviation: float
    distribution_ok: bool
    prob_load_at_least_n: float
    loads: np.ndarray = field(repr=False)

    def to_report(self) -> dict:
        rep = self.estimate.to_report()
        rep["details"] = dict(rep["details"])
        rep["details"].update({
            "arcs": {f"{i}->{j}": e.to_report()["mean"] for (i, j), e in self.arc_estimates.items()},
            "max_cdf_deviation": self.max_deviation,
            "distribution_ok": self.distribution_ok,
            "prob_load_at_least_n": self.prob_load_at_least_n,
        })
        return rep


def _resolve_set(D0: BlockDigraph, set_spec) -> list[int]:
    if set_spec is None or set_spec == "full":
        return list(range(D0.order))
    return sorted(int(x) for x in set_spec)


def mc_good_arc_load(D: Digraph, params: ModelParams, set_spec="full", trials: int = 1000,
                     keep_raw: bool = False) -> GoodArcLoadResult:
    """Sample cross-arc counts along every good arc of a large set.

    ``set_spec`` is ``"full"`` (all blocks) or an explicit vertex collection.
    The count along a good arc ``ij`` is Binomial(|A∩V_i|·|A∩V_j|, p); the
    empirical CDF is compared with the exact one at the deciles of that law,
    each within three standard errors.
    """
    D0 = build_blowup(D, params.n)
    S = _resolve_set(D0, set_spec)
    cert = classify_large(S, D0, params.k)
    if cert is None:
        raise NotLarge("vertex set is not large: no pattern arc has both blocks covered n/k times")
    p = params.p
    index_sets = {}
    for i, j in cert.good_arcs:
        tails = [x for x in S if D0.block_of(x) == i]
        heads = [y for y in S if D0.block_of(y) == j]
        index_sets[(i, j)] = D0.cross_arc_indices(tails, heads)
    counts = {arc: np.empty(trials, dtype=np.int64) for arc in index_sets}
    for t in range(trials):
        s = trial_seed(params.seed, t)
        for arc, idx in index_sets.items():
            counts[arc][t] = int(np.count_nonzero(sample_arc_mask(s, p, idx)))
    loads = np.min(np.stack([counts[arc] for arc in index_sets]), axis=0)

    arc_estimates, cdf_checks = {}, {}
    max_dev, ok = 0.0, True
    for arc, idx in index_sets.items():
        m = len(idx)
        arc_estimates[arc] = Estimate.from_samples(
            "mc_good_arc_load", params.as_dict(), params.seed, counts[arc], m * p, EXACT,
            comparison="two-sided", details={"good_arc": list(arc), "binomial_m": m, "p": p},
            keep_raw=keep_raw,
        )
        points = sorted({int(binom.ppf(q, m, p)) for q in np.arange(0.1, 0.95, 0.1)})
        rows = []
        for x in points:
            exact = float(binom.cdf(x, m, p))
            emp = float(np.mean(counts[arc] <= x))
            tol = 3 * math.sqrt(exact * (1 - exact) / trials)
            dev = abs(emp - exact)
            max_dev = max(max_dev, dev)
            ok = ok and dev <= tol
            rows.append((x, exact, emp, tol))
        cdf_checks[arc] = rows
    first = arc_estimates[cert.good_arcs[0]]
    return GoodArcLoadResult(first, arc_estimates, cdf_checks, max_dev, ok,
                             float(np.mean(loads >= params.n)), loads)


def _check_pattern_cycle(D: Digraph, cycle: Sequence[int]):
    cycle = [int(v) for v in cycle]
    if len(cycle) < 2 or len(set(cycle)) != len(cycle):
        raise ValueError("cycle must list at least two distinct vertices")
    for u, v in zip(cycle, cycle[1:] + cycle[:1]):
        if not D.has_arc(u, v):
            raise ValueError(f"cycle arc {u}->{v} is not present in D")
    return cycle


def _local_acyclic(vertices, src, dst) -> bool:
    local = {v: i for i, v in enumerate(vertices)}
    arcs = [(local[u], local[v]) for u, v in zip(src, dst)]
    return is_induced_acyclic(Digraph._trusted(len(vertices), sorted(arcs)), range(len(vertices)))


def _pr_worker(D0, p, cycle, w, seed, random_sets, t):
    s = trial_seed(seed, t)
    if random_sets:
        rng = np.random.default_rng(s)
        verts = sorted(int(i * D0.n + x) for i in cycle for x in rng.choice(D0.n, size=w, replace=False))
    else:
        verts = [i * D0.n + x for i in cycle for x in range(w)]
    idx = D0.induced_arc_indices(verts)
    keep = sample_arc_mask(s, p, idx)
    kept = idx[keep]
    return float(_local_acyclic(verts, D0.src[kept].tolist(), D0.dst[kept].tolist()))


def mc_Pr(D: Digraph, params: ModelParams, cycle: Sequence[int], w: int, trials: int,
          random_sets: bool = False, jobs: int = 1, keep_raw: bool = False) -> Estimate:
    """Probability that ``w``-subsets of the blocks along a pattern cycle induce an acyclic digraph.

    By default the subsets are the first ``w`` positions of each block; with
    ``random_sets`` each trial draws them uniformly.  The comparison value
    ``exp(-n^(1+eps)/(10 k^2))`` is asymptotic and only reported.
    """
    cycle = _check_pattern_cycle(D, cycle)
    if not 1 <= w <= params.n:
        raise ValueError("w must lie in 1..n")
    D0 = build_blowup(D, params.n)
    worker = partial(_pr_worker, D0, params.p, tuple(cycle), w, params.seed, random_sets)
    values = _run_trials(worker, trials, jobs)
    log_bound = -(params.n ** (1 + params.eps)) / (10 * params.k ** 2)
    details = {"cycle": cycle, "w": w, "random_sets": random_sets, "log_bound": log_bound}
    return Estimate.from_samples("mc_Pr", params.as_dict(), params.seed, values, _exp(log_bound),
                                 ASYMPTOTIC, details=details, keep_raw=keep_raw)


def _zu_worker(p, U_size, tau, seed, local_idx, t):
    # Vertex 0 is z, vertices 1..U_size are U in increasing block position.
    s = trial_seed(seed, t)
    keep = sample_arc_mask(s, p, local_idx["index"])
    arcs = [a for a, k in zip(local_idx["arcs"], keep) if k]
    arcset = set(arcs)
    paths = [[0] * (tau + 1) for _ in range(U_size + 1)]
    for v in range(1, U_size + 1):
        if (0, v) in arcset:
            paths[v][1] = 1
        for u in range(1, v):
            if (u, v) in arcset:
                for j in range(2, tau + 1):
                    paths[v][j] += paths[u][j - 1]
    y = sum(paths[v][tau] for v in range(1, U_size + 1) if (v, 0) in arcset)
    acyclic = is_induced_acyclic(Digraph._trusted(U_size + 1, sorted(arcs)), range(U_size + 1))
    return y, float(acyclic)


def mc_zU_acyclic(params: ModelParams, tau: int, U_size: int, trials: int, keep_raw: bool = False):
    """Cycles through one vertex ``z`` and an increasing run of ``U`` in the digon blow-up.

    ``z`` is the first vertex of block 0 and ``U`` the first ``U_size``
    vertices of block 1.  Returns ``(P_acyclic, Y)``: the probability that
    ``{z} ∪ U`` induces an acyclic digraph, and the mean number of
    ``(tau+1)``-cycles through ``z``, compared with ``C(U_size, tau) p^(tau+1)``.
    """
    if tau < 2:
        raise ValueError("tau must be at least 2")
    if tau > U_size:
        raise ValueError("tau exceeds U_size")
    if U_size > params.n:
        raise ValueError("U_size exceeds the block size n")
    if tau <= (2 + params.eps) / params.eps:
        warnings.warn(
            f"tau={tau} does not exceed (2+eps)/eps={(2 + params.eps) / params.eps:.3f}; "
            "the tail estimate needs larger tau",
            stacklevel=2,
        )
    D0 = build_blowup(Digraph(2, [(0, 1), (1, 0)]), params.n)
    n = params.n
    verts = [0] + [n + t for t in range(U_size)]
    local = {v: i for i, v in enumerate(verts)}
    idx = D0.induced_arc_indices(verts)
    local_idx = {
        "index": idx,
        "arcs": [(local[u], local[v]) for u, v in zip(D0.src[idx].tolist(), D0.dst[idx].tolist())],
    }
    worker = partial(_zu_worker, params.p, U_size, tau, params.seed, local_idx)
    ys, acyc = zip(*(worker(t) for t in range(trials)))
    log_ey = log_binom(U_size, tau) + (tau + 1) * _log_p(params.p)
    ey = _exp(log_ey)
    base = {"tau": tau, "U_size": U_size}
    y_est = Estimate.from_samples("mc_zU_acyclic.Y", params.as_dict(), params.seed, ys, ey, EXACT,
                                  comparison="two-sided", details={**base, "log_EY": log_ey},
                                  keep_raw=keep_raw)
    tail = min(1.0, 2 * math.exp(-ey / 3))
    p_est = Estimate.from_samples("mc_zU_acyclic.P_acyclic", params.as_dict(), params.seed, acyc,
                                  tail, ASYMPTOTIC, details={**base, "chernoff_tail": tail},
                                  keep_raw=keep_raw)
    return p_est, y_est


# ---------------------------------------------------------------- Chernoff


@dataclass(frozen=True)
class ChernoffResult:
    m: int
    prob: float
    gamma: float
    exact_tail: float
    log_exact_tail: float
    bound: float
    log_bound: float
    holds: bool

    def to_report(self) -> dict:
        return {
            "operation": "chernoff_check",
            "m": self.m,
            "prob": self.prob,
            "gamma": self.gamma,
            "exact_tail": self.exact_tail,
            "log_exact_tail": self.log_exact_tail,
            "bound": self.bound,
            "log_bound": self.log_bound,
            "holds": self.holds,
        }


def _tail_cutoffs(m: int, prob: float, gamma: float) -> tuple[int, int]:
    # Exact rational arithmetic decides which j satisfy |j - mp| >= gamma*mp.
    mp = Fraction(m) * Fraction(prob)
    g = Fraction(gamma) * mp
    lo = math.floor(mp - g)  # j <= lo is in the lower tail
    hi = math.ceil(mp + g)  # j >= hi is in the upper tail
    return lo, hi


def chernoff_check(m: int, prob: float, gamma: float) -> ChernoffResult:
    """Exact two-sided binomial tail ``P(|X - mp| >= gamma mp)`` versus ``2 exp(-gamma^2 mp / 3)``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if not 0 < prob < 1:
        raise ValueError("prob must lie in (0, 1)")
    if not 0 < gamma < 1.5:
        raise ValueError("gamma must lie in (0, 3/2)")
    lo, hi = _tail_cutoffs(m, prob, gamma)
    j = np.arange(m + 1)
    logpmf = binom.logpmf(j, m, prob)
    in_tail = (j <= lo) | (j >= hi)
    log_tail = float(logsumexp(logpmf[in_tail])) if in_tail.any() else -math.inf
    log_inner = float(logsumexp(logpmf[~in_tail])) if (~in_tail).any() else -math.inf
    if log_inner < log_tail and log_inner > -math.inf:
        # The central mass is the smaller piece: complement it.
        log_tail = math.log(-math.expm1(log_inner)) if log_inner < 0 else -math.inf
    log_tail = min(log_tail, 0.0)
    log_bound = math.log(2) - gamma * gamma * m * prob / 3
    return ChernoffResult(m, prob, gamma, _exp(log_tail), log_tail, _exp(log_bound), log_bound,
                          log_tail <= log_bound)


# ---------------------------------------------------------------- bound table


def _f_short_cycles(n, a, ell, p):
    return log_short_cycle_bound(n, a, ell, p)


def _f_double_cycles(n, a, ell, p):
    return log_double_cycle_bound(n, a, ell, p)


def _xlog(count, prob):
    # count * log(prob) with 0 * log(0) = 0
    if count == 0:
        return 0.0
    return count * math.log(prob) if prob > 0 else -math.inf


def _f_L_bs(n, k, b, s, p):
    m = n - (k - 1) * b
    pairs = m * b
    return (log_binom(n, m) + log_binom(n, b) + log_binom(pairs, s)
            + _xlog(s, p) + _xlog(pairs - s, 1 - p))


def _s_cap(n, b, eps, ell):
    return min(b, math.ceil(n ** (eps * ell)))


def _f_L_b(n, k, b, p, eps, ell):
    return _lse(_f_L_bs(n, k, b, s, p) for s in range(_s_cap(n, b, eps, ell) + 1))


def _f_L_b_simplified(n, eps, ell):
    return math.log(math.ceil(n ** (eps * ell))) - n ** eps / 4


def _f_sum_L(n, k, p, eps, ell):
    return _lse(_f_L_b(n, k, b, p, eps, ell) for b in range(1, n // k + 1) if n - (k - 1) * b >= 1)


def _f_sum_L_cap(n, eps):
    return -(n ** eps) / 6


def _f_Pr(n, k, eps):
    return -(n ** (1 + eps)) / (10 * k * k)


def _f_N(n, a, k, w, eps):
    lp = _f_Pr(n, k, eps)
    return _lse(log_binom(a, r) + math.lgamma(r) + r * log_binom(n, w) + lp for r in range(2, a + 1))


def _f_EY(U_size, tau, p):
    return log_binom(U_size, tau) + (tau + 1) * _log_p(p)


def _f_EY_lower(n, k, tau, eps):
    return (eps * tau + eps - 1) * math.log(n) - tau * math.log(4 * k * tau)


def _f_PY0(n, k, tau, eps):
    return math.log(2) - n ** (eps * tau + eps - 1) / (3 * (4 * k * tau) ** tau)


def _f_PY0_final(n, k, tau, eps):
    return math.log(2) - n ** (1 + 2 * eps) / (3 * (4 * k * tau) ** tau)


def _f_PY0_cap(n, eps):
    return -(n ** (1 + eps))


def _f_chernoff(m, prob, gamma):
    return math.log(2) - gamma * gamma * m * prob / 3


_FORMULAS: dict[str, Callable[..., float]] = {
    "short_cycle_sum": _f_short_cycles,
    "double_cycle_sum": _f_double_cycles,
    "L_bs": _f_L_bs,
    "L_b": _f_L_b,
    "L_b_simplified": _f_L_b_simplified,
    "sum_L": _f_sum_L,
    "sum_L_cap": _f_sum_L_cap,
    "P_r_bound": _f_Pr,
    "N_bound": _f_N,
    "EY": _f_EY,
    "EY_lower": _f_EY_lower,
    "PY0_chernoff": _f_PY0,
    "PY0_final": _f_PY0_final,
    "PY0_cap": _f_PY0_cap,
    "chernoff": _f_chernoff,
}


@dataclass(frozen=True)
class BoundRow:
    name: str
    formula: str
    inputs: dict
    log_value: float | None
    tag: str
    flag: str | None = None

    @property
    def value(self) -> float | None:
        return None if self.log_value is None else _exp(self.log_value)

    def recompute(self) -> float | None:
        if self.flag is not None:
            return None
        return _FORMULAS[self.formula](**self.inputs)

    def to_report(self) -> dict:
        return {
            "name": self.name,
            "formula": self.formula,
            "inputs": self.inputs,
            "log_value": self.log_value,
            "value": self.value,
            "tag": self.tag,
            "flag": self.flag,
        }


@dataclass
class BoundTable:
    rows: list = field(default_factory=list)

    def add(self, name, formula, tag, **inputs):
        row = BoundRow(name, formula, inputs, _FORMULAS[formula](**inputs), tag)
        self.rows.append(row)
        return row

    def add_flagged(self, name, formula, tag, flag, **inputs):
        row = BoundRow(name, formula, inputs, None, tag, flag)
        self.rows.append(row)
        return row

    def __getitem__(self, name) -> BoundRow:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)

    def reproduces(self) -> bool:
        return all(row.recompute() == row.log_value for row in self.rows)

    def to_report(self) -> dict:
        return {"operation": "eval_bounds", "rows": [r.to_report() for r in self.rows]}

    def to_json(self) -> str:
        return canonical_json(self.to_report())


def eval_bounds(params: ModelParams, a: int, extras: dict | None = None) -> BoundTable:
    """Evaluate the bound chains at concrete parameters.

    Recognised ``extras``: ``p`` (overrides ``params.p``), ``w`` (set size
    for the bad-sequence sum; default ``ceil(n/(2k))``), ``b`` and ``s``
    (one explicit L(b,s) row), ``tau`` and ``U_size`` (default
    ``floor(n/(2k))``), and ``m``, ``prob``, ``gamma`` for a Chernoff row.
    Rows whose inputs fall outside the admissible range are kept but flagged.
    """
    extras = dict(extras or {})
    n, k, ell, eps = params.n, params.k, params.ell, params.eps
    p = float(extras.get("p", params.p))
    t = BoundTable()
    t.add("short_cycle_sum", "short_cycle_sum", "short cycles: sum_i C(na,i)(i-1)! p^i", n=n, a=a, ell=ell, p=p)
    t.add("double_cycle_sum", "double_cycle_sum", "intersecting pairs: double-cycle sum", n=n, a=a, ell=ell, p=p)

    if "b" in extras:
        b = int(extras["b"])
        s = int(extras.get("s", 0))
        reason = None
        if b < 1:
            reason = "degenerate: B must be nonempty (b >= 1)"
        elif k * b > n:
            reason = "degenerate: b exceeds n/k"
        elif n - (k - 1) * b < 1:
            reason = "degenerate: |A| = n-(k-1)b must be positive"
        elif s < 0 or s > _s_cap(n, b, eps, ell):
            reason = "degenerate: s outside 0..min(b, ceil(n^(eps*ell)))"
        if reason:
            t.add_flagged(f"L_bs[b={b},s={s}]", "L_bs", "bad pair: L(b,s) first line", reason, n=n, k=k, b=b, s=s, p=p)
        else:
            t.add(f"L_bs[b={b},s={s}]", "L_bs", "bad pair: L(b,s) first line", n=n, k=k, b=b, s=s, p=p)
            t.add(f"L_b[b={b}]", "L_b", "bad pair: L(b) = sum_s L(b,s)", n=n, k=k, b=b, p=p, eps=eps, ell=ell)
    t.add("L_b_simplified", "L_b_simplified", "bad pair: ceil(n^(eps ell)) e^(-n^eps/4)", n=n, eps=eps, ell=ell)
    t.add("sum_L", "sum_L", "bad pair: sum_b L(b)", n=n, k=k, p=p, eps=eps, ell=ell)
    t.add("sum_L_cap", "sum_L_cap", "bad pair: e^(-n^eps/6)", n=n, eps=eps)

    w = int(extras.get("w", math.ceil(n / (2 * k))))
    t.add("P_r_bound", "P_r_bound", "bad sequence: P_r <= e^(-n^(1+eps)/(10k^2))", n=n, k=k, eps=eps)
    t.add("N_bound", "N_bound", "bad sequence: N <= sum_r C(a,r)(r-1)! C(n,w)^r P_r", n=n, a=a, k=k, w=w, eps=eps)

    tau = int(extras.get("tau", 2))
    U_size = int(extras.get("U_size", n // (2 * k)))
    t.add("EY", "EY", "cycles through z: E(Y) = C(|U|,tau) p^(tau+1)", U_size=U_size, tau=tau, p=p)
    t.add("EY_lower", "EY_lower", "cycles through z: n^(eps tau+eps-1)/(4k tau)^tau", n=n, k=k, tau=tau, eps=eps)
    t.add("PY0_chernoff", "PY0_chernoff", "P(Y=0) <= 2e^(-n^(eps tau+eps-1)/3(4k tau)^tau)", n=n, k=k, tau=tau, eps=eps)
    t.add("PY0_final", "PY0_final", "P(Y=0) <= 2e^(-n^(1+2eps)/3(4k tau)^tau)", n=n, k=k, tau=tau, eps=eps)
    t.add("PY0_cap", "PY0_cap", "P(Y=0) < e^(-n^(1+eps))", n=n, eps=eps)

    if "gamma" in extras:
        t.add("chernoff", "chernoff", "Chernoff: 2e^(-gamma^2 mp/3)",
              m=int(extras["m"]), prob=float(extras["prob"]), gamma=float(extras["gamma"]))
    return t
