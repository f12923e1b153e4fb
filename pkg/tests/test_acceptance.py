"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (visible with `pytest tests/test_acceptance.py -v -s`).

Every tolerance is pinned here.  Oracle-equivalence criteria compare in
exact rationals; floating identities use the stated 1e-9; the projection
soundness comparison allows 1e-12 on top of exact arithmetic; runtime
budgets are asserted, not aspirational.
"""

import math
import time
from fractions import Fraction as F
from itertools import combinations

import numpy as np

from densecsp.csp import (
    make_instance,
    random_fully_dense,
    random_instance,
    value,
)
from densecsp.csp import density as csp_density
from densecsp.dksh import (
    densest_k_subhypergraph,
    extract_subhypergraph,
    hypergraph_density,
    make_hypergraph,
    reduce_to_csp,
)
from densecsp.experiments import (
    birthday_decay_game,
    corr_sum_fixtures,
    correlated_solution,
    run_edge_tail,
    run_funcbound_sweep,
)
from densecsp.games import birthday_repetition, clause_variable_game
from densecsp.hierarchy import conditioned_correlation_sum, solve_sa, solve_sac
from densecsp.info import (
    JointDistribution,
    entropy,
    mutual_information,
    total_correlation,
)
from densecsp.oracle import exact_csp_opt, exact_densest, exact_game_value
from densecsp.rng import SplitMix64
from densecsp.rounding import approximate, guaranteed_bound


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


# ---------------------------------------------------------------------------
# 1. Relaxation sandwich (exact rational mode), <= 5 minutes


def sandwich_family():
    shapes = (
        [(3, 2, 2)] * 20 + [(3, 2, 3)] * 8 + [(2, 3, 2)] * 6 + [(3, 3, 2)] * 6
        + [(4, 2, 2)] * 6 + [(4, 2, 3)] * 2 + [(4, 3, 2)] * 2
    )
    for idx, (n, q, k) in enumerate(shapes):
        m = 3 + (idx % 4)
        yield random_instance(n, q, k, m=m, seed=1000 + idx,
                              uniform_weights=(idx % 2 == 0))


def test_criterion_1_relaxation_sandwich():
    start = time.monotonic()
    count = 0
    for inst in sandwich_family():
        opt = exact_csp_opt(inst).value
        levels = [solve_sa(inst, r, exact=True)[0] for r in range(inst.k, inst.n + 1)]
        assert all(v >= opt for v in levels), (inst, levels, opt)
        assert all(a >= b for a, b in zip(levels, levels[1:])), levels
        assert levels[-1] == opt, (levels[-1], opt)
        count += 1
    elapsed = time.monotonic() - start
    report(
        "criterion 1 (relaxation sandwich)",
        count >= 50 and elapsed <= 300,
        f"{count} instances exact-sandwiched in {elapsed:.1f}s (budget 300s)",
    )


# ---------------------------------------------------------------------------
# 2. Output-value floor of the driver, <= 15 minutes


def floor_family():
    shapes = [(3, 2), (4, 2), (4, 3), (5, 2), (3, 3)]
    for i in range(1, 7):
        for j, (n, q) in enumerate(shapes):
            sat = (i + j) % 3 == 0
            plant = tuple(SplitMix64(50 * i + j).below(q) for _ in range(n)) if sat else None
            yield i, random_fully_dense(
                n, q, 2, seed=2000 + 10 * i + j,
                payoff_density=0.4 + 0.05 * j, plant_assignment=plant,
            )


def test_criterion_2_driver_floor():
    start = time.monotonic()
    count, violations = 0, []
    for i, inst in floor_family():
        opt = exact_csp_opt(inst).value
        trace = approximate(inst, i=i)
        delta = float(1 - opt)
        floor = guaranteed_bound(inst, i, delta)
        if float(trace.achieved) < floor - 1e-12:
            violations.append((i, inst.n, inst.q, float(trace.achieved), floor))
        count += 1
    elapsed = time.monotonic() - start
    report(
        "criterion 2 (approximation floor)",
        count >= 30 and not violations and elapsed <= 900,
        f"{count} fixtures, {len(violations)} violations, {elapsed:.1f}s (budget 900s)",
    )


# ---------------------------------------------------------------------------
# 3. Near-optimal output on satisfiable instances at eps = 0.3


def test_criterion_3_qptas_eps():
    eps = 0.3
    i = math.ceil(math.log(2) / math.log(1 + eps))
    assert i == 3
    failures = []
    for idx, n in enumerate((3, 4, 4, 5, 5, 3)):
        plant = tuple(SplitMix64(900 + idx).below(2) for _ in range(n))
        inst = random_fully_dense(n, 2, 2, seed=3000 + idx, plant_assignment=plant)
        trace = approximate(inst, i=i)
        if float(trace.achieved) < 1 - eps:
            failures.append((idx, float(trace.achieved)))
    report(
        "criterion 3 (near-optimal satisfiable)",
        not failures,
        f"6 satisfiable fixtures at i={i}, all >= 0.7"
        if not failures else f"violations: {failures}",
    )


# ---------------------------------------------------------------------------
# 4. Divergence floor inequality, 1e4 triples, <= 1 minute


def test_criterion_4_funcbound_inequality():
    start = time.monotonic()
    header, rows = run_funcbound_sweep(seed=0, trials=10_000)
    slack_col = header.index("slack")
    min_slack = min(row[slack_col] for row in rows)
    elapsed = time.monotonic() - start
    report(
        "criterion 4 (divergence floor)",
        len(rows) == 10_000 and min_slack >= -1e-9 and elapsed <= 60,
        f"10^4 triples, min slack {min_slack:.3e}, {elapsed:.1f}s (budget 60s)",
    )


# ---------------------------------------------------------------------------
# 5. Summed conditioned correlation budget


def test_criterion_5_correlation_budget():
    violations = []
    checked = 0
    for name, inst, l in corr_sum_fixtures(seed=0):
        bound = inst.k**2 * math.log(inst.q) / float(csp_density(inst).delta)
        sols = [
            ("sac", solve_sac(inst, inst.k + l).solution),
            ("correlated", correlated_solution(inst.n, inst.q, inst.k + l,
                                               seed=7000 + checked)),
        ]
        for sol_name, mu in sols:
            total = conditioned_correlation_sum(mu, inst, l)
            checked += 1
            if total > bound + 1e-9:
                violations.append((name, sol_name, total, bound))
    report(
        "criterion 5 (correlation budget)",
        checked >= 20 and not violations,
        f"{checked} exhaustive sums within k^2 log q / density + 1e-9"
        if not violations else f"violations: {violations}",
    )


# ---------------------------------------------------------------------------
# 6. Clause/variable soundness on unsatisfiable fixtures


def unsat_fixtures():
    ne = [0, 1, 1, 0]
    eq = [1, 0, 0, 1]
    # inequality odd cycles on 3 and 5 variables
    for n in (3, 5):
        scopes = [((v, (v + 1) % n)) for v in range(n)]
        yield make_instance(n, 2, 2, [(s, F(1, n), ne) for s in scopes])
    # equality chains closed by one inequality, various lengths
    for n in (3, 4, 5):
        rows = [((v, (v + 1) % n), F(1, n), eq) for v in range(n - 1)]
        rows.append(((n - 1, 0), F(1, n), ne))
        yield make_instance(n, 2, 2, rows)
    # random parity 2-CSPs with distinct scopes, filtered unsatisfiable
    seed = 0
    found = 0
    while found < 9:
        seed += 1
        rng = SplitMix64(4000 + seed)
        n, m = 5, 7
        scopes = set()
        while len(scopes) < m:
            scopes.add(tuple(rng.sample_without_replacement(n, 2)))
        rows = [(s, F(1, m), eq if rng.below(2) else ne) for s in sorted(scopes)]
        inst = make_instance(n, 2, 2, rows)
        if exact_csp_opt(inst).value < 1:
            found += 1
            yield inst
    # random 3-XOR systems with distinct scopes, filtered unsatisfiable
    seed = 0
    found = 0
    while found < 6:
        seed += 1
        rng = SplitMix64(5000 + seed)
        n, m = 5, 6
        scopes = set()
        while len(scopes) < m:
            scopes.add(tuple(rng.sample_without_replacement(n, 3)))
        rows = []
        for s in sorted(scopes):
            bit = rng.below(2)
            table = [int((v0 ^ v1 ^ v2) == bit)
                     for v0 in range(2) for v1 in range(2) for v2 in range(2)]
            rows.append((s, F(1, m), table))
        inst = make_instance(n, 2, 3, rows)
        if exact_csp_opt(inst).value < 1:
            found += 1
            yield inst


def test_criterion_6_clause_variable_soundness():
    slack = F(1, 10**12)
    count, violations = 0, []
    for inst in unsat_fixtures():
        opt = exact_csp_opt(inst).value
        assert opt < 1
        eps = 1 - opt
        gv = exact_game_value(clause_variable_game(inst)).value
        if gv > 1 - eps / inst.k + slack:
            violations.append((inst.n, inst.k, float(gv), float(1 - eps / inst.k)))
        count += 1
    report(
        "criterion 6 (clause/variable soundness)",
        count >= 20 and not violations,
        f"{count} unsatisfiable fixtures within 1 - eps/k + 1e-12"
        if not violations else f"violations: {violations}",
    )


# ---------------------------------------------------------------------------
# 7. Edge-count concentration


def test_criterion_7_edge_concentration():
    header, rows = run_edge_tail(seed=0, trials=100_000)
    emp = header.index("empirical_tail")
    bnd = header.index("bound")
    meaningful = [r for r in rows if r[bnd] < 1]
    bad = [r for r in meaningful if r[emp] > r[bnd]]
    report(
        "criterion 7 (edge concentration)",
        len(rows) >= 5 and len(meaningful) >= 3 and not bad,
        f"{len(rows)} configurations x 10^5 trials, {len(meaningful)} with bound < 1, "
        f"all empirical tails within bound"
        if not bad else f"violations: {bad}",
    )


# ---------------------------------------------------------------------------
# 8. Birthday decay regression (exact)


BIRTHDAY_GRID = {
    (1, 1): F(8, 9), (1, 2): F(7, 9), (1, 3): F(2, 3),
    (2, 1): F(7, 9), (2, 2): F(5, 9), (2, 3): F(1, 3),
    (3, 1): F(2, 3), (3, 2): F(1, 3), (3, 3): F(0),
}


def test_criterion_8_birthday_decay_regression():
    g = birthday_decay_game()
    assert exact_game_value(g).value == F(5, 6)
    grid = {}
    for k in (1, 2, 3):
        for l in (1, 2, 3):
            grid[(k, l)] = exact_game_value(birthday_repetition(g, k, l)).value
    matches = grid == BIRTHDAY_GRID
    monotone = all(
        grid[(k, l)] >= grid[(k, l + 1)] for k in (1, 2, 3) for l in (1, 2)
    ) and all(
        grid[(k, l)] >= grid[(k + 1, l)] for k in (1, 2) for l in (1, 2, 3)
    )
    report(
        "criterion 8 (birthday decay regression)",
        matches and monotone,
        "3x3 grid matches stored exact values and is non-increasing both ways"
        if matches and monotone else f"grid: {grid}",
    )


# ---------------------------------------------------------------------------
# 9. Hypergraph extraction dominance and brute-force equality


def test_criterion_9_dksh():
    rng = SplitMix64(6000)
    dominance_checked, dominance_bad = 0, []
    for idx in range(20):
        d = 2 if idx % 3 else 3
        n = 6 + idx % 3
        m = 5 + idx % 4
        edges = set()
        local = SplitMix64(rng.next_u64())
        while len(edges) < m:
            edges.add(tuple(sorted(local.sample_without_replacement(n, d))))
        h = make_hypergraph(n, d, sorted(edges))
        k = max(d, 3 + idx % 2)
        inst, _ = reduce_to_csp(h, k, seed=rng.next_u64())
        a = tuple(local.below(n) for _ in range(k))
        s = extract_subhypergraph(h, k, a)
        if hypergraph_density(h, s) < value(inst, a):
            dominance_bad.append((idx, s, a))
        dominance_checked += 1

    equality_bad = []
    for seed in range(6):
        local = SplitMix64(7000 + seed)
        edges = set()
        while len(edges) < 7:
            edges.add(tuple(sorted(local.sample_without_replacement(7, 2))))
        h = make_hypergraph(7, 2, sorted(edges))
        res = densest_k_subhypergraph(h, 3, i=1, seed=seed)
        if res.mode != "brute-force" or res.density != exact_densest(h, 3).value:
            equality_bad.append(seed)

    report(
        "criterion 9 (hypergraph pipeline)",
        dominance_checked >= 20 and not dominance_bad and not equality_bad,
        f"{dominance_checked} extraction dominance checks, "
        f"6 brute-force fixtures equal the exact oracle"
        if not (dominance_bad or equality_bad)
        else f"dominance: {dominance_bad}, equality: {equality_bad}",
    )


# ---------------------------------------------------------------------------
# 10. Information identities on random joints


def test_criterion_10_information_identities():
    rng = np.random.Generator(np.random.PCG64(4321))
    worst_entropy_gap = 0.0
    worst_mi_gap = 0.0
    for _ in range(1000):
        ndim = int(rng.integers(2, 5))
        shape = tuple(int(rng.integers(2, 4)) for _ in range(ndim))
        t = rng.random(shape) + 1e-4
        j = JointDistribution.from_tensor(t / t.sum())
        tc = total_correlation(j)
        via_entropy = sum(
            entropy(j.marginal((i,))) for i in range(ndim)
        ) - entropy(j)
        worst_entropy_gap = max(worst_entropy_gap, abs(tc - via_entropy))
        via_mi = 0.0
        for size in range(2, ndim + 1):
            for axes in combinations(range(ndim), size):
                via_mi += (-1) ** size * mutual_information(j.marginal(axes))
        worst_mi_gap = max(worst_mi_gap, abs(tc - via_mi))
    ok = worst_entropy_gap <= 1e-9 and worst_mi_gap <= 1e-9
    report(
        "criterion 10 (information identities)",
        ok,
        f"10^3 joints: entropy-identity gap {worst_entropy_gap:.2e}, "
        f"signed mutual-information-identity gap {worst_mi_gap:.2e}",
    )
