"""Named, seeded experiments behind the CLI: each returns a column header
and data rows, deterministic given its seed.

    birthday-decay   exact values of the birthday repetition of one fixed
                     unsatisfiable 3x3 game over the (k, l) grid
    edge-tail        empirical edge-count tails of random subset pairs
                     against the concentration bound, per configuration
    funcbound-sweep  slack of the divergence floor on random triples
    corr-sum         summed conditioned total correlation of relaxation
                     solutions against k^2 log q / Delta
    dksh-bench       the hypergraph pipeline against the exact oracle

Monte Carlo parts use numpy PCG64 streams split per work unit, so
results do not depend on how the units are scheduled across workers.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from .csp import CspInstance, random_fully_dense, random_instance
from .csp import density as csp_density
from .dksh import densest_k_subhypergraph, make_hypergraph
from .errors import InputError
from .games import TwoProverGame, birthday_repetition, edge_tail_estimate, make_game
from .hierarchy import conditioned_correlation_sum, solve_sac
from .info import FiniteDistribution, kl_divergence
from .oracle import exact_densest, exact_game_value
from .rng import SplitMix64
from .rounding import funcbound_lower

EXPERIMENT_NAMES = (
    "birthday-decay",
    "edge-tail",
    "funcbound-sweep",
    "corr-sum",
    "dksh-bench",
)


def birthday_decay_game() -> TwoProverGame:
    """The fixed unsatisfiable 3x3 game: binary alphabets, a six-edge
    cycle of equality constraints with a single inequality, which no
    strategy can fully satisfy (the cycle parity is odd)."""
    eq = [1, 0, 0, 1]
    ne = [0, 1, 1, 0]
    cycle = [(0, 0, eq), (0, 1, eq), (1, 1, eq), (1, 2, eq), (2, 2, eq), (2, 0, ne)]
    w = Fraction(1, len(cycle))
    return make_game(3, 3, 2, 2, [(x, y, w, t) for x, y, t in cycle])


def run_birthday_decay(seed: int = 0, jobs: int = 1) -> tuple[list[str], list[list]]:
    g = birthday_decay_game()
    base = exact_game_value(g)
    header = ["k", "l", "value", "value_float", "base_value"]
    rows = []
    for k in (1, 2, 3):
        for l in (1, 2, 3):
            rep = birthday_repetition(g, k, l)
            val = exact_game_value(rep).value
            rows.append([k, l, str(val), float(val), float(base.value)])
    return header, rows


def _biregular(nx: int, ny: int, degree: int) -> list[tuple[int, int]]:
    return [(x, (x + j) % ny) for x in range(nx) for j in range(degree)]


EDGE_TAIL_CONFIGS: dict[str, dict] = {
    "complete-4x4": dict(x=4, y=4, degree=None, k=2, l=2, gamma=0.1),
    "biregular-6x6-d2": dict(x=6, y=6, degree=2, k=3, l=3, gamma=0.4),
    "biregular-400x400-d2": dict(x=400, y=400, degree=2, k=390, l=390, gamma=0.499),
    "biregular-400x400-d3": dict(x=400, y=400, degree=3, k=390, l=390, gamma=0.49),
    "biregular-500x500-d3": dict(x=500, y=500, degree=3, k=470, l=470, gamma=0.45),
}


def run_edge_tail(
    seed: int = 0, trials: int = 100_000, jobs: int = 1
) -> tuple[list[str], list[list]]:
    header = [
        "config", "x_count", "y_count", "edges", "d_max", "k", "l",
        "gamma", "expected_edges", "empirical_tail", "bound", "bound_below_one",
    ]

    def one(item):
        index, (name, cfg) = item
        if cfg["degree"] is None:
            edges = [(x, y) for x in range(cfg["x"]) for y in range(cfg["y"])]
        else:
            edges = _biregular(cfg["x"], cfg["y"], cfg["degree"])
        res = edge_tail_estimate(
            cfg["x"], cfg["y"], edges, cfg["k"], cfg["l"], cfg["gamma"],
            trials=trials, seed=seed + index,
        )
        return [
            name, cfg["x"], cfg["y"], len(edges), res.d_max, cfg["k"], cfg["l"],
            cfg["gamma"], res.expected_edges, res.empirical_tail, res.bound,
            int(res.bound < 1),
        ]

    items = list(enumerate(EDGE_TAIL_CONFIGS.items()))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, items))
    else:
        rows = [one(item) for item in items]
    return header, rows


def _random_funcbound_triple(rng: np.random.Generator):
    m = int(rng.integers(2, 7))
    x = rng.random(m) + 1e-3
    x /= x.sum()
    y = rng.random(m) + 1e-3
    y /= y.sum()
    f = rng.random(m)
    return x, y, f


def run_funcbound_sweep(
    seed: int = 0, trials: int = 10_000, jobs: int = 1
) -> tuple[list[str], list[list]]:
    header = ["trial", "domain", "kappa", "delta", "expected_y", "floor", "slack"]
    chunk = 500

    def one_chunk(c: int) -> list[list]:
        rng = np.random.Generator(np.random.PCG64([seed, c]))
        rows = []
        lo = c * chunk
        for t in range(lo, min(lo + chunk, trials)):
            x, y, f = _random_funcbound_triple(rng)
            kappa = kl_divergence(
                FiniteDistribution.from_probs(x), FiniteDistribution.from_probs(y)
            )
            delta = 1.0 - float(x @ f)
            ey = float(y @ f)
            floor = funcbound_lower(kappa, min(max(delta, 0.0), 1.0))
            rows.append([t, len(x), kappa, delta, ey, floor, ey - floor])
        return rows

    chunks = range((trials + chunk - 1) // chunk)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(one_chunk, chunks))
    else:
        parts = [one_chunk(c) for c in chunks]
    return header, [row for part in parts for row in part]


def corr_sum_fixtures(seed: int = 0) -> list[tuple[str, CspInstance, int]]:
    """(name, instance, l) triples with n <= 4, q = 2, k = 2, l <= 2."""
    fixtures = []
    for j in range(4):
        inst = random_fully_dense(3, 2, 2, seed=seed * 101 + j, payoff_density=0.5)
        fixtures.append((f"dense-n3-{j}", inst, 1))
    for j in range(3):
        inst = random_fully_dense(4, 2, 2, seed=seed * 103 + j, payoff_density=0.45)
        fixtures.append((f"dense-n4-{j}", inst, 2))
    for j in range(3):
        inst = random_instance(4, 2, 2, m=5, seed=seed * 107 + j)
        fixtures.append((f"sparse-n4-{j}", inst, 2))
    return fixtures


def correlated_solution(n: int, q: int, level: int, seed: int):
    """A valid relaxation solution with real correlation: marginals of a
    random global distribution biased toward a few assignments."""
    from .hierarchy import solution_from_global

    rng = SplitMix64(seed)
    weights = [Fraction(1 + rng.below(5), 1) for _ in range(q**n)]
    for _ in range(3):
        weights[rng.below(q**n)] += 8 * q**n
    total = sum(weights)
    return solution_from_global(n, q, level, [w / total for w in weights])


def run_corr_sum(seed: int = 0, jobs: int = 1) -> tuple[list[str], list[list]]:
    header = ["fixture", "solution", "n", "q", "k", "l", "delta", "corr_sum", "bound", "slack"]
    rows = []
    for name, inst, l in corr_sum_fixtures(seed):
        delta = csp_density(inst).delta
        bound = inst.k**2 * math.log(inst.q) / float(delta)
        sac = solve_sac(inst, inst.k + l)
        correlated = correlated_solution(inst.n, inst.q, inst.k + l, seed=seed * 109 + inst.n)
        for sol_name, mu in (("sac-witness", sac.solution), ("correlated", correlated)):
            total = conditioned_correlation_sum(mu, inst, l)
            rows.append(
                [name, sol_name, inst.n, inst.q, inst.k, l,
                 float(delta), total, bound, bound - total]
            )
    return header, rows


def run_dksh_bench(seed: int = 0, jobs: int = 1) -> tuple[list[str], list[list]]:
    header = [
        "graph", "n", "d", "k", "mode", "density", "oracle_density",
        "matches_oracle", "seconds",
    ]
    rng = SplitMix64(seed)
    cases = []
    cases.append(("clique4+4", make_hypergraph(
        8, 2, [[i, j] for i in range(4) for j in range(i + 1, 4)]), 3))
    cases.append(("triangle-path", make_hypergraph(
        6, 2, [[0, 1], [1, 2], [2, 0], [2, 3], [3, 4], [4, 5]]), 3))
    for idx in range(3):
        n = 7
        edges = set()
        local = SplitMix64(rng.next_u64())
        while len(edges) < 8:
            e = tuple(sorted(local.sample_without_replacement(n, 2)))
            edges.add(e)
        cases.append((f"random-{idx}", make_hypergraph(n, 2, sorted(edges)), 4))
    cases.append(("triple-system", make_hypergraph(
        6, 3, [[0, 1, 2], [1, 2, 3], [0, 2, 3], [3, 4, 5]]), 4))

    rows = []
    for name, h, k in cases:
        t0 = time.time()
        res = densest_k_subhypergraph(h, k, i=1, seed=rng.next_u64())
        oracle = exact_densest(h, k)
        rows.append([
            name, h.n, h.d, k, res.mode, float(res.density), float(oracle.value),
            int(res.density == oracle.value), round(time.time() - t0, 4),
        ])
    # one run through the halving branch (threshold forced down to desk scale)
    h = make_hypergraph(6, 2, [[0, 1], [1, 2], [2, 0], [3, 4]])
    t0 = time.time()
    res = densest_k_subhypergraph(h, 3, i=1, seed=rng.next_u64(), brute_force_threshold=0)
    oracle = exact_densest(h, 3)
    rows.append([
        "triangle-tau", h.n, h.d, 3, res.mode, float(res.density),
        float(oracle.value), int(res.density == oracle.value),
        round(time.time() - t0, 4),
    ])
    return header, rows


RUNNERS = {
    "birthday-decay": run_birthday_decay,
    "edge-tail": run_edge_tail,
    "funcbound-sweep": run_funcbound_sweep,
    "corr-sum": run_corr_sum,
    "dksh-bench": run_dksh_bench,
}


def run_experiment(name: str, seed: int = 0, jobs: int = 1, **kwargs):
    if name not in RUNNERS:
        raise InputError(
            f"unknown experiment {name!r}; pick one of {', '.join(EXPERIMENT_NAMES)}"
        )
    return RUNNERS[name](seed=seed, jobs=jobs, **kwargs)
