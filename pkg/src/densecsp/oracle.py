"""Exact brute-force solvers used as ground truth.

These enumerate the full search space and must stay obviously correct:
the CSP oracle scans every assignment (vectorized in floating point,
then re-verifies every near-maximal candidate in exact rationals), the
game oracle enumerates the cheaper prover side and best-responds the
other exactly, and the hypergraph oracle enumerates vertex subsets.
Caps fail loudly with the exact search-space size.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import TYPE_CHECKING

import numpy as np

from .csp import CspInstance, value
from .errors import CapExceeded, InternalInvariantError
from .games import GameStrategy, TwoProverGame
from .subsets import subsets_colex, unpack

if TYPE_CHECKING:  # pragma: no cover
    from .dksh import Hypergraph

DEFAULT_SEARCH_CAP = 2**24
_FLOAT_MARGIN = 1e-6
_CHUNK = 1 << 15


@dataclass(frozen=True)
class OracleResult:
    value: Fraction
    witness: object
    search_space: int


def exact_csp_opt(inst: CspInstance, cap: int = DEFAULT_SEARCH_CAP) -> OracleResult:
    """Exact maximum assignment value by full enumeration.

    A vectorized float sweep locates the near-maximal assignments;
    everything within a safety margin of the float maximum is then
    re-evaluated exactly, so ties and near-ties are resolved in rational
    arithmetic.  The witness is the smallest assignment index achieving
    the maximum."""
    total = inst.q**inst.n
    if total > cap:
        raise CapExceeded("assignment space too large", total, cap)

    tables = [np.array([float(t) for t in c.table]) for c in inst.constraints]
    weights = [float(c.weight) for c in inst.constraints]
    powers = [inst.q ** (inst.k - 1 - j) for j in range(inst.k)]

    best_float = -np.inf
    candidates: list[int] = []
    for pass_collect in (False, True):
        for start in range(0, total, _CHUNK):
            idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
            digits = [(idx // inst.q ** (inst.n - 1 - v)) % inst.q for v in range(inst.n)]
            vals = np.zeros(len(idx))
            for c, tbl, w in zip(inst.constraints, tables, weights):
                flat = np.zeros(len(idx), dtype=np.int64)
                for pos, v in enumerate(c.scope):
                    flat += digits[v] * powers[pos]
                vals += w * tbl[flat]
            if pass_collect:
                hits = idx[vals >= best_float - _FLOAT_MARGIN]
                candidates.extend(int(h) for h in hits)
            else:
                best_float = max(best_float, float(vals.max()))

    best_val: Fraction | None = None
    best_idx = -1
    for h in candidates:
        a = unpack(h, inst.q, inst.n)
        v = value(inst, a)
        if best_val is None or v > best_val or (v == best_val and h < best_idx):
            best_val, best_idx = v, h
    if best_val is None:
        raise InternalInvariantError("no candidate survived the float sweep")
    return OracleResult(
        value=best_val, witness=unpack(best_idx, inst.q, inst.n), search_space=total
    )


def exact_game_value(g: TwoProverGame, cap: int = DEFAULT_SEARCH_CAP) -> OracleResult:
    """Exact maximum strategy value.  One prover side is enumerated (the
    one with fewer strategies) and the other side's answers are chosen by
    exact per-question best response, which is optimal because the value
    decomposes over that side's questions once the first side is fixed."""
    cx = g.sigma_x**g.x_count
    cy = g.sigma_y**g.y_count
    space = cx * cy
    if space > cap:
        raise CapExceeded("strategy space too large", space, cap)

    enumerate_x = cx <= cy
    if enumerate_x:
        count, alph = g.x_count, g.sigma_x
        resp_count, resp_alph = g.y_count, g.sigma_y
        edges_by_resp: list[list] = [[] for _ in range(resp_count)]
        for e in g.edges:
            edges_by_resp[e.y].append(e)
    else:
        count, alph = g.y_count, g.sigma_y
        resp_count, resp_alph = g.x_count, g.sigma_x
        edges_by_resp = [[] for _ in range(resp_count)]
        for e in g.edges:
            edges_by_resp[e.x].append(e)

    best_val: Fraction | None = None
    best_strategy: GameStrategy | None = None
    enum = [0] * count
    while True:
        total = Fraction(0)
        chosen = []
        for rq in range(resp_count):
            best_col: Fraction | None = None
            best_sig = 0
            for sig in range(resp_alph):
                col = Fraction(0)
                for e in edges_by_resp[rq]:
                    p = (
                        g.payoff(e, enum[e.x], sig)
                        if enumerate_x
                        else g.payoff(e, sig, enum[e.y])
                    )
                    if p:
                        col += e.weight * p
                if best_col is None or col > best_col:
                    best_col, best_sig = col, sig
            if best_col is not None:
                total += best_col
            chosen.append(best_sig)
        strategy = (
            GameStrategy(tuple(enum), tuple(chosen))
            if enumerate_x
            else GameStrategy(tuple(chosen), tuple(enum))
        )
        if best_val is None or total > best_val:
            best_val, best_strategy = total, strategy
        pos = count - 1
        while pos >= 0 and enum[pos] == alph - 1:
            enum[pos] = 0
            pos -= 1
        if pos < 0:
            break
        enum[pos] += 1
    assert best_val is not None and best_strategy is not None
    return OracleResult(value=best_val, witness=best_strategy, search_space=space)


def exact_densest(h: "Hypergraph", k: int, cap: int = DEFAULT_SEARCH_CAP) -> OracleResult:
    """Exact densest k-subhypergraph by subset enumeration in colex order;
    value is the density d!|E(S)|/k^d and the witness the first maximizer."""
    from .dksh import hypergraph_density

    if not 0 < k <= h.n:
        raise CapExceeded(f"k={k} outside [1, {h.n}]")
    space = comb(h.n, k)
    if space > cap:
        raise CapExceeded("subset space too large", space, cap)
    best_count = -1
    best: tuple[int, ...] | None = None
    for s in subsets_colex(h.n, k):
        inside = sum(1 for e in h.edges if e <= frozenset(s))
        if inside > best_count:
            best_count, best = inside, s
    assert best is not None
    return OracleResult(
        value=hypergraph_density(h, best), witness=best, search_space=space
    )
