"""Two-prover games and the game/CSP transformations: parallel
repetition, birthday repetition, the clause/variable game, the direct
birthday-to-CSP reduction, and the edge-concentration experiment.

Questions and answers are integer-indexed.  A game edge carries a payoff
table of size sigma_x * sigma_y (row-major over (sigma_x, sigma_y)) with
entries in [0, 1]; acceptance of several original edges at once is the
product of their payoffs, so boolean tables AND together.  Birthday
questions are subsets, identified by their colex rank, and answers to a
question set are tuples keyed by the sorted question order.

Every repetition takes an explicit size cap and fails loudly when the
output would exceed it; the constructions are exponential and this
package targets desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, exp
from typing import NamedTuple, Sequence

import numpy as np

from .csp import Constraint, CspInstance, as_fraction, format_fraction
from .errors import CapExceeded, InputError
from .subsets import assignments, colex_unrank, pack, unpack

DEFAULT_QUESTION_CAP = 100_000
DEFAULT_CELL_CAP = 2_000_000


@dataclass(frozen=True)
class GameEdge:
    x: int
    y: int
    weight: Fraction
    table: tuple[Fraction, ...]  # index sigma_y * sx + sy


@dataclass(frozen=True)
class TwoProverGame:
    x_count: int
    y_count: int
    sigma_x: int
    sigma_y: int
    edges: tuple[GameEdge, ...]
    projection: bool = False

    def __post_init__(self):
        if min(self.x_count, self.y_count, self.sigma_x, self.sigma_y) < 1:
            raise InputError("game dimensions must be positive")
        want = self.sigma_x * self.sigma_y
        seen = set()
        for e in self.edges:
            if not (0 <= e.x < self.x_count and 0 <= e.y < self.y_count):
                raise InputError(f"edge ({e.x},{e.y}) out of range")
            if len(e.table) != want:
                raise InputError(f"edge ({e.x},{e.y}) table has wrong size")
            if (e.x, e.y) in seen:
                raise InputError(f"duplicate edge ({e.x},{e.y})")
            seen.add((e.x, e.y))

    def payoff(self, e: GameEdge, sx: int, sy: int) -> Fraction:
        return e.table[sx * self.sigma_y + sy]

    def total_weight(self) -> Fraction:
        return sum((e.weight for e in self.edges), start=Fraction(0))

    def max_degree(self) -> int:
        degx = [0] * self.x_count
        degy = [0] * self.y_count
        for e in self.edges:
            degx[e.x] += 1
            degy[e.y] += 1
        return max(degx + degy)


class GameStrategy(NamedTuple):
    x_answers: tuple[int, ...]
    y_answers: tuple[int, ...]


def make_game(
    x_count: int,
    y_count: int,
    sigma_x: int,
    sigma_y: int,
    edges: Sequence,
    projection: bool = False,
) -> TwoProverGame:
    """Build a game from (x, y, weight, table) quadruples with loose types."""
    built = tuple(
        GameEdge(
            x=int(x),
            y=int(y),
            weight=as_fraction(w),
            table=tuple(as_fraction(t) for t in table),
        )
        for x, y, w, table in edges
    )
    return TwoProverGame(x_count, y_count, sigma_x, sigma_y, built, projection)


def game_value(g: TwoProverGame, s: GameStrategy) -> Fraction:
    """Expected payoff of a strategy under the question distribution."""
    xa, ya = s
    if len(xa) != g.x_count or len(ya) != g.y_count:
        raise InputError("strategy dimensions do not match the game")
    if any(not 0 <= a < g.sigma_x for a in xa) or any(
        not 0 <= a < g.sigma_y for a in ya
    ):
        raise InputError("strategy answer out of alphabet range")
    return sum(
        (e.weight * g.payoff(e, xa[e.x], ya[e.y]) for e in g.edges), start=Fraction(0)
    )


def is_projection(g: TwoProverGame) -> bool:
    """True when every edge table is 0/1-valued and accepts at most one
    y-answer per x-answer (the graph of a partial function)."""
    for e in g.edges:
        for sx in range(g.sigma_x):
            accepted = 0
            for sy in range(g.sigma_y):
                p = g.payoff(e, sx, sy)
                if p not in (0, 1):
                    return False
                accepted += p == 1
            if accepted > 1:
                return False
    return True


# ---------------------------------------------------------------------------
# Parallel repetition


def parallel_repetition(
    g: TwoProverGame, r: int, cap: int = DEFAULT_QUESTION_CAP
) -> TwoProverGame:
    """r independent coordinates with product question distribution; the
    repeated payoff is the product of the coordinate payoffs."""
    if r < 1:
        raise InputError("repetition count must be >= 1")
    qx, qy = g.x_count**r, g.y_count**r
    if qx + qy > cap:
        raise CapExceeded("parallel repetition question sets too large", qx + qy, cap)
    n_edges = len(g.edges) ** r
    cells = n_edges * (g.sigma_x * g.sigma_y) ** r
    if cells > DEFAULT_CELL_CAP:
        raise CapExceeded("parallel repetition tables too large", cells, DEFAULT_CELL_CAP)

    sx_r, sy_r = g.sigma_x**r, g.sigma_y**r
    edges = []
    for combo in assignments(len(g.edges), r):
        parts = [g.edges[i] for i in combo]
        weight = Fraction(1)
        for e in parts:
            weight *= e.weight
        if weight == 0:
            continue
        x_idx = pack((e.x for e in parts), g.x_count)
        y_idx = pack((e.y for e in parts), g.y_count)
        table = []
        for sx in range(sx_r):
            sxs = unpack(sx, g.sigma_x, r)
            for sy in range(sy_r):
                sys_ = unpack(sy, g.sigma_y, r)
                p = Fraction(1)
                for e, a, b in zip(parts, sxs, sys_):
                    p *= g.payoff(e, a, b)
                    if p == 0:
                        break
                table.append(p)
        edges.append(GameEdge(x=x_idx, y=y_idx, weight=weight, table=tuple(table)))
    return TwoProverGame(
        x_count=qx,
        y_count=qy,
        sigma_x=sx_r,
        sigma_y=sy_r,
        edges=tuple(edges),
        projection=g.projection,
    )


# ---------------------------------------------------------------------------
# Birthday repetition


def birthday_repetition(
    g: TwoProverGame, k: int, l: int, cap: int = DEFAULT_QUESTION_CAP
) -> TwoProverGame:
    """Provers get uniform size-k and size-l question subsets; acceptance
    multiplies the payoffs of every original edge inside the rectangle,
    and an empty rectangle accepts outright."""
    if not (0 < k <= g.x_count and 0 < l <= g.y_count):
        raise InputError(f"need 0 < k <= |X| and 0 < l <= |Y|, got k={k}, l={l}")
    cx, cy = comb(g.x_count, k), comb(g.y_count, l)
    if cx + cy > cap:
        raise CapExceeded("birthday repetition question sets too large", cx + cy, cap)
    sx_k, sy_l = g.sigma_x**k, g.sigma_y**l
    cells = cx * cy * sx_k * sy_l
    if cells > DEFAULT_CELL_CAP:
        raise CapExceeded("birthday repetition tables too large", cells, DEFAULT_CELL_CAP)

    by_pair = {(e.x, e.y): e for e in g.edges if e.weight > 0}
    weight = Fraction(1, cx * cy)
    edges = []
    for s_rank in range(cx):
        S = colex_unrank(s_rank, k)
        for t_rank in range(cy):
            T = colex_unrank(t_rank, l)
            pairs = [
                (i, j, by_pair[(x, y)])
                for i, x in enumerate(S)
                for j, y in enumerate(T)
                if (x, y) in by_pair
            ]
            table = []
            for ax in assignments(g.sigma_x, k):
                for ay in assignments(g.sigma_y, l):
                    p = Fraction(1)
                    for i, j, e in pairs:
                        p *= g.payoff(e, ax[i], ay[j])
                        if p == 0:
                            break
                    table.append(p)
            edges.append(
                GameEdge(x=s_rank, y=t_rank, weight=weight, table=tuple(table))
            )
    return TwoProverGame(
        x_count=cx,
        y_count=cy,
        sigma_x=sx_k,
        sigma_y=sy_l,
        edges=tuple(edges),
        projection=False,
    )


# ---------------------------------------------------------------------------
# Clause/variable game


def clause_variable_game(inst: CspInstance) -> TwoProverGame:
    """Projection game pairing each constraint with its variables: the
    clause prover answers with a full scope assignment, the variable
    prover with a single value, and the verifier accepts iff the scope
    assignment pays 1 and matches the claimed value."""
    scopes: list[tuple[int, ...]] = []
    tables: dict[tuple[int, ...], tuple[Fraction, ...]] = {}
    weights: dict[tuple[int, ...], Fraction] = {}
    for c in inst.constraints:
        if c.scope in tables:
            if tables[c.scope] != c.table:
                raise InputError(
                    f"scope {c.scope} carries two different predicates; "
                    "the clause/variable game needs one table per scope"
                )
        else:
            tables[c.scope] = c.table
            scopes.append(c.scope)
        weights[c.scope] = weights.get(c.scope, Fraction(0)) + c.weight
    support = [s for s in scopes if weights[s] > 0]
    if not support:
        raise InputError("instance has no supported constraints")
    uniform = weights[support[0]]
    if any(weights[s] != uniform for s in support):
        raise InputError("clause/variable game needs uniform weights over support")

    q, k = inst.q, inst.k
    num_edges = sum(len(set(s)) for s in support)
    edge_weight = Fraction(1, num_edges)
    edges = []
    for si, scope in enumerate(support):
        table_src = tables[scope]
        for x in sorted(set(scope)):
            positions = [p for p, v in enumerate(scope) if v == x]
            table = []
            for phi_idx in range(q**k):
                tup = unpack(phi_idx, q, k)
                ok = table_src[phi_idx] == 1
                for sigma in range(q):
                    table.append(
                        Fraction(int(ok and all(tup[p] == sigma for p in positions)))
                    )
            edges.append(
                GameEdge(x=si, y=x, weight=edge_weight, table=tuple(table))
            )
    return TwoProverGame(
        x_count=len(support),
        y_count=inst.n,
        sigma_x=q**k,
        sigma_y=q,
        edges=tuple(edges),
        projection=True,
    )


# ---------------------------------------------------------------------------
# Direct birthday reduction to a fully-dense CSP


def birthday_kcsp(
    g: TwoProverGame,
    l: int,
    k: int,
    cap_vars: int = DEFAULT_QUESTION_CAP,
    cap_cells: int = DEFAULT_CELL_CAP,
) -> CspInstance:
    """Fully-dense Max k-CSP whose variables are pairs of question
    subsets (an l-subset of X and an l-subset of Y).  A value assigns
    answers to both subsets; a k-tuple of variables pays 1 only when the
    local assignments agree wherever they overlap and every supported
    original edge between the two unions accepts."""
    if l < 1 or k < 1 or k * l > g.x_count or k * l > g.y_count:
        raise InputError(
            f"need k*l within question sets, got k={k}, l={l}, "
            f"|X|={g.x_count}, |Y|={g.y_count}"
        )
    cx, cy = comb(g.x_count, l), comb(g.y_count, l)
    n_vars = cx * cy
    if n_vars > cap_vars:
        raise CapExceeded("birthday CSP has too many variables", n_vars, cap_vars)
    q = (g.sigma_x**l) * (g.sigma_y**l)
    cells = (n_vars**k) * (q**k)
    if cells > cap_cells:
        raise CapExceeded("birthday CSP tables too large", cells, cap_cells)

    by_pair = {(e.x, e.y): e for e in g.edges if e.weight > 0}
    sy_l = g.sigma_y**l

    var_sets = []
    for s_rank in range(cx):
        S = colex_unrank(s_rank, l)
        for t_rank in range(cy):
            var_sets.append((S, colex_unrank(t_rank, l)))

    def decode(a: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return unpack(a // sy_l, g.sigma_x, l), unpack(a % sy_l, g.sigma_y, l)

    decoded = [decode(a) for a in range(q)]

    weight = Fraction(1, n_vars**k)
    constraints = []
    for scope in assignments(n_vars, k):
        table = []
        for values_idx in range(q**k):
            values = unpack(values_idx, q, k)
            phi_x: dict[int, int] = {}
            phi_y: dict[int, int] = {}
            consistent = True
            for var, a in zip(scope, values):
                S, T = var_sets[var]
                ax, ay = decoded[a]
                for x, sx in zip(S, ax):
                    if phi_x.setdefault(x, sx) != sx:
                        consistent = False
                        break
                if not consistent:
                    break
                for y, sy in zip(T, ay):
                    if phi_y.setdefault(y, sy) != sy:
                        consistent = False
                        break
                if not consistent:
                    break
            if not consistent:
                table.append(Fraction(0))
                continue
            p = Fraction(1)
            for x, sx in phi_x.items():
                for y, sy in phi_y.items():
                    e = by_pair.get((x, y))
                    if e is not None:
                        p *= g.payoff(e, sx, sy)
                        if p == 0:
                            break
                if p == 0:
                    break
            table.append(p)
        constraints.append(Constraint(scope=scope, weight=weight, table=tuple(table)))
    return CspInstance(n=n_vars, q=q, k=k, constraints=tuple(constraints))


# ---------------------------------------------------------------------------
# Edge-concentration experiment


@dataclass(frozen=True)
class EdgeTailResult:
    empirical_tail: float
    bound: float
    expected_edges: float
    d_max: int
    trials: int


def edge_tail_estimate(
    x_count: int,
    y_count: int,
    edges: Sequence[tuple[int, int]],
    k: int,
    l: int,
    gamma,
    trials: int,
    seed: int,
    jobs: int = 1,
) -> EdgeTailResult:
    """Sample uniform (k, l)-subset pairs and report how often the edge
    count between them leaves [(1-gamma)s, (1+gamma)s], next to the
    concentration bound 4 exp(-gamma^2 s / (54 d_max)).

    Trials are split into fixed chunks, each drawing from its own numpy
    PCG64 stream keyed (seed, chunk index), so the result is identical
    whether chunks run sequentially or fan out over `jobs` workers.
    """
    gamma = float(gamma)
    if not 0 <= gamma < 0.5:
        raise InputError(f"gamma must be in [0, 1/2), got {gamma}")
    if not (0 < k <= x_count and 0 < l <= y_count):
        raise InputError("subset sizes must fit the vertex sets")
    if trials < 1:
        raise InputError("need at least one trial")
    ex = np.array([e[0] for e in edges], dtype=int)
    ey = np.array([e[1] for e in edges], dtype=int)
    if len(ex) and (ex.min() < 0 or ex.max() >= x_count or ey.min() < 0 or ey.max() >= y_count):
        raise InputError("edge endpoint out of range")
    degs = np.concatenate(
        [np.bincount(ex, minlength=x_count), np.bincount(ey, minlength=y_count)]
    )
    d_max = int(degs.max()) if len(ex) else 0
    s = k * l * len(ex) / (x_count * y_count)
    lo, hi = (1 - gamma) * s, (1 + gamma) * s
    bound = 4.0 * exp(-(gamma**2) * s / (54 * d_max)) if d_max else 0.0

    chunk_size = 4096

    def run_chunk(c: int) -> int:
        rng = np.random.Generator(np.random.PCG64([seed, c]))
        batch = min(chunk_size, trials - c * chunk_size)
        s_masks = np.zeros((batch, x_count), dtype=bool)
        t_masks = np.zeros((batch, y_count), dtype=bool)
        s_pick = np.argsort(rng.random((batch, x_count)), axis=1)[:, :k]
        t_pick = np.argsort(rng.random((batch, y_count)), axis=1)[:, :l]
        np.put_along_axis(s_masks, s_pick, True, axis=1)
        np.put_along_axis(t_masks, t_pick, True, axis=1)
        if len(ex):
            counts = (s_masks[:, ex] & t_masks[:, ey]).sum(axis=1)
        else:
            counts = np.zeros(batch)
        return int(((counts < lo) | (counts > hi)).sum())

    chunks = range((trials + chunk_size - 1) // chunk_size)
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outside = sum(pool.map(run_chunk, chunks))
    else:
        outside = sum(run_chunk(c) for c in chunks)
    return EdgeTailResult(
        empirical_tail=outside / trials,
        bound=bound,
        expected_edges=s,
        d_max=d_max,
        trials=trials,
    )


# ---------------------------------------------------------------------------
# JSON format


def to_json_dict(g: TwoProverGame) -> dict:
    return {
        "x_count": g.x_count,
        "y_count": g.y_count,
        "sigma_x": g.sigma_x,
        "sigma_y": g.sigma_y,
        "projection": g.projection,
        "edges": [
            {
                "x": e.x,
                "y": e.y,
                "weight": str(e.weight),
                "table": [format_fraction(t) for t in e.table],
            }
            for e in g.edges
        ],
    }


def from_json_dict(data: dict) -> TwoProverGame:
    try:
        return make_game(
            x_count=int(data["x_count"]),
            y_count=int(data["y_count"]),
            sigma_x=int(data["sigma_x"]),
            sigma_y=int(data["sigma_y"]),
            edges=[(e["x"], e["y"], e["weight"], e["table"]) for e in data["edges"]],
            projection=bool(data.get("projection", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed game JSON: {exc}") from exc
