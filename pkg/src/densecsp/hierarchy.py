"""Local-distribution relaxations of Max k-CSP: the level-r LP, the stronger
conditioned variant, the conditioning operator, and consistency checks.

A level-r solution is one local distribution per variable subset of size
at most r (including the empty set, whose table is the constant 1),
stored densely over Sigma^S with assignments keyed by the sorted
variable order.  Marginal consistency ties every table to each of its
one-variable-deleted subsets, which makes any two overlapping tables
agree on their intersection.

The conditioned variant maximizes a payoff floor lambda that every
conditioning of the solution must respect: for each subset T and
assignment phi_T, the conditional expected payoff must stay at least
lambda * X_T(phi_T).  That family of rows is linear for fixed lambda, so
the optimum is found by probing the plain relaxation optimum first and
bisecting below it only when needed.  Exact mode pins lambda to the
smallest-denominator rational consistent with the bisection, confirmed
by one exact feasibility solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

from .csp import CspInstance
from .errors import InputError, InternalInvariantError
from .lp import FLOAT_TOL, LinearProgram, LpOutcome, maximize, solve_feasibility
from .subsets import assignments, pack, subsets_by_size

DEFAULT_DENOMINATOR_CAP = 10**6
_MAX_DENOMINATOR_CAP = 10**24


def sa_variable_count(n: int, q: int, r: int) -> int:
    """LP variable count at level r: one table entry per (subset, assignment),
    empty set included."""
    return sum(comb(n, t) * q**t for t in range(r + 1))


class SaIndex:
    """Canonical LP variable layout for level-r families on n variables:
    subsets ordered by size then colex rank, q^|S| assignments row-major
    within each subset."""

    def __init__(self, n: int, q: int, r: int):
        self.n, self.q, self.r = n, q, r
        self.subsets: list[tuple[int, ...]] = list(subsets_by_size(n, r))
        self.offset: dict[tuple[int, ...], int] = {}
        at = 0
        for s in self.subsets:
            self.offset[s] = at
            at += q ** len(s)
        self.num_vars = at

    def var(self, subset: tuple[int, ...], phi_idx: int) -> int:
        return self.offset[subset] + phi_idx


@dataclass
class SaSolution:
    """Family of local distributions; `exact` marks Fraction-valued tables."""

    n: int
    q: int
    level: int
    tables: dict[tuple[int, ...], list]
    exact: bool = False

    def distribution_on(self, subset: Sequence[int]) -> list:
        key = tuple(sorted(subset))
        if len(set(key)) != len(key):
            raise InputError(f"subset {subset} has repeated variables")
        if key not in self.tables:
            raise InputError(f"subset {key} beyond stored level {self.level}")
        return self.tables[key]

    def prob(self, subset: Sequence[int], phi: Sequence[int]) -> Fraction | float:
        """Probability of an assignment; `phi` is keyed by sorted subset order."""
        key = tuple(sorted(subset))
        return self.tables[key][pack(phi, self.q)] if key else self.tables[()][0]

    def singleton(self, v: int) -> list:
        return self.tables[(v,)]


def point_mass_solution(n: int, q: int, level: int, a: Sequence[int]) -> SaSolution:
    """The level-r family of the deterministic assignment a (exact)."""
    tables: dict[tuple[int, ...], list] = {}
    for s in subsets_by_size(n, level):
        table = [Fraction(0)] * (q ** len(s))
        table[pack((a[v] for v in s), q)] = Fraction(1)
        tables[s] = table
    return SaSolution(n=n, q=q, level=level, tables=tables, exact=True)


def solution_from_global(
    n: int, q: int, level: int, dist: Sequence[Fraction]
) -> SaSolution:
    """Marginalize a full distribution over Sigma^n down to a level-r family."""
    if len(dist) != q**n:
        raise InputError("global distribution has wrong size")
    tables: dict[tuple[int, ...], list] = {}
    for s in subsets_by_size(n, level):
        table = [Fraction(0)] * (q ** len(s))
        for idx, p in enumerate(dist):
            if p:
                full = [0] * n
                rest = idx
                for j in range(n - 1, -1, -1):
                    full[j] = rest % q
                    rest //= q
                table[pack((full[v] for v in s), q)] += p
        tables[s] = table
    return SaSolution(n=n, q=q, level=level, tables=tables, exact=True)


# ---------------------------------------------------------------------------
# LP construction


def _marginalization_rows(index: SaIndex) -> list[tuple[dict[int, Fraction], str, Fraction]]:
    rows: list[tuple[dict[int, Fraction], str, Fraction]] = []
    rows.append(({index.var((), 0): Fraction(1)}, "=", Fraction(1)))
    q = index.q
    for s in index.subsets:
        t = len(s)
        if t == 0:
            continue
        for pos, v in enumerate(s):
            sub = s[:pos] + s[pos + 1 :]
            for phi_sub in assignments(q, t - 1):
                coeffs: dict[int, Fraction] = {}
                for sigma in range(q):
                    phi = phi_sub[:pos] + (sigma,) + phi_sub[pos:]
                    coeffs[index.var(s, pack(phi, q))] = Fraction(1)
                j = index.var(sub, pack(phi_sub, q))
                coeffs[j] = coeffs.get(j, Fraction(0)) - Fraction(1)
                rows.append((coeffs, "=", Fraction(0)))
    return rows


def _objective(inst: CspInstance, index: SaIndex) -> dict[int, Fraction]:
    obj: dict[int, Fraction] = {}
    for c in inst.constraints:
        support = tuple(sorted(set(c.scope)))
        positions = {v: i for i, v in enumerate(support)}
        for phi in assignments(inst.q, len(support)):
            payoff = c.table[pack((phi[positions[v]] for v in c.scope), inst.q)]
            if payoff:
                j = index.var(support, pack(phi, inst.q))
                obj[j] = obj.get(j, Fraction(0)) + c.weight * payoff
    return obj


def build_sa_lp(inst: CspInstance, r: int) -> LinearProgram:
    """Level-r relaxation LP: normalization and one-step marginalization
    rows, payoff objective.  Variables follow the SaIndex layout."""
    if r < inst.k:
        raise InputError(f"level {r} below constraint arity {inst.k}")
    if r > inst.n:
        raise InputError(f"level {r} above variable count {inst.n}")
    index = SaIndex(inst.n, inst.q, r)
    lp = LinearProgram(num_vars=index.num_vars)
    for coeffs, rel, rhs in _marginalization_rows(index):
        lp.add_row(coeffs, rel, rhs)
    lp.objective = _objective(inst, index)
    return lp


def _solution_from_lp(inst: CspInstance, index: SaIndex, x: list, exact: bool) -> SaSolution:
    tables: dict[tuple[int, ...], list] = {}
    for s in index.subsets:
        block = x[index.offset[s] : index.offset[s] + inst.q ** len(s)]
        if exact:
            tables[s] = [Fraction(v) for v in block]
        else:
            tables[s] = [max(float(v), 0.0) for v in block]
    return SaSolution(n=inst.n, q=inst.q, level=index.r, tables=tables, exact=exact)


def solve_sa(inst: CspInstance, r: int, exact: bool = False, tol: float = FLOAT_TOL):
    """Optimal value and witness of the plain level-r relaxation."""
    lp = build_sa_lp(inst, r)
    out = maximize(lp, exact=exact, tol=tol)
    if out.status != "optimal":
        raise InternalInvariantError(f"relaxation LP reported {out.status}")
    index = SaIndex(inst.n, inst.q, r)
    return out.objective_value, _solution_from_lp(inst, index, out.x, exact)


# ---------------------------------------------------------------------------
# Conditioned relaxation


@dataclass
class SacResult:
    lambda_: Fraction | float
    solution: SaSolution
    level: int
    sa_optimum: Fraction | float
    exact: bool


def _conditioning_pieces(inst: CspInstance, index: SaIndex, max_t: int):
    """For every (T, phi_T) with |T| <= max_t, the lambda-free part of the
    conditioned-value row: coefficients of the expected conditional payoff,
    plus the variable carrying X_T(phi_T).  Enumeration order is T by size
    then colex, phi_T lexicographic."""
    q = inst.q
    pieces = []
    for T in subsets_by_size(inst.n, max_t):
        for phi_T in assignments(q, len(T)):
            coeffs: dict[int, Fraction] = {}
            for c in inst.constraints:
                support = tuple(sorted(set(c.scope)))
                merged = tuple(sorted(set(support) | set(T)))
                fixed = dict(zip(T, phi_T))
                free = [v for v in merged if v not in fixed]
                scope_pos = {v: i for i, v in enumerate(merged)}
                for phi_free in assignments(q, len(free)):
                    full = dict(fixed)
                    full.update(zip(free, phi_free))
                    payoff = c.table[pack((full[v] for v in c.scope), q)]
                    if payoff:
                        j = index.var(merged, pack((full[v] for v in merged), q))
                        coeffs[j] = coeffs.get(j, Fraction(0)) + c.weight * payoff
            tvar = index.var(T, pack(phi_T, q))
            pieces.append((coeffs, tvar, T, phi_T))
    return pieces


def _sac_lp(base_rows, num_vars, pieces, lam: Fraction) -> LinearProgram:
    lp = LinearProgram(num_vars=num_vars)
    lp.rows = list(base_rows)
    for coeffs, tvar, _, _ in pieces:
        row = dict(coeffs)
        row[tvar] = row.get(tvar, Fraction(0)) - lam
        lp.rows.append((row, ">=", Fraction(0)))
    return lp


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with the smallest denominator in [lo, hi] (Stern-Brocot)."""
    if lo > hi:
        raise InputError("empty interval")
    if lo == hi:
        return lo

    def rec(a: Fraction, b: Fraction) -> Fraction:
        fl = a.numerator // a.denominator
        if Fraction(fl) == a or fl + 1 <= b:
            return Fraction(fl if Fraction(fl) == a else fl + 1)
        frac = rec(1 / (b - fl), 1 / (a - fl))
        return fl + 1 / frac

    if hi < 0:
        return -rec(-hi, -lo)
    if lo < 0:
        return Fraction(0)
    return rec(lo, hi)


def solve_sac(
    inst: CspInstance,
    r: int,
    tol: float = FLOAT_TOL,
    exact: bool = False,
    denominator_cap: int = DEFAULT_DENOMINATOR_CAP,
) -> SacResult:
    """Largest payoff floor lambda for which the level-r family with all
    conditioned-value rows is feasible, with a witness solution.

    Levels above n saturate at n (all subsets are already present)."""
    r_eff = min(r, inst.n)
    if r_eff < inst.k:
        raise InputError(f"level {r} below constraint arity {inst.k}")
    index = SaIndex(inst.n, inst.q, r_eff)
    base_rows = _marginalization_rows(index)
    pieces = _conditioning_pieces(inst, index, r_eff - inst.k)

    base_lp = LinearProgram(num_vars=index.num_vars)
    base_lp.rows = list(base_rows)
    base_lp.objective = _objective(inst, index)
    opt_out = maximize(base_lp, exact=exact, tol=tol)
    if opt_out.status != "optimal":
        raise InternalInvariantError(f"relaxation LP reported {opt_out.status}")
    opt_sa = opt_out.objective_value

    def feasible(lam) -> LpOutcome:
        return solve_feasibility(
            _sac_lp(base_rows, index.num_vars, pieces, Fraction(lam) if exact else lam),
            exact=exact,
            tol=tol,
        )

    def result(lam, witness_x) -> SacResult:
        sol = _solution_from_lp(inst, index, witness_x, exact)
        return SacResult(
            lambda_=lam, solution=sol, level=r_eff, sa_optimum=opt_sa, exact=exact
        )

    if exact:
        hi_probe = feasible(opt_sa)
        if hi_probe.status == "optimal":
            return result(opt_sa, hi_probe.x)
        lo, lo_x = Fraction(0), None
        hi = Fraction(opt_sa)  # known infeasible; the bracket is [lo, hi)
        cap = denominator_cap
        while True:
            gap = hi - lo
            if gap <= Fraction(1, 2 * cap * cap):
                # at most one rational with denominator <= cap fits in
                # [lo, hi]; if it is feasible it is the optimum (assuming
                # the true optimum's denominator is within the cap)
                candidate = simplest_between(lo, hi)
                if candidate.denominator <= cap and candidate == lo:
                    break
                if candidate.denominator <= cap and candidate != hi:
                    out = feasible(candidate)
                    if out.status == "optimal":
                        lo, lo_x = candidate, out.x
                        break
                    hi = candidate
                    continue
                # no candidate strictly inside the bracket: the optimum
                # needs a bigger denominator than the cap allows
                if cap >= _MAX_DENOMINATOR_CAP:
                    break  # settle for the last verified-feasible value
                cap = min(cap * cap, _MAX_DENOMINATOR_CAP)
                continue
            mid = (lo + hi) / 2
            out = feasible(mid)
            if out.status == "optimal":
                lo, lo_x = mid, out.x
            else:
                hi = mid
        if lo_x is None:
            zero = feasible(Fraction(0))
            if zero.status != "optimal":
                raise InternalInvariantError("lambda = 0 must be feasible")
            lo_x = zero.x
        return result(lo, lo_x)

    # Float mode: probe just below the relaxation optimum, then bisect.
    probe_at = max(float(opt_sa) - 10 * tol, 0.0)
    probe = feasible(probe_at)
    if probe.status == "optimal":
        return result(float(opt_sa), probe.x)
    lo, hi = 0.0, probe_at
    zero = feasible(0.0)
    if zero.status != "optimal":
        raise InternalInvariantError("lambda = 0 must be feasible")
    lo_x = zero.x
    while hi - lo > tol:
        mid = (lo + hi) / 2
        out = feasible(mid)
        if out.status == "optimal":
            lo, lo_x = mid, out.x
        else:
            hi = mid
    return result(lo, lo_x)


# ---------------------------------------------------------------------------
# Conditioning and checks


def condition(mu: SaSolution, T: Sequence[int], phi_T: Sequence[int]) -> SaSolution:
    """Bayesian restriction of every table to agree with phi_T on T; the
    level drops by |T|.  phi_T is keyed by the sorted order of T."""
    key = tuple(sorted(set(T)))
    if len(key) != len(tuple(T)):
        raise InputError(f"conditioning set {T} has repeated variables")
    phi = dict(zip(key, phi_T)) if key else {}
    new_level = mu.level - len(key)
    if new_level < 0:
        raise InputError(f"conditioning set of size {len(key)} exceeds level {mu.level}")
    denom = mu.prob(key, tuple(phi[v] for v in key)) if key else mu.tables[()][0]
    if denom <= 0:
        raise InputError(f"conditioning on zero-probability event {key} -> {phi_T}")
    tables: dict[tuple[int, ...], list] = {}
    q = mu.q
    for s in subsets_by_size(mu.n, new_level):
        table = []
        merged = tuple(sorted(set(s) | set(key)))
        src = mu.tables[merged]
        for phi_s in assignments(q, len(s)):
            lookup = dict(phi)
            consistent = True
            for v, val in zip(s, phi_s):
                if lookup.setdefault(v, val) != val:
                    consistent = False
                    break
            if not consistent:
                table.append(Fraction(0) if mu.exact else 0.0)
                continue
            table.append(src[pack((lookup[v] for v in merged), q)] / denom)
        tables[s] = table
    return SaSolution(n=mu.n, q=mu.q, level=new_level, tables=tables, exact=mu.exact)


def sa_value(mu: SaSolution, inst: CspInstance) -> Fraction | float:
    """Relaxation objective of a family: expected local payoff over scopes."""
    if mu.level < inst.k:
        raise InputError(f"solution level {mu.level} below arity {inst.k}")
    total = Fraction(0) if mu.exact else 0.0
    q = inst.q
    for c in inst.constraints:
        support = tuple(sorted(set(c.scope)))
        positions = {v: i for i, v in enumerate(support)}
        table = mu.tables[support]
        for idx, phi in enumerate(assignments(q, len(support))):
            p = table[idx]
            if p:
                payoff = c.table[pack((phi[positions[v]] for v in c.scope), q)]
                if payoff:
                    total += c.weight * payoff * p if mu.exact else float(
                        c.weight * payoff
                    ) * p
    return total


def check_consistency(mu: SaSolution, tol: float = 1e-9) -> list[str]:
    """Report every violated normalization / marginalization constraint
    with its magnitude; empty iff the family is consistent."""
    report = []
    slack = 0 if mu.exact else tol
    root = mu.tables[()][0]
    if abs(root - 1) > slack:
        report.append(f"empty-set table is {root}, not 1")
    q = mu.q
    for s, table in mu.tables.items():
        for idx, p in enumerate(table):
            if p < -slack:
                report.append(f"negative probability {p} in table {s} entry {idx}")
                break
        t = len(s)
        if t == 0:
            continue
        for pos, v in enumerate(s):
            sub = s[:pos] + s[pos + 1 :]
            sub_table = mu.tables[sub]
            for phi_idx, phi_sub in enumerate(assignments(q, t - 1)):
                total = sum(
                    table[pack(phi_sub[:pos] + (sigma,) + phi_sub[pos:], q)]
                    for sigma in range(q)
                )
                gap = total - sub_table[phi_idx]
                if abs(gap) > slack:
                    report.append(
                        f"marginal of {s} onto {sub} at {phi_sub} off by {float(gap):.3g}"
                    )
    return report


def conditioned_correlation_sum(mu: SaSolution, inst: CspInstance, l: int) -> float:
    """Sum over t = 0..l of the expected conditioned total correlation

        E_{T ~ V^t, phi_T ~ X_T} [ C(mu | phi_T) ]

    with T uniform over ordered t-tuples (repeats included), phi_T drawn
    from the solution's own table on the underlying variable set, and C
    the constraint-averaged total correlation.  Computed by full
    enumeration; for any valid solution of level >= k + l this sum is at
    most k^2 log q / Delta."""
    from .info import solution_total_correlation

    if l < 0:
        raise InputError("l must be nonnegative")
    if mu.level < inst.k + l:
        raise InputError(f"need level >= k + l = {inst.k + l}, have {mu.level}")
    total = 0.0
    for t in range(l + 1):
        e_t = 0.0
        for tup in assignments(inst.n, t):
            key = tuple(sorted(set(tup)))
            table = mu.tables[key]
            for idx, phi in enumerate(assignments(inst.q, len(key))):
                w = float(table[idx])
                if w <= 0:
                    continue
                cond = condition(mu, key, phi)
                e_t += w * solution_total_correlation(cond, inst)
        total += e_t / inst.n**t
    return total


# ---------------------------------------------------------------------------
# JSON export


def solution_to_json_dict(mu: SaSolution) -> dict:
    return {
        "n": mu.n,
        "q": mu.q,
        "level": mu.level,
        "tables": [
            {
                "subset": list(s),
                "probs": [str(p) if mu.exact else float(p) for p in table],
            }
            for s, table in sorted(mu.tables.items(), key=lambda kv: (len(kv[0]), kv[0]))
        ],
    }


def solution_from_json_dict(data: dict) -> SaSolution:
    try:
        n, q, level = int(data["n"]), int(data["q"]), int(data["level"])
        tables: dict[tuple[int, ...], list] = {}
        exact = True
        for entry in data["tables"]:
            probs = entry["probs"]
            if any(isinstance(p, float) for p in probs):
                exact = False
                tables[tuple(entry["subset"])] = [float(p) for p in probs]
            else:
                tables[tuple(entry["subset"])] = [Fraction(p) for p in probs]
        return SaSolution(n=n, q=q, level=level, tables=tables, exact=exact)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed solution JSON: {exc}") from exc
