"""Linear-program solving in two arithmetic modes behind one contract.

Exact mode is a self-written two-phase dense-tableau simplex over
`Fraction`s with Bland's rule, so answers are exact and termination is
guaranteed even on the massively degenerate programs the relaxations
produce.  Float mode hands the same program to HiGHS (scipy.linprog)
with a 1e-9 primal feasibility tolerance; the relaxation LPs at float
scale are too degenerate for a naive dense tableau to pivot through
quickly, and the exact path doubles as the reference the float path is
tested against.

All variables are nonnegative; rows may be <=, = or >=.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InputError, InternalInvariantError

Relation = str  # "<=", "=", ">="
_RELATIONS = ("<=", "=", ">=")

FLOAT_TOL = 1e-9
_MAX_ITERATIONS = 200_000


@dataclass
class LinearProgram:
    """max objective . x  subject to rows, x >= 0."""

    num_vars: int
    rows: list[tuple[dict[int, Fraction], Relation, Fraction]] = field(default_factory=list)
    objective: dict[int, Fraction] = field(default_factory=dict)

    def add_row(self, coeffs: dict[int, Fraction], rel: Relation, rhs: Fraction) -> None:
        if rel not in _RELATIONS:
            raise InputError(f"unknown relation {rel!r}")
        for j in coeffs:
            if not 0 <= j < self.num_vars:
                raise InputError(f"coefficient on unknown variable {j}")
        self.rows.append((coeffs, rel, rhs))

    def validate(self) -> None:
        for coeffs, rel, rhs in self.rows:
            for j, c in coeffs.items():
                if isinstance(c, float) and not np.isfinite(c):
                    raise InputError("non-finite coefficient")
            if isinstance(rhs, float) and not np.isfinite(rhs):
                raise InputError("non-finite right-hand side")


@dataclass
class LpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list | None = None
    objective_value: object = None


def _evaluate(objective: dict[int, Fraction], x: list) -> object:
    return sum((x[j] * c for j, c in objective.items()), start=x[0] * 0 if x else 0)


# ---------------------------------------------------------------------------
# Exact simplex


class _ExactTableau:
    def __init__(self, lp: LinearProgram):
        rows = []
        for coeffs, rel, rhs in lp.rows:
            dense = [Fraction(0)] * lp.num_vars
            for j, c in coeffs.items():
                dense[j] += Fraction(c)
            rhs = Fraction(rhs)
            if rhs < 0:
                dense = [-c for c in dense]
                rhs = -rhs
                rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
            rows.append((dense, rel, rhs))

        n = lp.num_vars
        n_slack = sum(1 for _, rel, _ in rows if rel != "=")
        m = len(rows)
        self.n = n
        self.num_cols = n + n_slack + m  # one artificial per row keeps phase 1 simple
        self.art_start = n + n_slack
        self.basis: list[int] = []
        self.T: list[list[Fraction]] = []
        slack_at = n
        for i, (dense, rel, rhs) in enumerate(rows):
            row = dense + [Fraction(0)] * (n_slack + m) + [rhs]
            if rel == "<=":
                row[slack_at] = Fraction(1)
                slack_at += 1
            elif rel == ">=":
                row[slack_at] = Fraction(-1)
                slack_at += 1
            art = self.art_start + i
            row[art] = Fraction(1)
            self.T.append(row)
            self.basis.append(art)
        # Rows with a positive slack could start basic on the slack instead,
        # but a uniform artificial basis keeps the bookkeeping identical.

    def set_objective(self, c: list[Fraction]) -> None:
        obj = [-ci for ci in c] + [Fraction(0)]
        for i, b in enumerate(self.basis):
            cb = c[b]
            if cb:
                row = self.T[i]
                for j in range(self.num_cols + 1):
                    if row[j]:
                        obj[j] += cb * row[j]
        self.obj = obj

    def _pivot(self, p: int, q: int) -> None:
        prow = self.T[p]
        piv = prow[q]
        inv = 1 / piv
        for j in range(self.num_cols + 1):
            if prow[j]:
                prow[j] *= inv
        for row in self.T + [self.obj]:
            if row is prow:
                continue
            f = row[q]
            if f:
                for j in range(self.num_cols + 1):
                    if prow[j]:
                        row[j] -= f * prow[j]
        self.basis[p] = q

    def run(self, allowed) -> str:
        """Bland's rule until optimal or unbounded over the allowed columns."""
        for _ in range(_MAX_ITERATIONS):
            q = -1
            for j in range(self.num_cols):
                if allowed[j] and self.obj[j] < 0:
                    q = j
                    break
            if q < 0:
                return "optimal"
            p, best = -1, None
            for i, row in enumerate(self.T):
                if row[q] > 0:
                    ratio = row[-1] / row[q]
                    if best is None or ratio < best or (
                        ratio == best and self.basis[i] < self.basis[p]
                    ):
                        p, best = i, ratio
            if p < 0:
                return "unbounded"
            self._pivot(p, q)
        raise InternalInvariantError("exact simplex exceeded iteration cap")

    def drive_out_artificials(self) -> None:
        """Pivot every basic artificial (necessarily at level 0 after a
        successful phase 1) onto some real column, so later pivots can
        never push an artificial positive again.  Rows whose real
        coefficients are all zero are redundant and stay harmless."""
        for i in range(len(self.T)):
            if self.basis[i] < self.art_start:
                continue
            row = self.T[i]
            for j in range(self.art_start):
                if row[j] != 0:
                    self._pivot(i, j)
                    break

    def solution(self) -> list[Fraction]:
        x = [Fraction(0)] * self.n
        for i, b in enumerate(self.basis):
            if b < self.n:
                x[b] = self.T[i][-1]
        return x


def _solve_exact(lp: LinearProgram, phase2: bool) -> LpOutcome:
    tab = _ExactTableau(lp)
    total = tab.num_cols
    # Phase 1: maximize minus the sum of artificials.
    c1 = [Fraction(0)] * total
    for j in range(tab.art_start, total):
        c1[j] = Fraction(-1)
    tab.set_objective(c1)
    status = tab.run([True] * total)
    if status != "optimal":
        raise InternalInvariantError("phase 1 cannot be unbounded")
    if tab.obj[-1] < 0:
        return LpOutcome(status="infeasible")
    tab.drive_out_artificials()
    allowed = [True] * tab.art_start + [False] * (total - tab.art_start)
    if phase2:
        c2 = [Fraction(0)] * total
        for j, c in lp.objective.items():
            c2[j] = Fraction(c)
        tab.set_objective(c2)
        status = tab.run(allowed)
        if status == "unbounded":
            return LpOutcome(status="unbounded")
    x = tab.solution()
    return LpOutcome(status="optimal", x=x, objective_value=_evaluate(
        {j: Fraction(c) for j, c in lp.objective.items()}, x) if lp.objective else Fraction(0))


# ---------------------------------------------------------------------------
# Float mode (HiGHS via scipy)


def _solve_float(lp: LinearProgram, phase2: bool, tol: float) -> LpOutcome:
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix

    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for coeffs, rel, rhs in lp.rows:
        if rel == "=":
            eq_rows.append(coeffs)
            eq_rhs.append(float(rhs))
        elif rel == "<=":
            ub_rows.append(coeffs)
            ub_rhs.append(float(rhs))
        else:
            ub_rows.append({j: -c for j, c in coeffs.items()})
            ub_rhs.append(-float(rhs))

    def sparse(rows):
        data, indices, indptr = [], [], [0]
        for coeffs in rows:
            for j, c in coeffs.items():
                indices.append(j)
                data.append(float(c))
            indptr.append(len(indices))
        return csr_matrix((data, indices, indptr), shape=(len(rows), lp.num_vars))

    c = np.zeros(lp.num_vars)
    if phase2:
        for j, coef in lp.objective.items():
            c[j] = -float(coef)
    res = linprog(
        c,
        A_ub=sparse(ub_rows) if ub_rows else None,
        b_ub=np.array(ub_rhs) if ub_rows else None,
        A_eq=sparse(eq_rows) if eq_rows else None,
        b_eq=np.array(eq_rhs) if eq_rows else None,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": tol, "presolve": True},
    )
    if res.status == 2:
        return LpOutcome(status="infeasible")
    if res.status == 3:
        return LpOutcome(status="unbounded")
    if res.status != 0:
        raise InternalInvariantError(f"float LP solve failed: {res.message}")
    x = np.maximum(np.asarray(res.x), 0.0)
    value = float(sum(float(coef) * x[j] for j, coef in lp.objective.items()))
    return LpOutcome(status="optimal", x=list(x), objective_value=value)


# ---------------------------------------------------------------------------
# Public interface


def solve_feasibility(lp: LinearProgram, exact: bool = False, tol: float = FLOAT_TOL) -> LpOutcome:
    """Find any feasible point (phase 1 only).  Exact mode gives an exact
    yes/no; float mode uses the feasibility tolerance."""
    lp.validate()
    return _solve_exact(lp, phase2=False) if exact else _solve_float(lp, False, tol)


def maximize(lp: LinearProgram, exact: bool = False, tol: float = FLOAT_TOL) -> LpOutcome:
    """Maximize the objective; status reports infeasible/unbounded cases."""
    lp.validate()
    return _solve_exact(lp, phase2=True) if exact else _solve_float(lp, True, tol)


def lp_format(lp: LinearProgram, name: str = "densecsp") -> str:
    """Textual LP-format export (CPLEX dialect) for external cross-checks."""

    def term(j: int, c) -> str:
        c = Fraction(c) if not isinstance(c, float) else c
        sign = "+" if c >= 0 else "-"
        return f"{sign} {abs(float(c))!r} x{j}"

    lines = [f"\\ {name}", "Maximize", " obj: " + (
        " ".join(term(j, c) for j, c in sorted(lp.objective.items())) or "0 x0")]
    lines.append("Subject To")
    for i, (coeffs, rel, rhs) in enumerate(lp.rows):
        body = " ".join(term(j, c) for j, c in sorted(coeffs.items())) or "0 x0"
        op = {"<=": "<=", ">=": ">=", "=": "="}[rel]
        lines.append(f" c{i}: {body} {op} {float(rhs)!r}")
    lines.append("Bounds")
    for j in range(lp.num_vars):
        lines.append(f" 0 <= x{j}")
    lines.append("End")
    return "\n".join(lines)
