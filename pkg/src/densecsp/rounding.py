"""Derandomized independent rounding and the full conditioning-based
approximation driver for dense Max k-CSP.

The driver solves the conditioned relaxation at a level tied to the
instance density, then tries every conditioning of the solution (every
subset T up to the spare level and every positive-probability local
assignment), rounds each conditioned family by greedy conditional
expectation, and keeps the best assignment.  Greedy expectations are
computed in exact rationals so the output provably dominates the
product-distribution expectation of each conditioned family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from .csp import CspInstance, density, validate, value
from .errors import CapExceeded, InputError
from .hierarchy import (
    SaSolution,
    condition,
    sa_variable_count,
    solve_sac,
)
from .lp import FLOAT_TOL
from .subsets import assignments, pack, subsets_by_size

DEFAULT_LP_VAR_CAP = 200_000


class LevelAborted(CapExceeded):
    """The driver would have to solve a relaxation above its level budget."""

    def __init__(self, level: int, budget: int):
        super().__init__(f"relaxation level {level} exceeds budget {budget}")
        self.level = level
        self.budget = budget


# ---------------------------------------------------------------------------
# Closed-form bounds


def funcbound_lower(kappa: float, delta: float) -> float:
    """Floor on E_Y[f] given E_X[f] = 1 - delta and KL(X || Y) <= kappa:

        (delta^delta e^(-kappa))^(1/(1-delta)) * (1 - delta)

    with 0^0 = 1 and the whole expression 0 at delta = 1."""
    kappa, delta = float(kappa), float(delta)
    if kappa < 0 or math.isnan(kappa):
        raise InputError(f"kappa must be nonnegative, got {kappa}")
    if not 0 <= delta <= 1:
        raise InputError(f"delta must lie in [0, 1], got {delta}")
    if delta == 1:
        return 0.0
    if math.isinf(kappa):
        return 0.0
    dlogd = delta * math.log(delta) if delta > 0 else 0.0
    return math.exp((dlogd - kappa) / (1 - delta)) * (1 - delta)


def guaranteed_bound(inst: CspInstance, i: int, delta: float) -> float:
    """Output-value floor of the driver: (1-delta) delta^(delta/(1-delta)) / q^(1/i)."""
    if i < 1:
        raise InputError("parameter i must be >= 1")
    if not 0 <= delta <= 1:
        raise InputError(f"delta must lie in [0, 1], got {delta}")
    if delta == 1:
        return 0.0
    dd = math.exp(delta / (1 - delta) * math.log(delta)) if delta > 0 else 1.0
    return (1 - delta) * dd / inst.q ** (1.0 / i)


# ---------------------------------------------------------------------------
# Derandomized independent rounding


def _exact_marginals(mu: SaSolution) -> list[list[Fraction]]:
    out = []
    for v in range(mu.n):
        probs = [Fraction(p) if not isinstance(p, Fraction) else p for p in mu.singleton(v)]
        probs = [p if p > 0 else Fraction(0) for p in probs]
        total = sum(probs)
        if total <= 0:
            raise InputError(f"variable {v} has an empty marginal")
        out.append([p / total for p in probs])
    return out


def _product_expectation(inst: CspInstance, dists: list[list[Fraction]]) -> Fraction:
    """Exact expected value when every variable is sampled independently
    from its own distribution (one sample per variable, shared across
    repeated scope positions)."""
    total = Fraction(0)
    for c in inst.constraints:
        support = tuple(sorted(set(c.scope)))
        positions = {v: i for i, v in enumerate(support)}
        contrib = Fraction(0)
        for phi in assignments(inst.q, len(support)):
            p = Fraction(1)
            for v, s in zip(support, phi):
                p *= dists[v][s]
                if p == 0:
                    break
            if p == 0:
                continue
            payoff = c.table[pack((phi[positions[v]] for v in c.scope), inst.q)]
            if payoff:
                contrib += p * payoff
        total += c.weight * contrib
    return total


def position_product_expectation(inst: CspInstance, mu: SaSolution) -> Fraction:
    """Expected value when every scope *position* is sampled independently
    from the variable's marginal (repeated variables resampled); never
    above the shared-sample expectation when repeated-variable tables
    follow the zero-payoff convention."""
    dists = _exact_marginals(mu)
    total = Fraction(0)
    for c in inst.constraints:
        contrib = Fraction(0)
        for idx, payoff in enumerate(c.table):
            if not payoff:
                continue
            tup = []
            rest = idx
            for j in range(inst.k - 1, -1, -1):
                tup.append(rest % inst.q)
                rest //= inst.q
            tup.reverse()
            p = Fraction(1)
            for v, s in zip(c.scope, tup):
                p *= dists[v][s]
                if p == 0:
                    break
            contrib += p * payoff
        total += c.weight * contrib
    return total


@dataclass
class GreedyStep:
    variable: int
    choice: int
    expectation: Fraction


def independent_rounding(
    mu: SaSolution, inst: CspInstance, log: list[GreedyStep] | None = None
) -> tuple[int, ...]:
    """Greedy conditional-expectation derandomization of independent
    rounding: fix variables in ascending index order, each time choosing
    the alphabet value that maximizes the exact expected value when the
    rest follow the product of marginals.  Ties break toward the smaller
    value.  The result's value is >= the product-distribution expectation."""
    if mu.level < inst.k:
        raise InputError(f"solution level {mu.level} below arity {inst.k}")
    if mu.n != inst.n or mu.q != inst.q:
        raise InputError("solution shape does not match the instance")
    dists = _exact_marginals(mu)
    chosen = []
    for v in range(inst.n):
        best_sigma, best_exp = 0, None
        saved = dists[v]
        for sigma in range(inst.q):
            if saved[sigma] == 0:
                continue
            dists[v] = [Fraction(int(s == sigma)) for s in range(inst.q)]
            e = _product_expectation(inst, dists)
            if best_exp is None or e > best_exp:
                best_sigma, best_exp = sigma, e
        dists[v] = [Fraction(int(s == best_sigma)) for s in range(inst.q)]
        chosen.append(best_sigma)
        if log is not None:
            log.append(GreedyStep(variable=v, choice=best_sigma,
                                  expectation=best_exp if best_exp is not None else Fraction(0)))
    return tuple(chosen)


# ---------------------------------------------------------------------------
# The approximation driver


@dataclass
class RoundingTrace:
    """Audit record of one driver run; `achieved` always equals the exact
    re-evaluated value of `assignment`."""

    assignment: tuple[int, ...]
    achieved: Fraction
    lambda_: Fraction | float
    level_requested: int
    level_solved: int
    i: int
    delta_density: Fraction
    conditioning_set: tuple[int, ...]
    conditioning_assignment: tuple[int, ...]
    greedy_log: list[GreedyStep] = field(default_factory=list)
    conditionings_tried: int = 0


def approximate(
    inst: CspInstance,
    i: int,
    tol: float = FLOAT_TOL,
    exact: bool = False,
    cap_lp_vars: int = DEFAULT_LP_VAR_CAP,
    max_level: int | None = None,
) -> RoundingTrace:
    """Conditioning-based approximation driver.

    Starts the relaxation level at ceil(k^2 i / Delta) + k, increments
    before each solve, and keeps raising the level while the slack
    (level - k) * lambda is below k^2 i / Delta and the level is below n.
    Then every conditioning of the solved family is rounded greedily and
    the best assignment wins (ties to the earliest in enumeration order:
    conditioning sets by size then colex, assignments lexicographic)."""
    if i < 1:
        raise InputError("parameter i must be >= 1")
    bad = validate(inst)
    if bad:
        raise InputError("invalid instance: " + "; ".join(bad))
    delta = density(inst).delta
    k = inst.k
    schedule = Fraction(k * k * i) / delta
    r = math.ceil(schedule) + k
    budget = max_level if max_level is not None else None
    sac = None
    while True:
        r += 1
        if budget is not None and r > budget:
            raise LevelAborted(level=r, budget=budget)
        projected = sa_variable_count(inst.n, inst.q, min(r, inst.n))
        if projected > cap_lp_vars:
            raise CapExceeded(
                f"projected relaxation at level {r} too large", projected, cap_lp_vars
            )
        sac = solve_sac(inst, r, tol=tol, exact=exact)
        lam = sac.lambda_
        if not ((r - k) * (Fraction(lam) if exact else float(lam)) < schedule and r < inst.n):
            break

    level = sac.level
    threshold = Fraction(0) if exact else tol
    best: RoundingTrace | None = None
    tried = 0
    for T in subsets_by_size(inst.n, level - k):
        for phi_T in assignments(inst.q, len(T)):
            mass = sac.solution.prob(T, phi_T) if T else 1
            if mass <= threshold:
                continue
            tried += 1
            conditioned = condition(sac.solution, T, phi_T)
            log: list[GreedyStep] = []
            a = independent_rounding(conditioned, inst, log=log)
            achieved = value(inst, a)
            if best is None or achieved > best.achieved:
                best = RoundingTrace(
                    assignment=a,
                    achieved=achieved,
                    lambda_=sac.lambda_,
                    level_requested=r,
                    level_solved=level,
                    i=i,
                    delta_density=delta,
                    conditioning_set=T,
                    conditioning_assignment=phi_T,
                    greedy_log=log,
                )
    assert best is not None
    best.conditionings_tried = tried
    return best


def trace_to_json_dict(trace: RoundingTrace) -> dict:
    return {
        "schema_version": 1,
        "assignment": list(trace.assignment),
        "achieved_value": str(trace.achieved),
        "achieved_value_float": float(trace.achieved),
        "lambda": float(trace.lambda_),
        "level_requested": trace.level_requested,
        "level_solved": trace.level_solved,
        "i": trace.i,
        "density": str(trace.delta_density),
        "conditioning_set": list(trace.conditioning_set),
        "conditioning_assignment": list(trace.conditioning_assignment),
        "conditionings_tried": trace.conditionings_tried,
        "greedy": [
            {"variable": s.variable, "choice": s.choice, "expectation": float(s.expectation)}
            for s in trace.greedy_log
        ],
    }
