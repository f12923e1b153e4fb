"""Max k-CSP data model: instances, values, density, instance algebra,
generators and JSON serialization.

An instance is a weighted family of constraints.  Each constraint has an
ordered scope (a k-tuple of variable indices, repeats allowed) and a
dense payoff table of size q^k indexed row-major over the alphabet, with
payoffs in [0, 1].  The weights form a probability distribution over
scopes and the instance value of an assignment is the weighted expected
payoff.  Weights and payoffs are exact `Fraction`s; use `float()` on the
returned values when an approximate view is enough.

Scopes with repeated variables are legal; their tables must assign
payoff 0 to any tuple that gives the repeated variable two different
values, so that the table can never pay on an impossible event.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from .errors import InputError
from .rng import SplitMix64
from .subsets import pack, unpack

WEIGHT_SUM_TOL = Fraction(1, 10**12)


def as_fraction(x) -> Fraction:
    """Coerce int / Fraction / 'p/q' or decimal string / float to Fraction.

    Floats go through their repr so 0.25 means 1/4 and 0.1 means 1/10,
    not the nearest binary fraction.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x)
    raise InputError(f"cannot interpret {x!r} as a rational number")


def format_fraction(x: Fraction) -> str | int:
    return int(x) if x.denominator == 1 else str(x)


@dataclass(frozen=True)
class Constraint:
    scope: tuple[int, ...]
    weight: Fraction
    table: tuple[Fraction, ...]


@dataclass(frozen=True)
class CspInstance:
    """Immutable Max k-CSP instance; safe to share across workers."""

    n: int
    q: int
    k: int
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        if self.n < 1 or self.q < 2 or self.k < 1:
            raise InputError(f"bad instance shape n={self.n} q={self.q} k={self.k}")
        want = self.q**self.k
        for c in self.constraints:
            if len(c.scope) != self.k:
                raise InputError(f"scope {c.scope} is not a {self.k}-tuple")
            if any(not 0 <= v < self.n for v in c.scope):
                raise InputError(f"scope {c.scope} out of range for n={self.n}")
            if len(c.table) != want:
                raise InputError(
                    f"table for scope {c.scope} has {len(c.table)} entries, expected {want}"
                )

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def scope_weights(self) -> dict[tuple[int, ...], Fraction]:
        """Total weight per scope tuple (duplicate list entries aggregated)."""
        w: dict[tuple[int, ...], Fraction] = {}
        for c in self.constraints:
            w[c.scope] = w.get(c.scope, Fraction(0)) + c.weight
        return w


def make_instance(n: int, q: int, k: int, constraints: Iterable) -> CspInstance:
    """Build an instance from (scope, weight, table) triples with loose types."""
    built = []
    for scope, weight, table in constraints:
        built.append(
            Constraint(
                scope=tuple(int(v) for v in scope),
                weight=as_fraction(weight),
                table=tuple(as_fraction(t) for t in table),
            )
        )
    return CspInstance(n=n, q=q, k=k, constraints=tuple(built))


def check_assignment(inst: CspInstance, a: Sequence[int]) -> None:
    if len(a) != inst.n:
        raise InputError(f"assignment length {len(a)} != n={inst.n}")
    if any(not 0 <= v < inst.q for v in a):
        raise InputError("assignment value out of alphabet range")


def value(inst: CspInstance, a: Sequence[int]) -> Fraction:
    """Exact value of an assignment: sum of weight * payoff over constraints."""
    check_assignment(inst, a)
    total = Fraction(0)
    for c in inst.constraints:
        idx = pack((a[v] for v in c.scope), inst.q)
        total += c.weight * c.table[idx]
    return total


@dataclass(frozen=True)
class Density:
    delta: Fraction


def density(inst: CspInstance) -> Density:
    """Largest Delta with Delta * W(S) <= 1/n^k for every scope; 1 means
    the uniform (fully-dense) distribution over ordered k-tuples."""
    weights = inst.scope_weights()
    max_w = max(weights.values(), default=Fraction(0))
    if max_w <= 0:
        raise InputError("density undefined: no scope carries positive weight")
    return Density(delta=Fraction(1) / (Fraction(inst.n**inst.k) * max_w))


def validate(inst: CspInstance) -> list[str]:
    """Report every violated instance invariant; empty list iff valid."""
    report = []
    total = Fraction(0)
    for i, c in enumerate(inst.constraints):
        total += c.weight
        if c.weight < 0:
            report.append(f"constraint {i}: negative weight {c.weight}")
        for idx, payoff in enumerate(c.table):
            if not 0 <= payoff <= 1:
                report.append(
                    f"constraint {i}: payoff out of range ({payoff} at entry {idx})"
                )
                break
        if len(set(c.scope)) < len(c.scope):
            for idx, payoff in enumerate(c.table):
                if payoff == 0:
                    continue
                tup = unpack(idx, inst.q, inst.k)
                seen: dict[int, int] = {}
                for v, val in zip(c.scope, tup):
                    if seen.setdefault(v, val) != val:
                        report.append(
                            f"constraint {i}: repeated variable {v} paid on "
                            f"inconsistent tuple {tup}"
                        )
                        break
                else:
                    continue
                break
    if abs(total - 1) > WEIGHT_SUM_TOL:
        report.append(f"distribution not normalized: weights sum to {total}")
    return report


def mix(insts: Sequence[CspInstance], weights: Sequence) -> CspInstance:
    """Convex combination of instances sharing variables, alphabet and
    predicates; the scope distribution is mixed pointwise."""
    if not insts or len(insts) != len(weights):
        raise InputError("mix needs one weight per instance")
    alphas = [as_fraction(w) for w in weights]
    if any(a < 0 for a in alphas) or sum(alphas) != 1:
        raise InputError("mix weights must be nonnegative and sum to 1 exactly")
    first = insts[0]
    tables: dict[tuple[int, ...], tuple[Fraction, ...]] = {}
    merged: dict[tuple[int, ...], Fraction] = {}
    for inst, alpha in zip(insts, alphas):
        if (inst.n, inst.q, inst.k) != (first.n, first.q, first.k):
            raise InputError("mix requires identical (n, q, k)")
        for c in inst.constraints:
            if tables.setdefault(c.scope, c.table) != c.table:
                raise InputError(f"predicate tables differ on shared scope {c.scope}")
            merged[c.scope] = merged.get(c.scope, Fraction(0)) + alpha * c.weight
    constraints = tuple(
        Constraint(scope=s, weight=w, table=tables[s])
        for s, w in merged.items()
        if w > 0
    )
    return CspInstance(n=first.n, q=first.q, k=first.k, constraints=constraints)


# ---------------------------------------------------------------------------
# Generators


def random_3xor(n: int, d, seed: int) -> CspInstance:
    """Random 3-XOR instance: d*n constraints, each on three distinct
    variables drawn without replacement with a uniform parity bit;
    payoff 1 iff the XOR of the three values equals the bit."""
    if n < 3:
        raise InputError(f"random_3xor needs n >= 3, got {n}")
    dm = as_fraction(d) * n
    if dm.denominator != 1 or dm < 1:
        raise InputError(f"d*n must be a positive integer, got {dm}")
    m = int(dm)
    rng = SplitMix64(seed)
    constraints = []
    weight = Fraction(1, m)
    for _ in range(m):
        scope = tuple(rng.sample_without_replacement(n, 3))
        bit = rng.below(2)
        table = []
        for t in range(8):
            v0, v1, v2 = unpack(t, 2, 3)
            table.append(Fraction(int(v0 ^ v1 ^ v2 == bit)))
        constraints.append(Constraint(scope=scope, weight=weight, table=tuple(table)))
    return CspInstance(n=n, q=2, k=3, constraints=tuple(constraints))


def _zero_inconsistent(scope, tup) -> bool:
    seen: dict[int, int] = {}
    return any(seen.setdefault(v, val) != val for v, val in zip(scope, tup))


def random_instance(
    n: int,
    q: int,
    k: int,
    m: int,
    seed: int,
    payoff_density: float = 0.5,
    uniform_weights: bool = True,
) -> CspInstance:
    """Random instance with m random ordered scopes and random boolean
    tables (a payoff_density fraction of consistent entries pay 1)."""
    if m < 1:
        raise InputError("need at least one constraint")
    rng = SplitMix64(seed)
    threshold = int(payoff_density * 2**32)
    raw_weights: list[Fraction]
    if uniform_weights:
        raw_weights = [Fraction(1, m)] * m
    else:
        parts = [1 + rng.below(8) for _ in range(m)]
        total = sum(parts)
        raw_weights = [Fraction(p, total) for p in parts]
    constraints = []
    for j in range(m):
        scope = tuple(rng.below(n) for _ in range(k))
        table = []
        for idx in range(q**k):
            tup = unpack(idx, q, k)
            if _zero_inconsistent(scope, tup):
                table.append(Fraction(0))
            else:
                table.append(Fraction(int(rng.below(2**32) < threshold)))
        constraints.append(
            Constraint(scope=scope, weight=raw_weights[j], table=tuple(table))
        )
    return CspInstance(n=n, q=q, k=k, constraints=tuple(constraints))


def random_fully_dense(
    n: int,
    q: int,
    k: int,
    seed: int,
    payoff_density: float = 0.5,
    plant_assignment: Sequence[int] | None = None,
) -> CspInstance:
    """Fully-dense instance: uniform weights over all n^k ordered scopes
    with random boolean tables.  When `plant_assignment` is given, every
    table pays 1 on its restriction, making the instance satisfiable."""
    rng = SplitMix64(seed)
    threshold = int(payoff_density * 2**32)
    weight = Fraction(1, n**k)
    constraints = []
    for s in range(n**k):
        scope = unpack(s, n, k)
        table = []
        for idx in range(q**k):
            tup = unpack(idx, q, k)
            if _zero_inconsistent(scope, tup):
                table.append(Fraction(0))
            else:
                table.append(Fraction(int(rng.below(2**32) < threshold)))
        if plant_assignment is not None:
            idx = pack((plant_assignment[v] for v in scope), q)
            table[idx] = Fraction(1)
        constraints.append(Constraint(scope=scope, weight=weight, table=tuple(table)))
    return CspInstance(n=n, q=q, k=k, constraints=tuple(constraints))


# ---------------------------------------------------------------------------
# JSON format


def to_json_dict(inst: CspInstance) -> dict:
    return {
        "n": inst.n,
        "q": inst.q,
        "k": inst.k,
        "constraints": [
            {
                "scope": list(c.scope),
                "weight": str(c.weight),
                "table": [format_fraction(t) for t in c.table],
            }
            for c in inst.constraints
        ],
    }


def from_json_dict(data: dict) -> CspInstance:
    try:
        return make_instance(
            n=int(data["n"]),
            q=int(data["q"]),
            k=int(data["k"]),
            constraints=[
                (c["scope"], c["weight"], c["table"]) for c in data["constraints"]
            ],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed instance JSON: {exc}") from exc
