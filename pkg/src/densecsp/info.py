"""Entropy, KL divergence, mutual information and total correlation for
finite distributions, plus the constraint-averaged total correlation of
a local-distribution family.

All quantities are in nats (natural log).  Conventions: 0 log 0 = 0, and
KL(p || q) = +inf as soon as p puts mass where q does not.  Conditional
quantities average over the support of the conditioning variable,
weighted by its distribution.  Computation is floating point; identity
tests in this package use a 1e-9 tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import InputError

if TYPE_CHECKING:  # pragma: no cover
    from .csp import CspInstance
    from .hierarchy import SaSolution

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class FiniteDistribution:
    probs: np.ndarray

    @classmethod
    def from_probs(cls, probs) -> "FiniteDistribution":
        arr = np.asarray(probs, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise InputError("a distribution is a nonempty 1-d probability vector")
        if np.any(arr < -NORMALIZATION_TOL):
            raise InputError("negative probability")
        if abs(arr.sum() - 1.0) > NORMALIZATION_TOL:
            raise InputError(f"probabilities sum to {arr.sum()}, not 1")
        return cls(probs=np.clip(arr, 0.0, None))

    @property
    def support(self) -> np.ndarray:
        return np.nonzero(self.probs > 0)[0]


@dataclass(frozen=True)
class JointDistribution:
    tensor: np.ndarray

    @classmethod
    def from_tensor(cls, tensor) -> "JointDistribution":
        arr = np.asarray(tensor, dtype=float)
        if arr.ndim < 1 or arr.size == 0:
            raise InputError("a joint distribution needs at least one axis")
        if np.any(arr < -NORMALIZATION_TOL):
            raise InputError("negative probability")
        if abs(arr.sum() - 1.0) > NORMALIZATION_TOL:
            raise InputError(f"probabilities sum to {arr.sum()}, not 1")
        return cls(tensor=np.clip(arr, 0.0, None))

    @property
    def num_axes(self) -> int:
        return self.tensor.ndim

    def marginal(self, axes: Sequence[int]) -> "JointDistribution":
        """Marginal on the given axes, in the order given."""
        keep = tuple(axes)
        drop = tuple(i for i in range(self.tensor.ndim) if i not in keep)
        marg = self.tensor.sum(axis=drop) if drop else self.tensor
        order = np.argsort(np.argsort(keep))
        return JointDistribution(tensor=np.transpose(marg, axes=tuple(order)))


def _entropy_of(flat: np.ndarray) -> float:
    support = flat[flat > 0]
    return float(-(support * np.log(support)).sum())


def entropy(d: FiniteDistribution | JointDistribution) -> float:
    """H = -sum p log p over the support, in nats."""
    arr = d.probs if isinstance(d, FiniteDistribution) else d.tensor
    return _entropy_of(arr.ravel())


def kl_divergence(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """KL(p || q) in nats; +inf when q misses part of p's support."""
    pa, qa = p.probs, q.probs
    if pa.shape != qa.shape:
        raise InputError("KL divergence needs distributions on the same space")
    mask = pa > 0
    if np.any(qa[mask] == 0):
        return math.inf
    return float((pa[mask] * np.log(pa[mask] / qa[mask])).sum())


def mutual_information(j: JointDistribution) -> float:
    """Inclusion-exclusion mutual information over all axes:
    I(x_1;...;x_n) = sum over nonempty axis subsets of (-1)^(|S|-1) H(marginal).
    Can be negative for three or more axes."""
    n = j.num_axes
    if n < 2:
        raise InputError("mutual information needs at least 2 axes")
    total = 0.0
    for size in range(1, n + 1):
        sign = 1.0 if size % 2 == 1 else -1.0
        for axes in combinations(range(n), size):
            total += sign * _entropy_of(j.marginal(axes).tensor.ravel())
    return total


def _condition_on_axis(j: JointDistribution, axis: int):
    """Yield (probability, conditional JointDistribution on remaining axes)
    for every support point of the given axis."""
    cond_marginal = j.marginal((axis,)).tensor
    moved = np.moveaxis(j.tensor, axis, 0)
    for theta, p_theta in enumerate(cond_marginal):
        if p_theta <= 0:
            continue
        yield float(p_theta), JointDistribution(tensor=moved[theta] / p_theta)


def conditional_mutual_information(j: JointDistribution, axis: int) -> float:
    """I of all remaining axes given the named one, averaged over its support."""
    if j.num_axes < 3:
        raise InputError("conditional mutual information needs >= 3 axes")
    return sum(p * mutual_information(cond) for p, cond in _condition_on_axis(j, axis))


def total_correlation(j: JointDistribution) -> float:
    """KL divergence of the joint from the product of its own marginals."""
    joint = j.tensor
    product = np.ones_like(joint)
    for axis in range(j.num_axes):
        shape = [1] * j.num_axes
        shape[axis] = joint.shape[axis]
        product = product * j.marginal((axis,)).tensor.reshape(shape)
    mask = joint > 0
    return float((joint[mask] * np.log(joint[mask] / product[mask])).sum())


def conditional_total_correlation(j: JointDistribution, axis: int) -> float:
    if j.num_axes < 2:
        raise InputError("conditional total correlation needs >= 2 axes")
    return sum(p * total_correlation(cond) for p, cond in _condition_on_axis(j, axis))


def scope_joint(mu: "SaSolution", scope: Sequence[int]) -> JointDistribution:
    """Joint distribution of the alphabet values on an ordered scope tuple,
    sampled from the solution's table on the underlying variable set.
    Repeated variables give perfectly correlated (diagonal) axes."""
    from .subsets import assignments

    scope = tuple(scope)
    support = tuple(sorted(set(scope)))
    q = mu.q
    tensor = np.zeros((q,) * len(scope))
    table = mu.distribution_on(support)
    for idx, phi in enumerate(assignments(q, len(support))):
        if table[idx] <= 0:
            continue
        lookup = dict(zip(support, phi))
        tensor[tuple(lookup[v] for v in scope)] = table[idx]
    return JointDistribution(tensor=tensor)


def solution_total_correlation(mu: "SaSolution", inst: "CspInstance") -> float:
    """Constraint-averaged total correlation of a local-distribution family:
    the expectation over scopes of the total correlation of the local joint."""
    if mu.level < inst.k:
        raise InputError(f"solution level {mu.level} below arity {inst.k}")
    total = 0.0
    for scope, w in inst.scope_weights().items():
        if w <= 0:
            continue
        total += float(w) * total_correlation(scope_joint(mu, scope))
    return total
