"""Colexicographic subset ranking.

Every place the package needs to index k-subsets (birthday repetition
questions, birthday CSP variables, SA solution tables, conditioning
enumeration order) uses the same fixed colex rank so that indices are
deterministic across runs and implementations:

    rank({a_1 < a_2 < ... < a_k}) = sum_i C(a_i, i)

which enumerates subsets in increasing order of their largest element.
"""

from __future__ import annotations

from math import comb


def colex_rank(subset) -> int:
    """Rank of a set of distinct non-negative ints in colex order."""
    return sum(comb(a, i) for i, a in enumerate(sorted(subset), start=1))


def colex_unrank(rank: int, k: int) -> tuple[int, ...]:
    """Inverse of colex_rank for k-subsets; returns a sorted tuple."""
    out = []
    r = rank
    for i in range(k, 0, -1):
        a = i - 1
        while comb(a + 1, i) <= r:
            a += 1
        r -= comb(a, i)
        out.append(a)
    return tuple(reversed(out))


def subsets_colex(n: int, k: int):
    """All k-subsets of range(n) as sorted tuples, in colex order."""
    for rank in range(comb(n, k)):
        yield colex_unrank(rank, k)


def subsets_by_size(n: int, max_size: int):
    """All subsets of range(n) with size <= max_size, smaller sizes first,
    colex within each size.  Yields sorted tuples (first is the empty one)."""
    for k in range(max_size + 1):
        yield from subsets_colex(n, k)


def assignments(q: int, length: int):
    """All tuples in range(q)^length in lexicographic order (first
    coordinate most significant, matching table row-major indexing)."""
    if length == 0:
        yield ()
        return
    for head in range(q):
        for tail in assignments(q, length - 1):
            yield (head,) + tail


def pack(values, q: int) -> int:
    """Row-major index of a tuple over range(q): first entry most significant."""
    idx = 0
    for v in values:
        idx = idx * q + v
    return idx


def unpack(idx: int, q: int, length: int) -> tuple[int, ...]:
    out = [0] * length
    for j in range(length - 1, -1, -1):
        out[j] = idx % q
        idx //= q
    return tuple(out)
