"""Weighted tournaments built from ballot profiles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .core import LabelSet, Profile, Ranking
from .errors import ValidationError

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class WeightedTournament:
    """Pairwise preference weights; ``w[a][b]`` is the support for ``a`` above ``b``."""

    labels: LabelSet
    w: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = self.labels.n
        w = tuple(tuple(Fraction(x) for x in row) for row in self.w)
        if len(w) != n or any(len(row) != n for row in w):
            raise ValidationError(f"weight matrix must be {n}x{n}")
        for a in range(n):
            if w[a][a] != 0:
                raise ValidationError("tournament diagonal must be zero")
            if any(x < 0 for x in w[a]):
                raise ValidationError("tournament weights must be nonnegative")
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.labels.n

    def weight(self, a: str, b: str) -> Fraction:
        return self.w[self.labels.index(a)][self.labels.index(b)]

    def scaled(self, c) -> "WeightedTournament":
        c = Fraction(c)
        return WeightedTournament(self.labels, tuple(tuple(x * c for x in row) for row in self.w))

    def integer_weights(self) -> tuple[list[list[int]], int]:
        """Weights times the common denominator ``d``, as exact ints, with ``d``."""
        d = lcm(*(x.denominator for row in self.w for x in row))
        return [[int(x * d) for x in row] for row in self.w], d


def build_tournament(p: Profile, tie_weight: Fraction = HALF) -> WeightedTournament:
    """Count, for each ordered pair, the ballots placing ``a`` strictly above ``b``.

    A pair tied in a ballot (both unranked) adds ``tie_weight`` to both
    directions. The default 1/2 makes ``w[a][b] + w[b][a]`` equal the ballot
    count and keeps the feedback cost equal to the total Kendall-tau cost.
    """
    if not p.ballots:
        raise ValidationError("empty profile")
    n = p.labels.n
    above = [[0] * n for _ in range(n)]
    tied = [[0] * n for _ in range(n)]
    for t in p.derived_rankings:
        r = t.ranks
        for a in range(n):
            for b in range(a + 1, n):
                if r[a] < r[b]:
                    above[a][b] += 1
                elif r[b] < r[a]:
                    above[b][a] += 1
                else:
                    tied[a][b] += 1
                    tied[b][a] += 1
    tie_weight = Fraction(tie_weight)
    w = tuple(
        tuple(Fraction(above[a][b]) + tie_weight * tied[a][b] if a != b else Fraction(0) for b in range(n))
        for a in range(n)
    )
    return WeightedTournament(p.labels, w)


def order_cost(w: Sequence[Sequence], order: Sequence[int]):
    """Total weight of edges pointing backwards along ``order`` (index form)."""
    total = 0
    for i, a in enumerate(order):
        for b in order[i + 1:]:
            total += w[b][a]
    return total


def feedback_cost(t: WeightedTournament, r: Ranking) -> Fraction:
    """Sum of ``w[b][a]`` over every pair where ``r`` places ``a`` above ``b``."""
    if r.labels != t.labels:
        raise ValidationError("ranking and tournament are over different label sets")
    return Fraction(order_cost(t.w, r.indices))
