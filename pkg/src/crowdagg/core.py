"""
Label spaces, ballots, rankings with a tied tail, and Kendall-tau distance.

Every ranking in this package lives in the index space of a :class:`LabelSet`.
A ballot ranks its top ``k`` labels; the remaining labels share one tied
rank below them. Kendall-tau distance between two such rankings counts each
discordant pair as 1 and each pair that is tied in exactly one ranking as 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import ValidationError

EMOTIONS = ("Angry", "Happy", "Sad", "Scared", "Surprised", "Worried")
DEFAULT_DEPTH = 3


@dataclass(frozen=True)
class LabelSet:
    """Ordered, case-insensitively unique set of alternative names."""

    labels: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise ValidationError(f"a label set needs at least 2 labels, got {len(labels)}")
        index = {}
        for i, lab in enumerate(labels):
            if not isinstance(lab, str) or not lab.strip():
                raise ValidationError(f"labels must be non-empty strings, got {lab!r}")
            key = lab.casefold()
            if key in index:
                raise ValidationError(f"duplicate label {lab!r} (case-insensitive)")
            index[key] = i
        object.__setattr__(self, "_index", index)

    @classmethod
    def default(cls) -> "LabelSet":
        return cls(EMOTIONS)

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label):
        return isinstance(label, str) and label.casefold() in self._index

    def index(self, label: str) -> int:
        try:
            return self._index[label.casefold()]
        except (KeyError, AttributeError):
            raise ValidationError(f"unknown label {label!r}; expected one of {list(self.labels)}") from None

    def canonical(self, label: str) -> str:
        """Return the label-set spelling of ``label``."""
        return self.labels[self.index(label)]


@dataclass(frozen=True)
class Ballot:
    """One evaluator's answer for one item: a top choice plus an ordered top-k list.

    Labels are stored in the canonical casing of ``labels``.
    """

    evaluator_id: str
    item_id: str
    top_choice: str
    ranked: tuple[str, ...]
    labels: LabelSet = field(default_factory=LabelSet.default, repr=False)

    def __post_init__(self):
        ls = self.labels
        object.__setattr__(self, "top_choice", ls.canonical(self.top_choice))
        ranked = tuple(ls.canonical(lab) for lab in self.ranked)
        if not 1 <= len(ranked) <= ls.n:
            raise ValidationError(f"ranked list must hold 1..{ls.n} labels, got {len(ranked)}")
        if len(set(ranked)) != len(ranked):
            dup = next(lab for lab in ranked if ranked.count(lab) > 1)
            raise ValidationError(f"duplicate label {dup!r} in ranked list")
        object.__setattr__(self, "ranked", ranked)

    @property
    def k(self) -> int:
        return len(self.ranked)


@dataclass(frozen=True)
class TiedRanking:
    """Rank assignment where ranks ``1..k`` are strict and the rest tie at ``k+1``.

    ``ranks[i]`` is the rank of ``labels.labels[i]``. ``depth`` is the number of
    explicitly ranked labels; a depth of ``n - 1`` and ``n`` give the same ranks
    and compare equal.
    """

    labels: LabelSet
    ranks: tuple[int, ...]
    depth: int | None = field(default=None, compare=False)

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        object.__setattr__(self, "ranks", ranks)
        if len(ranks) != self.labels.n:
            raise ValidationError("every label needs exactly one rank")
        k = max(ranks) - 1
        strict = sorted(r for r in ranks if r <= k)
        if strict != list(range(1, k + 1)) or min(ranks) < 1:
            raise ValidationError(f"ranks {ranks} are not a top-k order with a tied tail")
        if self.depth is None:
            object.__setattr__(self, "depth", k)
        elif not (self.depth == k or (self.depth == self.labels.n and k == self.labels.n - 1)):
            raise ValidationError(f"depth {self.depth} does not match ranks {ranks}")

    @classmethod
    def from_order(cls, labels: LabelSet, order: Sequence[str]) -> "TiedRanking":
        """Strict prefix ``order``; every other label ties below it."""
        k = len(order)
        ranks = [k + 1] * labels.n
        seen = set()
        for pos, lab in enumerate(order):
            i = labels.index(lab)
            if i in seen:
                raise ValidationError(f"duplicate label {labels.labels[i]!r} in ranked list")
            seen.add(i)
            ranks[i] = pos + 1
        return cls(labels, tuple(ranks), depth=k)

    @property
    def rank_of(self) -> dict[str, int]:
        return dict(zip(self.labels.labels, self.ranks))

    @property
    def tail(self) -> frozenset[str]:
        return frozenset(lab for lab, r in zip(self.labels.labels, self.ranks) if r > self.depth)


@dataclass(frozen=True)
class Ranking:
    """Strict total order over a label set, best first."""

    labels: LabelSet
    order: tuple[str, ...]

    def __post_init__(self):
        order = tuple(self.labels.canonical(lab) for lab in self.order)
        if sorted(order) != sorted(self.labels.labels):
            raise ValidationError(f"{order} is not a permutation of {self.labels.labels}")
        object.__setattr__(self, "order", order)

    @classmethod
    def from_indices(cls, labels: LabelSet, indices: Iterable[int]) -> "Ranking":
        return cls(labels, tuple(labels.labels[i] for i in indices))

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(self.labels.index(lab) for lab in self.order)

    def to_tied(self) -> TiedRanking:
        return TiedRanking.from_order(self.labels, self.order)

    def top(self, k: int) -> list[str]:
        return list(self.order[:k])


@dataclass(frozen=True)
class Profile:
    """All ballots cast for one item."""

    item_id: str
    ballots: tuple[Ballot, ...]
    labels: LabelSet = field(default_factory=LabelSet.default)
    derived_rankings: tuple[TiedRanking, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ballots = tuple(self.ballots)
        object.__setattr__(self, "ballots", ballots)
        if not ballots:
            raise ValidationError(f"profile {self.item_id!r} has no ballots")
        for b in ballots:
            if b.item_id != self.item_id:
                raise ValidationError(
                    f"ballot of evaluator {b.evaluator_id!r} is for item {b.item_id!r}, not {self.item_id!r}"
                )
            if b.labels != self.labels:
                raise ValidationError(f"ballot of evaluator {b.evaluator_id!r} uses a different label set")
        object.__setattr__(
            self, "derived_rankings", tuple(ballot_to_tied_ranking(b, self.labels) for b in ballots)
        )

    def __len__(self):
        return len(self.ballots)


def ballot_to_tied_ranking(b: Ballot, ls: LabelSet) -> TiedRanking:
    """Rank ``b.ranked`` as 1..k and tie every unranked label at rank k+1."""
    if b.top_choice not in ls:
        raise ValidationError(f"unknown label {b.top_choice!r}")
    return TiedRanking.from_order(ls, b.ranked)


def _doubled_kendall_tau(r1: Sequence[int], r2: Sequence[int]) -> int:
    # Twice the distance, so the 1/2 tie penalty stays integral.
    total = 0
    for a, b in combinations(range(len(r1)), 2):
        d1 = r1[a] - r1[b]
        d2 = r2[a] - r2[b]
        if d1 == 0 and d2 == 0:
            continue
        if d1 == 0 or d2 == 0:
            total += 1
        elif (d1 > 0) != (d2 > 0):
            total += 2
    return total


def kendall_tau(r1: TiedRanking, r2: TiedRanking) -> Fraction:
    """Kendall-tau distance with a 1/2 penalty for pairs tied in only one ranking.

    >>> ls = LabelSet(("a", "b", "c"))
    >>> kendall_tau(TiedRanking.from_order(ls, "abc"), TiedRanking.from_order(ls, "a"))
    Fraction(1, 2)
    """
    if r1.labels != r2.labels:
        raise ValidationError("rankings are over different label sets")
    return Fraction(_doubled_kendall_tau(r1.ranks, r2.ranks), 2)


def total_kt_cost(r: Ranking, p: Profile) -> Fraction:
    """Sum of Kendall-tau distances from strict ranking ``r`` to every ballot of ``p``."""
    if r.labels != p.labels:
        raise ValidationError("ranking and profile are over different label sets")
    if not p.ballots:
        raise ValidationError("empty profile")
    strict = r.to_tied().ranks
    return Fraction(sum(_doubled_kendall_tau(strict, t.ranks) for t in p.derived_rankings), 2)
