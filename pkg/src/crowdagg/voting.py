"""
Simple voting consensus and agreement metrics between top-k lists.

Two tally modes exist. ``top1-only`` counts each ballot's top choice;
``all-mentions`` (the default) counts every label appearing in a ballot's
ranked list. In ``all-mentions`` mode the tally also records how often each
label sat at each ranked position, and equal mention counts are ordered by
that positional record (more first places first, then more second places,
...) before falling back to label index. Without that refinement a unanimous
profile ``[a, b, c]`` ties all three labels and the consensus would ignore
the order every evaluator agreed on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

from .core import LabelSet, Profile
from .errors import ValidationError

TOP1_ONLY = "top1-only"
ALL_MENTIONS = "all-mentions"
MODES = (TOP1_ONLY, ALL_MENTIONS)


@dataclass(frozen=True)
class VoteTally:
    labels: LabelSet
    counts: Mapping[str, int]
    mode: str = ALL_MENTIONS
    positions: Mapping[str, tuple[int, ...]] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown tally mode {self.mode!r}; expected one of {MODES}")
        counts = {lab: 0 for lab in self.labels}
        for lab, c in dict(self.counts).items():
            if c < 0:
                raise ValidationError(f"negative count for {lab!r}")
            counts[self.labels.canonical(lab)] = int(c)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def tally(p: Profile, mode: str = ALL_MENTIONS) -> VoteTally:
    if not p.ballots:
        raise ValidationError("empty profile")
    if mode not in MODES:
        raise ValidationError(f"unknown tally mode {mode!r}; expected one of {MODES}")
    counts = {lab: 0 for lab in p.labels}
    if mode == TOP1_ONLY:
        for b in p.ballots:
            counts[b.top_choice] += 1
        return VoteTally(p.labels, counts, mode)

    depth = max(b.k for b in p.ballots)
    positions = {lab: [0] * depth for lab in p.labels}
    for b in p.ballots:
        for pos, lab in enumerate(b.ranked):
            counts[lab] += 1
            positions[lab][pos] += 1
    return VoteTally(p.labels, counts, mode, {lab: tuple(v) for lab, v in positions.items()})


def consensus_ranking(t: VoteTally, k: int) -> list[str]:
    """Top ``k`` labels by descending count."""
    n = t.labels.n
    if not 1 <= k <= n:
        raise ValidationError(f"k must be in 1..{n}, got {k}")

    def key(i):
        lab = t.labels.labels[i]
        pos = t.positions[lab] if t.positions else ()
        return (-t.counts[lab], tuple(-c for c in pos), i)

    return [t.labels.labels[i] for i in sorted(range(n), key=key)[:k]]


@dataclass(frozen=True)
class AgreementReport:
    top1_match: bool
    top3_set_overlap: int
    top3_exact_rank_match: bool


def compare_rankings(r1: Sequence[str], r2: Sequence[str]) -> AgreementReport:
    if len(r1) != len(r2):
        raise ValidationError(f"cannot compare lists of length {len(r1)} and {len(r2)}")
    if not r1:
        raise ValidationError("cannot compare empty lists")
    return AgreementReport(
        top1_match=r1[0] == r2[0],
        top3_set_overlap=len(set(r1) & set(r2)),
        top3_exact_rank_match=list(r1) == list(r2),
    )


Predicate = Union[str, Callable[[AgreementReport], bool]]
_OVERLAP = re.compile(r"^overlap>=(\d+)$")


def resolve_predicate(predicate: Predicate) -> Callable[[AgreementReport], bool]:
    """Map ``"top1"``, ``"exact"`` or ``"overlap>=m"`` to a report predicate."""
    if callable(predicate):
        return predicate
    if predicate == "top1":
        return lambda r: r.top1_match
    if predicate == "exact":
        return lambda r: r.top3_exact_rank_match
    m = _OVERLAP.match(str(predicate))
    if m:
        need = int(m.group(1))
        return lambda r: r.top3_set_overlap >= need
    raise ValidationError(f"unknown predicate {predicate!r}; use top1, exact or overlap>=m")


def agreement_rate(reports: Sequence[AgreementReport], predicate: Predicate = "top1") -> float:
    if not reports:
        raise ValidationError("no reports to aggregate")
    pred = resolve_predicate(predicate)
    return sum(1 for r in reports if pred(r)) / len(reports)
