"""
Synthetic evaluator profiles drawn from a Mallows model.

Each evaluator's full ranking is sampled exactly by repeated insertion: the
``i``-th reference label is inserted at position ``j`` of the partial ranking
(``0 <= j <= i``) with probability proportional to ``phi ** (i - j)``, which
gives ``P(sigma) ~ phi ** KT(sigma, reference)``. The ballot keeps the top-1
and the top-``k`` prefix.

Trial ``i`` of an experiment draws from ``numpy.random.default_rng([seed, i])``
so results do not depend on how trials are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import DEFAULT_DEPTH, Ballot, LabelSet, Profile, Ranking, kendall_tau
from .errors import ValidationError
from .kemeny import kemeny_branch_bound
from .tournament import build_tournament
from .voting import ALL_MENTIONS, AgreementReport, agreement_rate, compare_rankings, consensus_ranking, tally

DEFAULT_EVALUATORS = 109


@dataclass(frozen=True)
class MallowsConfig:
    reference: Ranking
    phi: float
    num_evaluators: int = DEFAULT_EVALUATORS
    k: int = DEFAULT_DEPTH
    seed: int = 0
    item_id: str = "sim"

    def __post_init__(self):
        if not 0 < self.phi <= 1:
            raise ValidationError(f"phi must be in (0, 1], got {self.phi}")
        if self.num_evaluators < 1:
            raise ValidationError("num_evaluators must be at least 1")
        if not 1 <= self.k <= self.reference.labels.n:
            raise ValidationError(f"k must be in 1..{self.reference.labels.n}, got {self.k}")

    @property
    def labels(self) -> LabelSet:
        return self.reference.labels


def _insertion_cdfs(n: int, phi: float) -> list[np.ndarray]:
    cdfs = []
    for i in range(n):
        w = phi ** (i - np.arange(i + 1, dtype=float))
        cdfs.append(np.cumsum(w) / w.sum())
    return cdfs


def sample_orders(reference: Ranking, phi: float, size: int, rng: np.random.Generator) -> list[list[int]]:
    """Draw ``size`` full rankings (label indices, best first)."""
    ref = reference.indices
    n = len(ref)
    cdfs = _insertion_cdfs(n, phi)
    u = rng.random((size, n))
    orders = []
    for row in u:
        sigma: list[int] = []
        for i, label in enumerate(ref):
            j = int(np.searchsorted(cdfs[i], row[i], side="right"))
            sigma.insert(min(j, i), label)
        orders.append(sigma)
    return orders


def _profile_from_orders(cfg: MallowsConfig, orders) -> Profile:
    ls = cfg.labels
    width = len(str(cfg.num_evaluators))
    ballots = []
    for e, sigma in enumerate(orders):
        names = [ls.labels[i] for i in sigma]
        ballots.append(Ballot(f"e{e + 1:0{width}d}", cfg.item_id, names[0], tuple(names[: cfg.k]), ls))
    return Profile(cfg.item_id, tuple(ballots), ls)


def mallows_sample(cfg: MallowsConfig, rng: np.random.Generator | None = None) -> Profile:
    """One profile of ``cfg.num_evaluators`` ballots; seeded by ``cfg.seed`` unless ``rng`` is given."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    return _profile_from_orders(cfg, sample_orders(cfg.reference, cfg.phi, cfg.num_evaluators, rng))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


@dataclass(frozen=True)
class TrialResult:
    voting: list[str]
    kemeny: list[str]
    kemeny_cost: Fraction
    report: AgreementReport
    kt_between: Fraction
    voting_recovers_top1: bool
    kemeny_recovers_top1: bool


@dataclass(frozen=True)
class ExperimentSummary:
    config: MallowsConfig
    trials: int
    mode: str
    top1_agreement: float
    top3_agreement: float
    mean_overlap: float
    mean_kt_between: float
    voting_top1_recovery: float
    kemeny_top1_recovery: float
    per_trial: list[TrialResult] = field(repr=False)


def run_trial(cfg: MallowsConfig, trial: int, mode: str = ALL_MENTIONS) -> TrialResult:
    p = mallows_sample(cfg, trial_rng(cfg.seed, trial))
    ls = cfg.labels
    votes = tally(p, mode)
    voting_full = consensus_ranking(votes, ls.n)
    sol = kemeny_branch_bound(build_tournament(p))
    kt = kendall_tau(Ranking(ls, voting_full).to_tied(), sol.ranking.to_tied())
    top = cfg.reference.order[0]
    return TrialResult(
        voting=voting_full[: cfg.k],
        kemeny=sol.top(cfg.k),
        kemeny_cost=sol.cost,
        report=compare_rankings(voting_full[: cfg.k], sol.top(cfg.k)),
        kt_between=kt,
        voting_recovers_top1=voting_full[0] == top,
        kemeny_recovers_top1=sol.ranking.order[0] == top,
    )


def method_agreement_experiment(cfg: MallowsConfig, trials: int, mode: str = ALL_MENTIONS) -> ExperimentSummary:
    """Compare voting consensus with Kemeny aggregation on fresh Mallows profiles."""
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    results = [run_trial(cfg, i, mode) for i in range(trials)]
    reports = [r.report for r in results]
    return ExperimentSummary(
        config=cfg,
        trials=trials,
        mode=mode,
        top1_agreement=agreement_rate(reports, "top1"),
        top3_agreement=agreement_rate(reports, "exact"),
        mean_overlap=sum(r.top3_set_overlap for r in reports) / trials,
        mean_kt_between=float(sum(r.kt_between for r in results) / trials),
        voting_top1_recovery=sum(r.voting_recovers_top1 for r in results) / trials,
        kemeny_top1_recovery=sum(r.kemeny_recovers_top1 for r in results) / trials,
        per_trial=results,
    )
