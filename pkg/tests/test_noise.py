from collections import Counter
from itertools import combinations, permutations

import numpy as np
import pytest

from crowdagg.core import LabelSet, Ranking
from crowdagg.errors import ValidationError
from crowdagg.noise import MallowsConfig, mallows_sample, method_agreement_experiment, run_trial, sample_orders, trial_rng

from conftest import letters


def inversions_against(order, reference):
    pos = {lab: i for i, lab in enumerate(reference)}
    seq = [pos[x] for x in order]
    return sum(1 for i, j in combinations(range(len(seq)), 2) if seq[i] > seq[j])


def config(n=3, phi=1.0, evaluators=109, k=None, seed=0):
    ls = letters(n)
    return MallowsConfig(Ranking(ls, ls.labels), phi, evaluators, k if k is not None else n, seed)


def test_uniform_when_phi_is_one():
    rng = np.random.default_rng(0)
    cfg = config(3, 1.0)
    counts = Counter(tuple(o) for o in sample_orders(cfg.reference, 1.0, 6000, rng))
    assert len(counts) == 6
    sd = np.sqrt(6000 * (1 / 6) * (5 / 6))
    for c in counts.values():
        assert abs(c - 1000) <= 3 * sd


def test_matches_exact_mallows_distribution():
    n, phi, size = 4, 0.5, 40000
    ref = tuple(range(n))
    probs = {p: phi ** inversions_against(p, ref) for p in permutations(ref)}
    z = sum(probs.values())
    rng = np.random.default_rng(1)
    cfg = config(n, phi)
    counts = Counter(tuple(o) for o in sample_orders(cfg.reference, phi, size, rng))
    chi2 = sum((counts[p] - size * q / z) ** 2 / (size * q / z) for p, q in probs.items())
    # 23 degrees of freedom; 99.9th percentile is about 49.7
    assert chi2 < 49.7


def test_concentrates_on_reference():
    cfg = config(6, 1e-9, evaluators=500, k=3)
    p = mallows_sample(cfg)
    assert all(b.ranked == cfg.reference.order[:3] for b in p.ballots)
    assert all(b.top_choice == cfg.reference.order[0] for b in p.ballots)


def test_seed_determinism():
    cfg = config(5, 0.4, k=3, seed=42)
    assert mallows_sample(cfg) == mallows_sample(cfg)
    assert mallows_sample(cfg) != mallows_sample(config(5, 0.4, k=3, seed=43))


def test_kt_increases_with_phi():
    ref = tuple(range(6))
    means = []
    for phi in (0.1, 0.9):
        orders = sample_orders(config(6, phi).reference, phi, 2000, np.random.default_rng(5))
        means.append(np.mean([inversions_against(o, ref) for o in orders]))
    assert means[0] < means[1]


@pytest.mark.parametrize("kwargs", [dict(phi=0.0), dict(phi=1.5), dict(evaluators=0), dict(k=4)])
def test_config_validation(kwargs):
    with pytest.raises(ValidationError):
        config(3, **kwargs)


def test_unanimous_experiment_agrees_fully():
    s = method_agreement_experiment(config(6, 1e-9, k=3, seed=3), 100)
    assert s.top3_agreement == 1.0
    assert s.voting_top1_recovery == s.kemeny_top1_recovery == 1.0


def test_single_trial_summary():
    cfg = config(5, 0.5, k=3, seed=9)
    s = method_agreement_experiment(cfg, 1)
    r = run_trial(cfg, 0)
    assert s.per_trial == [r]
    assert s.top1_agreement == float(r.report.top1_match)
    assert s.top3_agreement == float(r.report.top3_exact_rank_match)
    assert s.mean_kt_between == float(r.kt_between)


def test_trials_must_be_positive():
    with pytest.raises(ValidationError):
        method_agreement_experiment(config(), 0)


def reimplemented_rates(cfg, trials):
    """Voting and brute-force Kemeny written from scratch on the same samples."""
    labels = cfg.labels.labels
    n, k = len(labels), cfg.k
    top1 = exact = 0
    for trial in range(trials):
        p = mallows_sample(cfg, trial_rng(cfg.seed, trial))
        mentions = Counter()
        slots = {lab: [0] * k for lab in labels}
        w = [[0.0] * n for _ in range(n)]
        for b in p.ballots:
            rank = {lab: b.ranked.index(lab) if lab in b.ranked else k for lab in labels}
            for pos, lab in enumerate(b.ranked):
                mentions[lab] += 1
                slots[lab][pos] += 1
            for a in range(n):
                for c in range(n):
                    if a != c:
                        ra, rc = rank[labels[a]], rank[labels[c]]
                        w[a][c] += 1.0 if ra < rc else 0.5 if ra == rc else 0.0
        voting = sorted(labels, key=lambda lab: (-mentions[lab], [-s for s in slots[lab]], labels.index(lab)))[:k]
        best = min(
            permutations(range(n)),
            key=lambda perm: sum(w[perm[j]][perm[i]] for i in range(n) for j in range(i + 1, n)),
        )
        kemeny = [labels[i] for i in best[:k]]
        top1 += voting[0] == kemeny[0]
        exact += voting == kemeny
    return top1 / trials, exact / trials


def test_experiment_matches_reimplementation_and_is_repeatable():
    cfg = MallowsConfig(Ranking(LabelSet.default(), LabelSet.default().labels), 0.3, 109, 3, seed=2024)
    a = method_agreement_experiment(cfg, 100)
    b = method_agreement_experiment(cfg, 100)
    assert a.per_trial == b.per_trial
    assert (a.top1_agreement, a.top3_agreement) == (b.top1_agreement, b.top3_agreement)
    assert (a.top1_agreement, a.top3_agreement) == reimplemented_rates(cfg, 100)
