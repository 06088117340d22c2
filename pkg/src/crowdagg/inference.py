"""
Experienced-emotion inference from expressed-emotion frequencies.

The pipeline:

1. ``expressed_probs`` turns a transcript into a distribution ``t`` over
   expressed emotions by counting lexicon hits.
2. ``likelihood_from_similarity`` normalizes each experienced-emotion column
   of a relatedness matrix into ``P(expressed | experienced)``.
3. ``forward_model`` maps experienced probabilities ``x`` to ``L @ x``.
4. ``solve_experienced`` inverts that map: it minimizes ``||L x - t||^2``
   over the probability simplex with an active-set method and reports the
   KKT multipliers that certify the result.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import LabelSet
from .errors import NoSignalError, SolverError, ValidationError

SIMPLEX_TOL = 1e-9
DEFAULT_TOL = 1e-8

_TOKEN = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Case-fold and split on runs of non-alphanumeric characters."""
    return _TOKEN.findall(text.casefold())


@dataclass(frozen=True, eq=False)
class SimplexVector:
    """Probability vector indexed by ``labels``."""

    p: np.ndarray
    labels: LabelSet

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (self.labels.n,):
            raise ValidationError(f"expected {self.labels.n} probabilities, got shape {p.shape}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValidationError("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > SIMPLEX_TOL:
            raise ValidationError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def as_dict(self) -> dict[str, float]:
        return {lab: float(v) for lab, v in zip(self.labels, self.p)}

    def __getitem__(self, label: str) -> float:
        return float(self.p[self.labels.index(label)])


@dataclass(frozen=True)
class Lexicon:
    """Synonym sets per expressed-emotion label. A word belongs to one label only."""

    labels: LabelSet
    synsets: Mapping[str, frozenset[str]]
    _word_to_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        synsets = {}
        owner = {}
        for lab, words in dict(self.synsets).items():
            lab = self.labels.canonical(lab)
            words = frozenset(w.casefold().strip() for w in words)
            if not words or "" in words:
                raise ValidationError(f"synset for {lab!r} must hold non-empty words")
            for word in words:
                if word in owner and owner[word] != lab:
                    raise ValidationError(f"word {word!r} appears in both {owner[word]!r} and {lab!r}")
                owner[word] = lab
            synsets[lab] = synsets.get(lab, frozenset()) | words
        object.__setattr__(self, "synsets", synsets)
        object.__setattr__(self, "_word_to_index", {w: self.labels.index(lab) for w, lab in owner.items()})

    def label_of(self, word: str) -> int | None:
        return self._word_to_index.get(word)


def expressed_probs(text: str, lex: Lexicon, smoothing_alpha: float = 0.0) -> SimplexVector:
    """Normalized lexicon hit counts, each count shifted by ``smoothing_alpha``."""
    if smoothing_alpha < 0:
        raise ValidationError("smoothing_alpha must be nonnegative")
    tokens = tokenize(text)
    if not tokens:
        raise ValidationError("transcript has no tokens")
    counts = np.zeros(lex.labels.n)
    for word, c in Counter(tokens).items():
        i = lex.label_of(word)
        if i is not None:
            counts[i] += c
    if counts.sum() == 0 and smoothing_alpha == 0:
        raise NoSignalError("transcript contains no lexicon words; pass a positive smoothing alpha to proceed")
    counts += smoothing_alpha
    return SimplexVector(counts / counts.sum(), lex.labels)


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Relatedness scores; rows are expressed emotions, columns experienced ones."""

    r: np.ndarray
    expressed: LabelSet
    experienced: LabelSet

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        if r.shape != (self.expressed.n, self.experienced.n):
            raise ValidationError(
                f"similarity grid is {r.shape}, expected ({self.expressed.n}, {self.experienced.n})"
            )
        if not np.all(np.isfinite(r)) or np.any(r < 0):
            raise ValidationError("similarities must be finite and nonnegative")
        for i, lab in enumerate(self.experienced):
            if not np.any(r[:, i] > 0):
                raise ValidationError(f"similarity column for experienced label {lab!r} is all zero")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True, eq=False)
class LikelihoodMatrix:
    """Column-stochastic ``L[j, i] = P(expressed j | experienced i)``."""

    L: np.ndarray
    expressed: LabelSet
    experienced: LabelSet

    def __post_init__(self):
        L = np.array(self.L, dtype=float)
        if L.shape != (self.expressed.n, self.experienced.n):
            raise ValidationError(f"likelihood is {L.shape}, expected ({self.expressed.n}, {self.experienced.n})")
        if np.any(L < 0) or not np.all(np.isfinite(L)):
            raise ValidationError("likelihoods must be finite and nonnegative")
        bad = np.abs(L.sum(axis=0) - 1.0) > SIMPLEX_TOL
        if np.any(bad):
            lab = self.experienced.labels[int(np.argmax(bad))]
            raise ValidationError(f"likelihood column for {lab!r} does not sum to 1")
        L.setflags(write=False)
        object.__setattr__(self, "L", L)


def likelihood_from_similarity(s: SimilarityMatrix) -> LikelihoodMatrix:
    col = s.r.sum(axis=0)
    for i, lab in enumerate(s.experienced):
        if col[i] <= 0:
            raise ValidationError(f"similarity column for experienced label {lab!r} is all zero")
    return LikelihoodMatrix(s.r / col, s.expressed, s.experienced)


def forward_model(L: LikelihoodMatrix, x: SimplexVector) -> SimplexVector:
    """Expressed distribution implied by experienced distribution ``x``."""
    if x.labels != L.experienced:
        raise ValidationError("x is not over the experienced label space of L")
    return SimplexVector(L.L @ x.p, L.expressed)


def objective(L: np.ndarray, x: np.ndarray, t: np.ndarray) -> float:
    r = L @ x - t
    return float(r @ r)


def gradient(L: np.ndarray, x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Gradient ``2 L^T (L x - t)`` of the squared residual."""
    return 2.0 * L.T @ (L @ x - t)


@dataclass(frozen=True, eq=False)
class SolverDiagnostics:
    """KKT certificate of a simplex least-squares solve.

    Stationarity reads ``gradient + lam * 1 - mu = 0`` with ``mu >= 0`` and
    ``mu * x = 0``.
    """

    objective: float
    lam: float
    mu: np.ndarray
    stationarity_residual: float
    complementarity_residual: float
    iterations: int
    converged: bool = True

    def summary(self) -> dict:
        return {
            "objective": self.objective,
            "lambda": self.lam,
            "mu": [float(v) for v in self.mu],
            "stationarity_residual": self.stationarity_residual,
            "complementarity_residual": self.complementarity_residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _null_basis(k: int) -> np.ndarray:
    # Orthonormal basis of {y : sum(y) = 0}, shape (k, k - 1).
    _, _, vh = np.linalg.svd(np.ones((1, k)))
    return vh[1:].T


def _solve_on_support(A, b, free):
    """Min-norm minimizer of ``||A z - b||`` on ``{sum z = 1, z_i = 0 off free}``."""
    n = A.shape[1]
    idx = np.flatnonzero(free)
    k = idx.size
    z = np.zeros(n)
    z0 = np.full(k, 1.0 / k)
    if k == 1:
        z[idx] = 1.0
        return z
    N = _null_basis(k)
    As = A[:, idx]
    y, *_ = np.linalg.lstsq(As @ N, b - As @ z0, rcond=None)
    # z0 is parallel to 1 and N spans its complement, so min-norm y gives min-norm z.
    z[idx] = z0 + N @ y
    return z


def _certificate(A, b, x, free, iterations, converged=True) -> SolverDiagnostics:
    g = gradient(A, x, b)
    lam = -float(np.mean(g[free]))
    reduced = g + lam
    mu = np.where(free, 0.0, np.maximum(reduced, 0.0))
    stat = g + lam - mu
    return SolverDiagnostics(
        objective=objective(A, x, b),
        lam=lam,
        mu=mu,
        stationarity_residual=float(np.max(np.abs(stat))),
        complementarity_residual=float(np.max(np.abs(mu * x))),
        iterations=iterations,
        converged=converged,
    )


def simplex_least_squares(A, b, tol: float = DEFAULT_TOL, max_changes: int | None = None):
    """Minimize ``||A x - b||^2`` subject to ``x >= 0`` and ``sum(x) = 1``.

    Active-set method: start from the uniform point with every coordinate
    free, solve the equality-constrained problem on the free set, step back
    to feasibility when that solution leaves the orthant (dropping the
    coordinates that hit zero), and otherwise release the bound coordinate
    with the most negative multiplier (lowest index on ties).

    Returns ``(x, diagnostics)``. Raises :class:`SolverError` when the number
    of active-set changes exceeds ``max_changes`` (default ``10 n^2``).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if b.shape != (m,):
        raise ValidationError(f"rhs has shape {b.shape}, expected ({m},)")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    cap = 10 * n * n if max_changes is None else max_changes
    zero = 10 * np.finfo(float).eps

    free = np.ones(n, dtype=bool)
    x = np.full(n, 1.0 / n)
    changes = 0
    blocked = np.zeros(n, dtype=bool)

    def bump():
        nonlocal changes
        changes += 1
        if changes > cap:
            raise SolverError(
                f"active set did not settle within {cap} changes",
                _certificate(A, b, x, free, changes, converged=False),
            )

    while True:
        z = _solve_on_support(A, b, free)
        while np.any(z[free] <= zero):
            bump()
            hit = free & (z <= zero)
            fresh = hit & (x <= 0)
            if np.any(fresh):
                # A just-released coordinate that cannot grow: rebind it and
                # block it until the iterate moves.
                free &= ~fresh
                blocked |= fresh
                z = _solve_on_support(A, b, free)
                continue
            hit_idx = np.flatnonzero(hit)
            ratios = x[hit_idx] / (x[hit_idx] - z[hit_idx])
            first = int(np.argmin(ratios))
            x = x + ratios[first] * (z - x)
            stop = hit & (x <= zero)
            stop[hit_idx[first]] = True
            x[stop] = 0.0
            free &= ~stop
            x /= x.sum()
            blocked[:] = False
            z = _solve_on_support(A, b, free)
        if np.any(z != x):
            blocked[:] = False
        x = z
        g = gradient(A, x, b)
        lam = -float(np.mean(g[free]))
        reduced = g + lam
        candidates = ~free & ~blocked & (reduced < -tol)
        if not np.any(candidates):
            break
        j = int(np.flatnonzero(candidates)[np.argmin(reduced[candidates])])
        bump()
        free[j] = True

    diag = _certificate(A, b, x, free, changes)
    if diag.stationarity_residual > tol or diag.complementarity_residual > tol:
        raise SolverError(
            f"KKT residuals above tolerance (stationarity {diag.stationarity_residual:.3g}, "
            f"complementarity {diag.complementarity_residual:.3g})",
            SolverDiagnostics(**{**diag.__dict__, "converged": False}),
        )
    return x, diag


def solve_experienced(L: LikelihoodMatrix, t: SimplexVector, tol: float = DEFAULT_TOL):
    """Recover experienced probabilities from expressed ones.

    Returns ``(SimplexVector, SolverDiagnostics)``. When ``L`` is rank
    deficient the minimizer is not unique; the result is the minimum-norm
    point of the final free face, which is deterministic for a given input.
    """
    if t.labels != L.expressed:
        raise ValidationError("t is not over the expressed label space of L")
    x, diag = simplex_least_squares(L.L, t.p, tol=tol)
    x = np.clip(x, 0.0, None)
    return SimplexVector(x / x.sum(), L.experienced), diag


TIE_DECIMALS = 12


def ranked_labels(x: SimplexVector) -> list[str]:
    # Probabilities equal to 12 decimals count as tied so solver round-off
    # cannot override label order.
    p = np.round(x.p, TIE_DECIMALS)
    order = sorted(range(x.labels.n), key=lambda i: (-p[i], i))
    return [x.labels.labels[i] for i in order]


def experienced_top_k(x: SimplexVector, k: int) -> list[str]:
    """Labels by descending probability; equal probabilities keep label order."""
    if not 1 <= k <= x.labels.n:
        raise ValidationError(f"k must be in 1..{x.labels.n}, got {k}")
    return ranked_labels(x)[:k]


def support_size(x: SimplexVector, eps: float = 1e-6) -> int:
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    return int(np.sum(x.p > eps))
