"""Crowd ballot aggregation (voting consensus and exact Kemeny) and
experienced-emotion inference by simplex-constrained least squares."""

__version__ = "0.1.0"

from .core import (
    EMOTIONS,
    Ballot,
    LabelSet,
    Profile,
    Ranking,
    TiedRanking,
    ballot_to_tied_ranking,
    kendall_tau,
    total_kt_cost,
)
from .errors import NoSignalError, ParseError, SizeLimitError, SolverError, ValidationError
from .fileio import parse_ballots, read_lexicon, read_similarity, write_ballots
from .inference import (
    Lexicon,
    LikelihoodMatrix,
    SimilarityMatrix,
    SimplexVector,
    SolverDiagnostics,
    experienced_top_k,
    expressed_probs,
    forward_model,
    likelihood_from_similarity,
    solve_experienced,
    support_size,
)
from .kemeny import KemenySolution, kemeny_branch_bound, kemeny_brute_force, kemeny_top_k
from .noise import MallowsConfig, mallows_sample, method_agreement_experiment
from .tournament import WeightedTournament, build_tournament, feedback_cost
from .voting import AgreementReport, VoteTally, agreement_rate, compare_rankings, consensus_ranking, tally
