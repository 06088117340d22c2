"""
Exact Kemeny aggregation (minimum feedback arc set ordering of a tournament).

Two exact solvers share one tie-break: among co-optimal rankings, the one
whose label-index sequence is lexicographically smallest wins.

``kemeny_brute_force`` enumerates all permutations and is the oracle.
``kemeny_branch_bound`` places labels position by position in index order,
bounding each prefix by its accumulated backward weight plus
``min(w[a][b], w[b][a])`` over every pair still unplaced. Because leaves are
reached in lexicographic order, pruning a subtree whose bound ties the
incumbent never discards the lexicographically first optimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .core import Ranking
from .errors import SizeLimitError, ValidationError
from .tournament import WeightedTournament, order_cost

BRUTE_FORCE_LIMIT = 10


@dataclass(frozen=True)
class KemenySolution:
    ranking: Ranking
    cost: Fraction
    optimal: bool = True
    nodes_explored: int = 0

    def top(self, k: int) -> list[str]:
        return self.ranking.top(k)


def kemeny_brute_force(t: WeightedTournament) -> KemenySolution:
    """Scan all ``n!`` orderings; refuses ``n > 10``."""
    n = t.n
    if n > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(
            f"brute force is limited to {BRUTE_FORCE_LIMIT} labels (got {n}); use kemeny_branch_bound"
        )
    w, d = t.integer_weights()
    best, best_cost, count = None, None, 0
    for perm in permutations(range(n)):
        count += 1
        c = order_cost(w, perm)
        if best_cost is None or c < best_cost:
            best, best_cost = perm, c
    return KemenySolution(Ranking.from_indices(t.labels, best), Fraction(best_cost, d), True, count)


def _greedy_order(w):
    # Net-support order; only used to seed the incumbent cost.
    n = len(w)
    net = [sum(w[a][b] - w[b][a] for b in range(n)) for a in range(n)]
    return sorted(range(n), key=lambda a: (-net[a], a))


def kemeny_branch_bound(t: WeightedTournament) -> KemenySolution:
    """Depth-first branch-and-bound; same answer as :func:`kemeny_brute_force`."""
    n = t.n
    w, d = t.integer_weights()
    pair_min = [[min(w[a][b], w[b][a]) for b in range(n)] for a in range(n)]
    full_lb = sum(pair_min[a][b] for a in range(n) for b in range(a + 1, n))

    # The greedy cost is an upper bound on the optimum, but its ordering is not
    # the lexicographic-first leaf, so ties with it must not be pruned until a
    # real leaf has been reached.
    best_cost = order_cost(w, _greedy_order(w))
    best = None
    nodes = 0
    prefix = []

    def search(remaining, acc, rest_lb):
        nonlocal best, best_cost, nodes
        nodes += 1
        if not remaining:
            if acc < best_cost or (best is None and acc == best_cost):
                best, best_cost = tuple(prefix), acc
            return
        for x in remaining:
            others = [y for y in remaining if y != x]
            step = 0
            lb_drop = 0
            for y in others:
                step += w[y][x]
                lb_drop += pair_min[x][y]
            new_acc = acc + step
            new_lb = rest_lb - lb_drop
            bound = new_acc + new_lb
            if bound > best_cost or (best is not None and bound == best_cost):
                continue
            prefix.append(x)
            search(others, new_acc, new_lb)
            prefix.pop()

    search(list(range(n)), 0, full_lb)
    return KemenySolution(Ranking.from_indices(t.labels, best), Fraction(best_cost, d), True, nodes)


def kemeny_top_k(t: WeightedTournament, k: int) -> list[str]:
    if not 1 <= k <= t.n:
        raise ValidationError(f"k must be in 1..{t.n}, got {k}")
    return kemeny_branch_bound(t).top(k)
