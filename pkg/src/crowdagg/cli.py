"""
Command-line entry point.

    crowdagg aggregate BALLOTS [--mode MODE] [--k K] [--method METHOD] [--out PATH]
    crowdagg infer TRANSCRIPTS LEXICON SIMILARITY [--alpha A] [--tol T] [--k K] [--out PATH]
    crowdagg compare REPORT_A REPORT_B [--predicate P ...] [--out PATH]
    crowdagg simulate --n N --phi PHI [--evaluators V] [--trials T] [--seed S] [--out PATH]

Exit codes: 0 success, 1 usage error, 2 validation or parse error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .core import DEFAULT_DEPTH, EMOTIONS, LabelSet, Ranking
from .errors import NoSignalError, SolverError, ValidationError
from .inference import (
    DEFAULT_TOL,
    expressed_probs,
    experienced_top_k,
    likelihood_from_similarity,
    solve_experienced,
    support_size,
)
from .fileio import digest_file, dumps_report, parse_ballots, read_lexicon, read_report, read_similarity
from .kemeny import kemeny_branch_bound
from .noise import DEFAULT_EVALUATORS, MallowsConfig, method_agreement_experiment
from .tournament import build_tournament
from .voting import ALL_MENTIONS, MODES, agreement_rate, compare_rankings, consensus_ranking, resolve_predicate, tally

TOOL = "crowdagg"
EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2, 3
DEFAULT_PREDICATES = ("top1", "exact", "overlap>=2")
MAX_SIM_LABELS = 10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _header(command: str) -> dict:
    return {"tool": TOOL, "version": __version__, "command": command}


def _parse_labels(text: str | None) -> LabelSet:
    if not text:
        return LabelSet.default()
    try:
        return LabelSet(tuple(s.strip() for s in text.split(",")))
    except ValidationError as exc:
        raise UsageError(f"--labels: {exc}") from None


def _check_k(k: int, n: int, flag: str = "--k"):
    if not 1 <= k <= n:
        raise UsageError(f"{flag} must be in 1..{n}, got {k}")


def cmd_aggregate(args) -> dict:
    labels = _parse_labels(args.labels)
    _check_k(args.k, labels.n)
    profiles = parse_ballots(args.ballots, labels)
    items = {}
    for p in profiles:
        votes = tally(p, args.mode)
        consensus = consensus_ranking(votes, args.k)
        tournament = build_tournament(p)
        sol = kemeny_branch_bound(tournament)
        kem = sol.top(args.k)
        agreement = compare_rankings(consensus, kem)
        items[p.item_id] = {
            "ballots": len(p),
            "tally": votes.counts,
            "consensus": consensus,
            "kemeny": {
                "ranking": list(sol.ranking.order),
                "top_k": kem,
                "cost": sol.cost,
                "optimal": sol.optimal,
                "nodes_explored": sol.nodes_explored,
                "tournament": [list(row) for row in tournament.w],
            },
            "agreement": vars(agreement),
            "top_k": consensus if args.method == "consensus" else kem,
        }
    return {
        **_header("aggregate"),
        "inputs": {"ballots": digest_file(args.ballots)},
        "params": {"mode": args.mode, "k": args.k, "method": args.method},
        "labels": list(labels.labels),
        "items": items,
    }


def _transcripts(path: Path) -> dict[str, Path]:
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix == ".txt" and p.is_file())
        if not files:
            raise ValidationError(f"{path}: no .txt transcripts found")
    elif path.is_file():
        files = [path]
    else:
        raise ValidationError(f"{path}: no such file or directory")
    out = {}
    for f in files:
        out[f.stem] = f
    return out


def cmd_infer(args) -> dict:
    if args.alpha < 0:
        raise UsageError("--alpha must be nonnegative")
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    sim = read_similarity(args.similarity)
    _check_k(args.k, sim.experienced.n)
    lex = read_lexicon(args.lexicon, sim.expressed)
    L = likelihood_from_similarity(sim)
    transcripts = _transcripts(Path(args.transcripts))
    items = {}
    for item_id, f in transcripts.items():
        try:
            t = expressed_probs(f.read_text(encoding="utf-8"), lex, args.alpha)
        except NoSignalError:
            raise NoSignalError(f"{f}: no lexicon words found; rerun with --alpha > 0 to smooth counts") from None
        except ValidationError as exc:
            raise ValidationError(f"{f}: {exc}") from None
        try:
            x, diag = solve_experienced(L, t, args.tol)
        except SolverError as exc:
            raise SolverError(f"{f}: {exc}", exc.diagnostics) from None
        items[item_id] = {
            "expressed": t.as_dict(),
            "experienced": x.as_dict(),
            "top_k": experienced_top_k(x, args.k),
            "support_size": support_size(x),
            "diagnostics": diag.summary(),
        }
    return {
        **_header("infer"),
        "inputs": {
            "transcripts": {item: digest_file(f) for item, f in transcripts.items()},
            "lexicon": digest_file(args.lexicon),
            "similarity": digest_file(args.similarity),
        },
        "params": {"alpha": float(args.alpha), "tol": float(args.tol), "k": args.k},
        "expressed_labels": list(sim.expressed.labels),
        "labels": list(sim.experienced.labels),
        "likelihood": L.L,
        "items": items,
    }


def _report_labels(doc: dict, path) -> frozenset[str]:
    labels = doc.get("labels")
    if not isinstance(labels, list):
        raise ValidationError(f"{path}: report has no label list")
    return frozenset(str(lab).casefold() for lab in labels)


def _top_k(doc: dict, item: str, path) -> list[str]:
    entry = doc["items"][item]
    top = entry.get("top_k") if isinstance(entry, dict) else None
    if not isinstance(top, list) or not top or not all(isinstance(s, str) for s in top):
        raise ValidationError(f"{path}: item {item!r} has no top_k list")
    return [s.casefold() for s in top]


def cmd_compare(args) -> dict:
    predicates = args.predicate or list(DEFAULT_PREDICATES)
    for p in predicates:
        try:
            resolve_predicate(p)
        except ValidationError as exc:
            raise UsageError(f"--predicate: {exc}") from None
    a, b = read_report(args.report_a), read_report(args.report_b)
    for doc, path in ((a, args.report_a), (b, args.report_b)):
        if doc.get("tool") != TOOL:
            raise ValidationError(f"{path}: not a {TOOL} report")
    if _report_labels(a, args.report_a) != _report_labels(b, args.report_b):
        raise ValidationError("reports rank different label spaces; refusing to compare")

    ids_a, ids_b = set(a["items"]), set(b["items"])
    if ids_a != ids_b:
        only_a = ", ".join(sorted(ids_a - ids_b)) or "-"
        only_b = ", ".join(sorted(ids_b - ids_a)) or "-"
        raise ValidationError(f"item ids differ; only in A: {only_a}; only in B: {only_b}")

    per_item = {}
    reports = []
    for item in sorted(ids_a):
        top_a = _top_k(a, item, args.report_a)
        top_b = _top_k(b, item, args.report_b)
        rep = compare_rankings(top_a, top_b)
        reports.append(rep)
        per_item[item] = {"a": a["items"][item]["top_k"], "b": b["items"][item]["top_k"], **vars(rep)}
    return {
        **_header("compare"),
        "inputs": {"a": digest_file(args.report_a), "b": digest_file(args.report_b)},
        "sources": {
            "a": {"command": a.get("command"), "inputs": a.get("inputs")},
            "b": {"command": b.get("command"), "inputs": b.get("inputs")},
        },
        "n_items": len(reports),
        "rates": {p: agreement_rate(reports, p) for p in predicates},
        "items": per_item,
    }


def simulation_labels(n: int) -> LabelSet:
    if n <= len(EMOTIONS):
        return LabelSet(EMOTIONS[:n])
    return LabelSet(tuple(f"alt{i}" for i in range(1, n + 1)))


def cmd_simulate(args) -> dict:
    if not 2 <= args.n <= MAX_SIM_LABELS:
        raise UsageError(f"--n must be in 2..{MAX_SIM_LABELS}, got {args.n}")
    if not 0 < args.phi <= 1:
        raise UsageError(f"--phi must be in (0, 1], got {args.phi}")
    if args.evaluators < 1:
        raise UsageError("--evaluators must be at least 1")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    _check_k(args.k, args.n)
    labels = simulation_labels(args.n)
    cfg = MallowsConfig(Ranking(labels, labels.labels), args.phi, args.evaluators, args.k, args.seed)
    s = method_agreement_experiment(cfg, args.trials, args.mode)
    return {
        **_header("simulate"),
        "params": {
            "n": args.n,
            "phi": args.phi,
            "evaluators": args.evaluators,
            "trials": args.trials,
            "seed": args.seed,
            "k": args.k,
            "mode": args.mode,
        },
        "labels": list(labels.labels),
        "reference": list(cfg.reference.order),
        "summary": {
            "top1_agreement": s.top1_agreement,
            "top3_agreement": s.top3_agreement,
            "mean_overlap": s.mean_overlap,
            "mean_kt_between": s.mean_kt_between,
            "voting_top1_recovery": s.voting_top1_recovery,
            "kemeny_top1_recovery": s.kemeny_top1_recovery,
        },
        "items": {
            f"trial{i:04d}": {
                "voting": r.voting,
                "kemeny": r.kemeny,
                "kemeny_cost": r.kemeny_cost,
                "kt_between": r.kt_between,
                "agreement": vars(r.report),
            }
            for i, r in enumerate(s.per_trial)
        },
    }


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=TOOL, description="Crowd ballot aggregation and experienced-emotion inference.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("aggregate", help="voting consensus vs Kemeny aggregation per item")
    p.add_argument("ballots")
    p.add_argument("--mode", choices=MODES, default=ALL_MENTIONS)
    p.add_argument("--k", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--labels", help="comma-separated label set (default: the six emotions)")
    p.add_argument("--method", choices=("consensus", "kemeny"), default="consensus",
                   help="which ranking fills each item's top_k field")
    p.add_argument("--out")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("infer", help="infer experienced-emotion distributions from transcripts")
    p.add_argument("transcripts", help="a .txt transcript or a directory of them")
    p.add_argument("lexicon")
    p.add_argument("similarity")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--k", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--out")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("compare", help="agreement rates between two reports")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--predicate", action="append", help="top1, exact or overlap>=m (repeatable)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="Mallows simulation of voting vs Kemeny agreement")
    p.add_argument("--n", type=int, default=len(EMOTIONS))
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--evaluators", type=int, default=DEFAULT_EVALUATORS)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--mode", choices=MODES, default=ALL_MENTIONS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{TOOL}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"{TOOL}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"{TOOL}: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    text = dumps_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
