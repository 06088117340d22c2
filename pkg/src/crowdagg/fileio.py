"""
Reading and writing ballot, matrix, lexicon and report files.

Ballot files are UTF-8 CSV with the header
``evaluator_id,item_id,top_choice,rank1,rank2,rank3`` (more or fewer rank
columns are accepted as long as they are numbered from 1). Rank cells fill
left to right; trailing cells may be empty.

Matrix, lexicon and report files are JSON. Reports never carry timestamps,
write floats with 12 significant digits and exact rationals as ``"p/q"``
strings, so identical inputs give byte-identical reports.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from collections import OrderedDict
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .core import Ballot, LabelSet, Profile
from .errors import ParseError, ValidationError
from .inference import Lexicon, SimilarityMatrix

BALLOT_PREFIX = ["evaluator_id", "item_id", "top_choice"]
BALLOT_HEADER = BALLOT_PREFIX + ["rank1", "rank2", "rank3"]
SIGNIFICANT_DIGITS = 12


def digest_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def digest_file(path) -> str:
    return digest_bytes(Path(path).read_bytes())


# -- ballots -----------------------------------------------------------------


def _rank_columns(header, path):
    if header[:3] != BALLOT_PREFIX:
        raise ParseError(f"header must start with {','.join(BALLOT_PREFIX)}", row=1, path=path)
    ranks = header[3:]
    if not ranks or ranks != [f"rank{i}" for i in range(1, len(ranks) + 1)]:
        raise ParseError("header needs rank columns rank1, rank2, ... after top_choice", row=1, path=path)
    return len(ranks)


def parse_ballots_text(text: str, labels: LabelSet | None = None, path=None) -> list[Profile]:
    """Parse ballot CSV text into profiles ordered by item id."""
    labels = labels or LabelSet.default()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise ParseError("empty file", path=path)
    header = [c.strip() for c in rows[0]]
    depth = _rank_columns(header, path)
    width = 3 + depth

    by_item: dict[str, list[Ballot]] = {}
    seen = set()
    for rowno, row in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != width:
            raise ParseError(f"expected {width} cells, got {len(row)}", row=rowno, path=path)
        cells = [c.strip() for c in row]
        evaluator, item, top = cells[:3]
        if not evaluator or not item:
            raise ParseError("evaluator_id and item_id must be non-empty", row=rowno, path=path)
        rank_cells = cells[3:]
        filled = [c for c in rank_cells if c]
        if rank_cells[: len(filled)] != filled:
            raise ParseError("rank cells must fill left to right without gaps", row=rowno, path=path)
        if not filled:
            raise ParseError("rank1 is required", row=rowno, path=path)
        if (evaluator, item) in seen:
            raise ParseError(f"duplicate ballot for evaluator {evaluator!r} on item {item!r}", row=rowno, path=path)
        seen.add((evaluator, item))
        try:
            ballot = Ballot(evaluator, item, top, tuple(filled), labels)
        except ValidationError as exc:
            raise ParseError(str(exc), row=rowno, path=path) from None
        by_item.setdefault(item, []).append(ballot)

    if not by_item:
        raise ParseError("no ballots in file", path=path)
    return [Profile(item, tuple(by_item[item]), labels) for item in sorted(by_item)]


def parse_ballots(path, labels: LabelSet | None = None) -> list[Profile]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read ballot file: {exc.strerror}", path=path) from None
    return parse_ballots_text(text, labels, path=path)


def serialize_ballots(profiles: Iterable[Profile]) -> str:
    profiles = list(profiles)
    depth = max(max(b.k for b in p.ballots) for p in profiles)
    header = BALLOT_PREFIX + [f"rank{i}" for i in range(1, max(depth, 3) + 1)]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for p in profiles:
        for b in p.ballots:
            ranks = list(b.ranked) + [""] * (len(header) - 3 - b.k)
            writer.writerow([b.evaluator_id, b.item_id, b.top_choice, *ranks])
    return out.getvalue()


def write_ballots(profiles: Iterable[Profile], path) -> None:
    Path(path).write_text(serialize_ballots(profiles), encoding="utf-8")


# -- similarity matrices and lexicons ------------------------------------------


def _load_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path=path) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", row=exc.lineno, path=path) from None


def similarity_from_dict(doc: dict, path=None) -> SimilarityMatrix:
    try:
        expressed = LabelSet(tuple(doc["expressed_labels"]))
        experienced = LabelSet(tuple(doc["experienced_labels"]))
        grid = doc["grid"]
    except KeyError as exc:
        raise ParseError(f"matrix file is missing {exc.args[0]!r}", path=path) from None
    except (TypeError, ValidationError) as exc:
        raise ParseError(str(exc), path=path) from None
    if not isinstance(grid, list) or len(grid) != expressed.n:
        raise ParseError(f"grid must have {expressed.n} rows (one per expressed label)", path=path)
    for i, row in enumerate(grid):
        if not isinstance(row, list) or len(row) != experienced.n:
            raise ParseError(f"grid row {i + 1} must have {experienced.n} entries", path=path)
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row):
            raise ParseError(f"grid row {i + 1} holds a non-numeric entry", path=path)
    return SimilarityMatrix(grid, expressed, experienced)


def similarity_to_dict(s: SimilarityMatrix) -> dict:
    return {
        "expressed_labels": list(s.expressed.labels),
        "experienced_labels": list(s.experienced.labels),
        "grid": [[float(v) for v in row] for row in s.r],
    }


def read_similarity(path) -> SimilarityMatrix:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ParseError("matrix file must hold a JSON object", path=path)
    return similarity_from_dict(doc, path)


def write_similarity(s: SimilarityMatrix, path) -> None:
    Path(path).write_text(json.dumps(similarity_to_dict(s), indent=2) + "\n", encoding="utf-8")


def lexicon_from_dict(doc: dict, labels: LabelSet | None = None, path=None) -> Lexicon:
    if not isinstance(doc, dict) or not all(
        isinstance(v, list) and all(isinstance(w, str) for w in v) for v in doc.values()
    ):
        raise ParseError("lexicon must map each label to a list of words", path=path)
    if labels is None:
        labels = LabelSet(tuple(doc))
    return Lexicon(labels, {lab: frozenset(words) for lab, words in doc.items()})


def lexicon_to_dict(lex: Lexicon) -> dict:
    return {lab: sorted(lex.synsets[lab]) for lab in lex.labels if lab in lex.synsets}


def read_lexicon(path, labels: LabelSet | None = None) -> Lexicon:
    return lexicon_from_dict(_load_json(path), labels, path)


def write_lexicon(lex: Lexicon, path) -> None:
    Path(path).write_text(json.dumps(lexicon_to_dict(lex), indent=2) + "\n", encoding="utf-8")


# -- reports -------------------------------------------------------------------


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s: str) -> Fraction:
    return Fraction(s)


def _normalize(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return format_fraction(obj)
    if isinstance(obj, float):
        # "+ 0.0" folds -0.0 into 0.0
        return float(f"{obj:.{SIGNIFICANT_DIGITS}g}") + 0.0
    if isinstance(obj, dict):
        return OrderedDict((str(k), _normalize(v)) for k, v in obj.items())
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _normalize(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__} in a report")


def dumps_report(report: dict) -> str:
    return json.dumps(_normalize(report), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def loads_report(text: str) -> dict:
    return json.loads(text)


def write_report(report: dict, path) -> None:
    Path(path).write_text(dumps_report(report), encoding="utf-8")


def read_report(path) -> dict:
    doc = _load_json(path)
    if not isinstance(doc, dict) or "items" not in doc:
        raise ParseError("not a report file (missing 'items')", path=path)
    return doc
