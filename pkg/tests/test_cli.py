import json
import subprocess
import sys
from itertools import permutations

import numpy as np
import pytest

from crowdagg import cli
from crowdagg.core import LabelSet, Ranking, total_kt_cost
from crowdagg.errors import SolverError
from crowdagg.fileio import dumps_report, parse_ballots, parse_fraction

from conftest import FIXTURES

GOLDEN = FIXTURES / "golden"
RECOVERY = FIXTURES / "recovery"
HEADER = "evaluator_id,item_id,top_choice,rank1,rank2,rank3\n"


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestAggregate:
    def test_matches_golden_bytes(self, capsys):
        code, out, _ = run(["aggregate", GOLDEN / "ballots.csv"], capsys)
        assert code == 0
        assert out == (GOLDEN / "aggregate.json").read_text(encoding="utf-8")

    def test_repeatable(self, tmp_path, capsys):
        for name in ("a.json", "b.json"):
            assert run(["aggregate", GOLDEN / "ballots.csv", "--out", tmp_path / name], capsys)[0] == 0
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_kemeny_costs_are_optimal(self, capsys):
        _, out, _ = run(["aggregate", GOLDEN / "ballots.csv"], capsys)
        report = json.loads(out)
        for p in parse_ballots(GOLDEN / "ballots.csv"):
            best = min(total_kt_cost(Ranking(p.labels, perm), p) for perm in permutations(p.labels.labels))
            kem = report["items"][p.item_id]["kemeny"]
            assert parse_fraction(kem["cost"]) == best
            assert total_kt_cost(Ranking(p.labels, kem["ranking"]), p) == best

    def test_unanimous(self, tmp_path, capsys):
        f = tmp_path / "b.csv"
        f.write_text(HEADER + "".join(f"e{i},t,Scared,Scared,Angry,Sad\n" for i in range(7)))
        _, out, _ = run(["aggregate", f], capsys)
        item = json.loads(out)["items"]["t"]
        assert item["consensus"] == item["kemeny"]["top_k"] == ["Scared", "Angry", "Sad"]
        assert item["agreement"]["top3_exact_rank_match"] is True

    def test_k_too_large_is_usage_error(self, capsys):
        code, _, err = run(["aggregate", GOLDEN / "ballots.csv", "--k", "7"], capsys)
        assert code == 1 and "--k" in err

    def test_bad_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["aggregate", str(GOLDEN / "ballots.csv"), "--mode", "borda"])
        assert exc.value.code == 1

    def test_parse_error_exit_code(self, tmp_path, capsys):
        f = tmp_path / "b.csv"
        f.write_text(HEADER + "e1,t,Joyful,Sad,,\n")
        code, out, err = run(["aggregate", f], capsys)
        assert code == 2 and out == ""
        assert "row 2" in err and "Joyful" in err

    def test_top1_mode_and_kemeny_method(self, capsys):
        _, out, _ = run(["aggregate", GOLDEN / "ballots.csv", "--mode", "top1-only", "--method", "kemeny"], capsys)
        item = json.loads(out)["items"]["t1"]
        assert item["tally"]["Sad"] == 3
        assert item["top_k"] == item["kemeny"]["top_k"]


def write_similarity(path, grid, labels=None):
    labels = labels or list(LabelSet.default().labels)
    path.write_text(json.dumps({"expressed_labels": labels, "experienced_labels": labels, "grid": grid}))


class TestInfer:
    def test_identity_similarity_sad_transcript(self, tmp_path, capsys):
        write_similarity(tmp_path / "sim.json", np.eye(6).tolist())
        (tmp_path / "t.txt").write_text("I am so sad. Sad, really.")
        code, out, _ = run(["infer", tmp_path / "t.txt", RECOVERY / "lexicon.json", tmp_path / "sim.json"], capsys)
        assert code == 0
        x = json.loads(out)["items"]["t"]["experienced"]
        assert x == {"Angry": 0.0, "Happy": 0.0, "Sad": 1.0, "Scared": 0.0, "Surprised": 0.0, "Worried": 0.0}

    def test_planted_solution_is_recovered(self, capsys):
        code, out, _ = run(
            ["infer", RECOVERY / "transcripts", RECOVERY / "lexicon.json", RECOVERY / "similarity.json"], capsys
        )
        assert code == 0
        item = json.loads(out)["items"]["planted"]
        x = np.array(list(item["experienced"].values()))
        np.testing.assert_allclose(x, [0.5, 0.25, 0.25, 0, 0, 0], atol=1e-6)
        assert item["diagnostics"]["objective"] <= 1e-12
        assert item["top_k"] == ["Angry", "Happy", "Sad"]

    def test_zero_column_names_label(self, tmp_path, capsys):
        grid = np.ones((6, 6))
        grid[:, 1] = 0
        write_similarity(tmp_path / "sim.json", grid.tolist())
        code, _, err = run(["infer", RECOVERY / "transcripts", RECOVERY / "lexicon.json", tmp_path / "sim.json"], capsys)
        assert code == 2 and "Happy" in err

    def test_no_signal(self, tmp_path, capsys):
        (tmp_path / "t.txt").write_text("a calm and pleasant day")
        args = ["infer", tmp_path / "t.txt", RECOVERY / "lexicon.json", RECOVERY / "similarity.json"]
        code, _, err = run(args, capsys)
        assert code == 2 and "--alpha" in err
        code, out, _ = run(args + ["--alpha", "1"], capsys)
        assert code == 0
        assert list(json.loads(out)["items"]["t"]["expressed"].values()) == pytest.approx([1 / 6] * 6)

    def test_solver_failure_exit_code(self, monkeypatch, capsys):
        def boom(*a, **k):
            raise SolverError("did not settle")

        monkeypatch.setattr(cli, "solve_experienced", boom)
        code, _, err = run(
            ["infer", RECOVERY / "transcripts", RECOVERY / "lexicon.json", RECOVERY / "similarity.json"], capsys
        )
        assert code == 3 and "did not settle" in err

    def test_usage_errors(self, capsys):
        base = ["infer", RECOVERY / "transcripts", RECOVERY / "lexicon.json", RECOVERY / "similarity.json"]
        assert run(base + ["--alpha", "-1"], capsys)[0] == 1
        assert run(base + ["--tol", "0"], capsys)[0] == 1
        assert run(base + ["--k", "9"], capsys)[0] == 1


def fake_report(tmp_path, name, tops):
    doc = {
        "tool": "crowdagg",
        "command": "fake",
        "labels": list("abcdef"),
        "items": {item: {"top_k": top} for item, top in tops.items()},
    }
    path = tmp_path / name
    path.write_text(dumps_report(doc))
    return path


class TestCompare:
    def test_self_comparison(self, capsys):
        code, out, _ = run(["compare", GOLDEN / "aggregate.json", GOLDEN / "aggregate.json"], capsys)
        assert code == 0
        assert set(json.loads(out)["rates"].values()) == {1.0}

    def test_three_of_four(self, tmp_path, capsys):
        a = fake_report(tmp_path, "a.json", {"1": list("abc"), "2": list("bca"), "3": list("cab"), "4": list("def")})
        b = fake_report(tmp_path, "b.json", {"1": list("abc"), "2": list("bac"), "3": list("cfe"), "4": list("edf")})
        code, out, _ = run(["compare", a, b, "--predicate", "top1", "--predicate", "exact"], capsys)
        assert code == 0
        assert json.loads(out)["rates"] == {"top1": 0.75, "exact": 0.25}

    def test_item_mismatch(self, tmp_path, capsys):
        a = fake_report(tmp_path, "a.json", {"1": list("abc"), "2": list("abc")})
        b = fake_report(tmp_path, "b.json", {"3": list("abc")})
        code, _, err = run(["compare", a, b], capsys)
        assert code == 2
        assert "only in A: 1, 2" in err and "only in B: 3" in err

    def test_label_space_mismatch(self, tmp_path, capsys):
        a = fake_report(tmp_path, "a.json", {"1": list("abc")})
        code, _, err = run(["compare", a, GOLDEN / "aggregate.json"], capsys)
        assert code == 2 and "label" in err

    def test_bad_predicate(self, capsys):
        code, _, _ = run(["compare", GOLDEN / "aggregate.json", GOLDEN / "aggregate.json", "--predicate", "x"], capsys)
        assert code == 1


class TestSimulate:
    def test_near_zero_phi(self, capsys):
        code, out, _ = run(["simulate", "--phi", "1e-9", "--trials", "20"], capsys)
        assert code == 0
        summary = json.loads(out)["summary"]
        assert summary["top3_agreement"] == 1.0
        assert summary["voting_top1_recovery"] == summary["kemeny_top1_recovery"] == 1.0

    def test_repeatable(self, tmp_path, capsys):
        args = ["simulate", "--n", "5", "--phi", "0.5", "--trials", "10", "--seed", "7"]
        run(args + ["--out", tmp_path / "a.json"], capsys)
        run(args + ["--out", tmp_path / "b.json"], capsys)
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    @pytest.mark.parametrize(
        "flags", [["--trials", "0"], ["--phi", "0"], ["--phi", "1.5"], ["--n", "1"], ["--n", "11"], ["--evaluators", "0"]]
    )
    def test_usage_errors(self, flags, capsys):
        argv = ["simulate", "--phi", "0.5"] + flags
        assert run(argv, capsys)[0] == 1

    def test_generic_labels_beyond_six(self, capsys):
        _, out, _ = run(["simulate", "--n", "7", "--phi", "0.2", "--trials", "2", "--evaluators", "15"], capsys)
        assert json.loads(out)["labels"][-1] == "alt7"


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "crowdagg", "aggregate", str(GOLDEN / "ballots.csv")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and res.stderr == ""
    assert res.stdout == (GOLDEN / "aggregate.json").read_text(encoding="utf-8")


def test_compare_rejects_item_without_top_k(tmp_path, capsys):
    a = fake_report(tmp_path, "a.json", {"1": list("abc")})
    b = tmp_path / "b.json"
    b.write_text(json.dumps({"tool": "crowdagg", "labels": list("abcdef"), "items": {"1": {}}}))
    code, _, err = run(["compare", a, b], capsys)
    assert code == 2 and "top_k" in err
