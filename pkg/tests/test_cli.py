import json

import pytest

from cereduce.cli import build_parser, main
from cereduce.serialize import load_json, save_json


@pytest.fixture()
def walk_files(tmp_path):
    model = tmp_path / "walk.json"
    reduced = tmp_path / "walk.red.json"
    assert main(["zoo", "walk", "--n", "3", "--seed", "1", "-o", str(model)]) == 0
    assert main(["reduce", str(model), "-o", str(reduced)]) == 0
    return model, reduced


class TestZoo:
    def test_walk_emits_model(self, tmp_path):
        out = tmp_path / "m.json"
        assert main(["zoo", "walk", "--n", "4", "-o", str(out)]) == 0
        doc = load_json(str(out))
        assert doc["dim"] == 4 and len(doc["outcomes"]) == 4

    def test_ising_emits_split_model(self, tmp_path):
        out = tmp_path / "i.json"
        assert main(["zoo", "ising", "--n", "4", "--p", "0.5", "--delta", "0.3", "-o", str(out)]) == 0
        doc = load_json(str(out))
        assert doc["dim"] == 16 and "split" in doc
        assert doc["outcomes"] == ["-1", "0", "1"]

    def test_ising_too_short_exit2(self, tmp_path):
        code = main(["zoo", "ising", "--n", "3", "--p", "0.0", "--delta", "0.3", "-o", str(tmp_path / "x.json")])
        assert code == 2

    def test_hadamard_requires_n2(self, tmp_path):
        code = main(["zoo", "walk", "--n", "3", "--hadamard", "-o", str(tmp_path / "x.json")])
        assert code == 2


class TestReduce:
    def test_reduced_file_has_provenance(self, walk_files):
        _, reduced = walk_files
        doc = load_json(str(reduced))
        assert doc["reduction"]["reduced_operator_dim"] == 3
        assert "R" in doc["reduction"] and "U" in doc["reduction"]

    def test_json_report(self, tmp_path, capsys):
        model = tmp_path / "m.json"
        main(["zoo", "walk", "--n", "3", "-o", str(model)])
        capsys.readouterr()
        assert main(["reduce", str(model), "--report", "json", "-o", str(tmp_path / "r.json")]) == 0
        out = capsys.readouterr().out
        report = json.loads(out[: out.rindex("}") + 1])
        assert report["reduced_operator_dim"] == 3
        assert report["assumptions"]["a3"]["holds"]

    def test_missing_file_exit2(self, tmp_path):
        assert main(["reduce", str(tmp_path / "absent.json")]) == 2

    def test_malformed_json_exit2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["reduce", str(bad)]) == 2

    def test_invalid_model_exit2(self, tmp_path, walk_files):
        model, _ = walk_files
        doc = load_json(str(model))
        # break normalization by dropping an outcome's map
        doc["outcomes"] = doc["outcomes"][:-1]
        bad = tmp_path / "unnormalized.json"
        save_json(doc, str(bad))
        assert main(["reduce", str(bad)]) == 2


class TestVerify:
    def test_pass(self, walk_files):
        model, reduced = walk_files
        assert main(["verify", str(model), str(reduced), "--max-len", "3", "--n-states", "5"]) == 0

    def test_pass_with_tv(self, walk_files):
        model, reduced = walk_files
        assert main(["verify", str(model), str(reduced), "--tv", "3"]) == 0

    def test_tampered_reduced_exit1(self, tmp_path, walk_files):
        model, reduced = walk_files
        doc = load_json(str(reduced))
        k = doc["outcomes"][0]
        for K in doc["instrument"][k]["kraus"]:
            K[0][0][0] += 0.05
        bad = tmp_path / "tampered.json"
        save_json(doc, str(bad))
        assert main(["verify", str(model), str(bad), "--max-len", "2", "--n-states", "3"]) == 1

    def test_full_model_without_reduction_exit2(self, walk_files):
        model, _ = walk_files
        assert main(["verify", str(model), str(model)]) == 2


class TestSimulate:
    def test_jsonl_records(self, tmp_path, walk_files):
        model, _ = walk_files
        out = tmp_path / "traj.jsonl"
        code = main(["simulate", str(model), "--steps", "4", "--samples", "20", "-o", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 20
        rec = json.loads(lines[0])
        assert len(rec["outcomes"]) == 4 and len(rec["probabilities"]) == 4

    def test_reduced_model_is_simulatable(self, tmp_path, walk_files):
        _, reduced = walk_files
        out = tmp_path / "rt.jsonl"
        assert main(["simulate", str(reduced), "--steps", "3", "--samples", "5", "-o", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 5

    def test_seed_reproducible(self, tmp_path, walk_files):
        model, _ = walk_files
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        main(["simulate", str(model), "--steps", "3", "--samples", "10", "--seed", "5", "-o", str(a)])
        main(["simulate", str(model), "--steps", "3", "--samples", "10", "--seed", "5", "-o", str(b)])
        assert a.read_text() == b.read_text()


def test_tol_env_var(monkeypatch):
    monkeypatch.setenv("CEREDUCE_TOL", "1e-5")
    args = build_parser().parse_args(["reduce", "whatever.json"])
    assert args.tol == 1e-5
