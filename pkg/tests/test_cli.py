import io
import json
import math
import os

import pytest

import golden_cases as gc
from epcluster.cli import _tree_from_json, main
from epcluster.patch import WeightedRaySystem

FX = gc.FIXTURES


def run(tmp_path, name):
    tmp_path.mkdir(exist_ok=True)
    out = gc.output_path(name, str(tmp_path))
    code = main(gc.argv(name, out))
    return code, gc.read_tree(out)


@pytest.mark.parametrize("name", sorted(gc.CASES))
def test_golden(tmp_path, name):
    code, got = run(tmp_path / "a", name)
    assert code == gc.CASES[name][1]
    assert got == gc.read_tree(gc.output_path(name, gc.GOLDEN))


def test_repeat_runs_identical(tmp_path):
    for name in ("cluster_points_ckb", "verify_edges"):
        assert run(tmp_path / "a", name) == run(tmp_path / "b", name)


def test_line_fixture_contents():
    with open(os.path.join(gc.GOLDEN, "cluster_line", "clusters.csv"), encoding="utf-8") as fh:
        rows = fh.read().splitlines()
    assert rows[0] == "scale,point,cluster"
    assert "1,1,0" in rows and "1,2,2" in rows and "2,2,0" in rows
    with open(os.path.join(gc.GOLDEN, "cluster_line", "merge_tree.json"), encoding="utf-8") as fh:
        tree = json.load(fh)
    assert tree["thresholds"] == [0.5, 1.0, 2.0]


def test_worked_edge_weight(tmp_path, capsys):
    path = tmp_path / "e.csv"
    path.write_text("a,b,3\nb,c,5\n", encoding="utf-8")
    assert main(["convert", str(path), "--input-kind", "edgelist", "-k", "2", "--to", "rays-json"]) == 0
    rays = json.loads(capsys.readouterr().out)["rays"]
    ac = [w for x, y, w in rays if (x, y) == (0, 2)]
    assert len(ac) == 1 and round(ac[0], 6) == round(math.exp(-3), 6) == 0.049787


class TestExitCodes:
    def test_missing_file(self, tmp_path):
        assert main(["verify", str(tmp_path / "nope.csv"), "--input-kind", "distance-csv"]) == 2

    def test_empty_input(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        assert main(["cluster", str(path), "--input-kind", "distance-csv", "--out", str(tmp_path / "o")]) == 2

    def test_bad_triangle_report(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["verify", f"{FX}/bad_triangle.csv", "--input-kind", "distance-csv", "--out", str(out)]) == 2
        assert json.loads(out.read_text())["checks"][0]["indices"] == [0, 1, 2]

    @pytest.mark.parametrize(
        "extra",
        [
            ["--strategy", "bow-r"],
            ["--strategy", "k-bounded"],
            ["--scales", "2,1"],
            ["--scales", "a,b"],
            ["--config", f"{FX}/missing.toml"],
        ],
    )
    def test_config_errors(self, tmp_path, extra):
        args = ["cluster", f"{FX}/line.csv", "--input-kind", "distance-csv", "--out", str(tmp_path)]
        assert main(args + extra) == 3

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text("colour = 'blue'\n", encoding="utf-8")
        assert main(["verify", f"{FX}/line.csv", "--input-kind", "distance-csv", "--config", str(cfg)]) == 3

    def test_sample_bound_below_k(self):
        assert main(["sample", f"{FX}/universe.json", "--input-kind", "synthetic", "-k", "5", "--max-sample", "3"]) == 3

    def test_path_cap(self, tmp_path, monkeypatch):
        monkeypatch.setattr("epcluster.cli.PATH_CAP", 5)
        path = tmp_path / "dense.csv"
        path.write_text("".join(f"{a},{b},1\n" for a in "abcd" for b in "abcd" if a != b), encoding="utf-8")
        assert main(["verify", str(path), "--input-kind", "edgelist", "-k", "3"]) == 4


def test_flags_override_config(tmp_path):
    base = ["cluster", f"{FX}/line.csv", "--input-kind", "distance-csv", "--config", f"{FX}/line.toml"]
    assert main(base + ["--out", str(tmp_path / "a")]) == 0
    assert main(base + ["--scales", "5", "--out", str(tmp_path / "b")]) == 0
    report = json.loads((tmp_path / "b" / "report.json").read_text())
    assert report["scales"] == [5.0] and report["parameters"] == {"k": 2}


def test_stdin(monkeypatch, capsys):
    with open(f"{FX}/line.csv", encoding="utf-8") as fh:
        monkeypatch.setattr("sys.stdin", io.StringIO(fh.read()))
    assert main(["convert", "-", "--input-kind", "distance-csv", "--to", "space-json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["n"] == 5 and obj["dist"][0][3] == "inf"


def test_convert_round_trip(tmp_path):
    js = tmp_path / "s.json"
    back = tmp_path / "back.csv"
    assert main(["convert", f"{FX}/line.csv", "--input-kind", "distance-csv", "--to", "space-json", "--out", str(js)]) == 0
    assert main(["convert", str(js), "--input-kind", "space-json", "--to", "distance-csv", "--out", str(back)]) == 0
    with open(f"{FX}/line.csv", encoding="utf-8") as fh:
        assert back.read_text() == fh.read()


def test_convert_merge_tree_to_dot(tmp_path):
    out = tmp_path / "t.dot"
    tree = os.path.join(gc.GOLDEN, "cluster_edges", "merge_tree.json")
    assert main(["convert", tree, "--input-kind", "merge-tree-json", "--to", "dot", "--out", str(out)]) == 0
    with open(os.path.join(gc.GOLDEN, "cluster_edges", "merge_tree.dot"), encoding="utf-8") as fh:
        assert out.read_text() == fh.read()


def test_convert_fibres(capsys):
    assert main(["convert", f"{FX}/words.jsonl", "--input-kind", "corpus", "--to", "fibres-json"]) == 0
    doc = json.loads(capsys.readouterr().out)["documents"][0]
    assert doc == {"length": 3, "fibres": {"w1": [1, 3], "w2": [2]}}


def test_bad_conversion():
    assert main(["convert", f"{FX}/line.csv", "--input-kind", "distance-csv", "--to", "dot"]) == 3


def test_sample_report(capsys):
    args = ["sample", f"{FX}/universe.json", "--input-kind", "synthetic", "-k", "8", "--rounds", "4", "--seed", "2"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    report = json.loads(first)
    assert report["truth"]["members"] == list(range(8))
    radii = [r["radius"] for r in report["rounds"]]
    assert radii == sorted(radii, reverse=True)


def test_sample_cluster_summary(capsys):
    args = ["sample", f"{FX}/universe.json", "--input-kind", "synthetic", "-k", "4", "--samples", "2", "--cluster"]
    assert main(args) == 0
    summary = json.loads(capsys.readouterr().out)["clusters"]
    assert summary["excision_passed"] is True and summary["points"] <= 120


def test_outputs_round_trip(capsys):
    assert main(["convert", f"{FX}/edges.csv", "--input-kind", "edgelist", "-k", "2", "--to", "rays-json"]) == 0
    text = capsys.readouterr().out
    assert WeightedRaySystem.from_json(json.loads(text)).dumps() == text
    for name in ("cluster_line", "cluster_edges", "cluster_corpus"):
        with open(os.path.join(gc.GOLDEN, name, "merge_tree.json"), encoding="utf-8") as fh:
            text = fh.read()
        assert _tree_from_json(json.loads(text)).dumps() == text
