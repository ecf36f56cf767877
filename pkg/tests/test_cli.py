import csv
import json

import pytest

from arboreal.cli import digest, dumps, main


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(path, obj):
    path.write_text(json.dumps(obj))
    return path


def test_gen_binary(tmp_path, capsys):
    code, out, _ = run(["gen", "binary", "--k", 3], capsys)
    assert code == 0
    assert len(json.loads(out)["edges"]) == 14


def test_gen_cantor_small_and_large(capsys):
    code, out, _ = run(["gen", "cantor", "--i", 2], capsys)
    data = json.loads(out)
    from arboreal.generators import sst_profile_of
    from arboreal.tree_core import WeightedRootedTree
    assert sst_profile_of(WeightedRootedTree.from_json(data)).seq == (2, 2, 1, 2, 0)
    code, out, _ = run(["gen", "cantor", "--i", 5], capsys)
    assert json.loads(out)["sst"][:5] == [2, 2, 1, 2, 2]


def test_gen_random_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["gen", "random", "--n", 50, "--seed", 7, "--out", a], capsys)
    run(["gen", "random", "--n", 50, "--seed", 7, "--out", b], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors(tmp_path, capsys):
    assert run(["gen", "binary"], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"root": "r",\n "edges": [oops]}')
    code, _, err = run(["color", bad], capsys)
    assert code == 2
    assert "line 2 column 12" in err


def test_invalid_tree_exit_1(tmp_path, capsys):
    f = write(tmp_path / "t.json", {"root": "r", "edges": [["r", "a", -1.0]]})
    assert run(["validate", f], capsys)[0] == 1


def test_color_path_goodness(tmp_path, capsys):
    f = write(tmp_path / "p.json", {"root": "a", "edges": [["a", "b", 1.0], ["b", "c", 2.0]]})
    code, out, _ = run(["color", f], capsys)
    assert code == 0
    assert json.loads(out)["quality"]["goodness"] == 1.0


def test_color_profile_and_csv(tmp_path, capsys):
    t = tmp_path / "b6.json"
    run(["gen", "binary", "--k", 6, "--out", t], capsys)
    c = tmp_path / "c.csv"
    code, out, _ = run(["color", t, "--with-profile", "--csv", c], capsys)
    rep = json.loads(out)
    assert rep["binary_profile"]["k_lower"] >= 6
    rows = list(csv.reader(c.open()))
    assert rows[0] == ["color", "length", "n_edges", "top_vertex", "bottom_vertex"]
    assert sum(float(r[1]) for r in rows[1:]) == 126.0


def test_embed_simple_on_monochromatic_path(tmp_path, capsys):
    f = write(tmp_path / "p.json", {"root": "a", "edges": [["a", "b", 1.0], ["b", "c", 2.0]]})
    code, out, _ = run(["embed", f, "--method", "simple"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["certificate"]["distortion"] == 1.0 and rep["status"] == "PASS"


def test_embed_matousek_b3(tmp_path, capsys):
    t = tmp_path / "b3.json"
    run(["gen", "binary", "--k", 3, "--out", t], capsys)
    from arboreal.coloring import singleton_coloring
    from arboreal.generators import complete_binary_tree
    col = write(tmp_path / "col.json", {"coloring": singleton_coloring(complete_binary_tree(3))})
    code, out, _ = run(["embed", t, "--coloring", col, "--method", "matousek"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "PASS"
    assert rep["certificate"]["distortion"] <= rep["bound"]["value"]


def test_embed_reasonable_needs_regular(tmp_path, capsys):
    f = write(tmp_path / "t.json", {"root": "a", "edges": [["a", "b", 1.0], ["b", "c", 5.0], ["b", "d", 1.0]]})
    code, _, err = run(["embed", f, "--method", "reasonable"], capsys)
    assert code == 1 and "regular" in err
    assert run(["embed", f, "--method", "reasonable", "--regularize"], capsys)[0] == 0


def test_certify_roundtrip(tmp_path, capsys):
    t = tmp_path / "t.json"
    run(["gen", "random", "--n", 12, "--seed", 1, "--out", t], capsys)
    e = tmp_path / "e.json"
    run(["embed", t, "--out", e], capsys)
    code, out, _ = run(["certify", t, e, "--max-distortion", 100], capsys)
    assert code == 0
    assert json.loads(out)["certificate"] == json.loads(e.read_text())["certificate"]
    assert run(["certify", t, e, "--max-distortion", 1.0], capsys)[0] == 1


def test_markov_b16_exact(tmp_path, capsys):
    t = tmp_path / "b16.json"
    run(["gen", "sst", "--seq", ",".join(["2"] * 16 + ["0"]), "--out", t], capsys)
    code, out, _ = run(["markov", "--chain", "downward", "--tree", t, "--p", 2, "--m", 4, "--exact",
                        "--min-ratio", 4], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "PASS" and rep["estimate"]["ratio"] >= 4


def test_markov_lamplighter_reproducible(tmp_path, capsys):
    args = ["markov", "--chain", "lamplighter", "--N", 32, "--p", 2, "--m", 4, "--samples", 40, "--seed", 1]
    a = run(args, capsys)[1]
    assert a == run(args, capsys)[1]


def test_markov_constant_degenerate(capsys):
    code, out, _ = run(["markov", "--chain", "constant", "--m", 2], capsys)
    assert code == 0 and json.loads(out)["estimate"]["degenerate"]


def test_markov_size_guard(tmp_path, capsys):
    t = tmp_path / "r.json"
    run(["gen", "random", "--n", 4100, "--seed", 0, "--out", t], capsys)
    assert run(["markov", "--chain", "downward", "--tree", t, "--m", 2, "--exact"], capsys)[0] == 1


def test_prototype_commands(tmp_path, capsys):
    c5 = tmp_path / "c5.json"
    run(["gen", "cantor", "--i", 5, "--out", c5], capsys)
    code, out, _ = run(["prototype", "verify", c5, "--eps", 0.5, "--delta", 0.315, "--R", 1], capsys)
    assert code == 0 and json.loads(out)["status"] == "witness"
    p = write(tmp_path / "p.json", {"root": "a", "edges": [["a", "b", 1.0], ["b", "c", 1.0]]})
    code, out, _ = run(["prototype", "verify", p, "--eps", 0.5, "--delta", 0.2], capsys)
    assert code == 1 and json.loads(out)["status"] == "failure"
    code, out, _ = run(["prototype", "extract", "fixture:comb_09", "--delta", 0.01, "--budget", 50], capsys)
    assert code == 3 and json.loads(out)["status"] == "inconclusive"
    code, out, _ = run(["prototype", "extract", "fixture:binary_caterpillar_cantor_gaps", "--delta", 0.3,
                        "--eps0", 0.125, "--delta-exp", 0.25, "--net-factor", 4], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "witness" and rep["revalidated"]


def test_speed_and_threads(capsys, monkeypatch):
    args = ["speed", "--chain", "cycle", "--N", 16, "--steps", 20, "--samples", 10, "--seed", 2]
    a = run(args, capsys)[1]
    assert run(["--threads", 4] + args, capsys)[1] == a
    monkeypatch.setenv("ARBOREAL_THREADS", "3")
    assert run(args, capsys)[1] == a
    monkeypatch.setenv("ARBOREAL_THREADS", "zero")
    assert run(args, capsys)[0] == 2


def test_manifest_rerun(tmp_path, capsys):
    t = tmp_path / "t.json"
    run(["gen", "random", "--n", 20, "--seed", 3, "--out", t], capsys)
    m = tmp_path / "m.json"
    run(["color", t, "--out", tmp_path / "r.json", "--manifest", m], capsys)
    man = json.loads(m.read_text())
    assert man["outputs"]["report"] == digest(json.loads((tmp_path / "r.json").read_text()))
    assert man["inputs"][str(t)] == digest(json.loads(t.read_text()))
    code, out, _ = run(["report", "--rerun", m], capsys)
    assert code == 0 and json.loads(out)["reproduced"]
    # editing the input breaks reproduction
    data = json.loads(t.read_text())
    data["edges"][0][2] = 5.0
    t.write_text(json.dumps(data))
    assert run(["report", "--rerun", m], capsys)[0] == 1


def test_report_table(tmp_path, capsys):
    r = write(tmp_path / "r.json", {"status": "PASS", "x": 1})
    c = tmp_path / "t.csv"
    code, out, _ = run(["report", r, "--csv", c], capsys)
    assert code == 0
    assert list(csv.reader(c.open()))[1][2] == "PASS"


def test_canonical_floats():
    assert dumps({"b": 0.1, "a": [1, 2.0]}) == '{"a":[1,2.0],"b":0.10000000000000001}'
    assert dumps(float("inf")) == '"inf"'
