from __future__ import annotations

import os

import pytest
from conftest import data_path

from reacheq.cli import run, write_atomic
from reacheq.game import load_game

EX1 = data_path("ex1.game")
EX0 = data_path("ex0.game")


def kv(text: str) -> dict[str, str]:
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_solve_yes_and_no(capsys):
    assert run(["solve", "--game", EX1, "--problem", "threshold", "--upper", "6,3"]) == 0
    out = kv(capsys.readouterr().out)
    assert out["answer"] == "yes" and out["profile"] == "6,3" and out["machine_states"] == "10,10"
    assert run(["solve", "--game", EX1, "--problem", "threshold", "--upper", "3,3"]) == 1
    assert kv(capsys.readouterr().out)["answer"] == "no"


def test_solve_spe_and_welfare(capsys):
    assert run(["solve", "--game", EX1, "--solution", "spe", "--problem", "threshold", "--upper", "6,3"]) == 0
    assert kv(capsys.readouterr().out)["solution"] == "spe"
    assert run(["solve", "--game", EX1, "--problem", "welfare", "--k", "2", "--c", "9"]) == 0
    assert kv(capsys.readouterr().out)["welfare"] == "2,9"
    assert run(["solve", "--game", EX1, "--problem", "pareto"]) == 1
    assert "front" in kv(capsys.readouterr().out)


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.game"
    bad.write_text("game quantitative\nplayers 1\nvertex a owner=1\ninit a\n")
    assert run(["solve", "--game", str(bad), "--problem", "threshold", "--upper", "1"]) == 2
    assert run(["solve", "--game", EX1, "--problem", "threshold", "--upper", "1,2,3"]) == 2
    assert run(["solve", "--game", str(tmp_path / "missing.game"), "--problem", "pareto"]) == 2
    assert run(["frobnicate"]) == 2
    assert run(["check", "--game", EX1, "--lasso", "v0 v2 |"]) == 2
    capsys.readouterr()


def test_size_limit_exit(capsys):
    assert run(["solve", "--game", EX1, "--solution", "spe", "--problem", "pareto", "--max-states", "2"]) == 3
    assert "limit" in capsys.readouterr().err


def test_machines_roundtrip(tmp_path, capsys):
    machines = tmp_path / "m.txt"
    assert run(["synth", "--game", EX1, "--lasso", "v0 v0_v1_1 v0_v1_2 v1 | v0 v2 v3", "--out", str(machines)]) == 0
    assert run(["verify", "--game", EX1, "--machines", str(machines)]) == 0
    assert kv(capsys.readouterr().out)["verified"] == "yes"
    assert run(["synth", "--game", EX1, "--solution", "spe", "--lasso", "v0 v0_v1_1 v0_v1_2 v1 | v0 v2 v3",
                "--out", str(machines)]) == 0
    assert run(["verify", "--game", EX1, "--solution", "spe", "--machines", str(machines)]) == 0


def test_check_kv(capsys):
    assert run(["check", "--game", EX1, "--lasso", "| v0 v2 v2_v4_1 v4"]) == 1
    out = kv(capsys.readouterr().out)
    assert out == {"consistent": "no", "position": "1", "vertex": "v2", "player": "1", "residual": "2", "bound": "1"}
    assert run(["check", "--game", EX1, "--lasso", "v0 v0_v1_1 v0_v1_2 v1 | v0 v2 v3", "--labeling", "lambda-star"]) == 0


def test_check_labeling_file(tmp_path, capsys):
    lab = tmp_path / "lab.txt"
    lab.write_text("".join(f"{n} inf\n" for n in load_game(EX1).names))
    assert run(["check", "--game", EX1, "--lasso", "| v0 v2 v2_v4_1 v4", "--labeling", str(lab)]) == 0
    lab.write_text("v0 1\n")
    assert run(["check", "--game", EX1, "--lasso", "| v0 v2 v2_v4_1 v4", "--labeling", str(lab)]) == 2
    capsys.readouterr()


def test_values_output(capsys):
    assert run(["values", "--game", EX1]) == 0
    rows = {line.split()[0]: line.split()[1:] for line in capsys.readouterr().out.splitlines()}
    assert rows["v0"] == ["2", "3"] and rows["v1"] == ["1", "inf"]
    assert run(["values", "--game", EX1, "--solution", "spe"]) == 0
    assert "v0[]" in capsys.readouterr().out
    assert run(["values", "--game", EX1, "--format", "dot"]) == 0
    assert "peripheries=2" in capsys.readouterr().out


def test_dot_outputs(tmp_path, capsys):
    dot = tmp_path / "m.dot"
    assert run(["solve", "--game", EX1, "--problem", "threshold", "--upper", "6,3", "--emit-dot", str(dot)]) == 0
    capsys.readouterr()
    text = dot.read_text()
    assert text.startswith("digraph") and "cluster" in text
    assert run(["solve", "--game", EX1, "--problem", "threshold", "--upper", "6,3", "--format", "dot"]) == 0
    assert capsys.readouterr().out.startswith("digraph")


def test_visit_all_cli(tmp_path, capsys):
    assert run(["synth", "--game", EX0, "--solution", "spe", "--visit-all"]) == 2
    q = tmp_path / "q.game"
    q.write_text(open(EX1).read().replace("game quantitative", "game qualitative"))
    assert run(["synth", "--game", str(q), "--solution", "spe", "--visit-all"]) == 0
    capsys.readouterr()


def test_gen_sat_threshold(tmp_path, capsys):
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 2 2\n1 -2 0\n2 0\n")
    out = tmp_path / "g.game"
    assert run(["gen", "sat", "--cnf", str(cnf), "--out", str(out), "--print-threshold"]) == 0
    assert kv(capsys.readouterr().out)["threshold"] == "4,4,6"
    assert load_game(str(out)).size == 10
    assert run(["solve", "--game", str(out), "--problem", "threshold", "--upper", "4,4,6"]) == 0
    capsys.readouterr()


def test_gen_qbf_and_pareto(tmp_path, capsys):
    qbf = tmp_path / "f.qdimacs"
    qbf.write_text("p cnf 2 1\ne 1 0\na 2 0\n1 2 0\n")
    assert run(["gen", "qbf", "--qbf", str(qbf), "--print-threshold"]) == 0
    assert "threshold=2,9" in capsys.readouterr().out
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 1 2\n1 0\n-1 0\n")
    assert run(["gen", "pareto-qual", "--cnf", str(cnf)]) == 0
    assert "game qualitative" in capsys.readouterr().out


def test_gen_random_deterministic(capsys):
    args = ["gen", "random", "--vertices", "5", "--players", "2", "--seed", "7"]
    assert run(args) == 0
    first = capsys.readouterr().out
    assert run(args) == 0
    assert capsys.readouterr().out == first
    assert run(["gen", "random", "--vertices", "5"]) == 2
    capsys.readouterr()


def test_write_atomic(tmp_path):
    target = tmp_path / "out.txt"
    target.write_text("old")
    write_atomic(str(target), "new\n")
    assert target.read_text() == "new\n"
    assert os.listdir(tmp_path) == ["out.txt"]
    with pytest.raises(OSError):
        write_atomic(str(tmp_path / "nope" / "x.txt"), "x")
