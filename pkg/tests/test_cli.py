import csv
import io
import json
import subprocess
import sys

import pytest

from rscc.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text: str):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    return meta, list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


# -- documented examples -------------------------------------------------------------------

def test_kernel_example(capsys):
    code, out, _ = call(capsys, "kernel", "--scenario", "jump-annulus", "--state", "2", "--depth", "2")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "EmptyAtDepth(2)"
    assert doc["scenario"] == "jump-annulus" and doc["seed"] == 0 and doc["params"]["depth"] == 2


def test_julia_radial_example(capsys):
    code, out, _ = call(capsys, "julia-radial", "--scenario", "jump-annulus")
    meta, rows = table(out)
    two = [r for r in rows if r["class"] == "Two"]
    assert code == 0 and meta["scenario"] == "jump-annulus"
    assert len(two) == 1 and float(two[0]["r_lo"]) == 1.0 and float(two[0]["r_hi"]) == 2.0


def test_simulate_example(capsys):
    code, out, _ = call(capsys, "simulate", "--scenario", "jump-annulus", "--state", "0", "--steps", "5",
                        "--seed", "7")
    meta, rows = table(out)
    assert code == 0 and meta["seed"] == 7
    assert [r["index"] for r in rows[1:]] == ["x1"] * 5


# -- exit codes ----------------------------------------------------------------------------------

@pytest.mark.parametrize("argv", [["frobnicate"], ["kernel", "--state", "7"], ["kernel", "--depth", "0"],
                                  ["simulate", "--scenario", "no-such-scenario"],
                                  ["operator", "--phi", "wiggle"], ["julia-grid", "--window", "1,0,0,1"],
                                  ["jump", "--drive", "forced:x9"]])
def test_invalid_arguments_exit_2(capsys, argv):
    code, out, err = call(capsys, *argv)
    assert code == 2 and out == "" and err


def test_resource_cap_exit_3(capsys):
    code, _, err = call(capsys, "words", "--state", "1", "--depth", "30")
    assert code == 3 and err


def test_main_process_exit_code():
    proc = subprocess.run([sys.executable, "-m", "rscc.cli", "kernel", "--state", "7"], capture_output=True)
    assert proc.returncode == 2 and proc.stderr


# -- verbs ---------------------------------------------------------------------------------------

def test_words(capsys):
    code, out, _ = call(capsys, "words", "--state", "1", "--depth", "2")
    lines = out.splitlines()[1:]
    probs = {ln.split("\t")[0]: float(ln.split("\t")[1]) for ln in lines}
    assert code == 0 and set(probs) == {"x1 x1", "x1 x2", "x2 x2"}
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-12)


def test_grid_and_render_round_trip(capsys, tmp_path):
    grid = tmp_path / "g.json"
    code, _, _ = call(capsys, "julia-grid", "--state", "2", "--res", "32", "--depth", "12", "--samples", "8",
                      "--out", str(grid))
    assert code == 0
    doc = json.loads(grid.read_text())
    assert doc["scenario"] == "jump-annulus"
    ppm = tmp_path / "g.ppm"
    assert call(capsys, "render", "--grid", str(grid), "--out", str(ppm))[0] == 0
    data = ppm.read_bytes()
    assert data.startswith(b"P6\n# ") and len(data) > 3 * 32 * 32
    direct = tmp_path / "d.ppm"
    assert call(capsys, "julia-grid", "--state", "2", "--res", "32", "--depth", "12", "--samples", "8",
                "--out", str(direct))[0] == 0
    body = lambda b: b[b.index(b"\n32 32\n"):]  # noqa: E731
    assert body(direct.read_bytes()) == body(data)


def test_path_grid(capsys, tmp_path):
    out = tmp_path / "p.ppm"
    code, _, _ = call(capsys, "julia-grid", "--state", "2", "--res", "32", "--path-stream", "3", "--out", str(out))
    assert code == 0 and out.read_bytes().startswith(b"P6\n")


@pytest.mark.parametrize("mode", ["iterate", "oracle", "mc", "diagnostic"])
def test_operator_modes(capsys, mode):
    code, out, _ = call(capsys, "operator", "--mode", mode, "--state", "1", "--steps", "3", "--samples", "500",
                        "--radii", "0.1,0.01")
    meta, rows = table(out)
    assert code == 0 and meta["params"]["mode"] == mode and rows


def test_operator_iterate_matches_oracle(capsys):
    _, a, _ = call(capsys, "operator", "--mode", "iterate", "--state", "1/2", "--steps", "4")
    _, b, _ = call(capsys, "operator", "--mode", "oracle", "--state", "1/2", "--steps", "4")
    va = [float(r["value"]) for r in table(a)[1]]
    vb = [float(r["value"]) for r in table(b)[1]]
    assert va == pytest.approx(vb, abs=1e-12)


def test_jump_verbs(capsys):
    code, out, _ = call(capsys, "jump", "--state", "1", "--drive", "forced:x1", "--steps", "20")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "JumpDetected" and doc["limit_state"] == "0"
    code, out, _ = call(capsys, "jump", "--scenario", "reinforcement-trunc", "--alpha", "1/2", "--eps", "1/100",
                        "--state", "1/2", "--drive", "forced:1", "--steps", "50")
    assert code == 0 and json.loads(out)["verdict"] == "NoJumpWithinHorizon"


def test_irreducible(capsys):
    code, out, _ = call(capsys, "irreducible", "--scenario", "gdms-demo", "--states", "1,2", "--depth", "3")
    assert code == 0 and json.loads(out)["irreducible"] is True
    code, out, _ = call(capsys, "irreducible", "--states", "1,1/2,2,0")
    doc = json.loads(out)
    assert code == 0 and doc["irreducible"] is False and doc["witness"] == {"from": "2", "target": "0"}
    assert call(capsys, "irreducible", "--states", "1,1/2,2,0", "--strict")[0] == 2


def test_fattening(capsys):
    code, out, _ = call(capsys, "fattening", "--steps", "12", "--eps", "0.1")
    meta, rows = table(out)
    assert code == 0 and len(rows) == 13
    assert all(r["dist_unfattened"] == "inf" for r in rows)


def test_output_file_and_repeatability(capsys, tmp_path):
    argv = ["simulate", "--state", "1", "--steps", "30", "--seed", "3"]
    outs = []
    for k in range(2):
        p = tmp_path / f"s{k}.csv"
        assert call(capsys, *argv, "--out", str(p))[0] == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1] and b"\r\n" in outs[0]
    assert call(capsys, *argv)[1] == call(capsys, *argv)[1]


def test_different_seed_changes_sample(capsys):
    a = call(capsys, "simulate", "--state", "1", "--steps", "40", "--seed", "1")[1]
    b = call(capsys, "simulate", "--state", "1", "--steps", "40", "--seed", "2")[1]
    assert a != b
