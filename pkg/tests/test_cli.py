import csv
import io
import json
import math
import subprocess
import sys

import pytest

from qcard import alice, bob_collective, bob_separate, cli
from qcard.engine import SimulationConfig, StrategySpec, simulate

P_ALICE = (2 + math.sqrt(3)) / 6
P_COMBINED = (3 + math.sqrt(2)) / 6


def run(capsys, *argv):
    try:
        code = cli.main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_report_json(capsys):
    code, out, _ = run(capsys, "report")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == cli.SCHEMA
    assert doc["p_alice"] == pytest.approx(P_ALICE, abs=1e-12)
    assert doc["p_bob_combined"] == pytest.approx(P_COMBINED, abs=1e-12)
    assert doc["p_sep"] == pytest.approx((11 + 3 * math.sqrt(3)) / 24, abs=1e-15)
    assert doc["dominance"] is True and doc["passed"] is True
    assert all(e["pass"] for e in doc["entries"])


def test_report_values_match_library_bit_for_bit(capsys):
    doc = json.loads(run(capsys, "report")[1])
    assert doc["p_alice"] == alice.optimize_alice(alice.AliceStrategy.FIRST).probability
    assert doc["p_sep"] == bob_separate.paper_formulas().p_sep
    assert doc["p_bob_combined"] == bob_collective.success_combined(bob_collective.optimal_coefficients())


def test_report_is_byte_identical(capsys):
    assert run(capsys, "report")[1] == run(capsys, "report")[1]


def test_report_text_and_csv(capsys):
    code, out, _ = run(capsys, "report", "--format", "text")
    assert code == 0 and "p_alice" in out
    code, out, _ = run(capsys, "report", "--format", "csv")
    assert code == 0 and "\r" not in out
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["name"] for r in rows} >= {"p_alice", "p_bob_combined"}


def test_report_breach_exits_2(capsys, monkeypatch):
    original = cli.build_report

    def broken(*a, **k):
        doc = original(*a, **k)
        doc["entries"][0]["pass"] = False
        doc["passed"] = False
        return doc

    monkeypatch.setattr(cli, "build_report", broken)
    code, _, err = run(capsys, "report")
    assert code == 2
    assert "tolerance breach" in err


def test_sweep_seven_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--from", "0", "--to", "pi/6", "--steps", "7")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 7
    probs = [r["probability"] for r in rows]
    assert all(1 / 3 - 1e-12 <= p <= P_ALICE + 1e-12 for p in probs)
    best = max(rows, key=lambda r: r["probability"])
    assert best["alpha"] == pytest.approx(math.pi / 12, abs=1e-12)


def test_sweep_accepts_negative_pi_literal(capsys):
    code, out, _ = run(capsys, "sweep", "--from", "-pi/6", "--to", "pi/6", "--steps", "3", "--strategy", "2")
    assert code == 0
    assert json.loads(out)["rows"][0]["alpha"] == pytest.approx(-math.pi / 6)


def test_sweep_csv_line_endings(capsys):
    code, out, _ = run(capsys, "sweep", "--steps", "5", "--format", "csv")
    assert code == 0
    assert "\r\n" not in out
    assert len(out.strip().split("\n")) == 6


@pytest.mark.parametrize(
    "argv",
    [
        ("sweep", "--from", "0.3", "--to", "0.1"),
        ("sweep", "--steps", "1"),
        ("sweep", "--from", "0", "--to", "1.0"),
        ("report", "--bogus"),
        ("simulate", "--trials", "0"),
        ("frobnicate",),
    ],
)
def test_usage_errors_exit_64(capsys, argv):
    assert run(capsys, *argv)[0] == 64


def test_optimize_alice(capsys):
    code, out, _ = run(capsys, "optimize", "--actor", "alice")
    doc = json.loads(out)
    assert code == 0
    assert doc["alpha"] == pytest.approx(math.pi / 12, abs=1e-6)
    assert doc["probability"] == pytest.approx(P_ALICE, abs=1e-9)


def test_optimize_collective_reproducible(capsys):
    argv = ("optimize", "--actor", "bob-collective", "--choice", "III", "--restarts", "20", "--seed", "42")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == 0 and first[1] == second[1]
    doc = json.loads(first[1])
    assert doc["probability"] >= P_COMBINED - 1e-6
    assert doc["restart_stats"]["completed"] == 20


def test_simulate_single_trial(capsys):
    code, out, _ = run(capsys, "simulate", "--trials", "1")
    doc = json.loads(out)
    assert code == 0
    assert doc["trials"] == 1 and doc["estimate"] in (0.0, 1.0)


def test_simulate_matches_library_and_z(capsys):
    code, out, _ = run(capsys, "simulate", "--actor", "bob-collective", "--trials", "100000", "--seed", "7")
    doc = json.loads(out)
    lib = simulate(StrategySpec.bob_collective(), SimulationConfig(100_000, 7))
    assert doc["estimate"] == lib.estimate
    assert abs(doc["z_score"]) < 5


def test_seed_environment_and_flag_precedence(capsys, monkeypatch):
    base = ("simulate", "--trials", "5000")
    monkeypatch.setenv("QCARD_SEED", "11")
    env_doc = json.loads(run(capsys, *base)[1])
    assert env_doc["seed"] == 11
    flag_doc = json.loads(run(capsys, *base, "--seed", "3")[1])
    assert flag_doc["seed"] == 3
    monkeypatch.setenv("QCARD_SEED", "3")
    assert json.loads(run(capsys, *base)[1]) == flag_doc


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    assert run(capsys, "report", "--out", str(path))[0] == 0
    assert json.loads(path.read_text())["passed"] is True


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qcard", "report", "--format", "text"], capture_output=True, text=True, timeout=120
    )
    assert proc.returncode == 0
    assert "p_bob_combined" in proc.stdout
