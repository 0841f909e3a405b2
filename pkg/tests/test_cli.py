import json
import math
import subprocess
import sys

import pytest

from vdicke.cli import run
from vdicke.scan import CSV_COLUMNS


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_critical_point_json(capsys):
    code = run(["critical", "--omega31", "1.7", "--g1", "0.75", "--g2", "0.6"])
    assert code == 0
    payload = _json_out(capsys)
    assert payload["g_c1"] == pytest.approx(0.6519202405202649, abs=1e-9)
    assert payload["g_c2"] == pytest.approx(0.5, abs=1e-12)
    assert payload["mu_left"] == pytest.approx(0.7555555555555555, abs=1e-9)
    assert payload["gtilde_c2"] is not None
    assert payload["params"]["omega31"] == 1.7


def test_critical_below_threshold_reports_null(capsys):
    assert run(["critical", "--g1", "0.1"]) == 0
    payload = _json_out(capsys)
    assert payload["gtilde_c2"] is None     # no left condensate yet
    assert payload["mu_right"] is None      # g2 = 0


def test_meanfield_selected_and_branches(capsys):
    assert run(["meanfield", "--g1", "1.0"]) == 0
    payload = _json_out(capsys)
    assert payload["selected"]["phase"] == "LeftSR"
    assert payload["selected"]["energy"] == pytest.approx(-0.5625, abs=1e-9)
    phases = [b["phase"] for b in payload["branches"]]
    assert "Normal" in phases
    assert phases.count("LeftSR") == 2


def test_spectrum_blocks(capsys):
    assert run(["spectrum", "--omega31", "1.7", "--g1", "1.303840481040530",
                "--g2", "0.4"]) == 0
    payload = _json_out(capsys)
    assert payload["normal_left"]["stable"] is False  # g1 beyond bare threshold
    right = payload["right_branch_renormalized"]
    assert right is not None
    assert right["freq2"] == pytest.approx(3.55, abs=1e-6)
    assert payload["left_branch_renormalized"] is None  # g2 below g_c2 = 0.5


def test_phase_diagram_csv(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    code = run(["phase-diagram", "--g1-min", "0", "--g1-max", "1",
                "--g2-min", "0", "--g2-max", "1", "--n1", "4", "--n2", "4",
                "--output", str(out)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 17
    assert capsys.readouterr().out == ""   # went to the file, not stdout


def test_phase_diagram_rejects_bad_grid(capsys):
    code = run(["phase-diagram", "--g1-min", "1", "--g1-max", "0",
                "--g2-min", "0", "--g2-max", "1"])
    assert code == 2
    assert "configuration error" in capsys.readouterr().err


def test_boundary_csv(capsys):
    code = run(["boundary", "--which", "gtilde_c2", "--omega31", "1.7",
                "--from", "0.66", "--to", "1.0", "--steps", "4"])
    assert code == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "abscissa,boundary"
    assert len(lines) == 5
    first = [float(tok) for tok in lines[1].split(",")]
    assert first[0] == 0.66


def test_boundary_unknown_kind_exits_2():
    assert run(["boundary", "--which", "bogus", "--from", "0.7",
                "--to", "1.0"]) == 2


def test_line_cut_csv(capsys):
    code = run(["line-cut", "--g2", "0.75", "--g1-min", "0.5",
                "--g1-max", "1.0", "--steps", "5"])
    assert code == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert len(lines) == 6
    phases = [line.split(",")[2] for line in lines[1:]]
    assert phases[0] == "RightSR"
    assert phases[-1] == "LeftSR"


def test_overlap_area_csv(capsys):
    code = run(["overlap-area", "--ratios", "1.0,1.4", "--resolution", "25"])
    assert code == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "ratio,area"
    assert lines[1].startswith("1,0")      # exactly zero at ratio 1
    ratio, area = lines[2].split(",")
    assert float(ratio) == 1.4
    assert float(area) > 0.0


def test_overlap_area_bad_ratio_exits_2():
    assert run(["overlap-area", "--ratios", "0.5"]) == 2
    assert run(["overlap-area", "--ratios", "abc"]) == 2


def test_ed_point_json(capsys):
    code = run(["ed", "--N", "2", "--g1", "0.8", "--g2", "0.3",
                "--omega31", "1.7", "--cutoff-a", "10", "--cutoff-b", "8"])
    assert code == 0
    payload = _json_out(capsys)
    assert payload["n_atoms"] == 2
    assert payload["cutoff_a"] == 10
    assert payload["dimension"] == 6 * 11 * 9
    assert payload["energy"] < 0.0
    assert abs(payload["parity_g"]) == pytest.approx(1.0, abs=1e-8)
    assert payload["convergence_trace"] == []  # explicit cutoffs skip it


def test_ed_point_with_convergence_trace(capsys):
    code = run(["ed", "--N", "2", "--g1", "0.4", "--g2", "0.2"])
    assert code == 0
    payload = _json_out(capsys)
    assert len(payload["convergence_trace"]) >= 2
    assert payload["convergence_trace"][0]["cutoff_a"] >= 8


def test_ed_sweep_csv(capsys):
    code = run(["ed", "--N", "2", "--g2", "0.2", "--g1-min", "0.3",
                "--g1-max", "0.9", "--steps", "3"])
    assert code == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0].endswith("photon_a,photon_b,n_atoms,cutoff_a,cutoff_b")
    assert len(lines) == 4


def test_ed_requires_atom_count(capsys):
    assert run(["ed", "--g1", "0.5"]) == 2
    assert "requires --N" in capsys.readouterr().err


def test_ed_partial_sweep_flags_exit_2():
    assert run(["ed", "--N", "2", "--g1-min", "0.3", "--steps", "3"]) == 2


def test_ed_capacity_exhaustion_exits_3(capsys):
    code = run(["ed", "--N", "40", "--g1", "0.7", "--cutoff-a", "400",
                "--cutoff-b", "400"])
    assert code == 3
    assert "did not converge" in capsys.readouterr().err


def test_parity_check_json(capsys):
    code = run(["parity-check", "--N", "3", "--g1", "0.9", "--g2", "0.7",
                "--cutoff-a", "5", "--cutoff-b", "5"])
    assert code == 0
    payload = _json_out(capsys)
    assert payload["max_commutator"] <= 1e-10
    assert set(payload) >= {"commutator_l", "commutator_r", "commutator_g"}


def test_parity_check_requires_atom_count():
    assert run(["parity-check", "--cutoff-a", "4", "--cutoff-b", "4"]) == 2


def test_invalid_frequency_exits_2(capsys):
    assert run(["critical", "--omega-a", "-1"]) == 2
    assert "omega_a" in capsys.readouterr().err


def test_config_file_provides_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[critical]\nomega31 = 1.7\ng1 = 0.75  # inline comment\n")
    assert run(["critical", "--config", str(cfg)]) == 0
    payload = _json_out(capsys)
    assert payload["params"]["g1"] == 0.75
    assert payload["params"]["omega31"] == 1.7


def test_explicit_flag_beats_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[critical]\ng1 = 0.75\n")
    assert run(["critical", "--config", str(cfg), "--g1", "1.25"]) == 0
    assert _json_out(capsys)["params"]["g1"] == 1.25


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[critical]\ncoupling_strength = 0.75\n")
    assert run(["critical", "--config", str(cfg)]) == 2
    assert "coupling_strength" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path):
    assert run(["critical", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_config_section_scoped_to_subcommand(tmp_path, capsys):
    # keys under another subcommand's section are ignored
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[line-cut]\ng2 = 0.9\n\n[critical]\ng1 = 0.6\n")
    assert run(["critical", "--config", str(cfg)]) == 0
    assert _json_out(capsys)["params"]["g2"] == 0.0


def test_seed_gives_byte_identical_output(capsys):
    args = ["ed", "--N", "2", "--g1", "0.8", "--g2", "0.5",
            "--cutoff-a", "12", "--cutoff-b", "12", "--seed", "42"]
    assert run(args) == 0
    first = capsys.readouterr().out
    assert run(args) == 0
    second = capsys.readouterr().out
    assert first == second
    # a different start vector must land on the same ground state
    assert run(args[:-1] + ["7"]) == 0
    other = json.loads(capsys.readouterr().out)
    assert other["energy"] == pytest.approx(json.loads(first)["energy"],
                                            abs=1e-8)


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "vdicke.cli", "critical", "--g1", "1.0"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["gtilde_c2"] == pytest.approx(1.0, abs=1e-9)


def test_missing_required_option_exits_2():
    # line-cut without its mandatory sweep window
    assert run(["line-cut", "--g2", "0.5"]) == 2
