"""Command-line behavior through the in-process service path."""

from __future__ import annotations

import json

import pytest

from evodetect.cli import main


def test_detect_prints_discriminant_and_decision(capsys):
    code = main(["detect", "--beliefs", "0.2,0.6", "--proportions", "0.5,0.5"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("discriminant=0.4904146")
    assert "decision=1" in out


def test_detect_tie_renders_indifferent(capsys):
    code = main(["detect", "--beliefs", "0.5", "--proportions", "1"])
    assert code == 0
    assert "decision=indifferent" in capsys.readouterr().out


def test_detect_invalid_profile_exits_2(capsys):
    code = main(["detect", "--beliefs", "1.2", "--proportions", "1"])
    err = capsys.readouterr().err
    assert code == 2
    assert err.startswith("error:")


def test_detect_malformed_float_list_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["detect", "--beliefs", "a,b", "--proportions", "1"])
    assert exc.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_ess_output(capsys):
    code = main([
        "ess", "--beliefs", "0.2", "--proportions", "1",
        "--k", "20", "--u", "0.5",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "threshold=0.45" in out
    assert "ess_set={0}" in out  # log odds of 0.2-belief exceed the threshold
    assert "predicted_limit_from_half=0" in out


def test_meanfield_stdout_and_file(tmp_path, capsys):
    args = [
        "meanfield", "--beliefs", "0.2,0.6", "--proportions", "0.5,0.5",
        "--k", "4", "--n", "60", "--t-end", "1000", "--samples", "5",
    ]
    code = main(args)
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("t,x_total,x_1,x_2\n")

    dest = tmp_path / "traj.csv"
    code = main(args + ["--out", str(dest)])
    out = capsys.readouterr().out
    assert code == 0
    assert "terminal_x=" in out and f"out={dest}" in out
    text = dest.read_text()
    assert text.startswith("t,x_total,x_1,x_2\n")
    assert len(text.strip().split("\n")) == 6


def test_meanfield_vector_x0(capsys):
    code = main([
        "meanfield", "--beliefs", "0.2,0.6", "--proportions", "0.5,0.5",
        "--k", "4", "--n", "60", "--x0", "0.1,0.9",
        "--t-end", "100", "--samples", "3",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert out.split("\n")[1].split(",")[2] == "0.1"


def test_simulate_summary_and_trajectory_files(tmp_path, capsys):
    base = [
        "simulate", "--beliefs", "0.2,0.6", "--proportions", "0.5,0.5",
        "--k", "4", "--n", "60", "--trials", "2", "--seed", "5",
        "--max-steps", "400",
    ]
    dest = tmp_path / "summary.csv"
    code = main(base + ["--out", str(dest)])
    out = capsys.readouterr().out
    assert code == 0
    assert "trials=2" in out and "mean_final_x=" in out
    assert dest.read_text().startswith("n_agents,k,alpha,u,trials,")

    dest2 = tmp_path / "traj.csv"
    code = main(base + ["--sample-every", "100", "--out", str(dest2)])
    capsys.readouterr()
    assert code == 0
    assert dest2.read_text().startswith("trial,step,x_total,")


def test_simulate_domain_error_exit_2(capsys):
    code = main([
        "simulate", "--beliefs", "0.2", "--proportions", "1",
        "--k", "1", "--trials", "1",
    ])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_sweep_config_flags_and_reproducible_csv(tmp_path, capsys):
    cfg = {
        "beliefs": [0.2, 0.5],
        "proportions": [0.5, 0.5],
        "sweep_index": 1,
        "grid": [0.3, 0.7],
        "k": 4,
        "n_agents": 60,
        "trials": 5,
        "max_steps": 400,
        "base_seed": 77,
    }
    cfg_path = tmp_path / "sweep.json"
    cfg_path.write_text(json.dumps(cfg))
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    argv = ["sweep", "--config", str(cfg_path), "--trials", "2"]
    code = main(argv + ["--out", str(out_a)])
    text = capsys.readouterr().out
    assert code == 0
    assert "grid points: 2" in text
    assert "agreement" in text
    code = main(argv + ["--out", str(out_b)])
    capsys.readouterr()
    assert code == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    body = out_a.read_text().strip().split("\n")
    assert len(body) == 3  # header and one row per grid value
    assert body[1].split(",")[-1] == "2"  # flag overrode config trials


def test_sweep_out_from_config(tmp_path, capsys):
    dest = tmp_path / "from_cfg.csv"
    cfg = {
        "beliefs": [0.2, 0.5],
        "proportions": [0.5, 0.5],
        "sweep_index": 1,
        "grid": [0.5],
        "k": 4,
        "n_agents": 60,
        "trials": 1,
        "max_steps": 200,
        "out": str(dest),
    }
    cfg_path = tmp_path / "sweep.json"
    cfg_path.write_text(json.dumps(cfg))
    code = main(["sweep", "--config", str(cfg_path)])
    capsys.readouterr()
    assert code == 0
    assert dest.exists()


def test_sweep_missing_required_exits_2(capsys):
    code = main(["sweep", "--beliefs", "0.2,0.5", "--proportions", "0.5,0.5"])
    assert code == 2
    assert "sweep_index" in capsys.readouterr().err


def test_sweep_unreadable_config_exits_2(tmp_path, capsys):
    code = main(["sweep", "--config", str(tmp_path / "missing.json")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_graph_generate_validate_round_trip(tmp_path, capsys):
    dest = tmp_path / "graph.txt"
    code = main(["graph", "generate", "--n", "10", "--k", "3",
                 "--seed", "4", "--out", str(dest)])
    out = capsys.readouterr().out
    assert code == 0
    assert "n=10" in out and "k=3" in out
    assert len(dest.read_text().strip().split("\n")) == 15

    code = main(["graph", "validate", str(dest), "--n", "10", "--k", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "ok=True" in out

    with open(dest, "a") as fh:
        fh.write("0 0\n")
    code = main(["graph", "validate", str(dest)])
    captured = capsys.readouterr()
    assert code == 1
    assert "ok=False" in captured.out
    assert "violation:" in captured.err


def test_graph_generate_stdout(capsys):
    code = main(["graph", "generate", "--n", "4", "--k", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert len(out.strip().split("\n")) == 6


def test_graph_generate_impossible_exits_2(capsys):
    code = main(["graph", "generate", "--n", "5", "--k", "3"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_graph_validate_missing_file_exits_1(tmp_path, capsys):
    code = main(["graph", "validate", str(tmp_path / "nope.txt")])
    assert code == 1
    assert "error:" in capsys.readouterr().err
