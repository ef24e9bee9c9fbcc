import json
import subprocess
import sys
from pathlib import Path

import pandas as pd
import pytest

from src.cli import main
from src.formats import read_grid_csv, read_network_json, read_points_csv, write_network_json
from src.indicators import MorphologyRecord
from src.netgen import generate_random_planar
from src.rng import RngStream
from src.slime_mould import SlimeMouldParams, generate_slime_mould


@pytest.fixture
def planar_json(tmp_path):
    path = tmp_path / "n.json"
    write_network_json(generate_random_planar(20, 0.6, (0, 0, 1, 1), RngStream(1)), path)
    return path


def test_gen_grid_kernel_mixture(tmp_path):
    out = tmp_path / "g.csv"
    code = main(["gen", "grid", "--method", "kernel-mixture", "--size", "50", "--centers", "3", "--seed", "7", "--out", str(out)])
    assert code == 0
    grid = read_grid_csv(out)
    assert (grid.width, grid.height) == (50, 50)


def test_gen_is_reproducible(tmp_path):
    args = ["gen", "grid", "--method", "reaction-diffusion", "--size", "8", "--population", "200", "--seed", "3"]
    main(args + ["--out", str(tmp_path / "a.csv")])
    main(args + ["--out", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


@pytest.mark.slow
@pytest.mark.parametrize(
    "args, suffix",
    [
        (["grid", "--method", "reaction-diffusion", "--size", "10", "--population", "500", "--seed", "11"], ".csv"),
        (["network", "--method", "random-planar", "--n", "25", "--seed", "12"], ".json"),
        (["points", "--method", "poisson", "--intensity", "80", "--seed", "13"], ".csv"),
    ],
)
def test_gen_is_identical_across_processes(tmp_path, args, suffix):
    root = Path(__file__).resolve().parents[1]
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / f"{name}{suffix}"
        subprocess.run([sys.executable, "main.py", "gen", *args, "--out", str(out)], cwd=root, check=True)
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert outputs[0]

def test_measure_grid_wide_csv(tmp_path):
    grid_path = tmp_path / "g.csv"
    main(["gen", "grid", "--method", "percolation", "--size", "10", "--seed", "1", "--out", str(grid_path)])
    out = tmp_path / "m.csv"
    assert main(["measure", "grid", "--in", str(grid_path), "--out", str(out)]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == MorphologyRecord.indicator_names()
    assert len(frame) == 1


def test_perturb_network_targeted_deletion(tmp_path, planar_json):
    out = tmp_path / "n2.json"
    code = main(
        ["perturb", "network", "--in", str(planar_json), "--delete-links", "3", "--strategy", "targeted", "--seed", "1", "--out", str(out)]
    )
    assert code == 0
    assert len(read_network_json(out).edges) == len(read_network_json(planar_json).edges) - 3


def test_gen_network_and_points(tmp_path):
    net_path = tmp_path / "tree.json"
    assert main(["gen", "network", "--method", "tree", "--n", "10", "--seed", "2", "--out", str(net_path)]) == 0
    assert len(read_network_json(net_path).edges) == 9

    gravity = tmp_path / "gravity.json"
    assert main(["gen", "network", "--method", "gravity", "--in", str(net_path), "--extra-edges", "2", "--out", str(gravity)]) == 0
    assert len(read_network_json(gravity).edges) == 11

    points = tmp_path / "p.csv"
    assert main(["gen", "points", "--method", "poisson", "--intensity", "30", "--seed", "4", "--out", str(points)]) == 0
    assert read_points_csv(points).window == (0.0, 0.0, 1.0, 1.0)


def test_measure_points_ripley(tmp_path):
    points = tmp_path / "p.csv"
    main(["gen", "points", "--method", "poisson", "--intensity", "50", "--seed", "5", "--out", str(points)])
    out = tmp_path / "k.csv"
    assert main(["measure", "points", "--in", str(points), "--ripley", "0.05,0.1", "--out", str(out)]) == 0
    assert pd.read_csv(out)["r"].tolist() == [0.05, 0.1]


def test_measure_network_centrality(tmp_path, planar_json):
    out = tmp_path / "b.csv"
    assert main(["measure", "network", "--in", str(planar_json), "--centrality", "betweenness", "--out", str(out)]) == 0
    assert list(pd.read_csv(out).columns) == ["id", "betweenness"]


def test_assign(tmp_path, planar_json):
    out = tmp_path / "flows.csv"
    code = main(["assign", "--in", str(planar_json), "--demand", "10", "--method", "frank_wolfe", "--max-iter", "20", "--out", str(out)])
    assert code == 0
    assert list(pd.read_csv(out).columns) == ["from", "to", "flow", "time"]


def test_schelling_trajectory(tmp_path):
    grid_path = tmp_path / "g.csv"
    main(["gen", "grid", "--method", "kernel-mixture", "--size", "12", "--centers", "2", "--seed", "4", "--out", str(grid_path)])
    out = tmp_path / "traj.csv"
    code = main(["schelling", "--in", str(grid_path), "--max-steps", "250", "--seed", "9", "--out", str(out)])
    assert code == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["step", "segregationIndex"]
    assert frame["step"].iloc[0] == 0
    assert frame["step"].iloc[-1] <= 250
    assert frame["segregationIndex"].between(0, 1).all()


def test_experiment(tmp_path):
    config = tmp_path / "exp.json"
    config.write_text(
        json.dumps(
            {
                "generator": {"kind": "kernel_mixture", "params": {"size": 10}},
                "indicators": ["mass", "entropy"],
                "parameterGrid": {"radius": [1.0, 3.0]},
            }
        )
    )
    out = tmp_path / "results.csv"
    assert main(["experiment", "--config", str(config), "--replications", "2", "--base-seed", "5", "--out", str(out)]) == 0
    frame = pd.read_csv(out, keep_default_na=False)
    assert len(frame) == 4
    assert list(frame.columns) == ["radius", "replication", "seed", "mass", "entropy", "error"]


def test_missing_out_is_usage_error(tmp_path):
    assert main(["gen", "grid", "--method", "blocks", "--seed", "1"]) == 2


def test_missing_seed_is_usage_error(tmp_path):
    assert main(["gen", "grid", "--method", "blocks", "--out", str(tmp_path / "g.csv")]) == 2
    assert main(["gen", "network", "--method", "tree", "--out", str(tmp_path / "n.json")]) == 2


def test_bad_experiment_config_exit_code(tmp_path):
    config = tmp_path / "exp.json"
    config.write_text(json.dumps({"generator": {"kind": "tree"}, "indicators": ["moran"]}))
    assert main(["experiment", "--config", str(config), "--out", str(tmp_path / "r.csv")]) == 2


def test_pipeline_error_exit_code(tmp_path, planar_json, capsys):
    out = tmp_path / "n2.json"
    code = main(["perturb", "network", "--in", str(planar_json), "--delete-links", "999", "--seed", "1", "--out", str(out)])
    assert code == 1
    assert "k too large" in capsys.readouterr().err


def test_unreadable_input_exit_code(tmp_path, capsys):
    code = main(["measure", "grid", "--in", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "m.csv")])
    assert code == 1
    assert "cannot read file" in capsys.readouterr().err


def test_slime_mould_input_flow(tmp_path, planar_json):
    out = tmp_path / "s.json"
    args = ["gen", "network", "--method", "slime-mould", "--in", str(planar_json), "--terminals", "0,5,9",
            "--iterations", "30", "--input-flow", "2.5", "--seed", "6", "--out", str(out)]
    assert main(args) == 0

    substrate = read_network_json(planar_json)
    params = SlimeMouldParams(terminals=(0, 5, 9), iterations=30, input_flow=2.5)
    expected = tmp_path / "expected.json"
    write_network_json(generate_slime_mould(substrate, params, RngStream(6)), expected)
    assert out.read_bytes() == expected.read_bytes()


def test_invalid_log_level_is_usage_error(tmp_path, capsys):
    code = main(["--log-level", "chatty", "gen", "grid", "--method", "blocks", "--seed", "1", "--out", str(tmp_path / "g.csv")])
    assert code == 2
    assert "--log-level" in capsys.readouterr().err


def test_log_level_is_case_insensitive(tmp_path):
    code = main(["--log-level", "debug", "gen", "grid", "--method", "blocks", "--size", "10", "--seed", "1", "--out", str(tmp_path / "g.csv")])
    assert code == 0


def test_mistyped_experiment_value_exit_code(tmp_path, capsys):
    config = tmp_path / "exp.json"
    config.write_text(
        json.dumps(
            {
                "generator": {"kind": "reaction_diffusion", "params": {"size": 6, "totalPopulation": 50, "growthRate": 10}},
                "indicators": ["mass"],
                "parameterGrid": {"alpha": [1.0, "x"]},
            }
        )
    )
    assert main(["experiment", "--config", str(config), "--out", str(tmp_path / "r.csv")]) == 2
    assert "wrong type" in capsys.readouterr().err
