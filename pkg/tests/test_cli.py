import json

import pytest

from main import build_parser, load_config, run
from schemas.experiment import ExperimentConfig


def output(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def out_dir(tmp_path):
    return str(tmp_path / "out")


def test_flags_override_defaults():
    args = build_parser().parse_args(["--seed", "5", "--model", "kernel", "--c1", "2", "suite", "collapse"])
    config = load_config(args)
    assert config.seed == 5
    assert config.model == "kernel"
    assert config.c1 == 2.0


def test_config_builds_walk_params():
    params = ExperimentConfig(c1=2.0, c2=3.0).walk_params(5.0)
    assert (params.c1, params.c2, params.resistance) == (2.0, 3.0, 5.0)
    assert ExperimentConfig().walk_params().resistance == 1.0


def test_config_file_overrides_flags(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"seed": 9, "family": "grid"}))
    config = load_config(build_parser().parse_args(["--config", str(path), "--seed", "5", "suite"]))
    assert config.seed == 9
    assert config.family.value == "grid"


def test_generate_then_detect(out_dir, capsys):
    assert run(["--out", out_dir, "generate", "--family", "path", "--n", "4"]) == 0
    written = output(capsys)["data"][0]
    assert written["vertices"] == 5
    assert written["marked"] == [4]

    assert run(["--out", out_dir, "detect", written["path"]]) == 0
    result = output(capsys)["data"]["result"]
    assert result["total_accept_prob"] >= 2.0 / 3.0


def test_electric_reports_resistance(out_dir, capsys):
    run(["--out", out_dir, "generate", "--family", "path", "--n", "3"])
    path = output(capsys)["data"][0]["path"]
    assert run(["--out", out_dir, "electric", path, "--pair", "0", "3"]) == 0
    data = output(capsys)["data"]
    assert data["resistance"] == pytest.approx(3.0)
    assert data["commute_time"] == pytest.approx(18.0)


def test_negative_detect_needs_a_resistance(out_dir, capsys):
    run(["--out", out_dir, "generate", "--family", "star", "--n", "3", "--negative"])
    path = output(capsys)["data"][0]["path"]
    assert run(["--out", out_dir, "detect", path]) == 1
    assert "resistance" in output(capsys)["message"]
    assert run(["--out", out_dir, "detect", path, "--resistance", "1"]) == 0
    assert output(capsys)["data"]["result"]["total_accept_prob"] <= 1.0 / 3.0


def test_learning_or_star(out_dir, capsys):
    assert run(["--out", out_dir, "learning", "--or-star", "3"]) == 0
    data = output(capsys)["data"]
    assert data["complexity"] == pytest.approx(3 ** 0.5)


def test_kdist_verb(out_dir, capsys):
    assert run(["--out", out_dir, "kdist", "--x", "1", "1", "2", "2", "3"]) == 0
    data = output(capsys)["data"]
    assert not data["is_positive"]
    assert data["level_sizes"][-1] == 0


def test_missing_file_is_a_failure(out_dir, capsys, tmp_path):
    assert run(["--out", out_dir, "detect", str(tmp_path / "missing.json")]) == 1
    response = output(capsys)
    assert not response["success"]
    assert "missing.json" in response["message"]


def test_invalid_config_is_a_failure(tmp_path, capsys):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"c1": 0.5}))
    assert run(["--config", str(path), "suite", "collapse"]) == 1
    assert "invalid configuration" in output(capsys)["message"]
