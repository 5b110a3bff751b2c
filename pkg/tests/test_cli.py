import json

import pytest

from nimt.cli import main
from nimt.logs import HEADER, read_iteration_log


def test_scenario_command(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["scenario", "gmm1d", "--max-iters", "20", "--check", "--out", str(out)])
    assert code == 0
    rows = read_iteration_log(out / "log.csv")
    assert [r["t"] for r in rows] == list(range(1, 21))
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "max_iters_reached" and summary["iterations"] == 20
    assert "gmm1d" in capsys.readouterr().out


def test_run_command(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": {"name": "linear_compare", "overrides": {"epsilon": 0.05}},
                               "teacher": {"kind": "rft"}, "seed": 2,
                               "output_dir": str(tmp_path / "res")}))
    assert main(["run", "--config", str(cfg)]) == 0
    summary = json.loads((tmp_path / "res" / "summary.json").read_text())
    assert summary["status"] == "converged"
    assert (tmp_path / "res" / "log.csv").read_text().splitlines()[0] == ",".join(HEADER)


def test_image_alt_flags(tmp_path, image_pair):
    out = tmp_path / "img"
    code = main(["scenario", "image", "--target", str(image_pair["ring"]), "--init", str(image_pair["eight"]),
                 "--alt", str(image_pair["oval"]), "--alt-prob", "1.0", "--k", "0.1", "--max-iters", "5",
                 "--pool-ratio", "0.8", "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["substitutions"] == 5 and summary["k"] == 5


def test_compare_linear(tmp_path, capsys):
    assert main(["compare-linear", "--steps", "10", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "compare_linear.csv").read_text().splitlines()
    assert len(lines) == 11
    assert "max |f_linear" in capsys.readouterr().out


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": {"name": "gmm1d"}, "seed": 1, "teacher": {"alt": {"image": "x", "prob": 2}}}))
    assert main(["run", "--config", str(cfg)]) == 2
    assert "teacher.alt.prob" in capsys.readouterr().err


def test_assertion_failure_exit_code(tmp_path, monkeypatch):
    import nimt.teacher as teacher

    monkeypatch.setattr(teacher, "optimal_direction_check", lambda *a: -1.0)
    code = main(["scenario", "gmm1d", "--max-iters", "3", "--check", "--out", str(tmp_path)])
    assert code == 1
    assert json.loads((tmp_path / "summary.json").read_text())["status"] == "assertion_failed"


def test_unknown_scenario_rejected():
    with pytest.raises(SystemExit):
        main(["scenario", "mnist"])


def test_cli_rerun_identical(tmp_path):
    for d in ("a", "b"):
        main(["scenario", "parametric3d", "--teacher", "rft", "--k", "3", "--seed", "4",
              "--max-iters", "30", "--out", str(tmp_path / d)])
    assert (tmp_path / "a" / "log.csv").read_bytes() == (tmp_path / "b" / "log.csv").read_bytes()
