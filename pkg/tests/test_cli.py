import os

import pytest

from EraNavegacion.cli import build_parser, main
from EraNavegacion.core import constants as C


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch, tmp_path):
    for name in list(os.environ):
        if name.startswith("ERA__"):
            monkeypatch.delenv(name)
    monkeypatch.chdir(tmp_path)


def test_usage_errors_exit_with_two():
    assert main([]) == C.CODIGO_SALIDA_USO
    assert main(["eval", "--difficulty", "insane"]) == C.CODIGO_SALIDA_USO
    assert main(["fly"]) == C.CODIGO_SALIDA_USO
    assert main(["bench", "--sizes", "10,-3"]) == C.CODIGO_SALIDA_USO


def test_help_exits_with_zero():
    assert main(["--help"]) == C.CODIGO_SALIDA_OK


def test_missing_artifacts_exit_with_one(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["eval", "--artifacts", str(empty), "--out", str(tmp_path / "out")]) == C.CODIGO_SALIDA_ERROR
    assert main(["audit", "--artifacts", str(empty)]) == C.CODIGO_SALIDA_ERROR


def test_bad_configuration_exits_with_one(tmp_path):
    config = tmp_path / "era.conf"
    config.write_text("world.warning_radius=20.0\n", encoding="utf-8")
    assert main(["--config", str(config), "eval", "--policy", "expert"]) == C.CODIGO_SALIDA_ERROR
    assert main(["--config", str(tmp_path / "none.conf"), "eval"]) == C.CODIGO_SALIDA_ERROR


def test_global_flags_before_or_after_the_command():
    parser = build_parser()
    before = parser.parse_args(["--seed", "3", "--threads", "2", "eval", "--policy", "expert"])
    after = parser.parse_args(["eval", "--seed", "3", "--threads", "2", "--policy", "expert"])
    for args in (before, after):
        assert args.command == "eval"
        assert args.seed == 3 and args.threads == 2
        assert args.policy == "expert"
    assert parser.parse_args(["bench", "--sizes", "20,40"]).sizes == [20, 40]


def test_expert_evaluation_runs_end_to_end(tmp_path, capsys):
    config = tmp_path / "era.conf"
    config.write_text("world.max_sim_steps=200\nharness.eval_seeds=1\nharness.difficulty=easy\n",
                      encoding="utf-8")
    report = tmp_path / "metrics.json"
    code = main(["--config", str(config), "--seed", "5", "--out", str(tmp_path / "out"),
                 "eval", "--policy", "expert", "--output", str(report)])
    assert code == C.CODIGO_SALIDA_OK
    assert report.is_file()
    assert '"policy": "expert"' in capsys.readouterr().out


def test_unexpected_failure_exits_with_one(tmp_path, mocker):
    mocker.patch("EraNavegacion.cli.EvaluationService.run", side_effect=RuntimeError("disco lleno"))
    code = main(["--out", str(tmp_path / "out"), "eval", "--policy", "expert"])
    assert code == C.CODIGO_SALIDA_ERROR
