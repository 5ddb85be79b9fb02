from pathlib import Path

import pytest

from EraNavegacion.core.enums import FallbackMode, SelectionMode
from EraNavegacion.core.settings import (
    BankSettings,
    ControllerConfig,
    EncoderShape,
    EpisodeConfig,
    HarnessSettings,
    PretrainHyper,
    load_settings,
    settings_from_dict,
)
from shared.utils.config_parser import parse_key_value_text
from shared.utils.exceptions import ConfigurationError

EXAMPLE_CONFIG = Path(__file__).resolve().parent.parent / "config.example.conf"


def test_defaults_validate():
    settings = settings_from_dict({})
    assert settings.world == EpisodeConfig()
    assert settings.controller.retrieval.k == 8
    assert settings.pretrain.seed == settings.seed == 0


def test_pretrain_seed_follows_harness_seed():
    assert settings_from_dict({"harness": {"seed": 42}}).pretrain.seed == 42
    assert settings_from_dict({"harness": {"seed": 42}, "pretrain": {"seed": 3}}).pretrain.seed == 3


@pytest.mark.parametrize("raw", [
    {"planner": {}},
    {"world": {"speed": 3}},
    {"world": {"warning_radius": 0.4}},
    {"world": {"trigger_radius": 1.5}},
    {"world": {"goal_min_distance": 0.5, "goal_max_distance": 0.8}},
    {"world": {"mix_a": 0.5}},
    {"world": {"intruder_count": 2.5}},
    {"world": {"dt": "fast"}},
    {"pretrain": {"momentum": 1.0}},
    {"pretrain": {"lambda_m": 0.0, "lambda_i": 0.0}},
    {"bank": {"reliability_floor": 0.0}},
    {"controller": {"tau": 0.0}},
    {"controller": {"selection": "vote"}},
    {"controller": {"min_similarity": 1.5}},
    {"harness": {"difficulty": "insane"}},
    {"harness": {"threads": 0}},
])
def test_invalid_configuration_is_rejected(raw):
    with pytest.raises(ConfigurationError):
        settings_from_dict(raw)


def test_key_value_file_and_priorities(tmp_path):
    config = tmp_path / "era.conf"
    config.write_text(
        "# prueba\n"
        "world.dt=0.1\n"
        "controller.k=4\n"
        "controller.selection=average\n"
        "controller.fallback=vpf_expert\n"
        "bank.n_list=none\n"
        "harness.bench_sizes=10,20\n"
        "harness.seed=5\n",
        encoding="utf-8",
    )
    settings = load_settings(str(config), environ={"ERA__CONTROLLER__TAU": "0.2", "ERA__HARNESS__SEED": "6"})
    assert settings.world.dt == 0.1
    assert settings.controller.retrieval.k == 4
    assert settings.controller.retrieval.tau == 0.2
    assert settings.controller.selection == SelectionMode.AVERAGE
    assert settings.controller.fallback == FallbackMode.VPF_EXPERT
    assert settings.bank.n_list is None
    assert settings.harness.bench_sizes == (10, 20)
    assert settings.seed == 6

    flagged = load_settings(str(config), seed=9, out="elsewhere", threads=3, environ={"ERA__HARNESS__SEED": "6"})
    assert flagged.seed == 9
    assert flagged.harness.out == "elsewhere"
    assert flagged.harness.threads == 3


def test_dotenv_is_overridden_by_process_environment(tmp_path):
    dotenv = tmp_path / ".env"
    dotenv.write_text("ERA__HARNESS__THREADS=3\nERA__WORLD__V_MAX=4.0\n", encoding="utf-8")
    settings = load_settings(None, environ={"ERA__WORLD__V_MAX": "6.0"}, dotenv_path=str(dotenv))
    assert settings.harness.threads == 3
    assert settings.world.v_max == 6.0


def test_json_string_configuration():
    settings = load_settings('{"encoder": {"hidden": 16, "latent": 8}}', environ={})
    assert settings.encoder == EncoderShape(hidden=16, latent=8)


def test_missing_file_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        load_settings("no/such/file.conf", environ={})


def test_example_config_matches_defaults():
    settings = load_settings(str(EXAMPLE_CONFIG), environ={})
    assert settings.world == EpisodeConfig()
    assert settings.encoder == EncoderShape()
    assert settings.pretrain == PretrainHyper()
    assert settings.bank == BankSettings()
    assert settings.controller == ControllerConfig()
    assert settings.harness == HarnessSettings()
    assert settings.logs == {"nivel": "INFO"}


def test_key_value_parser_rejects_lines_without_equals():
    assert parse_key_value_text("a.b=1\n\n# c\nx.y=true") == {"a": {"b": 1}, "x": {"y": True}}
    with pytest.raises(ConfigurationError):
        parse_key_value_text("world.dt 0.05")
