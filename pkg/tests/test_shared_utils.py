import os
from datetime import datetime

import numpy as np
import pytest

from shared.utils.exceptions import ArtifactError, ConfigurationError
from shared.utils.file_helpers import (
    JsonlWriter,
    acquire_lock,
    dumps_stable,
    iter_jsonl,
    read_json,
    read_jsonl,
    release_lock,
    write_json,
    write_jsonl,
)
from shared.utils.helpers import parse_bool, percentiles_ms, safe_mean
from shared.utils.logger import establecer_configuracion_global, get_logger, normalizar_logs_config
from shared.utils.validators import (
    validate_choice,
    validate_finite,
    validate_in_range,
    validate_integer,
    validate_positive,
    validate_strictly_increasing,
)


# ---------------------------------------------------------------- lock

def test_active_lock_blocks_second_writer(tmp_path):
    lock = acquire_lock(tmp_path, "Train")
    assert lock.name == ".lock_era_train"
    with pytest.raises(ArtifactError):
        acquire_lock(tmp_path, "train")
    release_lock(lock)
    assert not lock.exists()
    release_lock(lock)


def test_old_or_unreadable_lock_is_replaced(tmp_path):
    lock = tmp_path / ".lock_era_train"
    lock.write_text(str(datetime.now().timestamp() - 2 * 86400), encoding="utf-8")
    assert acquire_lock(tmp_path, "train") == lock
    lock.write_text("basura", encoding="utf-8")
    assert acquire_lock(tmp_path, "train") == lock
    assert float(lock.read_text(encoding="utf-8")) > 0


# ---------------------------------------------------------------- JSON

def test_jsonl_writer_and_reader(tmp_path):
    path = tmp_path / "sub" / "log.jsonl"
    with JsonlWriter(path) as writer:
        writer.write({"a": 1})
        writer.write({"b": [0.1, None]})
    assert writer.count == 2
    assert read_jsonl(path) == [{"a": 1}, {"b": [0.1, None]}]

    path.write_text('{"a":1}\n\n{"c":2}\n', encoding="utf-8")
    assert list(iter_jsonl(path)) == [(1, {"a": 1}), (3, {"c": 2})]


def test_bad_jsonl_line_reports_number(tmp_path):
    path = tmp_path / "log.jsonl"
    assert write_jsonl(path, [{"a": 1}]) == 1
    with open(path, "a", encoding="utf-8") as f:
        f.write("{roto\n")
    with pytest.raises(ValueError, match="línea 2"):
        read_jsonl(path)
    with pytest.raises(ArtifactError):
        read_jsonl(tmp_path / "missing.jsonl")


def test_stable_json(tmp_path):
    assert dumps_stable({"x": 0.1, "ñ": 1}) == '{"x":0.1,"ñ":1}'
    with pytest.raises(ValueError):
        dumps_stable({"x": float("nan")})
    path = write_json(tmp_path / "doc.json", {"k": [1, 2]})
    assert path.read_text(encoding="utf-8").endswith("\n")
    assert read_json(path) == {"k": [1, 2]}
    with pytest.raises(ArtifactError):
        read_json(tmp_path / "none.json")
    (tmp_path / "bad.json").write_text("{", encoding="utf-8")
    with pytest.raises(ArtifactError):
        read_json(tmp_path / "bad.json")


# ---------------------------------------------------------------- helpers

def test_percentiles_are_reported_in_milliseconds():
    stats = percentiles_ms([0.001] * 99 + [0.101])
    assert stats["p50"] == pytest.approx(1.0)
    assert stats["mean"] == pytest.approx(2.0)
    assert stats["p99"] >= stats["p90"] >= stats["p50"]
    assert percentiles_ms([]) == {"p50": 0.0, "p90": 0.0, "p99": 0.0, "mean": 0.0}


def test_safe_mean_and_parse_bool():
    assert safe_mean([]) == 0.0
    assert safe_mean([1.0, 2.0]) == 1.5
    assert parse_bool("Sí") and parse_bool("on") and parse_bool(1)
    assert not parse_bool("false") and not parse_bool(0)


# ---------------------------------------------------------------- validadores

def test_validators_raise_configuration_errors():
    validate_finite("x", np.ones(3))
    validate_positive("x", 0.0, allow_zero=True)
    validate_in_range("x", 1.0, 0.0, 1.0)
    validate_integer("x", np.int64(3), minimum=1)
    validate_choice("x", "b", ("a", "b"))
    validate_strictly_increasing(("a", "b", "c"), (0.5, 2.0, 10.0))

    failing = [
        lambda: validate_finite("x", [1.0, float("inf")]),
        lambda: validate_positive("x", 0.0),
        lambda: validate_in_range("x", 1.0, 0.0, 1.0, inclusive=False),
        lambda: validate_integer("x", True),
        lambda: validate_integer("x", 2.0),
        lambda: validate_integer("x", 0, minimum=1),
        lambda: validate_choice("x", "z", ("a", "b")),
        lambda: validate_strictly_increasing(("a", "b"), (2.0, 2.0)),
    ]
    for call in failing:
        with pytest.raises(ConfigurationError):
            call()


# ---------------------------------------------------------------- logger

def test_logs_without_path_stay_on_console():
    assert normalizar_logs_config(None) is None
    assert normalizar_logs_config({"nivel": "INFO"}) is None


def test_global_log_config_writes_csv_files(tmp_path):
    hoy = datetime.now().strftime("%Y%m%d")
    try:
        establecer_configuracion_global({"ruta": str(tmp_path), "nivel": "debug"})
        logger = get_logger("PruebaLogsCsv")
        logger.info("[INICIO] prueba")
        logger.warning("aviso de prueba")
        auditoria = tmp_path / f"_LOG_DE_AUDITORIA_{hoy}.csv"
        sistema = tmp_path / f"_LOG_DE_ERRORES_{hoy}.csv"
        assert "[INICIO] prueba" in auditoria.read_text(encoding="utf-8")
        contenido = sistema.read_text(encoding="utf-8")
        assert "aviso de prueba" in contenido
        assert "[INICIO] prueba" not in contenido
    finally:
        establecer_configuracion_global(None)
    assert not any(type(h).__name__ == "FileHandler" for h in get_logger("PruebaLogsCsv").handlers)
    assert os.listdir(tmp_path)
