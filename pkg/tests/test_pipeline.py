"""Pipeline completo: dataset experto, preentrenamiento, currículo, evaluación, trazas, auditoría y benchmark."""
from pathlib import Path

import numpy as np
import pytest
from openpyxl import load_workbook

from EraNavegacion.core.enums import TerminalStatus
from EraNavegacion.services.artifacts import ArtifactPaths, load_artifacts, read_dataset
from EraNavegacion.services.audit_service import AuditService
from EraNavegacion.services.benchmark_service import BenchmarkService
from EraNavegacion.services.dataset_service import DatasetService, decision_pairs
from EraNavegacion.services.evaluation_service import EvaluationService
from EraNavegacion.services.pretrain_service import PretrainService
from EraNavegacion.services.trace_service import TraceService
from EraNavegacion.services.training_service import TrainingService
from shared.utils.file_helpers import read_json, read_jsonl

pytestmark = pytest.mark.slow


def test_full_pipeline(tiny_settings):
    out = Path(tiny_settings.harness.out)
    paths = ArtifactPaths.at(out)

    summary = DatasetService(tiny_settings).generate(episodes=6)
    assert summary["retained"] >= 1
    records = read_dataset(paths.dataset)
    assert len(records) == summary["records"] > 0
    assert all(np.linalg.norm(r.a_star) <= tiny_settings.world.v_max + 1e-9 for r in records)
    assert decision_pairs(records)

    pretrained = PretrainService(tiny_settings).run()
    assert pretrained["bank_size"] == len(records)
    assert pretrained["sigma_max"] <= 0.99 + 1e-9
    assert len(read_jsonl(paths.pretrain_loss)) == tiny_settings.pretrain.epochs + 1

    trained = TrainingService(tiny_settings).run()
    assert trained["episodes"] == 2
    log = read_jsonl(paths.train_log)
    assert [row["episode"] for row in log] == [0, 1]
    assert not (out / ".lock_era_train").exists()

    traces = out / "traces.jsonl"
    era = EvaluationService(tiny_settings).run(policy="era", traces=traces, xlsx=out / "era.xlsx")
    expert = EvaluationService(tiny_settings).run(policy="expert")
    for report in (era, expert):
        assert report.seeds == 2
        assert report.success_rate + report.collision_rate + report.timeout_rate == pytest.approx(1.0)
        assert {ep["terminal"] for ep in report.episodes} <= {s.value for s in TerminalStatus}
    assert era.seed_list == expert.seed_list
    assert read_json(out / "metrics_era_easy.json")["policy"] == "era"
    assert load_workbook(out / "era.xlsx").sheetnames == ["Metricas", "Episodios"]

    if traces.is_file() and read_jsonl(traces):
        verified = TraceService(tiny_settings.world.v_max).verify(traces, load_artifacts(out, tiny_settings.bank))
        assert verified["ok"]
        assert verified["traces"] > 0

    audit = AuditService(tiny_settings).run()
    assert audit["triples"] >= tiny_settings.encoder.latent + 3
    assert audit["sigma_max"] <= 0.99 + 1e-9
    assert audit["unforced_fraction_negative"] > 0.9

    bench = BenchmarkService(tiny_settings).run(sizes=[20, 40], calls=5)
    assert bench.sizes == [20, 40]
    assert set(bench.recall_at_k) == {"20", "40"}
    assert all(0.0 <= value <= 1.0 for value in bench.recall_at_k.values())
    assert read_json(out / "bench.json")["calls"] == 5
    assert bench.memory_bytes["model"] > 0
    assert bench.memory_bytes["40"] > bench.memory_bytes["20"]
