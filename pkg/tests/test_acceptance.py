"""Criterios de aceptación a escala de escritorio: recuperación, latencia, currículo y determinismo."""
from pathlib import Path

import numpy as np
import pytest

from EraNavegacion.core.encoder import encode
from EraNavegacion.core.knowledge_bank import KnowledgeBank
from EraNavegacion.core.settings import settings_from_dict
from EraNavegacion.services.artifacts import load_artifacts
from EraNavegacion.services.benchmark_service import BenchmarkService, padded_bank, recall_at_k
from EraNavegacion.services.dataset_service import DatasetService
from EraNavegacion.services.evaluation_service import EvaluationService
from EraNavegacion.services.pretrain_service import PretrainService
from EraNavegacion.services.training_service import TrainingService

pytestmark = pytest.mark.slow

TAMANO_BANCO_REFERENCIA = 30650


def desk_settings(out: Path, **harness):
    return settings_from_dict({"harness": {"seed": 7, "out": str(out), "threads": 4, **harness}})


@pytest.fixture(scope="module")
def pretrained(tmp_path_factory):
    """Dataset experto por defecto y artefactos preentrenados, compartidos por el módulo."""
    out = tmp_path_factory.mktemp("pretrained")
    settings = desk_settings(out)
    DatasetService(settings).generate()
    PretrainService(settings).run()
    return settings, out


def test_exact_search_matches_brute_force_on_ten_thousand_entries():
    rng = np.random.default_rng(21)
    Z = rng.normal(size=(10_000, 32))
    bank = KnowledgeBank(d=32, seed=0)
    for z in Z:
        bank.add(z, np.zeros(3))
    unit = Z / np.linalg.norm(Z, axis=1, keepdims=True)
    ids = np.arange(len(Z))
    for q in rng.normal(size=(50, 32)):
        sims = unit @ (q / np.linalg.norm(q))
        oracle = np.lexsort((ids, -sims))[:8]
        found = [c.entry_id for c in bank.search_exact(q, 8).candidates]
        assert found == oracle.tolist()


def test_ivf_recall_on_reference_bank_size(pretrained):
    settings, out = pretrained
    artifacts = load_artifacts(out, settings.bank)
    bank = padded_bank(artifacts.bank, TAMANO_BANCO_REFERENCIA, settings.seed)
    assert bank.size == TAMANO_BANCO_REFERENCIA
    events = BenchmarkService(settings).query_events(200)
    queries = [encode(artifacts.encoder, E) for E in events]

    assert recall_at_k(bank, queries, 8) >= 0.95
    for z in queries[:20]:
        exact = [c.entry_id for c in bank.search_exact(z, 8).candidates]
        full = [c.entry_id for c in bank.search_ann(z, 8, n_scan=bank.index.n_list).candidates]
        assert full == exact


def test_decision_latency_and_scaling(pretrained, tmp_path):
    settings, out = pretrained
    report = BenchmarkService(settings).run(artifacts_dir=out, sizes=[10_000, 30_000, 100_000], calls=300,
                                            output=tmp_path / "bench.json")
    assert report.stages["30000"]["retrieval_only"]["p50"] < 1.0
    for size in report.stages:
        assert report.stages[size]["end_to_end"]["p50"] < 20.0
    assert report.scaling_ratio < 4.0


def test_curriculum_grows_bank_and_matches_expert(pretrained, tmp_path):
    settings, out = pretrained
    trained = tmp_path / "trained"
    initial = load_artifacts(out, settings.bank).bank.size
    summary = TrainingService(settings).run(artifacts_dir=out, out_dir=trained, episodes=100)
    assert summary["bank_size"] > initial

    evaluation = EvaluationService(desk_settings(tmp_path / "eval"))
    expert = evaluation.run(policy="expert", difficulty="medium", seeds=25)
    era = evaluation.run(artifacts_dir=trained, policy="era", difficulty="medium", seeds=25)
    assert era.seed_list == expert.seed_list
    assert era.success_rate >= expert.success_rate
    assert era.collision_rate <= 0.10


def run_pipeline(settings) -> None:
    out = Path(settings.harness.out)
    DatasetService(settings).generate(episodes=6)
    PretrainService(settings).run()
    TrainingService(settings).run()
    EvaluationService(settings).run(policy="era", traces=out / "traces.jsonl", xlsx=out / "era.xlsx")
    EvaluationService(settings).run(policy="expert")


def test_same_seed_reproduces_every_artifact_byte_for_byte(tmp_path, tiny_settings_factory):
    first, second = tmp_path / "first", tmp_path / "second"
    run_pipeline(tiny_settings_factory(first))
    run_pipeline(tiny_settings_factory(second))

    # los xlsx llevan fecha de creación en sus metadatos
    produced = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file() and p.suffix != ".xlsx")
    assert produced
    assert produced == sorted(p.relative_to(second) for p in second.rglob("*")
                              if p.is_file() and p.suffix != ".xlsx")
    for relative in produced:
        assert (first / relative).read_bytes() == (second / relative).read_bytes(), relative
