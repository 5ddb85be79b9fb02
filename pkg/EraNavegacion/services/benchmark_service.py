"""
Servicio de benchmark: latencia por etapa, recall@k del IVF y escalado del banco.

Corre en un solo hilo para que los tiempos no dependan de la contención.
"""
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from EraNavegacion.core.controller import STAGES, EraController
from EraNavegacion.core.curriculum import difficulty_config
from EraNavegacion.core.encoder import encode
from EraNavegacion.core.enums import Difficulty
from EraNavegacion.core.knowledge_bank import KnowledgeBank
from EraNavegacion.core.models import BankEntry, BenchReport, EventList
from EraNavegacion.core.seeding import derive_seed, stream_rng
from EraNavegacion.core.settings import Settings
from EraNavegacion.services.artifacts import ArtifactPaths, Artifacts, load_artifacts
from EraNavegacion.services.episode_runner import execute_episode
from EraNavegacion.services.policies import ExpertPolicy
from shared.utils.exceptions import DatasetError
from shared.utils.file_helpers import write_json
from shared.utils.helpers import percentiles_ms, safe_mean
from shared.utils.logger import get_logger

# Ruido relativo (sobre la desviación por componente) de las copias sintéticas
RUIDO_RELLENO = 0.05
MAX_EPISODIOS_CONSULTA = 1000


def padded_bank(base: KnowledgeBank, size: int, seed: int) -> KnowledgeBank:
    """
    Banco de ``size`` entradas: las primeras del banco base más copias con ruido.

    Args:
        base: Banco de origen (no vacío)
        size: Tamaño objetivo
        seed: Semilla de las copias y del índice

    Returns:
        Banco nuevo con índice construido
    """
    entries = list(base.entries_in_order())
    bank = KnowledgeBank(d=base.d, seed=derive_seed(seed, "kmeans"), settings=base.settings)
    for entry in entries[:size]:
        bank.insert(entry)
    faltantes = size - len(bank)
    if faltantes > 0:
        rng = stream_rng(seed, "bench", size)
        Z = np.stack([e.z for e in entries])
        scale = RUIDO_RELLENO * np.maximum(Z.std(axis=0), 1e-6)
        picks = rng.integers(0, len(entries), size=faltantes)
        noise = rng.normal(0.0, 1.0, size=(faltantes, base.d)) * scale
        next_id = bank.next_id()
        for offset, (pick, delta) in enumerate(zip(picks, noise)):
            src = entries[int(pick)]
            bank.insert(BankEntry(id=next_id + offset, z=src.z + delta, a=src.a.copy(), r=src.r,
                                  episode=src.episode, step=src.step, source=src.source))
    bank.build_index()
    bank.prepare()
    return bank


def recall_at_k(bank: KnowledgeBank, queries: Sequence[np.ndarray], k: int) -> float:
    """Fracción media de los k vecinos exactos que el IVF recupera."""
    values: List[float] = []
    for z in queries:
        exact = {c.entry_id for c in bank.search_exact(z, k).candidates}
        approx = {c.entry_id for c in bank.search_ann(z, k).candidates}
        values.append(len(exact & approx) / len(exact) if exact else 1.0)
    return safe_mean(values)


class BenchmarkService:
    """Mide las etapas del controlador sobre bancos de tamaño creciente."""

    def __init__(self, settings: Settings) -> None:
        self.settings = settings
        self.logger = get_logger("BenchmarkService")

    def query_events(self, count: int) -> List[EventList]:
        """
        Listas de eventos disparadas por el experto en dificultad media.

        Raises:
            DatasetError: Si ningún episodio produce eventos
        """
        events: List[EventList] = []
        for episode in range(MAX_EPISODIOS_CONSULTA):
            if len(events) >= count:
                break
            seed = derive_seed(self.settings.seed, "bench", episode)
            cfg = difficulty_config(Difficulty.MEDIUM, self.settings.world, seed)
            result = execute_episode(ExpertPolicy(cfg), cfg, episode=episode, record_trajectory=False,
                                     report_timing=False)
            events.extend(s.E_t for s in result.statuses)
        if not events:
            raise DatasetError("Ningún episodio de benchmark produjo eventos disparados")
        return events[:count]

    def run(self, artifacts_dir: Optional[Union[str, Path]] = None,
            sizes: Optional[Sequence[int]] = None,
            calls: Optional[int] = None,
            output: Optional[Union[str, Path]] = None) -> BenchReport:
        """
        Ejecuta el benchmark y escribe el reporte JSON.

        Args:
            artifacts_dir: Directorio con model.json y bank.jsonl
            sizes: Tamaños de banco (default: harness.bench_sizes)
            calls: Llamadas a decide por tamaño (default: harness.bench_calls)
            output: Ruta del JSON (default: <out>/bench.json)

        Returns:
            BenchReport
        """
        harness = self.settings.harness
        sizes = sorted(int(s) for s in (sizes or harness.bench_sizes))
        calls = harness.bench_calls if calls is None else int(calls)
        root = ArtifactPaths.at(artifacts_dir or harness.out).root
        artifacts: Artifacts = load_artifacts(root, self.settings.bank)
        if len(artifacts.bank) == 0:
            raise DatasetError(f"El banco de {root} está vacío; no hay entradas para el benchmark")
        k = self.settings.controller.retrieval.k
        cfg = difficulty_config(Difficulty.MEDIUM, self.settings.world, self.settings.seed)

        self.logger.info(f"[INICIO] Benchmark: tamaños {sizes}, {calls} llamadas por tamaño")
        events = self.query_events(calls)
        queries = [encode(artifacts.encoder, E) for E in events]

        stages: Dict[str, Dict[str, Dict[str, float]]] = {}
        recall: Dict[str, float] = {}
        memory: Dict[str, int] = {}
        medians: Dict[int, float] = {}
        for size in sizes:
            bank = padded_bank(artifacts.bank, size, self.settings.seed)
            controller = EraController(bank, artifacts.encoder, artifacts.model, self.settings.controller,
                                       cfg, report_timing=True)
            samples: Dict[str, List[float]] = {stage: [] for stage in STAGES}
            retrieval_only: List[float] = []
            for i in range(calls):
                E = events[i % len(events)]
                controller.decide(E)
                for stage in STAGES:
                    samples[stage].append(controller.last_stage_s[stage])
                z = queries[i % len(queries)]
                t0 = time.perf_counter()
                bank.search_ann(z, k)
                retrieval_only.append(time.perf_counter() - t0)

            key = str(size)
            stages[key] = {stage: percentiles_ms(values) for stage, values in samples.items()}
            stages[key]["retrieval_only"] = percentiles_ms(retrieval_only)
            recall[key] = recall_at_k(bank, queries, k)
            mem = bank.memory_bytes()
            memory[key] = int(mem["entries"] + mem["search_arrays"] + mem["index"])
            medians[size] = stages[key]["retrieval_only"]["p50"]
            self.logger.info(f"Banco {size}: end-to-end p50 {stages[key]['end_to_end']['p50']:.3f} ms, "
                             f"retrieval p50 {medians[size]:.3f} ms, recall@{k} {recall[key]:.3f}")

        model = artifacts.model
        memory["model"] = int(sum(a.nbytes for a in artifacts.encoder.arrays()) + model.psi.nbytes + model.gamma.nbytes)
        smallest, largest = sizes[0], sizes[-1]
        ratio = medians[largest] / medians[smallest] if medians.get(smallest) else 0.0
        report = BenchReport(sizes=sizes, stages=stages, recall_at_k=recall, scaling_ratio=float(ratio),
                             memory_bytes=memory, calls=calls, k=k)
        destino = Path(output) if output else Path(harness.out) / "bench.json"
        write_json(destino, report.to_dict())
        self.logger.info(f"[FIN] Benchmark: razón de escalado {ratio:.3f} -> {destino}")
        return report

    def summary(self, report: BenchReport) -> Dict[str, Any]:
        """Vista compacta para la consola: p50 end-to-end y recall por tamaño."""
        return {size: {"end_to_end_p50_ms": report.stages[size]["end_to_end"]["p50"],
                       "recall": report.recall_at_k[size]}
                for size in report.stages}
