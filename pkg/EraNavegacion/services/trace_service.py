"""Inspección y verificación de trazas de decisión registradas."""
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from EraNavegacion.core.controller import replay_action
from EraNavegacion.core.dynamics import lyapunov_delta
from EraNavegacion.core.models import DecisionTrace
from EraNavegacion.services.artifacts import Artifacts
from shared.utils.exceptions import ArtifactError
from shared.utils.file_helpers import iter_jsonl
from shared.utils.logger import get_logger

# Tolerancia relativa al recalcular ΔV desde el banco serializado
TOLERANCIA_DELTA_V = 1e-9


def read_traces(path: Union[str, Path]) -> List[Tuple[Dict[str, Any], DecisionTrace]]:
    """
    Lee un JSONL de trazas.

    Returns:
        Lista de (metadatos {episode, seed, decision}, traza)

    Raises:
        ArtifactError: Archivo ausente o registro inválido
    """
    traces = []
    try:
        for line_number, record in iter_jsonl(path):
            try:
                meta = {k: record[k] for k in ("episode", "seed", "decision") if k in record}
                traces.append((meta, DecisionTrace.from_dict(record["trace"])))
            except (KeyError, TypeError, ValueError) as e:
                raise ArtifactError(f"Traza inválida en la línea {line_number}: {e}") from e
    except ValueError as e:
        raise ArtifactError(f"JSON inválido en {path}: {e}") from e
    return traces


def format_trace(meta: Dict[str, Any], trace: DecisionTrace) -> str:
    """Texto legible de una traza: candidatos, clusters, ganador y acción."""
    lines = [f"episodio {meta.get('episode', '?')} semilla {meta.get('seed', '?')} "
             f"decisión {meta.get('decision', '?')} | {trace.latency_ms:.3f} ms | selección {trace.selection}"
             + (f" | respaldo {trace.fallback}" if trace.fallback else "")
             + (f" | escudo {trace.shield}" if trace.shield else "")]
    lines.append("  id        sim       w         ΔV        pasa")
    for c in trace.candidates:
        lines.append(f"  {c.entry_id:<9d} {c.sim:<9.4f} {c.weight:<9.4f} {c.delta_v:<+9.4f} {'sí' if c.passed else 'no'}")
    for idx, cl in enumerate(trace.clusters):
        marca = "*" if idx == trace.winner else " "
        lines.append(f" {marca}cluster {idx}: W = {cl.weight:.4f}, ids {cl.member_ids}")
    lines.append(f"  acción = [{', '.join(f'{v:.4f}' for v in trace.action)}]")
    return "\n".join(lines)


class TraceService:
    """Imprime trazas y, con artefactos, verifica ΔV y la acción fusionada."""

    def __init__(self, v_max: float) -> None:
        self.v_max = v_max
        self.logger = get_logger("TraceService")

    def inspect(self, path: Union[str, Path], limit: Optional[int] = None) -> List[str]:
        traces = read_traces(path)
        if limit is not None:
            traces = traces[:limit]
        return [format_trace(meta, trace) for meta, trace in traces]

    def verify(self, path: Union[str, Path], artifacts: Artifacts) -> Dict[str, Any]:
        """
        Recalcula cada ΔV y la acción fusionada desde el banco y el modelo.

        Un candidato marcado como aprobado debe tener ΔV < margen; la acción
        recalculada debe coincidir exactamente con la registrada.

        Returns:
            Resumen {traces, candidates, margin_violations, delta_v_mismatches,
            action_mismatches, unverifiable, ok}
        """
        bank, model = artifacts.bank, artifacts.model
        summary = {"traces": 0, "candidates": 0, "margin_violations": 0, "delta_v_mismatches": 0,
                   "action_mismatches": 0, "unverifiable": 0}
        for meta, trace in read_traces(path):
            summary["traces"] += 1
            if any(c.entry_id not in bank for c in trace.candidates):
                summary["unverifiable"] += 1
                continue
            for c in trace.candidates:
                summary["candidates"] += 1
                if c.passed and not c.delta_v < trace.margin:
                    summary["margin_violations"] += 1
                recomputed = lyapunov_delta(model, trace.z, bank.get(c.entry_id).a)
                if abs(recomputed - c.delta_v) > TOLERANCIA_DELTA_V * max(1.0, abs(c.delta_v)):
                    summary["delta_v_mismatches"] += 1
            replayed = replay_action(trace, bank, self.v_max)
            if replayed is not None and not np.array_equal(replayed, trace.action):
                summary["action_mismatches"] += 1
                self.logger.warning(f"Acción no reproducible en {meta}: {replayed} != {trace.action}")
        summary["ok"] = (summary["margin_violations"] == 0 and summary["delta_v_mismatches"] == 0
                         and summary["action_mismatches"] == 0)
        self.logger.info(f"Verificación de trazas: {summary}")
        return summary
