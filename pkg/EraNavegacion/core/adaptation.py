"""
Adaptación del banco tras cada episodio: poda, penalización e inserción de
experiencias novedosas, más las métricas R_phys y J_perf que se registran.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from EraNavegacion.core.encoder import EncoderParams, encode
from EraNavegacion.core.enums import EntrySource, TerminalStatus
from EraNavegacion.core.experience import ExperienceBuffer, j_perf
from EraNavegacion.core.knowledge_bank import KnowledgeBank
from EraNavegacion.core.models import DecisionTrace
from EraNavegacion.core.settings import BankSettings, ControllerConfig
from shared.utils.helpers import safe_mean
from shared.utils.logger import get_logger

logger = get_logger("Adaptation")


@dataclass
class AdaptationReport:
    """Cambios aplicados al banco y métricas del episodio."""
    pruned: List[int] = field(default_factory=list)
    penalized: List[int] = field(default_factory=list)
    inserted: List[int] = field(default_factory=list)
    pruning_aborted: bool = False
    r_phys: float = 0.0
    j_perf: float = 0.0
    combined: float = 0.0

    def to_dict(self) -> Dict[str, object]:
        return {
            "pruned": len(self.pruned),
            "penalized": len(self.penalized),
            "inserted": len(self.inserted),
            "pruning_aborted": self.pruning_aborted,
            "r_phys": self.r_phys,
            "j_perf": self.j_perf,
            "combined": self.combined,
        }


def r_phys(trace: DecisionTrace, bank: KnowledgeBank) -> float:
    """
    Σ_i w_i·‖z_query − z_i‖ sobre los pesos finales (post-filtro, renormalizados).

    Las entradas que ya no están en el banco se omiten.

    Example:
        distancias (0.1, 0.5) con pesos (0.8, 0.2) -> 0.18
    """
    total = 0.0
    for entry_id, weight in trace.final_weights().items():
        if entry_id not in bank:
            continue
        total += weight * float(np.linalg.norm(trace.z - bank.get(entry_id).z))
    return total


def _implicated(trace: Optional[DecisionTrace], threshold: float) -> List[int]:
    if trace is None or not trace.clusters:
        return []
    return sorted(i for i, w in trace.final_weights().items() if w > threshold)


def episode_r_phys(buffer: ExperienceBuffer, bank: KnowledgeBank) -> float:
    """Media de R_phys sobre las decisiones del episodio que recuperaron del banco."""
    values = [r_phys(t, bank) for t in buffer.traces if t is not None and t.clusters]
    return safe_mean(values)


def adapt(bank: KnowledgeBank, buffer: ExperienceBuffer, encoder: EncoderParams,
          config: ControllerConfig = ControllerConfig(),
          bank_settings: Optional[BankSettings] = None) -> AdaptationReport:
    """
    Aplica las reglas de adaptación al cerrar un episodio.

    (a) Colisión: poda las entradas con peso final > umbral de implicación en
        la última decisión. Si esa decisión fue del experto no se poda nada;
        si la poda vaciaría el banco se aborta con aviso.
    (b) Advertencias: penaliza (×factor, con piso) las entradas implicadas en
        cada decisión con violación del radio de advertencia.
    (c) Éxito: inserta (encode(E_t), a_t, r=1, Online) para cada decisión cuyo
        vecino más cercano tenga similitud < umbral de novedad.

    Args:
        bank: Banco (fase de escritura exclusiva)
        buffer: Buffer cerrado del episodio
        encoder: Parámetros del codificador
        config: Umbrales y pesos de reporte
        bank_settings: Factor/piso de penalización e inmunidad del experto

    Returns:
        AdaptationReport
    """
    settings = bank_settings or bank.settings
    report = AdaptationReport()
    report.r_phys = episode_r_phys(buffer, bank)
    report.j_perf = j_perf(buffer)
    report.combined = config.lambda_p * report.r_phys - config.lambda_r * report.j_perf
    outcome = buffer.outcome
    if outcome is None:
        logger.warning(f"Episodio {buffer.episode} sin resultado; no se adapta el banco")
        return report

    def removable(entry_id: int) -> bool:
        if entry_id not in bank:
            return False
        return not (settings.expert_immunity and bank.get(entry_id).source == EntrySource.EXPERT)

    if outcome.terminal == TerminalStatus.COLLISION and buffer.traces:
        last_trace = buffer.traces[-1]
        targets = [i for i in _implicated(last_trace, config.implication_threshold) if removable(i)]
        if targets and len(targets) >= len(bank):
            report.pruning_aborted = True
            logger.warning(f"Episodio {buffer.episode}: la poda de {len(targets)} entradas vaciaría el banco; "
                           f"se omite la poda")
        else:
            for entry_id in targets:
                bank.prune(entry_id)
                report.pruned.append(entry_id)

    for status, trace in zip(buffer.records, buffer.traces):
        if not status.warning:
            continue
        for entry_id in _implicated(trace, config.implication_threshold):
            if entry_id in bank:
                bank.penalize(entry_id, settings.penalty_factor, settings.reliability_floor)
                report.penalized.append(entry_id)

    if outcome.terminal == TerminalStatus.SUCCESS:
        for status in buffer.records:
            z = encode(encoder, status.E_t)
            if bank.nearest_similarity(z) >= config.novelty_threshold:
                continue
            entry_id = bank.add(z, status.a_t, r=1.0, episode=status.episode, step=status.step,
                                source=EntrySource.ONLINE)
            report.inserted.append(entry_id)

    logger.debug(f"Episodio {buffer.episode}: podadas {len(report.pruned)}, penalizadas "
                 f"{len(report.penalized)}, insertadas {len(report.inserted)}")
    return report
