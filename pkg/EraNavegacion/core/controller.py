"""
Controlador ERA: encode -> retrieve -> filtro de Lyapunov -> cluster -> select -> fuse.

Un escudo cede la acción al experto VPF cuando un intruso ya está dentro del
radio de advertencia o cuando ningún recuerdo se parece lo suficiente a la
consulta; la traza registra el motivo.

``decide`` es de solo lectura sobre el banco: repetir la llamada con la misma
instantánea, parámetros y lista de eventos produce exactamente la misma acción.
"""
from __future__ import annotations

import time
from typing import Dict, List, Optional, Tuple

import numpy as np

from EraNavegacion.core.dynamics import TransitionModel
from EraNavegacion.core.encoder import EncoderParams, encode
from EraNavegacion.core.enums import SelectionMode, ShieldReason
from EraNavegacion.core.knowledge_bank import KnowledgeBank
from EraNavegacion.core.models import Candidate, Cluster, DecisionTrace, EventList, Vec3
from EraNavegacion.core.retrieval import compute_weights
from EraNavegacion.core.selection import cluster_actions, filter_stable, fuse, fuse_average, select_cluster
from EraNavegacion.core.settings import ControllerConfig, EpisodeConfig
from EraNavegacion.core.vpf import vpf_from_events
from shared.utils.exceptions import EmptyBankError, EncoderError
from shared.utils.logger import get_logger

logger = get_logger("EraController")

STAGES = ("encode", "retrieve", "stabilize", "fuse", "end_to_end")


class EraController:
    """Pipeline de decisión sobre un banco, un codificador y una dinámica latente."""

    def __init__(self, bank: KnowledgeBank, encoder: EncoderParams, model: TransitionModel,
                 config: ControllerConfig, episode_config: EpisodeConfig,
                 report_timing: bool = True) -> None:
        """
        Inicializa el controlador.

        Args:
            bank: Banco de conocimiento (instantánea de solo lectura durante el episodio)
            encoder: Parámetros del codificador
            model: Dinámica latente proyectada
            config: Configuración del controlador
            episode_config: Configuración del mundo (v_max y experto de respaldo)
            report_timing: Si False la latencia de la traza se reporta como 0.0
        """
        self.bank = bank
        self.encoder = encoder
        self.model = model
        self.config = config
        self.episode_config = episode_config
        self.report_timing = report_timing
        self.last_stage_s: Dict[str, float] = {}

    def decide(self, E: EventList) -> Tuple[Vec3, DecisionTrace]:
        """
        Decide una acción para la lista de eventos disparada.

        Args:
            E: Lista de eventos con al menos un elemento

        Returns:
            Tupla (acción de velocidad, traza completa de la decisión)

        Raises:
            EmptyBankError: Si el banco está vacío
            EncoderError: Si la lista de eventos no tiene elementos
        """
        t0 = time.perf_counter()
        if E is None or len(E) == 0:
            raise EncoderError("decide requiere una lista de eventos con al menos un elemento")
        if len(self.bank) == 0:
            raise EmptyBankError("El banco de conocimiento está vacío")
        cfg = self.config
        v_max = self.episode_config.v_max

        z = encode(self.encoder, E)
        t1 = time.perf_counter()

        result = self.bank.search(z, cfg.retrieval.k, use_ann=cfg.use_ann)
        candidates = result.candidates
        reliabilities = [self.bank.entries[c.entry_id].r for c in candidates]
        compute_weights(candidates, reliabilities, cfg.retrieval)
        actions = {c.entry_id: self.bank.entries[c.entry_id].a for c in candidates}
        t2 = time.perf_counter()

        filtered = filter_stable(candidates, actions, z, self.model, cfg.delta_v_margin, cfg.fallback)
        t3 = time.perf_counter()

        shield = self.shield_reason(E, candidates)
        clusters: List[Cluster] = []
        winner = -1
        if shield is not None or filtered.expert_signal:
            action = vpf_from_events(E, self.episode_config)
        elif cfg.selection == SelectionMode.AVERAGE:
            survivors = filtered.survivors
            clusters = [Cluster(member_ids=[c.entry_id for c in survivors],
                                weight=float(sum(filtered.weights.values())),
                                leader_id=min(c.entry_id for c in survivors))]
            winner = 0
            action = fuse_average(survivors, filtered.weights, actions, v_max)
        else:
            clusters = cluster_actions(filtered.survivors, filtered.weights, actions, cfg.cluster_threshold)
            winner = select_cluster(clusters)
            action = fuse(clusters[winner], filtered.weights, actions, v_max)
        t4 = time.perf_counter()

        self.last_stage_s = {
            "encode": t1 - t0, "retrieve": t2 - t1, "stabilize": t3 - t2,
            "fuse": t4 - t3, "end_to_end": t4 - t0,
        }
        trace = DecisionTrace(
            z=z,
            candidates=candidates,
            clusters=clusters,
            winner=winner,
            action=action,
            latency_ms=(t4 - t0) * 1000.0 if self.report_timing else 0.0,
            margin=cfg.delta_v_margin,
            fallback=filtered.fallback.value if filtered.fallback is not None else None,
            selection=cfg.selection.value,
            shield=shield.value if shield is not None else None,
        )
        return action, trace

    def shield_reason(self, E: EventList, candidates: List[Candidate]) -> Optional[ShieldReason]:
        """
        Motivo para ceder la decisión al experto VPF, o None si decide la memoria.

        Args:
            E: Lista de eventos de la decisión
            candidates: Candidatos recuperados

        Returns:
            PROXIMITY si algún elemento está dentro del radio de advertencia (con
            ``proximity_shield``), NOVELTY si la mejor similitud es menor que
            ``min_similarity``
        """
        if self.config.proximity_shield:
            nearest = min(float(np.linalg.norm(e.rel_position)) for e in E.elements)
            if nearest < self.episode_config.warning_radius:
                return ShieldReason.PROXIMITY
        if not candidates or max(c.sim for c in candidates) < self.config.min_similarity:
            return ShieldReason.NOVELTY
        return None

    def __call__(self, E: Optional[EventList], world) -> Vec3:
        action, _ = self.decide(E)
        return action


def decide(bank: KnowledgeBank, encoder: EncoderParams, model: TransitionModel,
           cfg: ControllerConfig, E: EventList,
           episode_config: Optional[EpisodeConfig] = None) -> Tuple[Vec3, DecisionTrace]:
    """Forma funcional de ``EraController.decide``."""
    controller = EraController(bank, encoder, model, cfg, episode_config or EpisodeConfig())
    return controller.decide(E)


def replay_action(trace: DecisionTrace, bank: KnowledgeBank, v_max: float) -> Optional[Vec3]:
    """
    Recalcula la acción fusionada a partir de la traza y del banco serializado.

    Args:
        trace: Traza registrada
        bank: Banco con las entradas de la traza
        v_max: Velocidad máxima

    Returns:
        Acción recalculada, o None si la decisión usó al experto VPF
    """
    if trace.winner < 0 or not trace.clusters:
        return None
    weights = trace.final_weights()
    actions = {i: bank.get(i).a for i in weights}
    if trace.selection == SelectionMode.AVERAGE.value:
        survivors = trace.survivors()
        return fuse_average(survivors, weights, actions, v_max)
    return fuse(trace.clusters[trace.winner], weights, actions, v_max)
