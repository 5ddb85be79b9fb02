"""Bucle de episodio: step / sense / decide / classify hasta un estado terminal."""
import dataclasses
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from EraNavegacion.core.experience import ExperienceBuffer, record_status
from EraNavegacion.core.models import EpisodeOutcome, StatusCode
from EraNavegacion.core.rewards import reward
from EraNavegacion.core.settings import ControllerConfig, EpisodeConfig
from EraNavegacion.core.world import classify, copy_world, observe, sense_events, spawn_world, step, step_record
from shared.utils.exceptions import EpisodeAbortedError, SimulationError
from shared.utils.logger import get_logger

logger = get_logger("EpisodeRunner")


@dataclass
class EpisodeResult:
    """Resultado completo: métricas, buffer de códigos de estado y trayectoria."""
    outcome: EpisodeOutcome
    buffer: ExperienceBuffer
    trajectory: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def statuses(self) -> List[StatusCode]:
        return self.buffer.records


def _act(policy, E, world):
    if hasattr(policy, "act"):
        return policy.act(E, world)
    return policy(E, world), None


def execute_episode(policy, cfg: EpisodeConfig, episode: int = 0,
                    controller_config: ControllerConfig = ControllerConfig(),
                    record_trajectory: bool = True, report_timing: bool = True) -> EpisodeResult:
    """
    Ejecuta un episodio completo.

    Args:
        policy: Objeto con ``act(E, world) -> (acción, traza)`` o función ``(E, world) -> acción``
        cfg: Configuración del episodio
        episode: Índice del episodio (etiqueta de los códigos de estado)
        controller_config: Constantes de recompensa
        record_trajectory: Si True guarda un registro por paso de simulación
        report_timing: Si False la latencia de reacción se reporta como 0.0

    Returns:
        EpisodeResult

    Raises:
        EpisodeAbortedError: Si la política lanza una excepción o retorna una acción inválida
    """
    world = spawn_world(cfg)
    buffer = ExperienceBuffer(episode=episode)
    trajectory: List[Dict[str, Any]] = []
    latencies: List[float] = []

    outcome = classify(world, cfg, world.steps)
    while outcome is None:
        E = sense_events(world, cfg)
        prev = copy_world(world) if E is not None else None
        t0 = time.perf_counter()
        try:
            action, trace = _act(policy, E, world)
            action = np.asarray(action, dtype=np.float64)
        except Exception as e:
            logger.error(f"Política abortó el episodio {episode} (semilla {cfg.seed}) en el paso {world.steps}: {e}")
            raise EpisodeAbortedError(f"La política falló en el paso {world.steps}: {e}",
                                      seed=cfg.seed, step=world.steps) from e
        elapsed = time.perf_counter() - t0
        try:
            step(world, action, cfg)
        except SimulationError as e:
            raise EpisodeAbortedError(f"Acción inválida en el paso {world.steps}: {e}",
                                      seed=cfg.seed, step=world.steps) from e
        if record_trajectory:
            trajectory.append(step_record(world, action, E is not None))
        outcome = classify(world, cfg, world.steps)
        if E is None:
            continue

        latencies.append(elapsed)
        seps = world.separations()
        warning = bool(len(seps) and float(seps.min()) < cfg.warning_radius)
        r_t = reward(prev, action, world, cfg, controller_config)
        E_next = None if outcome is not None else observe(world, cfg)
        record_status(buffer, E, world.ego.velocity.copy(), r_t, E_next, warning=warning,
                      trace=trace, step=world.steps - 1)

    reaction_ms = float(np.mean(latencies) * 1000.0) if latencies and report_timing else 0.0
    outcome = dataclasses.replace(outcome, decision_steps=len(buffer), wall_reaction_ms=reaction_ms)
    buffer.close(outcome)
    logger.debug(f"Episodio {episode} (semilla {cfg.seed}): {outcome.terminal.value}, "
                 f"{outcome.decision_steps} decisiones, {outcome.sim_steps} pasos")
    return EpisodeResult(outcome=outcome, buffer=buffer, trajectory=trajectory)


def run_episode(policy, cfg: EpisodeConfig, episode: int = 0,
                controller_config: ControllerConfig = ControllerConfig()):
    """
    Forma tupla de ``execute_episode``.

    Returns:
        (EpisodeOutcome, lista de StatusCode, trayectoria)
    """
    result = execute_episode(policy, cfg, episode=episode, controller_config=controller_config)
    return result.outcome, result.statuses, result.trajectory
