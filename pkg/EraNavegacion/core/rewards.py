"""Recompensa por transición usada en los códigos de estado."""
import numpy as np

from EraNavegacion.core.models import Vec3, WorldState
from EraNavegacion.core.settings import ControllerConfig, EpisodeConfig


def progress(prev: WorldState, next_world: WorldState) -> float:
    """Metros ganados hacia la meta entre dos estados consecutivos."""
    before = float(np.linalg.norm(prev.ego.position - prev.ego.goal))
    after = float(np.linalg.norm(next_world.ego.position - next_world.ego.goal))
    return before - after


def reward(prev: WorldState, action: Vec3, next_world: WorldState, cfg: EpisodeConfig,
           controller: ControllerConfig = ControllerConfig()) -> float:
    """
    Recompensa de la transición prev -> next.

    - Colisión terminal: −1 (sin otros términos)
    - Éxito terminal: +1 más el término de progreso
    - En otro caso: −0.1 si hubo violación del radio de advertencia en este
      paso, más 0.01·(metros de progreso hacia la meta)

    Args:
        prev: Estado antes del paso
        action: Acción aplicada
        next_world: Estado después del paso
        cfg: Configuración del episodio
        controller: Constantes de recompensa

    Returns:
        Recompensa finita

    Example:
        crucero sin eventos avanzando 0.25 m -> 0.0025
    """
    seps = next_world.separations()
    closest = float(seps.min()) if len(seps) else float("inf")
    if closest < cfg.collision_radius:
        return float(controller.collision_reward)
    shaped = controller.progress_gain * progress(prev, next_world)
    if np.linalg.norm(next_world.ego.position - next_world.ego.goal) < cfg.goal_radius:
        return float(controller.success_reward + shaped)
    if closest < cfg.warning_radius:
        shaped += controller.warning_penalty
    return float(shaped)
