"""
Campo Potencial Virtual (VPF): supervisor experto que genera las demostraciones.

U = U_att + Σ U_rep con
    U_att = ½·k_att·|p − goal|²
    U_rep = ½·k_rep·(1/ρ − 1/ρ₀)²   si ρ < ρ₀, 0 en otro caso

La acción es −∇U recortada a v_max; con k_vortex > 0 se suma un término de
vórtice tangencial (desactivado por defecto).
"""
from typing import Iterable, Optional

import numpy as np

from EraNavegacion.core.models import EventList, Vec3, WorldState, clamp_norm
from EraNavegacion.core.settings import EpisodeConfig

_EJE_Z = np.array([0.0, 0.0, 1.0])
_EJE_X = np.array([1.0, 0.0, 0.0])


def _obstacle_matrix(obstacles: Iterable[Vec3]) -> np.ndarray:
    rows = [np.asarray(o, dtype=np.float64) for o in obstacles]
    return np.stack(rows) if rows else np.zeros((0, 3))


def potential(position: Vec3, goal: Vec3, obstacles: Iterable[Vec3], cfg: EpisodeConfig) -> float:
    """
    Evalúa el potencial escalar U en una posición.

    Args:
        position: Posición del ego
        goal: Meta
        obstacles: Posiciones de los intrusos
        cfg: Configuración (ganancias y radio de influencia = radio de advertencia)

    Returns:
        Valor de U (inf si coincide exactamente con un obstáculo)
    """
    u = 0.5 * cfg.k_att * float(np.sum((position - goal) ** 2))
    rho0 = cfg.warning_radius
    for obs in _obstacle_matrix(obstacles):
        rho = float(np.linalg.norm(position - obs))
        if rho == 0.0:
            return float("inf")
        if rho < rho0:
            u += 0.5 * cfg.k_rep * (1.0 / rho - 1.0 / rho0) ** 2
    return u


def _repulsion_terms(position: Vec3, obstacles: np.ndarray, cfg: EpisodeConfig,
                     goal: Vec3) -> np.ndarray:
    """Fuerzas repulsivas (−∇U_rep) por obstáculo, forma (n, 3)."""
    forces = np.zeros_like(obstacles)
    rho0 = cfg.warning_radius
    for i, obs in enumerate(obstacles):
        diff = position - obs
        rho = float(np.linalg.norm(diff))
        if rho >= rho0:
            continue
        if rho == 0.0:
            # Superposición exacta: dirección opuesta a la meta, magnitud máxima
            away = position - goal
            norm = float(np.linalg.norm(away))
            direction = away / norm if norm > 0.0 else _EJE_X
            forces[i] = cfg.repulsion_cap * direction
            continue
        magnitude = cfg.k_rep * (1.0 / rho - 1.0 / rho0) / (rho * rho)
        forces[i] = magnitude * diff / rho
    return forces


def potential_gradient(position: Vec3, goal: Vec3, obstacles: Iterable[Vec3],
                       cfg: EpisodeConfig) -> Vec3:
    """
    Gradiente analítico ∇U.

    Args:
        position: Posición del ego
        goal: Meta
        obstacles: Posiciones de los intrusos
        cfg: Configuración

    Returns:
        ∇U evaluado en ``position``
    """
    obs = _obstacle_matrix(obstacles)
    grad = cfg.k_att * (position - goal)
    if len(obs):
        grad = grad - _repulsion_terms(position, obs, cfg, goal).sum(axis=0)
    return grad


def vortex_term(position: Vec3, goal: Vec3, obstacles: Iterable[Vec3], cfg: EpisodeConfig) -> Vec3:
    """
    Componente tangencial proporcional a la repulsión de cada obstáculo.

    La tangente es ẑ × n̂ (n̂ apunta desde el obstáculo al ego); si n̂ es
    vertical se usa x̂ × n̂. Rompe el mínimo local del caso colineal.
    """
    obs = _obstacle_matrix(obstacles)
    total = np.zeros(3)
    if cfg.k_vortex == 0.0 or not len(obs):
        return total
    forces = _repulsion_terms(position, obs, cfg, goal)
    for force in forces:
        magnitude = float(np.linalg.norm(force))
        if magnitude == 0.0:
            continue
        normal = force / magnitude
        tangent = np.cross(_EJE_Z, normal)
        if np.linalg.norm(tangent) < 1e-9:
            tangent = np.cross(_EJE_X, normal)
        tangent = tangent / np.linalg.norm(tangent)
        total += cfg.k_vortex * magnitude * tangent
    return total


def vpf_velocity(position: Vec3, goal: Vec3, obstacles: Iterable[Vec3], cfg: EpisodeConfig) -> Vec3:
    """
    Velocidad comandada del experto: −∇U + vórtice, recortada a v_max.

    Args:
        position: Posición del ego
        goal: Meta
        obstacles: Posiciones de los intrusos
        cfg: Configuración

    Returns:
        Acción de velocidad con norma ≤ v_max
    """
    obs = _obstacle_matrix(obstacles)
    action = -potential_gradient(position, goal, obs, cfg) + vortex_term(position, goal, obs, cfg)
    return clamp_norm(action, cfg.v_max)


def vpf_action(world: WorldState, cfg: EpisodeConfig) -> Vec3:
    """Acción del experto VPF sobre el estado completo del mundo."""
    return vpf_velocity(world.ego.position, world.ego.goal,
                        [intr.position for intr in world.intruders], cfg)


def attraction_action(world: WorldState, cfg: EpisodeConfig) -> Vec3:
    """Solo atracción hacia la meta (usada cuando el disparador no se activa)."""
    return clamp_norm(-cfg.k_att * (world.ego.position - world.ego.goal), cfg.v_max)


def vpf_from_events(E: Optional[EventList], cfg: EpisodeConfig) -> Vec3:
    """
    Acción VPF reconstruida desde una lista de eventos en el marco del ego.

    El ego está en el origen, la meta en target_unit·target_distance y los
    obstáculos en sus posiciones relativas. Coincide con ``vpf_action`` siempre
    que todos los intrusos dentro del radio de advertencia estén en la lista.
    """
    if E is None:
        return np.zeros(3)
    goal = E.global_state.target_unit * E.global_state.target_distance
    return vpf_velocity(np.zeros(3), goal, [e.rel_position for e in E.elements], cfg)
