"""
Mundo cinemático 3D determinista: ego, intrusos tipo A/B/C, disparador de eventos
y clasificación de terminales.

Integración de Euler explícita con paso ``dt``. Todo el azar proviene del
generador ``world.rng`` creado a partir de ``EpisodeConfig.seed``.
"""
import dataclasses
from typing import Any, Dict, List, Optional

import numpy as np

from EraNavegacion.core import constants as C
from EraNavegacion.core.enums import IntruderKind, TerminalStatus
from EraNavegacion.core.models import (
    KIND_ORDER,
    EgoState,
    EpisodeOutcome,
    EventElement,
    EventList,
    GlobalState,
    Intruder,
    Vec3,
    WorldState,
    clamp_norm,
    to_list,
)
from EraNavegacion.core.seeding import rng_from_seed
from EraNavegacion.core.settings import EpisodeConfig
from shared.utils.exceptions import ConfigurationError, SimulationError
from shared.utils.logger import get_logger

logger = get_logger("World")


# ============================================================================
# GENERACIÓN
# ============================================================================

def _sample_goal(start: Vec3, cfg: EpisodeConfig, rng: np.random.Generator) -> Vec3:
    angle = rng.uniform(0.0, 2.0 * np.pi)
    radius = rng.uniform(cfg.goal_min_distance, cfg.goal_max_distance)
    dz = rng.uniform(-cfg.altitude_span, cfg.altitude_span)
    return start + np.array([radius * np.cos(angle), radius * np.sin(angle), dz])


def _sample_position(kind: IntruderKind, start: Vec3, goal: Vec3, cfg: EpisodeConfig,
                     rng: np.random.Generator) -> Vec3:
    """Posición candidata: tipo C sobre el segmento inicio-meta, el resto alrededor de la ruta."""
    route = goal - start
    lateral = np.cross(route, np.array([0.0, 0.0, 1.0]))
    lateral = lateral / np.linalg.norm(lateral)
    if kind == IntruderKind.TYPE_C:
        along = rng.uniform(0.2, 0.8)
        offset = rng.normal(0.0, 1.0)
        dz = rng.uniform(-0.5, 0.5) * cfg.altitude_span
    else:
        along = rng.uniform(0.1, 1.1)
        offset = rng.uniform(-1.0, 1.0) * cfg.trigger_radius * 1.5
        dz = rng.uniform(-cfg.altitude_span, cfg.altitude_span)
    return start + along * route + offset * lateral + np.array([0.0, 0.0, dz])


def _valid_spawn(position: Vec3, kind: IntruderKind, start: Vec3, goal: Vec3, cfg: EpisodeConfig) -> bool:
    if np.linalg.norm(position - start) <= cfg.warning_radius:
        return False
    if kind == IntruderKind.TYPE_C:
        return bool(np.linalg.norm(position - goal) > cfg.goal_radius + cfg.collision_radius)
    return True


def spawn_world(cfg: EpisodeConfig) -> WorldState:
    """
    Crea el mundo inicial de un episodio.

    El ego arranca en (0, 0, start_altitude) en reposo; la meta se muestrea en
    un anillo horizontal alrededor del inicio. Cada intruso se ubica fuera del
    radio de advertencia con hasta ``spawn_retries`` reintentos.

    Args:
        cfg: Configuración del episodio (validada)

    Returns:
        WorldState inicial

    Raises:
        ConfigurationError: Si algún intruso no puede ubicarse tras los reintentos
    """
    rng = rng_from_seed(cfg.seed)
    start = np.array([0.0, 0.0, cfg.start_altitude])
    goal = _sample_goal(start, cfg, rng)
    ego = EgoState(position=start.copy(), velocity=np.zeros(3), goal=goal)

    mix = np.array(cfg.kind_mix, dtype=np.float64)
    mix = mix / mix.sum()
    world = WorldState(time=0.0, ego=ego, intruders=[], rng=rng)
    for intruder_id in range(cfg.intruder_count):
        kind = KIND_ORDER[int(rng.choice(3, p=mix))]
        for _ in range(cfg.spawn_retries):
            position = _sample_position(kind, start, goal, cfg, rng)
            if _valid_spawn(position, kind, start, goal, cfg):
                break
        else:
            raise ConfigurationError(
                f"No se pudo ubicar el intruso {intruder_id} ({kind.value}) fuera del radio "
                f"de advertencia tras {cfg.spawn_retries} intentos (semilla {cfg.seed})"
            )
        velocity = np.zeros(3)
        if kind == IntruderKind.TYPE_A:
            direction = rng.normal(size=3)
            direction[2] *= 0.2
            direction = direction / max(float(np.linalg.norm(direction)), 1e-12)
            velocity = direction * rng.uniform(0.3, 1.0) * cfg.intruder_v_max
        world.intruders.append(Intruder(id=intruder_id, kind=kind, position=position, velocity=velocity))

    for intr in world.intruders:
        if intr.kind == IntruderKind.TYPE_B:
            intr.velocity = _pursuit_velocity(intr, world, cfg)
    _update_geometry(world, cfg)
    logger.debug(f"Mundo generado: semilla={cfg.seed}, intrusos={cfg.intruder_count}, meta={to_list(goal)}")
    return world


# ============================================================================
# DINÁMICA
# ============================================================================

def _pursuit_velocity(intruder: Intruder, world: WorldState, cfg: EpisodeConfig) -> Vec3:
    target = world.ego.position + cfg.lead_time * world.ego.velocity
    diff = target - intruder.position
    dist = float(np.linalg.norm(diff))
    if dist == 0.0:
        return np.zeros(3)
    speed = cfg.intruder_v_max * (0.5 + 0.5 * cfg.difficulty)
    return diff / dist * speed


def intruder_policy(intruder: Intruder, world: WorldState, cfg: EpisodeConfig,
                    rng: np.random.Generator) -> Vec3:
    """
    Velocidad del siguiente paso de un intruso según su arquetipo.

    Args:
        intruder: Intruso del mundo
        world: Estado actual
        cfg: Configuración del episodio
        rng: Generador del mundo

    Returns:
        Nueva velocidad:
            - Tipo A: velocidad previa + ruido gaussiano recortado a ±3σ, rapidez ≤ intruder_v_max
            - Tipo B: unitario hacia la posición adelantada del ego × intruder_v_max·(0.5+0.5ξ)
            - Tipo C: cero
    """
    if intruder.kind == IntruderKind.TYPE_C:
        return np.zeros(3)
    if intruder.kind == IntruderKind.TYPE_B:
        return _pursuit_velocity(intruder, world, cfg)
    sigma = cfg.typea_sigma
    noise = rng.normal(0.0, sigma, size=3)
    bound = C.LIMITE_SIGMAS_TIPO_A * sigma
    noise = np.clip(noise, -bound, bound)
    return clamp_norm(intruder.velocity + noise, cfg.intruder_v_max)


def compute_risk(intruder: Intruder, ego: EgoState, cfg: EpisodeConfig) -> float:
    """
    Riesgo en [0, 1] a partir del punto de máxima aproximación.

    risk = clip(1 − d_cpa / d_threshold, 0, 1) con d_cpa evaluada en el
    horizonte ``risk_horizon`` a velocidad relativa constante; si el intruso
    se aleja, d_cpa es la distancia actual.
    """
    rel_p = intruder.position - ego.position
    rel_v = intruder.velocity - ego.velocity
    speed_sq = float(rel_v @ rel_v)
    t_star = 0.0
    if speed_sq > 0.0:
        t_star = float(np.clip(-(rel_p @ rel_v) / speed_sq, 0.0, cfg.risk_horizon))
    d_cpa = float(np.linalg.norm(rel_p + rel_v * t_star))
    return float(np.clip(1.0 - d_cpa / cfg.trigger_radius, 0.0, 1.0))


def _update_geometry(world: WorldState, cfg: EpisodeConfig) -> None:
    for intr in world.intruders:
        intr.risk = compute_risk(intr, world.ego, cfg)
    seps = world.separations()
    if len(seps):
        current = float(seps.min())
        world.min_separation = min(world.min_separation, current)
        if current < cfg.warning_radius:
            world.had_warning = True


def step(world: WorldState, ego_action: Vec3, cfg: EpisodeConfig) -> WorldState:
    """
    Avanza el mundo un paso ``dt`` (modifica y retorna ``world``).

    Args:
        world: Estado actual
        ego_action: Velocidad comandada; se recorta a v_max
        cfg: Configuración del episodio

    Returns:
        El mismo WorldState avanzado

    Raises:
        SimulationError: Si la acción no es finita
    """
    action = np.asarray(ego_action, dtype=np.float64).reshape(-1)
    if action.shape != (3,) or not np.all(np.isfinite(action)):
        raise SimulationError(f"Acción no finita o de forma inválida: {ego_action!r}")
    action = clamp_norm(action, cfg.v_max)

    world.ego.velocity = action
    world.ego.position = world.ego.position + action * cfg.dt

    velocities = [intruder_policy(intr, world, cfg, world.rng) for intr in world.intruders]
    for intr, velocity in zip(world.intruders, velocities):
        intr.velocity = velocity
        intr.position = intr.position + velocity * cfg.dt

    world.time += cfg.dt
    world.steps += 1
    _update_geometry(world, cfg)
    return world


# ============================================================================
# EVENTOS Y TERMINALES
# ============================================================================

def global_state(world: WorldState) -> GlobalState:
    """Estado global del ego: velocidad, rapidez, unitario y distancia a la meta."""
    to_goal = world.ego.goal - world.ego.position
    distance = float(np.linalg.norm(to_goal))
    unit = to_goal / distance if distance > 0.0 else np.zeros(3)
    velocity = world.ego.velocity.copy()
    return GlobalState(self_velocity=velocity, speed=float(np.linalg.norm(velocity)),
                       target_unit=unit, target_distance=distance)


def observe(world: WorldState, cfg: EpisodeConfig) -> EventList:
    """
    Lista de eventos en el instante actual (puede estar vacía).

    Incluye los intrusos con d < trigger_radius; con ``risk_trigger`` activo
    también los de riesgo ≥ umbral dentro del radio semántico extendido.
    """
    elements: List[EventElement] = []
    seps = world.separations()
    semantic_radius = C.FACTOR_RADIO_SEMANTICO * cfg.trigger_radius
    for intr, dist in zip(world.intruders, seps):
        inside = dist < cfg.trigger_radius
        if not inside and cfg.risk_trigger is not None:
            inside = dist < semantic_radius and intr.risk >= cfg.risk_trigger
        if not inside:
            continue
        elements.append(EventElement(
            object_id=intr.id,
            rel_position=intr.position - world.ego.position,
            rel_velocity=intr.velocity - world.ego.velocity,
            kind=intr.kind,
            risk=intr.risk,
        ))
    return EventList(elements=tuple(elements), global_state=global_state(world), timestamp=world.time)


def sense_events(world: WorldState, cfg: EpisodeConfig) -> Optional[EventList]:
    """
    Disparador de eventos: EventList si algún intruso está dentro del umbral, None si no.

    Args:
        world: Estado actual
        cfg: Configuración del episodio

    Returns:
        EventList con al menos un elemento, o None (tracker no activado)
    """
    E = observe(world, cfg)
    return E if len(E) else None


def classify(world: WorldState, cfg: EpisodeConfig, steps: int,
             decision_steps: int = 0, wall_reaction_ms: float = 0.0) -> Optional[EpisodeOutcome]:
    """
    Determina si el episodio terminó.

    Precedencia: Collision > Success > Timeout. Depende solo de la geometría,
    no del orden de la lista de intrusos.

    Args:
        world: Estado actual
        cfg: Configuración del episodio
        steps: Pasos de simulación ejecutados
        decision_steps: Decisiones disparadas (se copia al resultado)
        wall_reaction_ms: Latencia media por decisión (se copia al resultado)

    Returns:
        EpisodeOutcome si es terminal, None si sigue en curso
    """
    seps = world.separations()
    current = float(seps.min()) if len(seps) else float("inf")
    terminal: Optional[TerminalStatus] = None
    if current < cfg.collision_radius:
        terminal = TerminalStatus.COLLISION
    elif np.linalg.norm(world.ego.position - world.ego.goal) < cfg.goal_radius:
        terminal = TerminalStatus.SUCCESS
    elif steps >= cfg.max_sim_steps:
        terminal = TerminalStatus.TIMEOUT
    if terminal is None:
        return None
    return EpisodeOutcome(
        terminal=terminal,
        had_warning=world.had_warning or current < cfg.warning_radius,
        decision_steps=int(decision_steps),
        min_separation=min(world.min_separation, current),
        wall_reaction_ms=float(wall_reaction_ms),
        sim_steps=int(steps),
        seed=int(cfg.seed),
    )


def step_record(world: WorldState, action: Vec3, triggered: bool) -> Dict[str, Any]:
    """Registro JSONL de trayectoria para un paso de simulación."""
    return {
        "t": float(world.time),
        "ego": to_list(world.ego.position),
        "vel": to_list(world.ego.velocity),
        "intruders": [intr.to_dict() for intr in world.intruders],
        "action": to_list(action),
        "triggered": bool(triggered),
    }


def copy_world(world: WorldState) -> WorldState:
    """Copia profunda del mundo, incluido el estado del generador."""
    rng = np.random.Generator(np.random.PCG64())
    rng.bit_generator.state = world.rng.bit_generator.state
    return dataclasses.replace(
        world,
        ego=EgoState(world.ego.position.copy(), world.ego.velocity.copy(), world.ego.goal.copy()),
        intruders=[dataclasses.replace(i, position=i.position.copy(), velocity=i.velocity.copy())
                   for i in world.intruders],
        rng=rng,
    )
