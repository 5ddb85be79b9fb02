"""Planificador de dificultad: currículo adversarial y perfiles fijos del benchmark."""
import math
from typing import Tuple

from EraNavegacion.core import constants as C
from EraNavegacion.core.enums import Difficulty
from EraNavegacion.core.seeding import derive_seed
from EraNavegacion.core.settings import EpisodeConfig
from shared.utils.exceptions import ConfigurationError


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def kind_mix(xi: float) -> Tuple[float, float, float]:
    """
    Proporciones (A, B, C) de arquetipos para una dificultad ξ.

    Los interceptores tipo B aparecen a partir de ξ = 0.3 y crecen
    linealmente hasta 0.6 en ξ = 1; los obstáculos estáticos bajan de 0.3 a 0.2.

    Args:
        xi: Dificultad en [0, 1]

    Returns:
        Tupla de probabilidades que suma 1
    """
    p_c = 0.3 - 0.1 * xi
    if xi < C.INICIO_TIPO_B:
        p_b = 0.0
    else:
        p_b = 0.1 + 0.5 * (xi - C.INICIO_TIPO_B) / (1.0 - C.INICIO_TIPO_B)
    p_a = 1.0 - p_b - p_c
    return (p_a, p_b, p_c)


def curriculum_xi(episode_idx: int, total: int = C.EPISODIOS_CURRICULO) -> float:
    """ξ = min(1, idx/(T−1)); con T = 1 siempre 1."""
    if total <= 1:
        return 1.0
    return min(1.0, episode_idx / (total - 1))


def curriculum(episode_idx: int, base: EpisodeConfig, total: int = C.EPISODIOS_CURRICULO) -> EpisodeConfig:
    """
    Configuración del episodio ``episode_idx`` del currículo.

    Args:
        episode_idx: Índice del episodio (≥ 0)
        base: Configuración base (su ``seed`` es la semilla global)
        total: Número de episodios T del currículo

    Returns:
        EpisodeConfig con ξ, densidad, velocidad, mezcla y semilla derivadas

    Raises:
        ConfigurationError: Si el índice es negativo

    Example:
        curriculum(0, base).intruder_count   # 5
        curriculum(99, base).intruder_count  # 25
    """
    if episode_idx < 0:
        raise ConfigurationError(f"episode_idx debe ser >= 0, se recibió {episode_idx}")
    xi = curriculum_xi(episode_idx, total)
    count = _round_half_up(C.INTRUSOS_MIN + (C.INTRUSOS_MAX - C.INTRUSOS_MIN) * xi)
    p_a, p_b, p_c = kind_mix(xi)
    return base.with_changes(
        difficulty=xi,
        intruder_count=count,
        intruder_v_max=base.intruder_v_max * (1.0 + C.GANANCIA_VELOCIDAD_CURRICULO * xi),
        mix_a=p_a,
        mix_b=p_b,
        mix_c=p_c,
        seed=derive_seed(base.seed, "world", episode_idx),
    )


def difficulty_config(difficulty: Difficulty, base: EpisodeConfig, seed: int) -> EpisodeConfig:
    """
    Configuración de dificultad fija (sin currículo) para el benchmark.

    Args:
        difficulty: Perfil easy/medium/hard/extreme
        base: Configuración base
        seed: Semilla del episodio

    Returns:
        EpisodeConfig del perfil
    """
    count, speed_scale, xi = C.PRESETS_DIFICULTAD[Difficulty(difficulty).value]
    p_a, p_b, p_c = kind_mix(xi)
    return base.with_changes(
        difficulty=xi,
        intruder_count=count,
        intruder_v_max=base.intruder_v_max * speed_scale,
        mix_a=p_a,
        mix_b=p_b,
        mix_c=p_c,
        seed=int(seed),
    )
