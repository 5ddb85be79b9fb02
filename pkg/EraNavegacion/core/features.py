"""
Featurización de listas de eventos y distancia física entre entornos.

Fila por elemento (ancho 10): posición relativa / d_threshold (3),
velocidad relativa / v_max (3), one-hot del tipo (3), riesgo.
Vector global (ancho 8): velocidad propia / v_max (3), rapidez / v_max,
unitario a la meta (3), distancia a la meta / escala de distancia.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from scipy import sparse

from EraNavegacion.core import constants as C
from EraNavegacion.core.models import EventList
from EraNavegacion.core.settings import EncoderShape, EpisodeConfig
from shared.utils.exceptions import EncoderError


@dataclass(frozen=True)
class FeatureScales:
    """Escalas de normalización; se guardan junto a los pesos del codificador."""
    distance_scale: float = C.RADIO_DISPARO
    velocity_scale: float = C.V_MAX_DEFAULT
    target_scale: float = C.META_DISTANCIA_MAX

    @classmethod
    def from_config(cls, cfg: EpisodeConfig) -> "FeatureScales":
        return cls(distance_scale=cfg.trigger_radius, velocity_scale=cfg.v_max,
                   target_scale=cfg.goal_max_distance)

    def to_dict(self) -> Dict[str, float]:
        return {"distance_scale": float(self.distance_scale), "velocity_scale": float(self.velocity_scale),
                "target_scale": float(self.target_scale)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FeatureScales":
        return cls(**{k: float(v) for k, v in data.items()})


def featurize(E: EventList, scales: FeatureScales) -> Tuple[np.ndarray, np.ndarray]:
    """
    Convierte una lista de eventos en matriz de elementos y vector global.

    Args:
        E: Lista de eventos (puede estar vacía)
        scales: Escalas de normalización

    Returns:
        Tupla (matriz N×10, vector de 8)

    Raises:
        EncoderError: Si algún componente no es finito

    Example:
        X, g = featurize(E, FeatureScales(distance_scale=10.0))
    """
    rows = np.zeros((len(E.elements), C.ANCHO_ELEMENTO))
    for i, element in enumerate(E.elements):
        rows[i, 0:3] = element.rel_position / scales.distance_scale
        rows[i, 3:6] = element.rel_velocity / scales.velocity_scale
        rows[i, 6:9] = element.kind_onehot
        rows[i, 9] = element.risk
    gs = E.global_state
    g = np.empty(C.ANCHO_GLOBAL)
    g[0:3] = gs.self_velocity / scales.velocity_scale
    g[3] = gs.speed / scales.velocity_scale
    g[4:7] = gs.target_unit
    g[7] = gs.target_distance / scales.target_scale
    if not (np.all(np.isfinite(rows)) and np.all(np.isfinite(g))):
        raise EncoderError(f"Lista de eventos con componentes no finitos (t={E.timestamp})")
    return rows, g


def featurize_batch(events: Sequence[EventList], scales: FeatureScales) -> Tuple[np.ndarray, np.ndarray, sparse.csr_matrix]:
    """
    Featuriza un lote y construye la matriz dispersa de promedio por segmento.

    Args:
        events: Listas de eventos
        scales: Escalas de normalización

    Returns:
        Tupla (filas apiladas M×10, globales B×8, matriz de promedio B×M)
    """
    blocks: List[np.ndarray] = []
    globals_: List[np.ndarray] = []
    for E in events:
        rows, g = featurize(E, scales)
        blocks.append(rows)
        globals_.append(g)
    return stack_features(blocks, globals_)


def stack_features(blocks: Sequence[np.ndarray], globals_: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray, sparse.csr_matrix]:
    """Apila filas ya featurizadas y arma la matriz de promedio por segmento."""
    counts = np.array([len(b) for b in blocks], dtype=np.int64)
    X = np.concatenate(blocks, axis=0) if len(blocks) and counts.sum() else np.zeros((0, C.ANCHO_ELEMENTO))
    G = np.stack(globals_) if len(globals_) else np.zeros((0, C.ANCHO_GLOBAL))
    segment = np.repeat(np.arange(len(blocks)), counts)
    values = np.repeat(1.0 / np.maximum(counts, 1), counts)
    averaging = sparse.csr_matrix((values, (segment, np.arange(len(segment)))),
                                  shape=(len(blocks), len(segment)))
    return X, G, averaging


def _element_distances(Xi: np.ndarray, Xj: np.ndarray, velocity_weight: float) -> np.ndarray:
    dp = np.linalg.norm(Xi[:, None, 0:3] - Xj[None, :, 0:3], axis=2)
    dv = np.linalg.norm(Xi[:, None, 3:6] - Xj[None, :, 3:6], axis=2)
    return dp + velocity_weight * dv


def chamfer_features(Xi: np.ndarray, gi: np.ndarray, Xj: np.ndarray, gj: np.ndarray,
                     empty_match_cost: float = C.COSTO_SIN_PAREJA,
                     velocity_weight: float = C.PESO_VELOCIDAD_CHAMFER,
                     global_weight: float = C.PESO_GLOBAL_CHAMFER) -> float:
    """Distancia física sobre features ya calculadas (ver ``d_phys_env``)."""
    n, m = len(Xi), len(Xj)
    if n and m:
        dist = _element_distances(Xi, Xj, velocity_weight)
        set_term = float(dist.min(axis=1).sum() + dist.min(axis=0).sum())
    else:
        set_term = empty_match_cost * (n + m)
    return set_term + global_weight * float(np.linalg.norm(gi - gj))


def d_phys_env(E_i: EventList, E_j: EventList, scales: FeatureScales,
               shape: EncoderShape = EncoderShape()) -> float:
    """
    Distancia física entre dos entornos: Chamfer simétrica + término global.

    Cada elemento suma la distancia a su pareja más cercana del otro conjunto,
    con δ = |Δp|/d_threshold + 0.5·|Δv|/v_max. Si un conjunto está vacío cada
    elemento del otro cuesta ``empty_match_cost``.

    Args:
        E_i: Primera lista de eventos
        E_j: Segunda lista de eventos
        scales: Escalas de normalización
        shape: Pesos de la distancia

    Returns:
        Distancia ≥ 0 (0 para listas idénticas)
    """
    Xi, gi = featurize(E_i, scales)
    Xj, gj = featurize(E_j, scales)
    return chamfer_features(Xi, gi, Xj, gj, shape.empty_match_cost, shape.velocity_weight, shape.global_weight)
