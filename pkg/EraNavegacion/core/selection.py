"""
Filtro de Lyapunov y Selección Bayesiana por Clusters (CBS).

Orden del pipeline: candidatos ponderados -> filtro ΔV < margen -> clusters
por coseno direccional -> cluster de mayor peso acumulado -> promedio
ponderado solo dentro del ganador.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from EraNavegacion.core.dynamics import TransitionModel, lyapunov_delta_batch
from EraNavegacion.core.enums import FallbackMode
from EraNavegacion.core.models import Candidate, Cluster, LatentCode, Vec3, clamp_norm
from EraNavegacion.core.retrieval import renormalize


@dataclass
class FilterResult:
    """Sobrevivientes del filtro con pesos renormalizados y el respaldo aplicado."""
    survivors: List[Candidate]
    weights: Dict[int, float]
    fallback: Optional[FallbackMode] = None
    expert_signal: bool = False
    margin: float = 0.0
    deltas: Dict[int, float] = field(default_factory=dict)


def filter_stable(candidates: Sequence[Candidate], actions: Mapping[int, Vec3], z: LatentCode,
                  model: TransitionModel, margin: float = 0.0,
                  fallback: FallbackMode = FallbackMode.MIN_DELTA_V) -> FilterResult:
    """
    Conserva los candidatos con ΔV(z, a_i) < margen.

    Marca ``delta_v`` y ``passed`` en cada candidato. Si ninguno sobrevive:
    MinDeltaV conserva solo el de menor ΔV (empate por id menor, ``passed``
    queda en False); VpfExpert no conserva ninguno y activa ``expert_signal``.

    Args:
        candidates: Candidatos con peso
        actions: Acción de cada id candidato
        z: Código de la consulta
        model: Dinámica latente
        margin: Margen de ΔV
        fallback: Respaldo si todos fallan

    Returns:
        FilterResult
    """
    ordered = list(candidates)
    A = np.stack([actions[c.entry_id] for c in ordered]) if ordered else np.zeros((0, 3))
    deltas = lyapunov_delta_batch(model, z, A)
    for cand, dv in zip(ordered, deltas):
        cand.delta_v = float(dv)
        cand.passed = bool(dv < margin)
    delta_map = {c.entry_id: c.delta_v for c in ordered}

    survivors = [c for c in ordered if c.passed]
    if survivors:
        return FilterResult(survivors=survivors, weights=renormalize(survivors), margin=margin, deltas=delta_map)
    if not ordered:
        return FilterResult(survivors=[], weights={}, margin=margin, deltas=delta_map)
    if fallback == FallbackMode.VPF_EXPERT:
        return FilterResult(survivors=[], weights={}, fallback=fallback, expert_signal=True,
                            margin=margin, deltas=delta_map)
    best = min(ordered, key=lambda c: (c.delta_v, c.entry_id))
    return FilterResult(survivors=[best], weights={best.entry_id: 1.0}, fallback=FallbackMode.MIN_DELTA_V,
                        margin=margin, deltas=delta_map)


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))


def cluster_actions(candidates: Sequence[Candidate], weights: Mapping[int, float],
                    actions: Mapping[int, Vec3], threshold: float) -> List[Cluster]:
    """
    Clustering greedy por líder en orden de peso descendente (empate por id menor).

    Un candidato se une al primer cluster cuyo líder tenga coseno ≥ umbral
    con su acción; si no, funda uno nuevo. Las acciones de magnitud cero
    forman su propio cluster.

    Args:
        candidates: Sobrevivientes
        weights: Peso renormalizado por id
        actions: Acción por id
        threshold: Umbral θ_c de coseno

    Returns:
        Clusters en orden de fundación
    """
    order = sorted(candidates, key=lambda c: (-weights[c.entry_id], c.entry_id))
    clusters: List[Cluster] = []
    zero_cluster: Optional[Cluster] = None
    for cand in order:
        action = np.asarray(actions[cand.entry_id], dtype=np.float64)
        w = weights[cand.entry_id]
        if not np.any(action):
            if zero_cluster is None:
                zero_cluster = Cluster(member_ids=[], weight=0.0, leader_id=cand.entry_id)
                clusters.append(zero_cluster)
            zero_cluster.member_ids.append(cand.entry_id)
            zero_cluster.weight += w
            continue
        for cluster in clusters:
            if cluster is zero_cluster:
                continue
            if _cosine(np.asarray(actions[cluster.leader_id], dtype=np.float64), action) >= threshold:
                cluster.member_ids.append(cand.entry_id)
                cluster.weight += w
                break
        else:
            clusters.append(Cluster(member_ids=[cand.entry_id], weight=w, leader_id=cand.entry_id))
    return clusters


def select_cluster(clusters: Sequence[Cluster]) -> int:
    """
    Índice del cluster con mayor peso acumulado W_c; empate por id fundador menor.

    Args:
        clusters: Al menos un cluster

    Returns:
        Índice del ganador en ``clusters``
    """
    if not clusters:
        raise ValueError("select_cluster requiere al menos un cluster")
    return min(range(len(clusters)), key=lambda i: (-clusters[i].weight, clusters[i].leader_id))


def fuse(cluster: Cluster, weights: Mapping[int, float], actions: Mapping[int, Vec3], v_max: float) -> Vec3:
    """
    a = Σ_{i∈c} (w_i / W_c)·a_i, recortada a v_max (uniforme si W_c = 0).

    Example:
        miembros (1,0,0) y (0,1,0) con 0.5/0.5  ->  (0.5, 0.5, 0)
    """
    members = cluster.member_ids
    w = np.array([weights[i] for i in members], dtype=np.float64)
    total = float(w.sum())
    share = w / total if total > 0.0 else np.full(len(members), 1.0 / len(members))
    A = np.stack([np.asarray(actions[i], dtype=np.float64) for i in members])
    return clamp_norm(share @ A, v_max)


def fuse_average(candidates: Sequence[Candidate], weights: Mapping[int, float],
                 actions: Mapping[int, Vec3], v_max: float) -> Vec3:
    """Promedio ponderado de todos los sobrevivientes (ablación sin CBS)."""
    everyone = Cluster(member_ids=[c.entry_id for c in candidates], weight=1.0,
                       leader_id=min(c.entry_id for c in candidates))
    return fuse(everyone, weights, actions, v_max)
