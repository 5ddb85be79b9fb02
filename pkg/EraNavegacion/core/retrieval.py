"""Pesos de recuperación: softmax de similitud/temperatura más confiabilidad logarítmica."""
from typing import Dict, List, Sequence

import numpy as np

from EraNavegacion.core.models import Candidate
from EraNavegacion.core.settings import RetrievalParams
from shared.utils.exceptions import BankError, InvalidEntryError


def compute_weights(candidates: Sequence[Candidate], reliabilities: Sequence[float],
                    params: RetrievalParams) -> List[Candidate]:
    """
    Asigna w_i = softmax(sim_i/τ + α·ln r_i) sobre el conjunto de candidatos.

    Args:
        candidates: Candidatos recuperados (no vacío)
        reliabilities: Confiabilidad de cada candidato, mismo orden
        params: k, τ, α

    Returns:
        Los mismos candidatos con ``weight`` asignado (suma 1)

    Raises:
        BankError: Si no hay candidatos
        InvalidEntryError: Si alguna confiabilidad es ≤ 0

    Example:
        sims (0.9, 0.7), r = (1, 1), τ = 0.1, α = 1  ->  (0.8808, 0.1192)
    """
    if not candidates:
        raise BankError("No hay candidatos para ponderar")
    r = np.asarray(reliabilities, dtype=np.float64)
    if len(r) != len(candidates):
        raise BankError(f"{len(candidates)} candidatos y {len(r)} confiabilidades")
    if np.any(r <= 0.0):
        raise InvalidEntryError("Confiabilidad ≤ 0: el logaritmo no está definido")
    sims = np.array([c.sim for c in candidates], dtype=np.float64)
    logits = sims / params.tau + params.alpha * np.log(r)
    logits -= logits.max()
    weights = np.exp(logits)
    weights /= weights.sum()
    for cand, w in zip(candidates, weights):
        cand.weight = float(w)
    return list(candidates)


def renormalize(candidates: Sequence[Candidate]) -> Dict[int, float]:
    """Pesos renormalizados de un subconjunto (uniforme si la masa es cero)."""
    total = float(sum(c.weight for c in candidates))
    if total <= 0.0:
        return {c.entry_id: 1.0 / len(candidates) for c in candidates} if candidates else {}
    return {c.entry_id: c.weight / total for c in candidates}
