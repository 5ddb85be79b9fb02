"""
Dinámica latente lineal contractiva z_{t+1} = Ψ z_t + Γ a_t.

[Ψ Γ] se ajusta por mínimos cuadrados con regularización ridge (ecuaciones
normales) y Ψ se proyecta para que su norma espectral sea ≤ γ, lo que
garantiza ‖Ψz‖² < ‖z‖² para todo z ≠ 0 (energía V(z) = ‖z‖²).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from EraNavegacion.core import constants as C
from EraNavegacion.core.models import LatentCode, Vec3
from EraNavegacion.core.seeding import rng_from_seed
from shared.utils.exceptions import DynamicsFitError
from shared.utils.logger import get_logger

logger = get_logger("Dynamics")

# Rondas de iteración de potencia (cada una continúa desde el último vector) antes de recurrir a la SVD
RONDAS_VERIFICACION = 5
# Margen relativo al escalar Ψ
MARGEN_PROYECCION = 1e-9


@dataclass
class TransitionModel:
    """Operadores Ψ (d×d), Γ (d×3), cota de contracción γ y σ_max(Ψ) cacheada."""
    psi: np.ndarray
    gamma: np.ndarray
    contraction: float = C.GAMMA_CONTRACCION
    sigma_max: float = 0.0

    @property
    def latent(self) -> int:
        return int(self.psi.shape[0])

    @classmethod
    def zeros(cls, d: int = C.DIM_LATENTE, contraction: float = C.GAMMA_CONTRACCION) -> "TransitionModel":
        return cls(psi=np.zeros((d, d)), gamma=np.zeros((d, C.DIM_ACCION)), contraction=contraction, sigma_max=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "psi": self.psi.tolist(),
            "gamma": self.gamma.tolist(),
            "contraction": float(self.contraction),
            "sigma_max": float(self.sigma_max),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TransitionModel":
        return cls(
            psi=np.array(data["psi"], dtype=np.float64),
            gamma=np.array(data["gamma"], dtype=np.float64).reshape(-1, C.DIM_ACCION),
            contraction=float(data.get("contraction", C.GAMMA_CONTRACCION)),
            sigma_max=float(data["sigma_max"]),
        )


def _power_iteration(matrix: np.ndarray, start: np.ndarray, iterations: int,
                     tolerance: float) -> Tuple[float, np.ndarray, bool]:
    """Iteración de potencia sobre MᵀM; converge cuando el residuo ‖Gv − λv‖ ≤ tol·λ."""
    gram = matrix.T @ matrix
    v = start / np.linalg.norm(start)
    eigen = 0.0
    for _ in range(iterations):
        w = gram @ v
        eigen = float(v @ w)
        if eigen <= 0.0:
            return 0.0, v, True
        if np.linalg.norm(w - eigen * v) <= tolerance * eigen:
            return float(np.sqrt(eigen)), v, True
        v = w / np.linalg.norm(w)
    return float(np.sqrt(max(eigen, 0.0))), v, False


def _sigma_max(matrix: np.ndarray, start: np.ndarray, iterations: int,
               tolerance: float) -> Tuple[float, np.ndarray]:
    sigma, v, converged = _power_iteration(matrix, start, iterations, tolerance)
    for _ in range(RONDAS_VERIFICACION):
        if converged:
            return sigma, v
        sigma, v, converged = _power_iteration(matrix, v, iterations, tolerance)
    if converged:
        return sigma, v
    exact = float(linalg.svdvals(matrix)[0])
    logger.debug(f"Iteración de potencia sin converger (σ≈{sigma:.10f}); se usa SVD: σ = {exact:.10f}")
    return exact, v


def spectral_norm(matrix: np.ndarray, iterations: int = C.ITERACIONES_POTENCIA,
                  tolerance: float = C.TOLERANCIA_POTENCIA, start: Optional[np.ndarray] = None) -> float:
    """
    σ_max por iteración de potencia sobre MᵀM con vector inicial fijo.

    La iteración se da por convergida cuando el residuo del par propio
    ‖MᵀMv − λv‖ es ≤ tol·λ. Si tras ``RONDAS_VERIFICACION`` rondas no
    converge (valores singulares casi repetidos) se recurre a la SVD.

    Args:
        matrix: Matriz real
        iterations: Iteraciones por ronda
        tolerance: Tolerancia relativa sobre el residuo
        start: Vector inicial (default: gaussiano con semilla 0)

    Returns:
        Estimación de la norma espectral
    """
    if start is None:
        start = rng_from_seed(0).normal(size=matrix.shape[1])
    sigma, _ = _sigma_max(matrix, start, iterations, tolerance)
    return sigma


def project_spectral(psi: np.ndarray, gamma: float = C.GAMMA_CONTRACCION,
                     iterations: int = C.ITERACIONES_POTENCIA,
                     tolerance: float = C.TOLERANCIA_POTENCIA) -> Tuple[np.ndarray, float]:
    """
    Escala Ψ para que σ_max(Ψ) ≤ γ.

    Si σ_max > γ retorna Ψ·γ/(σ_max·(1 + MARGEN_PROYECCION)); si no, Ψ sin
    cambios. El margen absorbe el error relativo de la estimación convergida.

    Args:
        psi: Matriz d×d finita
        gamma: Cota de contracción
        iterations: Iteraciones de potencia por ronda
        tolerance: Tolerancia relativa

    Returns:
        Tupla (Ψ proyectada, σ_max estimada de la salida)

    Example:
        project_spectral(np.eye(3))[0]  # 0.99·I
    """
    if not np.all(np.isfinite(psi)):
        raise DynamicsFitError("Ψ contiene valores no finitos")
    vector = rng_from_seed(0).normal(size=psi.shape[1])
    sigma, vector = _sigma_max(psi, vector, iterations, tolerance)
    if sigma <= gamma:
        return psi.copy(), sigma
    projected = psi * (gamma / (sigma * (1.0 + MARGEN_PROYECCION)))
    sigma, _ = _sigma_max(projected, vector, iterations, tolerance)
    if sigma > gamma:
        projected = projected * (gamma / (sigma * (1.0 + MARGEN_PROYECCION)))
        sigma = float(linalg.svdvals(projected)[0])
    return projected, min(sigma, gamma)


def fit_dynamics(z_t: np.ndarray, a_t: np.ndarray, z_next: np.ndarray,
                 ridge: float = C.RIDGE_DEFAULT, gamma: float = C.GAMMA_CONTRACCION) -> TransitionModel:
    """
    Ajusta [Ψ Γ] por ecuaciones normales con ridge y proyecta Ψ.

    Args:
        z_t: Códigos en t (n×d)
        a_t: Acciones (n×3)
        z_next: Códigos en t+1 (n×d)
        ridge: λ ≥ 0
        gamma: Cota de contracción

    Returns:
        TransitionModel proyectado

    Raises:
        DynamicsFitError: Si hay menos de d+3 tripletas o el sistema es singular con λ = 0
    """
    z_t = np.asarray(z_t, dtype=np.float64)
    a_t = np.asarray(a_t, dtype=np.float64).reshape(len(z_t), -1)
    z_next = np.asarray(z_next, dtype=np.float64)
    n, d = z_t.shape
    p = d + a_t.shape[1]
    if n < p:
        raise DynamicsFitError(f"Se requieren al menos {p} tripletas para ajustar la dinámica, hay {n}")

    X = np.hstack([z_t, a_t])
    normal = X.T @ X + ridge * np.eye(p)
    rhs = X.T @ z_next
    if ridge == 0.0 and np.linalg.matrix_rank(normal) < p:
        raise DynamicsFitError("Matriz normal con rango deficiente y λ = 0; use ridge > 0")
    try:
        theta = linalg.solve(normal, rhs, assume_a="pos")
    except (linalg.LinAlgError, ValueError) as e:
        raise DynamicsFitError(f"No se pudo resolver el sistema normal: {e}") from e

    psi_raw = theta[:d].T
    gamma_mat = theta[d:].T
    psi, sigma = project_spectral(psi_raw, gamma)
    logger.info(f"Dinámica ajustada con {n} tripletas: σ_max(Ψ) = {sigma:.6f}")
    return TransitionModel(psi=psi, gamma=gamma_mat, contraction=gamma, sigma_max=sigma)


def predict(model: TransitionModel, z: LatentCode, a: Vec3) -> LatentCode:
    """ẑ = Ψz + Γa."""
    return model.psi @ z + model.gamma @ a


def lyapunov_delta(model: TransitionModel, z: LatentCode, a: Vec3) -> float:
    """ΔV = ‖Ψz + Γa‖² − ‖z‖²."""
    z_hat = predict(model, z, a)
    return float(z_hat @ z_hat - z @ z)


def lyapunov_delta_batch(model: TransitionModel, z: LatentCode, actions: np.ndarray) -> np.ndarray:
    """ΔV para varias acciones (k×3) con el mismo z."""
    if not len(actions):
        return np.zeros(0)
    z_hat = (model.psi @ z)[None, :] + actions @ model.gamma.T
    return np.einsum("ij,ij->i", z_hat, z_hat) - float(z @ z)


def one_step_mse(model: TransitionModel, z_t: np.ndarray, a_t: np.ndarray, z_next: np.ndarray) -> float:
    """Error cuadrático medio de predicción a un paso (promedio por componente)."""
    if not len(z_t):
        return 0.0
    pred = z_t @ model.psi.T + a_t @ model.gamma.T
    return float(np.mean((pred - z_next) ** 2))
