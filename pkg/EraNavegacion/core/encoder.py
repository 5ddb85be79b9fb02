"""
Codificador de conjuntos invariante a permutaciones (estilo DeepSets).

    z = ρ(concat(mean_i tanh(φ(e_i)), g))

φ es afín 10 → h seguida de tanh, el pooling es la media y ρ es afín
(h + 8) → d. La cabeza de imitación (d → 3) solo se usa en el preentrenamiento.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import sparse

from EraNavegacion.core import constants as C
from EraNavegacion.core.features import FeatureScales, featurize, featurize_batch
from EraNavegacion.core.models import EventList, LatentCode
from EraNavegacion.core.settings import EncoderShape
from shared.utils.exceptions import EncoderError

PARAM_NAMES = ("W1", "b1", "W2", "b2", "Wi", "bi")


@dataclass
class EncoderParams:
    """Pesos del codificador y de la cabeza de imitación."""
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    Wi: np.ndarray
    bi: np.ndarray
    scales: FeatureScales = field(default_factory=FeatureScales)

    @property
    def hidden(self) -> int:
        return int(self.W1.shape[0])

    @property
    def latent(self) -> int:
        return int(self.W2.shape[0])

    @classmethod
    def initialize(cls, shape: EncoderShape, scales: FeatureScales, rng: np.random.Generator,
                   init_scale: float = 1.0) -> "EncoderParams":
        """
        Inicialización Glorot uniforme con sesgos en cero.

        Args:
            shape: Dimensiones (h, d)
            scales: Escalas de featurización
            rng: Generador del sub-flujo de entrenamiento
            init_scale: Multiplicador de la amplitud

        Returns:
            Parámetros iniciales
        """
        def glorot(rows: int, cols: int) -> np.ndarray:
            limit = init_scale * np.sqrt(6.0 / (rows + cols))
            return rng.uniform(-limit, limit, size=(rows, cols))

        h, d = shape.hidden, shape.latent
        return cls(
            W1=glorot(h, C.ANCHO_ELEMENTO), b1=np.zeros(h),
            W2=glorot(d, h + C.ANCHO_GLOBAL), b2=np.zeros(d),
            Wi=glorot(C.DIM_ACCION, d), bi=np.zeros(C.DIM_ACCION),
            scales=scales,
        )

    def arrays(self) -> List[np.ndarray]:
        return [getattr(self, name) for name in PARAM_NAMES]

    def flatten(self) -> np.ndarray:
        """Vector con todos los parámetros en el orden de PARAM_NAMES."""
        return np.concatenate([a.ravel() for a in self.arrays()])

    def unflatten(self, vector: np.ndarray) -> "EncoderParams":
        """Nuevos parámetros con la forma de estos y los valores de ``vector``."""
        values: Dict[str, np.ndarray] = {}
        offset = 0
        for name in PARAM_NAMES:
            current = getattr(self, name)
            values[name] = np.array(vector[offset:offset + current.size], dtype=np.float64).reshape(current.shape)
            offset += current.size
        if offset != len(vector):
            raise EncoderError(f"Vector de parámetros de tamaño {len(vector)}, se esperaba {offset}")
        return EncoderParams(scales=self.scales, **values)

    def copy(self) -> "EncoderParams":
        return self.unflatten(self.flatten())

    def validate(self) -> "EncoderParams":
        """Comprueba dimensiones coherentes y pesos finitos."""
        h, d = self.hidden, self.latent
        expected = {
            "W1": (h, C.ANCHO_ELEMENTO), "b1": (h,), "W2": (d, h + C.ANCHO_GLOBAL),
            "b2": (d,), "Wi": (C.DIM_ACCION, d), "bi": (C.DIM_ACCION,),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise EncoderError(f"{name} tiene forma {arr.shape}, se esperaba {shape}")
            if not np.all(np.isfinite(arr)):
                raise EncoderError(f"{name} contiene valores no finitos")
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Pesos del codificador (sin la cabeza de imitación)."""
        return {
            "W1": self.W1.tolist(), "b1": self.b1.tolist(),
            "W2": self.W2.tolist(), "b2": self.b2.tolist(),
        }

    @classmethod
    def from_dict(cls, weights: Dict[str, Any], scales: FeatureScales) -> "EncoderParams":
        W2 = np.array(weights["W2"], dtype=np.float64)
        d = W2.shape[0]
        return cls(
            W1=np.array(weights["W1"], dtype=np.float64), b1=np.array(weights["b1"], dtype=np.float64),
            W2=W2, b2=np.array(weights["b2"], dtype=np.float64),
            Wi=np.zeros((C.DIM_ACCION, d)), bi=np.zeros(C.DIM_ACCION),
            scales=scales,
        ).validate()


def _check_rows(params: EncoderParams, X: np.ndarray, g: np.ndarray) -> None:
    if X.ndim != 2 or X.shape[1] != params.W1.shape[1]:
        raise EncoderError(f"Matriz de elementos con forma {X.shape}, se esperaban {params.W1.shape[1]} columnas")
    if g.shape[-1] + params.hidden != params.W2.shape[1]:
        raise EncoderError(f"Vector global de ancho {g.shape[-1]}, se esperaba {params.W2.shape[1] - params.hidden}")


def encode_features(params: EncoderParams, X: np.ndarray, g: np.ndarray) -> LatentCode:
    """Codifica features ya calculadas de una sola lista de eventos."""
    _check_rows(params, X, g)
    if len(X):
        pooled = np.tanh(X @ params.W1.T + params.b1).mean(axis=0)
    else:
        pooled = np.zeros(params.hidden)
    return params.W2 @ np.concatenate([pooled, g]) + params.b2


def encode(params: EncoderParams, E: EventList) -> LatentCode:
    """
    Codifica una lista de eventos en un código latente de dimensión d.

    Args:
        params: Parámetros del codificador
        E: Lista de eventos (vacía: el pooling vale cero)

    Returns:
        Código latente z

    Raises:
        EncoderError: Si hay incompatibilidad de dimensiones o entradas no finitas
    """
    X, g = featurize(E, params.scales)
    return encode_features(params, X, g)


@dataclass
class ForwardCache:
    """Intermedios del paso hacia adelante por lotes, necesarios para el gradiente."""
    X: np.ndarray
    G: np.ndarray
    averaging: Optional[sparse.csr_matrix]
    H: np.ndarray
    U: np.ndarray
    Z: np.ndarray


def forward_batch(params: EncoderParams, X: np.ndarray, G: np.ndarray,
                  averaging: sparse.csr_matrix) -> ForwardCache:
    """
    Paso hacia adelante de un lote con pooling por matriz dispersa.

    Args:
        params: Parámetros
        X: Filas apiladas M×10
        G: Globales B×8
        averaging: Matriz B×M de promedio por segmento

    Returns:
        ForwardCache con H (M×h), U (B×(h+8)) y Z (B×d)
    """
    _check_rows(params, X, G)
    batch = G.shape[0]
    if len(X):
        H = np.tanh(X @ params.W1.T + params.b1)
        pooled = np.asarray(averaging @ H)
    else:
        H = np.zeros((0, params.hidden))
        pooled = np.zeros((batch, params.hidden))
    U = np.concatenate([pooled, G], axis=1)
    Z = U @ params.W2.T + params.b2
    return ForwardCache(X=X, G=G, averaging=averaging if len(X) else None, H=H, U=U, Z=Z)


def encode_batch(params: EncoderParams, events: Sequence[EventList]) -> np.ndarray:
    """
    Codifica varias listas de eventos a la vez.

    Args:
        params: Parámetros del codificador
        events: Listas de eventos

    Returns:
        Matriz B×d de códigos latentes
    """
    if not events:
        return np.zeros((0, params.latent))
    X, G, averaging = featurize_batch(events, params.scales)
    return forward_batch(params, X, G, averaging).Z


def imitation_head(params: EncoderParams, Z: np.ndarray) -> np.ndarray:
    """Acción normalizada predicha por la cabeza de imitación (Z: B×d)."""
    return Z @ params.Wi.T + params.bi
