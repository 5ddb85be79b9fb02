"""
Índice de archivo invertido (IVF) sobre códigos latentes normalizados.

El cuantizador grueso es KMeans de scikit-learn (k-means++, semilla fija,
iteraciones acotadas). Cada entrada pertenece exactamente a una lista.
"""
from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from sklearn.cluster import KMeans

from EraNavegacion.core import constants as C
from shared.utils.exceptions import IndexBuildError, UnknownEntryError
from shared.utils.logger import get_logger

logger = get_logger("IvfIndex")


def default_n_list(size: int) -> int:
    """n_list = ⌈√|M|⌉ (mínimo 1)."""
    return max(1, int(math.ceil(math.sqrt(size))))


def default_n_scan(n_list: int) -> int:
    """n_scan = max(1, ⌈n_list / 8⌉)."""
    return max(1, int(math.ceil(n_list / 8)))


class IvfIndex:
    """Centroides, listas invertidas por centroide y parámetros de sondeo."""

    def __init__(self, centroids: np.ndarray, assignments: Dict[int, int], n_scan: int,
                 trained_size: int, seed: int) -> None:
        """
        Inicializa el índice ya entrenado.

        Args:
            centroids: Matriz n_list × d
            assignments: id de entrada -> lista
            n_scan: Listas sondeadas por consulta
            trained_size: Entradas usadas en el entrenamiento
            seed: Semilla del KMeans
        """
        self.centroids = centroids
        self.assignments = dict(assignments)
        self.n_scan = int(min(max(1, n_scan), len(centroids)))
        self.trained_size = int(trained_size)
        self.seed = int(seed)
        self.inserted_since_build = 0
        self._centroid_sq = np.einsum("ij,ij->i", centroids, centroids)

    @property
    def n_list(self) -> int:
        return int(len(self.centroids))

    @classmethod
    def build(cls, ids: Sequence[int], unit_vectors: np.ndarray, n_list: int, seed: int,
              n_scan: Optional[int] = None, iterations: int = C.ITERACIONES_KMEANS) -> "IvfIndex":
        """
        Entrena el cuantizador y asigna cada entrada a su centroide más cercano.

        Args:
            ids: Identificadores en el mismo orden que ``unit_vectors``
            unit_vectors: Códigos normalizados (N × d)
            n_list: Número de listas
            seed: Semilla (sub-flujo kmeans)
            n_scan: Listas a sondear (default: ⌈n_list/8⌉)
            iterations: Iteraciones máximas de k-means

        Returns:
            IvfIndex entrenado

        Raises:
            IndexBuildError: Si no hay entradas o n_list > entradas
        """
        size = len(ids)
        if size == 0:
            raise IndexBuildError("No se puede construir el índice sobre un banco vacío")
        if n_list < 1 or n_list > size:
            raise IndexBuildError(f"n_list={n_list} inválido para {size} entradas")
        kmeans = KMeans(
            n_clusters=n_list,
            init="k-means++",
            n_init=1,
            max_iter=iterations,
            tol=0.0,
            random_state=int(seed) & 0xFFFFFFFF,
            algorithm="lloyd",
        )
        kmeans.fit(unit_vectors)
        centroids = np.asarray(kmeans.cluster_centers_, dtype=np.float64)
        index = cls(centroids, {}, n_scan or default_n_scan(n_list), size, seed)
        labels = index.nearest_lists(unit_vectors)
        index.assignments = {int(i): int(label) for i, label in zip(ids, labels)}
        logger.info(f"Índice IVF construido: {size} entradas, n_list={n_list}, n_scan={index.n_scan}")
        return index

    def nearest_lists(self, unit_vectors: np.ndarray) -> np.ndarray:
        """Lista más cercana (distancia euclidiana; empate por índice menor) de cada vector."""
        vectors = np.atleast_2d(unit_vectors)
        distances = self._centroid_sq[None, :] - 2.0 * vectors @ self.centroids.T
        return np.argmin(distances, axis=1)

    def closest_lists(self, unit_query: np.ndarray, n_scan: Optional[int] = None) -> np.ndarray:
        """Índices de las ``n_scan`` listas más cercanas a la consulta, en orden de cercanía."""
        count = self.n_scan if n_scan is None else int(min(max(1, n_scan), self.n_list))
        distances = self._centroid_sq - 2.0 * (self.centroids @ unit_query)
        order = np.lexsort((np.arange(self.n_list), distances))
        return order[:count]

    def add(self, entry_id: int, unit_vector: np.ndarray) -> int:
        """Asigna una entrada nueva a su lista más cercana; retorna la lista."""
        label = int(self.nearest_lists(unit_vector)[0])
        self.assignments[int(entry_id)] = label
        self.inserted_since_build += 1
        return label

    def remove(self, entry_id: int) -> None:
        if int(entry_id) not in self.assignments:
            raise UnknownEntryError(f"La entrada {entry_id} no está en el índice")
        del self.assignments[int(entry_id)]

    def is_stale(self, rebuild_fraction: float = C.FRACCION_RECONSTRUCCION) -> bool:
        """True si las inserciones desde la construcción superan la fracción del tamaño indexado."""
        return self.inserted_since_build > rebuild_fraction * self.trained_size

    def list_members(self) -> List[List[int]]:
        """Ids por lista, ordenados ascendentemente."""
        members: List[List[int]] = [[] for _ in range(self.n_list)]
        for entry_id in sorted(self.assignments):
            members[self.assignments[entry_id]].append(entry_id)
        return members

    def memory_bytes(self) -> int:
        return int(self.centroids.nbytes + len(self.assignments) * 16)
