"""
Banco de conocimiento: almacena experiencias (z, a, r) y sirve búsqueda top-k
exacta e IVF aproximada por similitud coseno.

Modelo de concurrencia: muchas lecturas concurrentes sobre una instantánea
inmutable (``prepare()`` la construye) y mutaciones solo en la fase de
escritura exclusiva entre episodios.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import numpy as np

from EraNavegacion.core import constants as C
from EraNavegacion.core.enums import EntrySource
from EraNavegacion.core.ivf_index import IvfIndex, default_n_list
from EraNavegacion.core.models import BankEntry, Candidate, LatentCode, SearchResult, Vec3, vec3
from EraNavegacion.core.settings import BankSettings
from shared.utils.exceptions import (
    BankFormatError,
    DuplicateEntryError,
    EmptyBankError,
    InvalidEntryError,
    StaleIndexError,
    UnknownEntryError,
)
from shared.utils.file_helpers import dumps_stable, ensure_directory, iter_jsonl
from shared.utils.logger import get_logger

logger = get_logger("KnowledgeBank")


def _unit_rows(Z: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(Z, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    return Z / safe[:, None]


def _unit(z: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(z))
    return z / norm if norm > 0.0 else np.zeros_like(z)


def top_k(sims: np.ndarray, ids: np.ndarray, k: int) -> np.ndarray:
    """
    Posiciones de los k mejores por (similitud descendente, id ascendente).

    Args:
        sims: Similitudes
        ids: Ids en el mismo orden
        k: Cantidad pedida

    Returns:
        Posiciones ordenadas (como máximo k)
    """
    n = len(sims)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if k < n:
        threshold = np.partition(sims, n - k)[n - k]
        pool = np.flatnonzero(sims >= threshold)
    else:
        pool = np.arange(n)
    order = np.lexsort((ids[pool], -sims[pool]))
    return pool[order[:k]]


@dataclass
class _Snapshot:
    """Arreglos contiguos para búsqueda; se reconstruye tras cualquier mutación."""
    ids: np.ndarray
    unit: np.ndarray
    grouped_ids: Optional[np.ndarray] = None
    grouped_unit: Optional[np.ndarray] = None
    offsets: Optional[np.ndarray] = None


class KnowledgeBank:
    """Almacén de entradas con índice IVF opcional."""

    def __init__(self, d: int = C.DIM_LATENTE, seed: int = 0,
                 settings: Optional[BankSettings] = None) -> None:
        """
        Inicializa un banco vacío.

        Args:
            d: Dimensión latente
            seed: Semilla usada para construir el índice
            settings: Parámetros del banco (default: BankSettings())
        """
        self.d = int(d)
        self.seed = int(seed)
        self.settings = settings or BankSettings()
        self.entries: Dict[int, BankEntry] = {}
        self.index: Optional[IvfIndex] = None
        self._snapshot: Optional[_Snapshot] = None
        self._lock = threading.Lock()

    # ------------------------------------------------------------------ tamaño

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def size(self) -> int:
        return len(self.entries)

    def ids(self) -> List[int]:
        return sorted(self.entries)

    def next_id(self) -> int:
        return max(self.entries) + 1 if self.entries else 0

    def get(self, entry_id: int) -> BankEntry:
        try:
            return self.entries[int(entry_id)]
        except KeyError:
            raise UnknownEntryError(f"Entrada desconocida: {entry_id}") from None

    def __contains__(self, entry_id: object) -> bool:
        return entry_id in self.entries

    # --------------------------------------------------------------- mutación

    def _invalidate(self) -> None:
        self._snapshot = None

    def _validate_entry(self, entry: BankEntry) -> None:
        z = np.asarray(entry.z, dtype=np.float64)
        if z.shape != (self.d,):
            raise InvalidEntryError(f"Entrada {entry.id}: z de forma {z.shape}, se esperaba ({self.d},)")
        if not np.all(np.isfinite(z)):
            raise InvalidEntryError(f"Entrada {entry.id}: z no finito")
        a = np.asarray(entry.a, dtype=np.float64)
        if a.shape != (3,) or not np.all(np.isfinite(a)):
            raise InvalidEntryError(f"Entrada {entry.id}: acción inválida")
        if not (0.0 < entry.r <= 1.0):
            raise InvalidEntryError(f"Entrada {entry.id}: confiabilidad {entry.r} fuera de (0, 1]")

    def insert(self, entry: BankEntry) -> None:
        """
        Inserta una entrada; queda disponible de inmediato para la búsqueda exacta.

        Args:
            entry: Entrada válida

        Raises:
            DuplicateEntryError: Si el id ya existe
            InvalidEntryError: Si r ∉ (0, 1] o las dimensiones no coinciden
        """
        if entry.id in self.entries:
            raise DuplicateEntryError(f"Id duplicado en el banco: {entry.id}")
        self._validate_entry(entry)
        entry.z = np.array(entry.z, dtype=np.float64)
        entry.a = vec3(entry.a)
        self.entries[entry.id] = entry
        if self.index is not None:
            self.index.add(entry.id, _unit(entry.z))
        self._invalidate()

    def add(self, z: LatentCode, a: Vec3, r: float = 1.0, episode: int = 0, step: int = 0,
            source: EntrySource = EntrySource.ONLINE) -> int:
        """Inserta con el siguiente id libre y lo retorna."""
        entry_id = self.next_id()
        self.insert(BankEntry(id=entry_id, z=z, a=a, r=r, episode=episode, step=step, source=source))
        return entry_id

    def penalize(self, entry_id: int, factor: float = C.FACTOR_PENALIZACION,
                 floor: float = C.PISO_CONFIABILIDAD) -> float:
        """
        Reduce la confiabilidad: r ← max(floor, r·factor).

        Returns:
            Nueva confiabilidad

        Raises:
            UnknownEntryError: Si el id no existe
        """
        entry = self.get(entry_id)
        entry.r = max(floor, entry.r * factor)
        return entry.r

    def prune(self, entry_id: int) -> BankEntry:
        """
        Elimina una entrada del almacén y de su lista invertida.

        Raises:
            UnknownEntryError: Si el id no existe
        """
        entry = self.get(entry_id)
        del self.entries[entry.id]
        if self.index is not None and entry.id in self.index.assignments:
            self.index.remove(entry.id)
        self._invalidate()
        return entry

    # ----------------------------------------------------------------- índice

    def build_index(self, n_list: Optional[int] = None, seed: Optional[int] = None) -> IvfIndex:
        """
        Entrena el índice IVF sobre todas las entradas.

        Args:
            n_list: Número de listas (default: settings o ⌈√N⌉)
            seed: Semilla (default: la del banco)

        Returns:
            Índice construido

        Raises:
            IndexBuildError: Si el banco está vacío o n_list > entradas
        """
        ids = self.ids()
        n_list = n_list or self.settings.n_list or default_n_list(len(ids))
        if seed is not None:
            self.seed = int(seed)
        Z = np.stack([self.entries[i].z for i in ids]) if ids else np.zeros((0, self.d))
        self.index = IvfIndex.build(ids, _unit_rows(Z), n_list, self.seed,
                                    n_scan=self.settings.n_scan,
                                    iterations=self.settings.kmeans_iterations)
        self._invalidate()
        return self.index

    @property
    def index_fresh(self) -> bool:
        return self.index is not None and not self.index.is_stale(self.settings.rebuild_fraction)

    def ensure_fresh_index(self) -> bool:
        """Reconstruye el índice si está ausente o viejo; retorna True si lo reconstruyó."""
        if not self.entries or self.index_fresh:
            return False
        if self.index is not None:
            logger.warning(f"Índice IVF viejo ({self.index.inserted_since_build} inserciones desde "
                           f"la construcción); reconstruyendo")
        self.build_index()
        return True

    # --------------------------------------------------------------- búsqueda

    def prepare(self) -> None:
        """Construye la instantánea de búsqueda (llamar antes de lecturas concurrentes)."""
        self._ensure_snapshot()

    def _ensure_snapshot(self) -> _Snapshot:
        snapshot = self._snapshot
        if snapshot is not None:
            return snapshot
        with self._lock:
            if self._snapshot is not None:
                return self._snapshot
            ids = np.array(self.ids(), dtype=np.int64)
            Z = np.stack([self.entries[int(i)].z for i in ids]) if len(ids) else np.zeros((0, self.d))
            snapshot = _Snapshot(ids=ids, unit=_unit_rows(Z))
            if self.index is not None and len(ids):
                labels = np.array([self.index.assignments[int(i)] for i in ids], dtype=np.int64)
                order = np.lexsort((ids, labels))
                snapshot.grouped_ids = ids[order]
                snapshot.grouped_unit = np.ascontiguousarray(snapshot.unit[order])
                counts = np.bincount(labels, minlength=self.index.n_list)
                snapshot.offsets = np.concatenate([[0], np.cumsum(counts)])
            self._snapshot = snapshot
            return snapshot

    def _candidates(self, ids: np.ndarray, sims: np.ndarray, positions: np.ndarray) -> List[Candidate]:
        return [Candidate(entry_id=int(ids[p]), sim=float(np.clip(sims[p], -1.0, 1.0))) for p in positions]

    def search_exact(self, z: LatentCode, k: int) -> SearchResult:
        """
        Top-k por similitud coseno con barrido completo; empates por id menor.

        Args:
            z: Consulta (vector cero: similitud 0 con todo)
            k: Número de candidatos

        Returns:
            SearchResult con como máximo k candidatos

        Raises:
            EmptyBankError: Si el banco está vacío
        """
        if not self.entries:
            raise EmptyBankError("El banco de conocimiento está vacío")
        snapshot = self._ensure_snapshot()
        sims = snapshot.unit @ _unit(np.asarray(z, dtype=np.float64))
        positions = top_k(sims, snapshot.ids, k)
        return SearchResult(candidates=self._candidates(snapshot.ids, sims, positions))

    def search_ann(self, z: LatentCode, k: int, n_scan: Optional[int] = None) -> SearchResult:
        """
        Top-k aproximado sondeando las ``n_scan`` listas más cercanas.

        Args:
            z: Consulta
            k: Número de candidatos
            n_scan: Listas a sondear (default: el del índice)

        Returns:
            SearchResult; ``partial`` indica menos de k candidatos

        Raises:
            EmptyBankError: Si el banco está vacío
            StaleIndexError: Si no hay índice o está viejo
        """
        if not self.entries:
            raise EmptyBankError("El banco de conocimiento está vacío")
        if self.index is None:
            raise StaleIndexError("No hay índice IVF construido; ejecute build_index()")
        if self.index.is_stale(self.settings.rebuild_fraction):
            raise StaleIndexError(
                f"Índice IVF viejo: {self.index.inserted_since_build} inserciones desde la construcción "
                f"sobre {self.index.trained_size}; reconstruya el índice"
            )
        query = _unit(np.asarray(z, dtype=np.float64))
        if not np.any(query):
            return SearchResult(candidates=self.search_exact(z, k).candidates, approximate=True)
        snapshot = self._ensure_snapshot()
        lists = self.index.closest_lists(query, n_scan)
        slices_ids = []
        slices_sims = []
        for lst in lists:
            lo, hi = snapshot.offsets[lst], snapshot.offsets[lst + 1]
            if hi > lo:
                slices_ids.append(snapshot.grouped_ids[lo:hi])
                slices_sims.append(snapshot.grouped_unit[lo:hi] @ query)
        if not slices_ids:
            return SearchResult(candidates=[], partial=True, approximate=True)
        ids = np.concatenate(slices_ids)
        sims = np.concatenate(slices_sims)
        positions = top_k(sims, ids, k)
        return SearchResult(candidates=self._candidates(ids, sims, positions),
                            partial=len(positions) < k, approximate=True)

    def search(self, z: LatentCode, k: int, use_ann: bool = True) -> SearchResult:
        """Búsqueda ANN si el índice está fresco, exacta en otro caso."""
        if use_ann and self.index_fresh:
            result = self.search_ann(z, k)
            if result.candidates:
                return result
        return self.search_exact(z, k)

    def nearest_similarity(self, z: LatentCode) -> float:
        """Similitud coseno del vecino exacto más cercano (−1 si el banco está vacío)."""
        if not self.entries:
            return -1.0
        return self.search_exact(z, 1).candidates[0].sim

    # ------------------------------------------------------------- artefactos

    def memory_bytes(self) -> Dict[str, int]:
        """Estimación de memoria: arreglos de entradas, instantánea e índice."""
        n = len(self.entries)
        per_entry = 8 * (self.d + 3 + 1) + 8 * 3
        snapshot = self._ensure_snapshot() if n else None
        snapshot_bytes = 0
        if snapshot is not None:
            snapshot_bytes = snapshot.unit.nbytes + snapshot.ids.nbytes
            if snapshot.grouped_unit is not None:
                snapshot_bytes += snapshot.grouped_unit.nbytes + snapshot.grouped_ids.nbytes
        return {
            "entries": int(n * per_entry),
            "bytes_per_entry": int(per_entry),
            "search_arrays": int(snapshot_bytes),
            "index": int(self.index.memory_bytes() if self.index is not None else 0),
        }

    def header(self) -> Dict[str, object]:
        return {"version": C.VERSION_BANCO, "d": self.d, "sim": C.SIMILITUD, "seed": self.seed}

    def save(self, path: Union[str, Path]) -> Path:
        """
        Escribe el banco en JSONL: cabecera y una entrada por línea ordenada por id.

        Args:
            path: Ruta destino

        Returns:
            Ruta escrita
        """
        destino = Path(path)
        if destino.parent and str(destino.parent) not in ("", "."):
            ensure_directory(destino.parent)
        with open(destino, "w", encoding="utf-8", newline="\n") as f:
            f.write(dumps_stable(self.header()))
            f.write("\n")
            for entry_id in self.ids():
                f.write(dumps_stable(self.entries[entry_id].to_dict()))
                f.write("\n")
        logger.info(f"Banco guardado en {destino}: {self.size} entradas")
        return destino

    @classmethod
    def load(cls, path: Union[str, Path], settings: Optional[BankSettings] = None,
             d: int = C.DIM_LATENTE) -> "KnowledgeBank":
        """
        Lee un banco JSONL y reconstruye el índice con la semilla guardada.

        Args:
            path: Ruta del archivo
            settings: Parámetros del banco
            d: Dimensión si el archivo está vacío

        Returns:
            KnowledgeBank cargado

        Raises:
            BankFormatError: Versión incompatible o línea malformada (con número de línea)
        """
        bank: Optional[KnowledgeBank] = None
        try:
            for line_number, record in iter_jsonl(path):
                if bank is None:
                    bank = cls._from_header(record, line_number, settings)
                    continue
                try:
                    entry = BankEntry.from_dict(record)
                except (KeyError, TypeError, ValueError) as e:
                    raise BankFormatError(f"registro inválido ({e})", line_number) from e
                try:
                    bank.insert(entry)
                except (DuplicateEntryError, InvalidEntryError) as e:
                    raise BankFormatError(str(e), line_number) from e
        except ValueError as e:
            raise BankFormatError(f"JSON inválido: {e}", _line_from_error(e)) from e
        if bank is None:
            logger.info(f"Banco vacío cargado desde {path}")
            return cls(d=d, settings=settings)
        if bank.entries:
            bank.build_index()
        logger.info(f"Banco cargado desde {path}: {bank.size} entradas")
        return bank

    @classmethod
    def _from_header(cls, record: Dict[str, object], line_number: int,
                     settings: Optional[BankSettings]) -> "KnowledgeBank":
        if not isinstance(record, dict) or "version" not in record:
            raise BankFormatError("falta la cabecera del banco", line_number)
        if record.get("version") != C.VERSION_BANCO:
            raise BankFormatError(f"versión {record.get('version')} no soportada (se espera {C.VERSION_BANCO})",
                                  line_number)
        if record.get("sim") != C.SIMILITUD:
            raise BankFormatError(f"similitud {record.get('sim')!r} no soportada", line_number)
        try:
            return cls(d=int(record["d"]), seed=int(record["seed"]), settings=settings)
        except (KeyError, TypeError, ValueError) as e:
            raise BankFormatError(f"cabecera inválida ({e})", line_number) from e

    def entries_in_order(self) -> Iterable[BankEntry]:
        for entry_id in self.ids():
            yield self.entries[entry_id]


def _line_from_error(error: ValueError) -> int:
    text = str(error)
    if text.startswith("línea "):
        try:
            return int(text.split(":", 1)[0].split()[1])
        except (IndexError, ValueError):
            pass
    return 0
