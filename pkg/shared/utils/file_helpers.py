# coding: utf-8
"""
Utilidades para manejo de archivos JSON / JSONL y archivos lock.

Los escritores producen bytes estables: mismas entradas, mismo archivo.
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Tuple, Union

from shared.utils.exceptions import ArtifactError
from shared.utils.logger import get_logger

logger = get_logger("FileHelpers")

PathLike = Union[str, Path]

# Un lock más antiguo que esto se considera abandonado
LOCK_MAX_AGE_S = 86400


def ensure_directory(path: PathLike) -> Path:
    """
    Asegura que un directorio exista, creándolo si es necesario.

    Args:
        path: Ruta del directorio

    Returns:
        Ruta del directorio como Path
    """
    directory = Path(path)
    if not directory.exists():
        directory.mkdir(parents=True, exist_ok=True)
        logger.info(f"Directorio creado: {directory}")
    return directory


def dumps_stable(obj: Any, indent: Union[int, None] = None) -> str:
    """
    Serializa a JSON de forma estable (floats con precisión completa, sin NaN).

    Args:
        obj: Objeto serializable
        indent: Indentación opcional para reportes legibles

    Returns:
        Texto JSON
    """
    if indent is None:
        return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False)
    return json.dumps(obj, indent=indent, ensure_ascii=False, allow_nan=False)


def write_json(path: PathLike, obj: Any, indent: Union[int, None] = 2) -> Path:
    """
    Escribe un documento JSON terminado en salto de línea.

    Args:
        path: Ruta destino
        obj: Documento a escribir
        indent: Indentación (None para una sola línea)

    Returns:
        Ruta escrita
    """
    destino = Path(path)
    if destino.parent and str(destino.parent) not in ("", "."):
        ensure_directory(destino.parent)
    with open(destino, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps_stable(obj, indent=indent))
        f.write("\n")
    return destino


def read_json(path: PathLike) -> Any:
    """
    Lee un documento JSON.

    Args:
        path: Ruta del archivo

    Returns:
        Documento leído

    Raises:
        ArtifactError: Si el archivo no existe o no es JSON válido
    """
    origen = Path(path)
    if not origen.is_file():
        raise ArtifactError(f"Archivo no encontrado: {origen}")
    try:
        with open(origen, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ArtifactError(f"JSON inválido en {origen}: {e}") from e


def write_jsonl(path: PathLike, records: Iterable[Any]) -> int:
    """
    Escribe registros JSON Lines (uno por línea).

    Args:
        path: Ruta destino
        records: Registros serializables

    Returns:
        Número de registros escritos
    """
    destino = Path(path)
    if destino.parent and str(destino.parent) not in ("", "."):
        ensure_directory(destino.parent)
    count = 0
    with open(destino, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(dumps_stable(record))
            f.write("\n")
            count += 1
    return count


def iter_jsonl(path: PathLike) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """
    Itera un archivo JSON Lines retornando (número de línea, registro).

    Las líneas vacías se omiten. Los errores de parseo se propagan como
    ValueError con el número de línea para que el llamador los traduzca.

    Args:
        path: Ruta del archivo

    Yields:
        Tuplas (número de línea desde 1, registro)
    """
    origen = Path(path)
    if not origen.is_file():
        raise ArtifactError(f"Archivo no encontrado: {origen}")
    with open(origen, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                yield line_number, json.loads(stripped)
            except json.JSONDecodeError as e:
                raise ValueError(f"línea {line_number}: {e}") from e


def read_jsonl(path: PathLike) -> List[Dict[str, Any]]:
    """
    Lee todos los registros de un archivo JSON Lines.

    Args:
        path: Ruta del archivo

    Returns:
        Lista de registros
    """
    return [record for _, record in iter_jsonl(path)]


class JsonlWriter:
    """Escritor incremental de JSON Lines usado por los logs de episodios y trazas."""

    def __init__(self, path: PathLike) -> None:
        """
        Abre el archivo destino (se trunca).

        Args:
            path: Ruta del archivo JSONL
        """
        self.path = Path(path)
        if self.path.parent and str(self.path.parent) not in ("", "."):
            ensure_directory(self.path.parent)
        self._file = open(self.path, "w", encoding="utf-8", newline="\n")
        self.count = 0

    def write(self, record: Any) -> None:
        self._file.write(dumps_stable(record))
        self._file.write("\n")
        self.count += 1

    def close(self) -> None:
        if not self._file.closed:
            self._file.close()

    def __enter__(self) -> "JsonlWriter":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()


def acquire_lock(directory: PathLike, name: str) -> Path:
    """
    Crea un archivo lock para la fase de escritura exclusiva sobre un directorio.

    Un lock con menos de 24 horas se considera activo; uno más antiguo se
    elimina y se reemplaza.

    Args:
        directory: Directorio protegido (artefactos)
        name: Nombre lógico del proceso (``train``)

    Returns:
        Ruta del lock creado

    Raises:
        ArtifactError: Si ya existe un lock activo
    """
    lock_path = ensure_directory(directory) / f".lock_era_{name.lower()}"
    if lock_path.exists():
        try:
            timestamp = float(lock_path.read_text(encoding="utf-8").strip())
            if datetime.now().timestamp() - timestamp < LOCK_MAX_AGE_S:
                raise ArtifactError(f"Lock existente en {lock_path}: otro proceso escribe estos artefactos")
            logger.warning(f"Lock antiguo encontrado en {lock_path}. Eliminándolo.")
        except ValueError:
            logger.warning(f"Lock ilegible en {lock_path}. Eliminándolo.")
        lock_path.unlink()

    lock_path.write_text(str(datetime.now().timestamp()), encoding="utf-8")
    logger.info(f"Lock creado en {lock_path}")
    return lock_path


def release_lock(lock_path: PathLike) -> None:
    """
    Elimina un archivo lock si existe.

    Args:
        lock_path: Ruta retornada por acquire_lock
    """
    ruta = Path(lock_path)
    try:
        if ruta.exists():
            ruta.unlink()
            logger.info(f"Lock eliminado: {ruta}")
    except OSError as e:
        logger.error(f"Error eliminando lock: {e}")
