"""Rutas y carga de los artefactos del arnés (modelo, banco, dataset)."""
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

from EraNavegacion.core import constants as C
from EraNavegacion.core.dynamics import TransitionModel
from EraNavegacion.core.encoder import EncoderParams
from EraNavegacion.core.knowledge_bank import KnowledgeBank
from EraNavegacion.core.models import DatasetRecord
from EraNavegacion.core.serialization import load_model
from EraNavegacion.core.settings import BankSettings
from shared.utils.exceptions import ArtifactError, DatasetError
from shared.utils.file_helpers import iter_jsonl
from shared.utils.logger import get_logger

logger = get_logger("Artifacts")


@dataclass(frozen=True)
class ArtifactPaths:
    """Ubicación de cada artefacto dentro de un directorio de salida."""
    root: Path

    @classmethod
    def at(cls, directory: Union[str, Path]) -> "ArtifactPaths":
        return cls(Path(directory))

    @property
    def model(self) -> Path:
        return self.root / C.ARCHIVO_MODELO

    @property
    def bank(self) -> Path:
        return self.root / C.ARCHIVO_BANCO

    @property
    def pretrain_loss(self) -> Path:
        return self.root / C.ARCHIVO_PERDIDA

    @property
    def dataset(self) -> Path:
        return self.root / C.ARCHIVO_DATASET

    @property
    def train_log(self) -> Path:
        return self.root / C.ARCHIVO_LOG_ENTRENAMIENTO

    @property
    def traces(self) -> Path:
        return self.root / C.ARCHIVO_TRAZAS

    @property
    def checkpoints(self) -> Path:
        return self.root / "checkpoints"

    def checkpoint(self, episode: int) -> Path:
        return self.checkpoints / C.FORMATO_CHECKPOINT.format(episodio=episode)


@dataclass
class Artifacts:
    """Codificador, dinámica latente y banco listos para decidir."""
    encoder: EncoderParams
    model: TransitionModel
    bank: KnowledgeBank


def load_artifacts(directory: Union[str, Path], bank_settings: Optional[BankSettings] = None) -> Artifacts:
    """
    Carga model.json y bank.jsonl de un directorio.

    Args:
        directory: Directorio de artefactos
        bank_settings: Parámetros del banco

    Returns:
        Artifacts

    Raises:
        ArtifactError: Si falta algún archivo o las dimensiones no coinciden
    """
    paths = ArtifactPaths.at(directory)
    faltantes = [str(p) for p in (paths.model, paths.bank) if not p.is_file()]
    if faltantes:
        raise ArtifactError(f"Faltan artefactos: {', '.join(faltantes)}. Ejecute 'pretrain' primero.")
    encoder, model = load_model(paths.model)
    bank = KnowledgeBank.load(paths.bank, settings=bank_settings, d=encoder.latent)
    if bank.d != encoder.latent:
        raise ArtifactError(f"El banco tiene d={bank.d} pero el modelo d={encoder.latent}")
    logger.info(f"Artefactos cargados desde {paths.root}: banco de {bank.size} entradas")
    return Artifacts(encoder=encoder, model=model, bank=bank)


def read_dataset(path: Union[str, Path]) -> List[DatasetRecord]:
    """
    Lee un dataset JSONL de pares (E, a*).

    Raises:
        DatasetError: Si el archivo falta o algún registro es inválido
    """
    origen = Path(path)
    if not origen.is_file():
        raise DatasetError(f"Dataset no encontrado: {origen}. Ejecute 'gen-data' primero.")
    records: List[DatasetRecord] = []
    try:
        for line_number, raw in iter_jsonl(origen):
            try:
                records.append(DatasetRecord.from_dict(raw))
            except (KeyError, TypeError, ValueError) as e:
                raise DatasetError(f"Registro inválido en la línea {line_number} de {origen}: {e}") from e
    except ValueError as e:
        raise DatasetError(f"JSON inválido en {origen}: {e}") from e
    return records
