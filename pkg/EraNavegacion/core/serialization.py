"""Documento JSON versionado con el codificador y la dinámica latente."""
from pathlib import Path
from typing import Any, Dict, Tuple, Union

from EraNavegacion.core import constants as C
from EraNavegacion.core.dynamics import TransitionModel
from EraNavegacion.core.encoder import EncoderParams
from EraNavegacion.core.features import FeatureScales
from shared.utils.exceptions import ArtifactError, EncoderError
from shared.utils.file_helpers import read_json, write_json
from shared.utils.logger import get_logger

logger = get_logger("Serialization")


def model_document(encoder: EncoderParams, model: TransitionModel) -> Dict[str, Any]:
    """
    Arma el documento {version, d, h, scales, weights, psi, gamma, sigma_max, contraction}.

    Args:
        encoder: Parámetros del codificador (la cabeza de imitación no se guarda)
        model: Dinámica latente proyectada

    Returns:
        Diccionario serializable
    """
    return {
        "version": C.VERSION_MODELO,
        "d": encoder.latent,
        "h": encoder.hidden,
        "scales": encoder.scales.to_dict(),
        "weights": encoder.to_dict(),
        **model.to_dict(),
    }


def save_model(path: Union[str, Path], encoder: EncoderParams, model: TransitionModel) -> Path:
    """Escribe el documento del modelo en una sola línea con floats de precisión completa."""
    destino = write_json(path, model_document(encoder, model), indent=None)
    logger.info(f"Modelo guardado en {destino} (σ_max = {model.sigma_max:.6f})")
    return destino


def model_from_document(doc: Dict[str, Any]) -> Tuple[EncoderParams, TransitionModel]:
    """
    Reconstruye codificador y dinámica desde el documento.

    Raises:
        ArtifactError: Versión incompatible o documento incompleto
    """
    if doc.get("version") != C.VERSION_MODELO:
        raise ArtifactError(f"Versión de modelo {doc.get('version')} no soportada (se espera {C.VERSION_MODELO})")
    try:
        encoder = EncoderParams.from_dict(doc["weights"], FeatureScales.from_dict(doc["scales"]))
        model = TransitionModel.from_dict(doc)
    except (KeyError, TypeError, ValueError, EncoderError) as e:
        raise ArtifactError(f"Documento de modelo inválido: {e}") from e
    if encoder.latent != int(doc["d"]) or encoder.hidden != int(doc["h"]):
        raise ArtifactError("Dimensiones del documento inconsistentes con los pesos")
    if model.psi.shape != (encoder.latent, encoder.latent):
        raise ArtifactError(f"Ψ con forma {model.psi.shape}, se esperaba d×d con d={encoder.latent}")
    return encoder, model


def load_model(path: Union[str, Path]) -> Tuple[EncoderParams, TransitionModel]:
    """Lee el documento del modelo desde disco."""
    return model_from_document(read_json(path))
