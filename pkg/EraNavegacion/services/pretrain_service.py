"""
Servicio de preentrenamiento: codificador, banco experto y dinámica latente.
"""
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from EraNavegacion.core.dynamics import TransitionModel, fit_dynamics, one_step_mse
from EraNavegacion.core.encoder import EncoderParams, encode
from EraNavegacion.core.enums import EntrySource
from EraNavegacion.core.features import FeatureScales
from EraNavegacion.core.knowledge_bank import KnowledgeBank
from EraNavegacion.core.models import BankEntry, DatasetRecord
from EraNavegacion.core.pretraining import pretrain
from EraNavegacion.core.seeding import derive_seed
from EraNavegacion.core.serialization import save_model
from EraNavegacion.core.settings import Settings
from EraNavegacion.services.artifacts import ArtifactPaths, read_dataset
from EraNavegacion.services.dataset_service import decision_pairs
from shared.utils.exceptions import DatasetError, DynamicsFitError
from shared.utils.file_helpers import ensure_directory, write_jsonl
from shared.utils.logger import get_logger


def transition_triples(records: Sequence[DatasetRecord], Z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Tripletas (z_t, a_t, z_{t+1}) de decisiones consecutivas.

    Args:
        records: Registros del dataset
        Z: Códigos latentes alineados con ``records``

    Returns:
        Arreglos (z_t, a_t, z_next)
    """
    pairs = decision_pairs(records)
    d = Z.shape[1] if Z.ndim == 2 else 0
    if not pairs:
        return np.zeros((0, d)), np.zeros((0, 3)), np.zeros((0, d))
    src = np.array([a for a, _ in pairs])
    dst = np.array([b for _, b in pairs])
    actions = np.stack([records[i].a_star for i in src])
    return Z[src], actions, Z[dst]


class PretrainService:
    """Entrena el codificador, puebla el banco experto y ajusta Ψ, Γ."""

    def __init__(self, settings: Settings) -> None:
        self.settings = settings
        self.logger = get_logger("PretrainService")

    def build_bank(self, encoder: EncoderParams, records: Sequence[DatasetRecord]) -> Tuple[KnowledgeBank, np.ndarray]:
        """Codifica cada registro y lo inserta con id secuencial, r = 1 y procedencia experta."""
        bank = KnowledgeBank(d=encoder.latent, seed=derive_seed(self.settings.seed, "kmeans"),
                             settings=self.settings.bank)
        Z = np.zeros((len(records), encoder.latent))
        for idx, record in enumerate(records):
            Z[idx] = encode(encoder, record.E)
            bank.insert(BankEntry(id=idx, z=Z[idx].copy(), a=record.a_star.copy(), r=1.0,
                                  episode=record.episode, step=record.step, source=EntrySource.EXPERT))
        return bank, Z

    def fit_model(self, records: Sequence[DatasetRecord], Z: np.ndarray) -> Tuple[TransitionModel, int]:
        """
        Ajusta la dinámica latente sobre las tripletas consecutivas.

        Raises:
            DynamicsFitError: Si hay menos tripletas de las requeridas
        """
        z_t, a_t, z_next = transition_triples(records, Z)
        d = Z.shape[1]
        minimum = self.settings.harness.min_dynamics_triples or d + 3
        if len(z_t) < minimum:
            raise DynamicsFitError(f"Solo hay {len(z_t)} tripletas consecutivas (se requieren {minimum}); "
                                   f"genere más episodios expertos")
        model = fit_dynamics(z_t, a_t, z_next, ridge=self.settings.encoder.ridge,
                             gamma=self.settings.encoder.gamma)
        self.logger.info(f"Dinámica ajustada con {len(z_t)} tripletas: σ_max = {model.sigma_max:.6f}, "
                         f"MSE a un paso = {one_step_mse(model, z_t, a_t, z_next):.6e}")
        return model, len(z_t)

    def run(self, dataset_path: Optional[Union[str, Path]] = None,
            out_dir: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
        """
        Ejecuta el preentrenamiento completo y escribe los artefactos.

        Args:
            dataset_path: Dataset JSONL (default: <out>/dataset.jsonl)
            out_dir: Directorio de salida (default: harness.out)

        Returns:
            Resumen con registros, tripletas, pérdida final y rutas

        Raises:
            DatasetError: Dataset ausente o vacío
            TrainingDivergenceError: Pérdida no finita
            DynamicsFitError: Tripletas insuficientes o sistema singular
        """
        paths = ArtifactPaths.at(out_dir or self.settings.harness.out)
        origen = Path(dataset_path) if dataset_path else paths.dataset
        records = read_dataset(origen)
        if not records:
            raise DatasetError(f"El dataset {origen} no tiene registros")
        self.logger.info(f"[INICIO] Preentrenamiento sobre {len(records)} registros de {origen}")

        scales = FeatureScales.from_config(self.settings.world)
        encoder, curve = pretrain([(r.E, r.a_star) for r in records], self.settings.pretrain,
                                  self.settings.encoder, scales)
        bank, Z = self.build_bank(encoder, records)
        model, triples = self.fit_model(records, Z)
        bank.build_index()

        ensure_directory(paths.root)
        write_jsonl(paths.pretrain_loss, curve)
        save_model(paths.model, encoder, model)
        bank.save(paths.bank)
        self.logger.info(f"[FIN] Preentrenamiento: banco de {bank.size} entradas en {paths.root}")
        return {
            "records": len(records),
            "triples": triples,
            "final_loss": float(curve[-1]["loss"]),
            "initial_loss": float(curve[0]["loss"]),
            "sigma_max": float(model.sigma_max),
            "bank_size": bank.size,
            "paths": [str(paths.model), str(paths.bank), str(paths.pretrain_loss)],
        }

