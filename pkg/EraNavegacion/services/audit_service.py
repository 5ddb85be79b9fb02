"""Auditoría de estabilidad de la dinámica latente sobre el dataset experto."""
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from EraNavegacion.core.dynamics import lyapunov_delta, one_step_mse, predict
from EraNavegacion.core.encoder import encode
from EraNavegacion.core.settings import Settings
from EraNavegacion.services.artifacts import ArtifactPaths, load_artifacts, read_dataset
from EraNavegacion.services.pretrain_service import transition_triples
from shared.utils.exceptions import DatasetError
from shared.utils.file_helpers import write_json, write_jsonl
from shared.utils.logger import get_logger


class AuditService:
    """Reporta MSE a un paso y la serie de ΔV a lo largo de las tripletas."""

    def __init__(self, settings: Settings) -> None:
        self.settings = settings
        self.logger = get_logger("AuditService")

    def run(self, artifacts_dir: Optional[Union[str, Path]] = None,
            dataset_path: Optional[Union[str, Path]] = None,
            output: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
        """
        Ejecuta la auditoría y escribe audit.json y la serie de ΔV.

        Args:
            artifacts_dir: Directorio con model.json y bank.jsonl
            dataset_path: Dataset JSONL (default: <artefactos>/dataset.jsonl)
            output: Ruta del JSON (default: <out>/audit.json)

        Returns:
            Resumen con MSE, estadísticos de ΔV y fracción con ΔV < 0
        """
        harness = self.settings.harness
        paths = ArtifactPaths.at(artifacts_dir or harness.out)
        artifacts = load_artifacts(paths.root, self.settings.bank)
        records = read_dataset(dataset_path or paths.dataset)
        if not records:
            raise DatasetError("El dataset de auditoría está vacío")
        model = artifacts.model

        Z = np.stack([encode(artifacts.encoder, r.E) for r in records])
        z_t, a_t, z_next = transition_triples(records, Z)
        if not len(z_t):
            raise DatasetError("El dataset no tiene decisiones consecutivas para auditar")

        forced = np.array([lyapunov_delta(model, z, a) for z, a in zip(z_t, a_t)])
        drift = z_t @ model.psi.T
        unforced = np.einsum("ij,ij->i", drift, drift) - np.einsum("ij,ij->i", z_t, z_t)
        residual = np.array([np.linalg.norm(predict(model, z, a) - zn) for z, a, zn in zip(z_t, a_t, z_next)])

        summary = {
            "triples": int(len(z_t)),
            "one_step_mse": one_step_mse(model, z_t, a_t, z_next),
            "sigma_max": float(model.sigma_max),
            "contraction": float(model.contraction),
            "delta_v": {
                "mean": float(forced.mean()),
                "max": float(forced.max()),
                "fraction_negative": float(np.mean(forced < 0.0)),
            },
            "unforced_fraction_negative": float(np.mean(unforced < 0.0)),
            "mean_residual": float(residual.mean()),
        }
        destino = Path(output) if output else Path(harness.out) / "audit.json"
        write_json(destino, summary)
        write_jsonl(destino.with_name(destino.stem + "_series.jsonl"),
                    ({"index": i, "delta_v": float(dv), "residual": float(res)}
                     for i, (dv, res) in enumerate(zip(forced, residual))))
        self.logger.info(f"Auditoría: MSE {summary['one_step_mse']:.6e}, ΔV<0 en "
                         f"{summary['delta_v']['fraction_negative']:.3f} de {summary['triples']} tripletas -> {destino}")
        return summary
