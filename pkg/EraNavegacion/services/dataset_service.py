"""
Servicio de generación del dataset experto.

Ejecuta el supervisor VPF sobre los perfiles de dificultad en rotación y
retiene solo los episodios exitosos.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from EraNavegacion.core.curriculum import difficulty_config
from EraNavegacion.core.enums import Difficulty, TerminalStatus
from EraNavegacion.core.models import DatasetRecord
from EraNavegacion.core.seeding import derive_seed
from EraNavegacion.core.settings import Settings
from EraNavegacion.services.artifacts import ArtifactPaths
from EraNavegacion.services.episode_runner import execute_episode
from EraNavegacion.services.policies import ExpertPolicy
from shared.utils.exceptions import DatasetError
from shared.utils.file_helpers import JsonlWriter
from shared.utils.logger import get_logger

ROTACION_DIFICULTAD = (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD, Difficulty.EXTREME)


def decision_pairs(records: Sequence[DatasetRecord]) -> List[Tuple[int, int]]:
    """
    Índices (t, t+1) de decisiones consecutivas dentro de un mismo episodio.

    Args:
        records: Registros en cualquier orden

    Returns:
        Pares de índices sobre ``records`` ordenados por (episodio, paso)
    """
    order = sorted(range(len(records)), key=lambda i: (records[i].episode, records[i].step))
    return [(a, b) for a, b in zip(order, order[1:]) if records[a].episode == records[b].episode]


class DatasetService:
    """Genera pares (E_t, a*) con el experto VPF."""

    def __init__(self, settings: Settings) -> None:
        self.settings = settings
        self.logger = get_logger("DatasetService")

    def episode_config(self, episode: int):
        """Perfil rotativo y semilla del stream ``dataset`` para el episodio dado."""
        difficulty = ROTACION_DIFICULTAD[episode % len(ROTACION_DIFICULTAD)]
        seed = derive_seed(self.settings.seed, "dataset", episode)
        return difficulty_config(difficulty, self.settings.world, seed)

    def generate(self, episodes: Optional[int] = None,
                 output: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
        """
        Ejecuta los episodios expertos y escribe el dataset JSONL.

        Args:
            episodes: Número de episodios (default: harness.expert_episodes)
            output: Ruta del dataset (default: <out>/dataset.jsonl)

        Returns:
            Resumen con episodios, retenidos, registros y ruta

        Raises:
            DatasetError: Si hubo episodios pero ninguno fue retenido
        """
        episodes = self.settings.harness.expert_episodes if episodes is None else int(episodes)
        destino = Path(output) if output else ArtifactPaths.at(self.settings.harness.out).dataset
        self.logger.info(f"[INICIO] Generación de dataset: {episodes} episodios expertos -> {destino}")

        retained = 0
        terminales: Dict[str, int] = {status.value: 0 for status in TerminalStatus}
        with JsonlWriter(destino) as writer:
            for episode in range(episodes):
                cfg = self.episode_config(episode)
                result = execute_episode(ExpertPolicy(cfg), cfg, episode=episode, record_trajectory=False,
                                         report_timing=False)
                terminales[result.outcome.terminal.value] += 1
                if result.outcome.terminal != TerminalStatus.SUCCESS:
                    continue
                retained += 1
                for status in result.statuses:
                    writer.write(DatasetRecord(E=status.E_t, a_star=status.a_t,
                                               episode=status.episode, step=status.step).to_dict())
            records = writer.count

        if episodes > 0 and retained == 0:
            self.logger.error(f"Ningún episodio experto fue exitoso ({terminales})")
            raise DatasetError("Ningún episodio experto fue retenido; pruebe una configuración más fácil "
                               "(menos intrusos o menor velocidad)")
        self.logger.info(f"[FIN] Dataset: {retained}/{episodes} episodios retenidos, {records} registros "
                         f"({terminales})")
        return {"episodes": episodes, "retained": retained, "records": records,
                "terminals": terminales, "path": str(destino)}
