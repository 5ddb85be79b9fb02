"""
Servicio de entrenamiento por currículo.

Cada episodio corre con una instantánea de solo lectura del banco; la
adaptación (poda, penalización, inserción) ocurre después, en la fase de
escritura exclusiva protegida por el lock del directorio de salida.
"""
from pathlib import Path
from typing import Any, Dict, Optional, Union

from EraNavegacion.core.adaptation import adapt
from EraNavegacion.core.curriculum import curriculum, curriculum_xi
from EraNavegacion.core.enums import PolicyKind, TerminalStatus
from EraNavegacion.core.serialization import save_model
from EraNavegacion.core.settings import Settings
from EraNavegacion.services.artifacts import ArtifactPaths, load_artifacts
from EraNavegacion.services.episode_runner import execute_episode
from EraNavegacion.services.policies import make_policy
from shared.utils.exceptions import EmptyBankError
from shared.utils.file_helpers import JsonlWriter, acquire_lock, release_lock
from shared.utils.helpers import safe_mean
from shared.utils.logger import get_logger


class TrainingService:
    """Ejecuta el currículo ERA con adaptación del banco entre episodios."""

    def __init__(self, settings: Settings) -> None:
        self.settings = settings
        self.logger = get_logger("TrainingService")

    def run(self, artifacts_dir: Optional[Union[str, Path]] = None,
            out_dir: Optional[Union[str, Path]] = None,
            episodes: Optional[int] = None) -> Dict[str, Any]:
        """
        Entrena sobre el currículo y guarda el banco adaptado.

        Args:
            artifacts_dir: Directorio con model.json y bank.jsonl (default: harness.out)
            out_dir: Directorio de salida (default: harness.out)
            episodes: Número de episodios T (default: harness.curriculum_episodes)

        Returns:
            Resumen con tasas por episodio y tamaño final del banco

        Raises:
            ArtifactError: Artefactos ausentes o lock activo
            EmptyBankError: Si el banco queda vacío durante el currículo
        """
        harness = self.settings.harness
        origen = ArtifactPaths.at(artifacts_dir or harness.out)
        paths = ArtifactPaths.at(out_dir or harness.out)
        total = harness.curriculum_episodes if episodes is None else int(episodes)

        lock = acquire_lock(paths.root, "train")
        try:
            artifacts = load_artifacts(origen.root, self.settings.bank)
            bank = artifacts.bank
            base = self.settings.world.with_changes(seed=self.settings.seed)
            self.logger.info(f"[INICIO] Currículo de {total} episodios sobre un banco de {bank.size} entradas")
            if harness.checkpoint_every > 0:
                bank.save(paths.checkpoint(0))

            outcomes = []
            with JsonlWriter(paths.train_log) as log:
                for idx in range(total):
                    cfg = curriculum(idx, base, total)
                    if len(bank) == 0:
                        raise EmptyBankError(f"El banco quedó vacío antes del episodio {idx}")
                    bank.ensure_fresh_index()
                    bank.prepare()
                    policy = make_policy(PolicyKind.ERA, cfg, bank, artifacts.encoder, artifacts.model,
                                         self.settings.controller, report_timing=harness.report_timing)
                    result = execute_episode(policy, cfg, episode=idx,
                                             controller_config=self.settings.controller,
                                             record_trajectory=False, report_timing=harness.report_timing)
                    report = adapt(bank, result.buffer, artifacts.encoder, self.settings.controller,
                                   self.settings.bank)
                    bank.ensure_fresh_index()
                    outcome = result.outcome
                    outcomes.append(outcome)
                    log.write({
                        "episode": idx,
                        "xi": curriculum_xi(idx, total),
                        "intruders": cfg.intruder_count,
                        "seed": cfg.seed,
                        "terminal": outcome.terminal.value,
                        "success": outcome.terminal == TerminalStatus.SUCCESS,
                        "collision": outcome.terminal == TerminalStatus.COLLISION,
                        "warning": outcome.had_warning,
                        "decision_steps": outcome.decision_steps,
                        "min_separation": outcome.to_dict()["min_separation"],
                        "reaction_ms": outcome.wall_reaction_ms,
                        "bank_size": bank.size,
                        **report.to_dict(),
                    })
                    self.logger.info(f"Episodio {idx + 1}/{total} ({cfg.intruder_count} intrusos): "
                                     f"{outcome.terminal.value}, banco {bank.size}, "
                                     f"J_perf {report.j_perf:.4f}, R_phys {report.r_phys:.4f}")
                    if harness.checkpoint_every > 0 and (idx + 1) % harness.checkpoint_every == 0:
                        bank.save(paths.checkpoint(idx + 1))

            save_model(paths.model, artifacts.encoder, artifacts.model)
            bank.save(paths.bank)
        except EmptyBankError as e:
            self.logger.error(f"Currículo abortado: {e}")
            raise
        finally:
            release_lock(lock)

        success = safe_mean([float(o.terminal == TerminalStatus.SUCCESS) for o in outcomes])
        collision = safe_mean([float(o.terminal == TerminalStatus.COLLISION) for o in outcomes])
        self.logger.info(f"[FIN] Currículo: éxito {success:.3f}, colisión {collision:.3f}, "
                         f"banco final {bank.size} entradas")
        return {"episodes": total, "success_rate": success, "collision_rate": collision,
                "bank_size": bank.size, "log": str(paths.train_log)}
