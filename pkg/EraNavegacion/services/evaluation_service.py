"""
Servicio de evaluación: episodios pareados por semilla y tabla de métricas.

Todas las políticas reciben la misma lista de semillas (stream ``eval``), de
modo que ERA y el experto se comparan sobre los mismos mundos.
"""
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from openpyxl import Workbook
from openpyxl.styles import Alignment, Font, PatternFill

from EraNavegacion.core.curriculum import difficulty_config
from EraNavegacion.core.enums import Difficulty, PolicyKind, TerminalStatus
from EraNavegacion.core.models import MetricsReport
from EraNavegacion.core.seeding import derive_seed
from EraNavegacion.core.settings import Settings
from EraNavegacion.services.artifacts import ArtifactPaths, Artifacts, load_artifacts
from EraNavegacion.services.episode_runner import EpisodeResult, execute_episode
from EraNavegacion.services.policies import make_policy
from shared.utils.file_helpers import JsonlWriter, ensure_directory, write_json
from shared.utils.helpers import safe_mean
from shared.utils.logger import get_logger

ENCABEZADOS_METRICAS = [
    "Policy", "Difficulty", "Seeds", "Success Rate", "Collision Rate", "Warning Rate",
    "Timeout Rate", "Avg Steps", "Reaction (ms)", "Bank Size", "Shield Rate",
]
ENCABEZADOS_EPISODIOS = [
    "Seed", "Terminal", "Had Warning", "Decision Steps", "Min Separation", "Reaction (ms)", "Sim Steps",
]


def eval_seeds(base_seed: int, count: int) -> List[int]:
    """Lista de semillas pareadas del stream ``eval``."""
    return [derive_seed(base_seed, "eval", i) for i in range(count)]


def summarize(policy: str, difficulty: str, results: List[EpisodeResult], bank_size: int) -> MetricsReport:
    """
    Agrega los resultados de los episodios en un MetricsReport.

    La latencia de reacción es la media por decisión sobre todos los episodios;
    la tasa de escudo es la fracción de decisiones ERA cedidas al experto.
    """
    outcomes = [r.outcome for r in results]
    n = len(outcomes)

    def rate(status: TerminalStatus) -> float:
        return sum(o.terminal == status for o in outcomes) / n if n else 0.0

    decisions = sum(o.decision_steps for o in outcomes)
    reaction = (sum(o.wall_reaction_ms * o.decision_steps for o in outcomes) / decisions) if decisions else 0.0
    traces = [t for r in results for t in r.buffer.traces if t is not None]
    shielded = sum(t.shield is not None for t in traces)
    return MetricsReport(
        policy=policy,
        difficulty=difficulty,
        seeds=n,
        success_rate=rate(TerminalStatus.SUCCESS),
        collision_rate=rate(TerminalStatus.COLLISION),
        warning_rate=sum(o.had_warning for o in outcomes) / n if n else 0.0,
        timeout_rate=rate(TerminalStatus.TIMEOUT),
        avg_steps=safe_mean([float(o.decision_steps) for o in outcomes]),
        reaction_ms=float(reaction),
        bank_size=bank_size,
        shield_rate=shielded / len(traces) if traces else 0.0,
        seed_list=[o.seed for o in outcomes],
        episodes=[o.to_dict() for o in outcomes],
    )


class EvaluationService:
    """Evalúa ERA, ERA-promedio o el experto VPF sobre semillas fijas."""

    def __init__(self, settings: Settings) -> None:
        self.settings = settings
        self.logger = get_logger("EvaluationService")

    def _run_one(self, kind: PolicyKind, cfg, episode: int, artifacts: Optional[Artifacts]) -> EpisodeResult:
        harness = self.settings.harness
        if artifacts is None:
            policy = make_policy(kind, cfg)
        else:
            policy = make_policy(kind, cfg, artifacts.bank, artifacts.encoder, artifacts.model,
                                 self.settings.controller, report_timing=harness.report_timing)
        return execute_episode(policy, cfg, episode=episode, controller_config=self.settings.controller,
                               record_trajectory=False, report_timing=harness.report_timing)

    def run(self, artifacts_dir: Optional[Union[str, Path]] = None,
            difficulty: Optional[str] = None,
            seeds: Optional[int] = None,
            policy: Union[str, PolicyKind] = PolicyKind.ERA,
            output: Optional[Union[str, Path]] = None,
            xlsx: Optional[Union[str, Path]] = None,
            traces: Optional[Union[str, Path]] = None) -> MetricsReport:
        """
        Evalúa una política y escribe el reporte JSON.

        Args:
            artifacts_dir: Directorio con model.json y bank.jsonl (requerido para ERA)
            difficulty: Perfil easy/medium/hard/extreme (default: harness.difficulty)
            seeds: Número de semillas (default: harness.eval_seeds)
            policy: era, era-average o expert
            output: Ruta del JSON (default: <out>/metrics_<policy>_<difficulty>.json)
            xlsx: Ruta opcional de un reporte Excel
            traces: Ruta opcional de un JSONL de trazas de decisión

        Returns:
            MetricsReport

        Raises:
            ArtifactError: Si la política es ERA y faltan los artefactos
            EpisodeAbortedError: Si un episodio aborta
        """
        harness = self.settings.harness
        kind = PolicyKind(policy)
        difficulty = Difficulty(difficulty or harness.difficulty).value
        count = harness.eval_seeds if seeds is None else int(seeds)
        root = ArtifactPaths.at(artifacts_dir or harness.out).root

        artifacts: Optional[Artifacts] = None
        bank_size = 0
        if kind != PolicyKind.EXPERT:
            artifacts = load_artifacts(root, self.settings.bank)
            artifacts.bank.prepare()
            bank_size = artifacts.bank.size

        seed_list = eval_seeds(self.settings.seed, count)
        configs = [difficulty_config(Difficulty(difficulty), self.settings.world, s) for s in seed_list]
        self.logger.info(f"[INICIO] Evaluación {kind.value} en {difficulty}: {count} semillas, "
                         f"{harness.threads} hilo(s)")

        if harness.threads > 1:
            with ThreadPoolExecutor(max_workers=harness.threads) as pool:
                results = list(pool.map(lambda item: self._run_one(kind, item[1], item[0], artifacts),
                                        enumerate(configs)))
        else:
            results = [self._run_one(kind, cfg, i, artifacts) for i, cfg in enumerate(configs)]

        report = summarize(kind.value, difficulty, results, bank_size)
        destino = Path(output) if output else Path(harness.out) / f"metrics_{kind.value}_{difficulty}.json"
        write_json(destino, report.to_dict())
        if traces:
            self._write_traces(traces, results)
        if xlsx:
            self.generar_reporte_excel(report, xlsx)
        self.logger.info(f"[FIN] Evaluación {kind.value}/{difficulty}: éxito {report.success_rate:.3f}, "
                         f"colisión {report.collision_rate:.3f}, advertencia {report.warning_rate:.3f}, "
                         f"{report.avg_steps:.2f} decisiones, {report.reaction_ms:.3f} ms -> {destino}")
        return report

    def _write_traces(self, path: Union[str, Path], results: List[EpisodeResult]) -> int:
        with JsonlWriter(path) as writer:
            for episode, result in enumerate(results):
                for decision, trace in enumerate(result.buffer.traces):
                    if trace is None:
                        continue
                    writer.write({"episode": episode, "seed": result.outcome.seed,
                                  "decision": decision, "trace": trace.to_dict()})
            self.logger.info(f"{writer.count} trazas escritas en {path}")
            return writer.count

    def generar_reporte_excel(self, report: MetricsReport, path: Union[str, Path]) -> str:
        """
        Genera un reporte Excel con la fila de métricas y una hoja por episodio.

        Args:
            report: Métricas agregadas
            path: Ruta del archivo .xlsx

        Returns:
            Ruta del archivo Excel generado
        """
        wb = Workbook()
        ws = wb.active
        ws.title = "Metricas"
        self._escribir_encabezados(ws, ENCABEZADOS_METRICAS)
        ws.append([
            report.policy, report.difficulty, report.seeds,
            round(report.success_rate, 4), round(report.collision_rate, 4), round(report.warning_rate, 4),
            round(report.timeout_rate, 4), round(report.avg_steps, 2), round(report.reaction_ms, 3),
            report.bank_size, round(report.shield_rate, 4),
        ])
        self._ajustar_ancho_columnas(ws)

        ws_ep = wb.create_sheet("Episodios")
        self._escribir_encabezados(ws_ep, ENCABEZADOS_EPISODIOS)
        for ep in report.episodes:
            ws_ep.append([ep["seed"], ep["terminal"], ep["had_warning"], ep["decision_steps"],
                          ep["min_separation"], ep["wall_reaction_ms"], ep["sim_steps"]])
        self._ajustar_ancho_columnas(ws_ep)

        destino = Path(path)
        if destino.parent and str(destino.parent) not in ("", "."):
            ensure_directory(destino.parent)
        wb.save(destino)
        self.logger.info(f"Reporte Excel generado: {destino}")
        return str(destino)

    def _escribir_encabezados(self, ws: Any, headers: List[str]) -> None:
        ws.append(headers)
        for col in range(1, len(headers) + 1):
            cell = ws.cell(row=1, column=col)
            cell.font = Font(bold=True)
            cell.fill = PatternFill(start_color="366092", end_color="366092", fill_type="solid")
            cell.alignment = Alignment(horizontal="center")

    def _ajustar_ancho_columnas(self, ws: Any) -> None:
        """
        Ajusta el ancho de las columnas del worksheet según su contenido.

        Args:
            ws: Worksheet de openpyxl a ajustar
        """
        for col in ws.columns:
            max_length = max((len(str(cell.value)) for cell in col if cell.value is not None), default=0)
            ws.column_dimensions[col[0].column_letter].width = min(max_length + 2, 50)
