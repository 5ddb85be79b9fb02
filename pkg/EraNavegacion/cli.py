# coding: utf-8
"""
Punto de entrada de línea de comandos del arnés ERA.

Subcomandos: gen-data, pretrain, train, eval, bench, inspect-trace, audit.
Banderas globales: --config, --seed, --out, --threads.

Códigos de salida: 0 éxito, 1 error del proyecto, 2 uso incorrecto.
"""
import argparse
import sys
from typing import Any, Callable, Dict, List, Optional

from EraNavegacion.core import constants as C
from EraNavegacion.core.enums import Difficulty, PolicyKind
from EraNavegacion.core.settings import Settings, load_settings
from EraNavegacion.services.artifacts import load_artifacts
from EraNavegacion.services.audit_service import AuditService
from EraNavegacion.services.benchmark_service import BenchmarkService
from EraNavegacion.services.dataset_service import DatasetService
from EraNavegacion.services.evaluation_service import EvaluationService
from EraNavegacion.services.pretrain_service import PretrainService
from EraNavegacion.services.trace_service import TraceService
from EraNavegacion.services.training_service import TrainingService
from shared.utils.exceptions import EraError
from shared.utils.file_helpers import dumps_stable
from shared.utils.logger import establecer_configuracion_global, get_logger

logger = get_logger("EraCli")


def _parse_sizes(value: str) -> List[int]:
    try:
        sizes = [int(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"tamaños inválidos: {value!r}") from e
    if not sizes or any(s <= 0 for s in sizes):
        raise argparse.ArgumentTypeError("los tamaños deben ser enteros positivos separados por coma")
    return sizes


def _global_flags(parser: argparse.ArgumentParser, default: Any) -> None:
    parser.add_argument("--config", default=default, help="Archivo key=value o JSON de configuración")
    parser.add_argument("--seed", type=int, default=default, help="Semilla global")
    parser.add_argument("--out", default=default, help="Directorio de artefactos y reportes")
    parser.add_argument("--threads", type=int, default=default, help="Hilos para la evaluación")


def build_parser() -> argparse.ArgumentParser:
    """Parser con banderas globales aceptadas antes o después del subcomando."""
    parser = argparse.ArgumentParser(prog="era", description="Arnés del controlador Event-Retrieve-Action")
    _global_flags(parser, None)
    comunes = argparse.ArgumentParser(add_help=False)
    _global_flags(comunes, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("gen-data", parents=[comunes], help="Genera el dataset experto con el supervisor VPF")
    p.add_argument("--episodes", type=int, default=None, help="Episodios expertos")
    p.add_argument("--output", default=None, help="Ruta del dataset JSONL")

    p = sub.add_parser("pretrain", parents=[comunes], help="Preentrena el codificador, el banco y la dinámica")
    p.add_argument("--dataset", default=None, help="Dataset JSONL (default: <out>/dataset.jsonl)")

    p = sub.add_parser("train", parents=[comunes], help="Currículo con adaptación del banco")
    p.add_argument("--artifacts", default=None, help="Directorio con model.json y bank.jsonl")
    p.add_argument("--episodes", type=int, default=None, help="Episodios del currículo")

    p = sub.add_parser("eval", parents=[comunes], help="Evalúa una política sobre semillas pareadas")
    p.add_argument("--artifacts", default=None)
    p.add_argument("--difficulty", choices=[d.value for d in Difficulty], default=None)
    p.add_argument("--seeds", type=int, default=None, help="Número de semillas")
    p.add_argument("--policy", choices=[k.value for k in PolicyKind], default=PolicyKind.ERA.value)
    p.add_argument("--output", default=None, help="Ruta del reporte JSON")
    p.add_argument("--xlsx", default=None, help="Ruta opcional del reporte Excel")
    p.add_argument("--traces", default=None, help="Ruta opcional del JSONL de trazas")

    p = sub.add_parser("bench", parents=[comunes], help="Latencia por etapa y recall del índice")
    p.add_argument("--artifacts", default=None)
    p.add_argument("--sizes", type=_parse_sizes, default=None, help="Tamaños separados por coma")
    p.add_argument("--calls", type=int, default=None, help="Llamadas a decide por tamaño")
    p.add_argument("--output", default=None)

    p = sub.add_parser("inspect-trace", parents=[comunes], help="Imprime (y verifica) trazas de decisión")
    p.add_argument("path", help="JSONL de trazas")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--verify", action="store_true", help="Recalcula ΔV y la acción desde los artefactos")
    p.add_argument("--artifacts", default=None)

    p = sub.add_parser("audit", parents=[comunes], help="MSE a un paso y serie de ΔV de la dinámica")
    p.add_argument("--artifacts", default=None)
    p.add_argument("--dataset", default=None)
    p.add_argument("--output", default=None)
    return parser


def _ejecutar_gen_data(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    return DatasetService(settings).generate(episodes=args.episodes, output=args.output)


def _ejecutar_pretrain(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    return PretrainService(settings).run(dataset_path=args.dataset)


def _ejecutar_train(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    return TrainingService(settings).run(artifacts_dir=args.artifacts, episodes=args.episodes)


def _ejecutar_eval(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    report = EvaluationService(settings).run(artifacts_dir=args.artifacts, difficulty=args.difficulty,
                                             seeds=args.seeds, policy=args.policy, output=args.output,
                                             xlsx=args.xlsx, traces=args.traces)
    resumen = report.to_dict()
    resumen.pop("episodes")
    return resumen


def _ejecutar_bench(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    service = BenchmarkService(settings)
    report = service.run(artifacts_dir=args.artifacts, sizes=args.sizes, calls=args.calls, output=args.output)
    return {"sizes": service.summary(report), "retrieval_scaling_ratio": report.scaling_ratio}


def _ejecutar_inspect_trace(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    service = TraceService(settings.world.v_max)
    for bloque in service.inspect(args.path, limit=args.limit):
        print(bloque)
    if not args.verify:
        return {}
    artifacts = load_artifacts(args.artifacts or settings.harness.out, settings.bank)
    resumen = service.verify(args.path, artifacts)
    if not resumen["ok"]:
        raise EraError(f"La verificación de trazas falló: {resumen}")
    return resumen


def _ejecutar_audit(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    return AuditService(settings).run(artifacts_dir=args.artifacts, dataset_path=args.dataset, output=args.output)


COMANDOS: Dict[str, Callable[[argparse.Namespace, Settings], Dict[str, Any]]] = {
    "gen-data": _ejecutar_gen_data,
    "pretrain": _ejecutar_pretrain,
    "train": _ejecutar_train,
    "eval": _ejecutar_eval,
    "bench": _ejecutar_bench,
    "inspect-trace": _ejecutar_inspect_trace,
    "audit": _ejecutar_audit,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Ejecuta la CLI.

    Args:
        argv: Argumentos (default: sys.argv[1:])

    Returns:
        Código de salida (0, 1 o 2)
    """
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return C.CODIGO_SALIDA_USO
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return C.CODIGO_SALIDA_OK if e.code == 0 else C.CODIGO_SALIDA_USO
    if args.command is None:
        parser.print_usage(sys.stderr)
        return C.CODIGO_SALIDA_USO

    try:
        settings = load_settings(args.config, seed=args.seed, out=args.out, threads=args.threads,
                                 dotenv_path=".env")
        establecer_configuracion_global(settings.logs or None)
        logger.info(f"[INICIO] {args.command} (semilla {settings.seed}, salida {settings.harness.out})")
        resultado = COMANDOS[args.command](args, settings)
        if resultado:
            print(dumps_stable(resultado, indent=2))
        logger.info(f"[FIN] {args.command} completado")
        return C.CODIGO_SALIDA_OK
    except EraError as e:
        logger.error(f"[ERROR] {args.command}: {e}")
        return C.CODIGO_SALIDA_ERROR
    except Exception as e:
        logger.error(f"[ERROR] {args.command}: error inesperado {type(e).__name__}: {e}", exc_info=True)
        return C.CODIGO_SALIDA_ERROR
