"""
Configuración tipada del sistema.

Convierte el diccionario anidado que produce ``shared.utils.config_helper``
(archivo key=value, JSON o dict) en dataclasses inmutables validadas.
Cada sección del archivo corresponde a una dataclass:

    world.*      -> EpisodeConfig
    encoder.*    -> EncoderShape
    pretrain.*   -> PretrainHyper
    bank.*       -> BankSettings
    controller.* -> ControllerConfig (incluye retrieval: k, tau, alpha)
    harness.*    -> HarnessSettings
    logs.*       -> diccionario libre para el logger
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple, Type, TypeVar, Union

from EraNavegacion.core import constants as C
from EraNavegacion.core.enums import FallbackMode, SelectionMode
from shared.utils.config_helper import apply_env_overrides, get_section, load_config_from_param
from shared.utils.exceptions import ConfigurationError
from shared.utils.helpers import parse_bool
from shared.utils.logger import get_logger
from shared.utils.validators import (
    validate_choice,
    validate_finite,
    validate_in_range,
    validate_integer,
    validate_positive,
    validate_strictly_increasing,
)

logger = get_logger("Settings")

T = TypeVar("T")


# ============================================================================
# SECCIONES
# ============================================================================

@dataclass(frozen=True)
class EpisodeConfig:
    """
    Parámetros de un episodio del mundo cinemático.

    ``difficulty`` es el ξ del currículo. ``mix_a/mix_b/mix_c`` son las
    probabilidades de cada arquetipo de intruso y deben sumar 1.
    ``risk_trigger`` activa el disparo semántico (None = solo geométrico).
    """
    difficulty: float = 0.0
    intruder_count: int = C.INTRUSOS_MIN
    dt: float = C.DT_DEFAULT
    max_sim_steps: int = C.MAX_SIM_STEPS_DEFAULT
    trigger_radius: float = C.RADIO_DISPARO
    warning_radius: float = C.RADIO_ADVERTENCIA
    collision_radius: float = C.RADIO_COLISION
    goal_radius: float = C.RADIO_META
    v_max: float = C.V_MAX_DEFAULT
    intruder_v_max: float = C.INTRUDER_V_MAX_DEFAULT
    seed: int = 0
    k_att: float = C.K_ATRACCION
    k_rep: float = C.K_REPULSION
    k_vortex: float = C.K_VORTICE
    repulsion_cap: float = C.REPULSION_MAXIMA
    goal_min_distance: float = C.META_DISTANCIA_MIN
    goal_max_distance: float = C.META_DISTANCIA_MAX
    start_altitude: float = C.ALTURA_INICIAL
    altitude_span: float = C.VARIACION_ALTURA
    typea_sigma: float = C.SIGMA_TIPO_A
    lead_time: float = C.HORIZONTE_PREDICCION_TIPO_B
    risk_horizon: float = C.HORIZONTE_RIESGO
    risk_trigger: Optional[float] = field(default=None, metadata={"tipo": float})
    spawn_retries: int = C.REINTENTOS_SPAWN
    mix_a: float = 0.7
    mix_b: float = 0.0
    mix_c: float = 0.3

    def validate(self) -> "EpisodeConfig":
        """
        Valida la configuración completa.

        Returns:
            La misma instancia (para encadenar)

        Raises:
            ConfigurationError: Si algún campo es inválido
        """
        validate_in_range("world.difficulty", self.difficulty, 0.0, 1.0)
        validate_integer("world.intruder_count", self.intruder_count, minimum=0)
        validate_positive("world.dt", self.dt)
        validate_integer("world.max_sim_steps", self.max_sim_steps, minimum=1)
        validate_positive("world.collision_radius", self.collision_radius)
        validate_strictly_increasing(
            ("world.collision_radius", "world.warning_radius", "world.trigger_radius"),
            (self.collision_radius, self.warning_radius, self.trigger_radius),
        )
        validate_positive("world.goal_radius", self.goal_radius)
        validate_positive("world.v_max", self.v_max)
        validate_positive("world.intruder_v_max", self.intruder_v_max)
        validate_integer("world.seed", self.seed, minimum=0)
        for name in ("k_att", "k_rep", "k_vortex", "typea_sigma", "altitude_span"):
            validate_positive(f"world.{name}", getattr(self, name), allow_zero=True)
        validate_positive("world.repulsion_cap", self.repulsion_cap)
        validate_positive("world.goal_min_distance", self.goal_min_distance)
        if self.goal_max_distance < self.goal_min_distance:
            raise ConfigurationError("world.goal_max_distance debe ser >= world.goal_min_distance")
        if self.goal_min_distance <= self.goal_radius:
            raise ConfigurationError("world.goal_min_distance debe superar world.goal_radius")
        validate_finite("world.start_altitude", self.start_altitude)
        validate_positive("world.lead_time", self.lead_time, allow_zero=True)
        validate_positive("world.risk_horizon", self.risk_horizon, allow_zero=True)
        if self.risk_trigger is not None:
            validate_in_range("world.risk_trigger", self.risk_trigger, 0.0, 1.0)
        validate_integer("world.spawn_retries", self.spawn_retries, minimum=1)
        for name in ("mix_a", "mix_b", "mix_c"):
            validate_in_range(f"world.{name}", getattr(self, name), 0.0, 1.0)
        if abs(self.mix_a + self.mix_b + self.mix_c - 1.0) > 1e-9:
            raise ConfigurationError("world.mix_a + world.mix_b + world.mix_c debe ser 1")
        return self

    @property
    def kind_mix(self) -> Tuple[float, float, float]:
        return (self.mix_a, self.mix_b, self.mix_c)

    def with_changes(self, **changes: Any) -> "EpisodeConfig":
        """Copia con campos reemplazados y validada."""
        return dataclasses.replace(self, **changes).validate()

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class EncoderShape:
    """Dimensiones del codificador y parámetros del ajuste de dinámica latente."""
    hidden: int = C.DIM_OCULTA
    latent: int = C.DIM_LATENTE
    ridge: float = C.RIDGE_DEFAULT
    gamma: float = C.GAMMA_CONTRACCION
    empty_match_cost: float = C.COSTO_SIN_PAREJA
    velocity_weight: float = C.PESO_VELOCIDAD_CHAMFER
    global_weight: float = C.PESO_GLOBAL_CHAMFER

    def validate(self) -> "EncoderShape":
        validate_integer("encoder.hidden", self.hidden, minimum=1)
        validate_integer("encoder.latent", self.latent, minimum=1)
        validate_positive("encoder.ridge", self.ridge, allow_zero=True)
        validate_in_range("encoder.gamma", self.gamma, 0.0, 1.0, inclusive=False)
        for name in ("empty_match_cost", "velocity_weight", "global_weight"):
            validate_positive(f"encoder.{name}", getattr(self, name), allow_zero=True)
        return self


@dataclass(frozen=True)
class PretrainHyper:
    """Hiperparámetros del preentrenamiento métrico + imitación."""
    lambda_m: float = 1.0
    lambda_i: float = 1.0
    learning_rate: float = 0.05
    momentum: float = 0.9
    batch_size: int = 64
    epochs: int = 30
    pairs_per_batch: int = 64
    isotropy_weight: float = C.PESO_ISOTROPIA
    init_scale: float = 1.0
    seed: int = 0

    def validate(self) -> "PretrainHyper":
        validate_positive("pretrain.lambda_m", self.lambda_m, allow_zero=True)
        validate_positive("pretrain.lambda_i", self.lambda_i, allow_zero=True)
        if self.lambda_m == 0 and self.lambda_i == 0:
            raise ConfigurationError("pretrain.lambda_m y pretrain.lambda_i no pueden ser ambos 0")
        validate_positive("pretrain.learning_rate", self.learning_rate)
        validate_positive("pretrain.momentum", self.momentum, allow_zero=True)
        if self.momentum >= 1.0:
            raise ConfigurationError(f"pretrain.momentum debe ser < 1, se recibió {self.momentum!r}")
        validate_integer("pretrain.batch_size", self.batch_size, minimum=1)
        validate_integer("pretrain.epochs", self.epochs, minimum=0)
        validate_integer("pretrain.pairs_per_batch", self.pairs_per_batch, minimum=0)
        validate_positive("pretrain.isotropy_weight", self.isotropy_weight, allow_zero=True)
        validate_positive("pretrain.init_scale", self.init_scale)
        validate_integer("pretrain.seed", self.seed, minimum=0)
        return self


@dataclass(frozen=True)
class BankSettings:
    """Parámetros del banco y del índice IVF (None = dimensionado automático)."""
    n_list: Optional[int] = field(default=None, metadata={"tipo": int})
    n_scan: Optional[int] = field(default=None, metadata={"tipo": int})
    rebuild_fraction: float = C.FRACCION_RECONSTRUCCION
    kmeans_iterations: int = C.ITERACIONES_KMEANS
    penalty_factor: float = C.FACTOR_PENALIZACION
    reliability_floor: float = C.PISO_CONFIABILIDAD
    expert_immunity: bool = False

    def validate(self) -> "BankSettings":
        if self.n_list is not None:
            validate_integer("bank.n_list", self.n_list, minimum=1)
        if self.n_scan is not None:
            validate_integer("bank.n_scan", self.n_scan, minimum=1)
        validate_in_range("bank.rebuild_fraction", self.rebuild_fraction, 0.0, 1.0)
        validate_integer("bank.kmeans_iterations", self.kmeans_iterations, minimum=1)
        validate_in_range("bank.penalty_factor", self.penalty_factor, 0.0, 1.0)
        validate_in_range("bank.reliability_floor", self.reliability_floor, 0.0, 1.0)
        if self.reliability_floor <= 0.0:
            raise ConfigurationError("bank.reliability_floor debe ser > 0")
        return self


@dataclass(frozen=True)
class RetrievalParams:
    """Parámetros de recuperación: top-k, temperatura y peso de confiabilidad."""
    k: int = C.K_DEFAULT
    tau: float = C.TAU_DEFAULT
    alpha: float = C.ALPHA_DEFAULT

    def validate(self) -> "RetrievalParams":
        validate_integer("controller.k", self.k, minimum=1)
        validate_positive("controller.tau", self.tau)
        validate_positive("controller.alpha", self.alpha, allow_zero=True)
        return self


@dataclass(frozen=True)
class ControllerConfig:
    """Configuración del pipeline de decisión y de la adaptación en línea."""
    retrieval: RetrievalParams = field(default_factory=RetrievalParams)
    delta_v_margin: float = C.MARGEN_DELTA_V
    cluster_threshold: float = C.UMBRAL_CLUSTER
    fallback: FallbackMode = FallbackMode.MIN_DELTA_V
    selection: SelectionMode = SelectionMode.CBS
    use_ann: bool = True
    implication_threshold: float = C.UMBRAL_IMPLICACION
    novelty_threshold: float = C.UMBRAL_NOVEDAD
    proximity_shield: bool = True
    min_similarity: float = C.SIMILITUD_MINIMA
    lambda_p: float = C.LAMBDA_P
    lambda_r: float = C.LAMBDA_R
    success_reward: float = C.RECOMPENSA_EXITO
    collision_reward: float = C.RECOMPENSA_COLISION
    warning_penalty: float = C.PENALIZACION_ADVERTENCIA
    progress_gain: float = C.GANANCIA_PROGRESO

    def validate(self) -> "ControllerConfig":
        self.retrieval.validate()
        validate_finite("controller.delta_v_margin", self.delta_v_margin)
        validate_in_range("controller.cluster_threshold", self.cluster_threshold, -1.0, 1.0, inclusive=False)
        validate_in_range("controller.implication_threshold", self.implication_threshold, 0.0, 1.0)
        validate_in_range("controller.novelty_threshold", self.novelty_threshold, -1.0, 1.0)
        validate_in_range("controller.min_similarity", self.min_similarity, -1.0, 1.0)
        for name in ("lambda_p", "lambda_r", "success_reward", "collision_reward",
                     "warning_penalty", "progress_gain"):
            validate_finite(f"controller.{name}", getattr(self, name))
        return self

    def with_selection(self, selection: SelectionMode) -> "ControllerConfig":
        return dataclasses.replace(self, selection=selection)


@dataclass(frozen=True)
class HarnessSettings:
    """Parámetros del arnés: tamaños de corrida, semilla global y salidas."""
    seed: int = 0
    out: str = "artifacts"
    threads: int = 1
    expert_episodes: int = C.EPISODIOS_EXPERTO
    curriculum_episodes: int = C.EPISODIOS_CURRICULO
    eval_seeds: int = C.SEMILLAS_EVALUACION
    difficulty: str = "medium"
    bench_sizes: Tuple[int, ...] = C.TAMANOS_BENCH
    bench_calls: int = C.LLAMADAS_BENCH
    checkpoint_every: int = 0
    report_timing: bool = False
    min_dynamics_triples: Optional[int] = field(default=None, metadata={"tipo": int})

    def validate(self) -> "HarnessSettings":
        validate_integer("harness.seed", self.seed, minimum=0)
        validate_integer("harness.threads", self.threads, minimum=1)
        validate_integer("harness.expert_episodes", self.expert_episodes, minimum=0)
        validate_integer("harness.curriculum_episodes", self.curriculum_episodes, minimum=0)
        validate_integer("harness.eval_seeds", self.eval_seeds, minimum=1)
        validate_choice("harness.difficulty", self.difficulty, tuple(C.PRESETS_DIFICULTAD))
        for size in self.bench_sizes:
            validate_integer("harness.bench_sizes", size, minimum=1)
        validate_integer("harness.bench_calls", self.bench_calls, minimum=1)
        validate_integer("harness.checkpoint_every", self.checkpoint_every, minimum=0)
        return self


@dataclass(frozen=True)
class Settings:
    """Configuración completa ya validada."""
    world: EpisodeConfig = field(default_factory=EpisodeConfig)
    encoder: EncoderShape = field(default_factory=EncoderShape)
    pretrain: PretrainHyper = field(default_factory=PretrainHyper)
    bank: BankSettings = field(default_factory=BankSettings)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    harness: HarnessSettings = field(default_factory=HarnessSettings)
    logs: Dict[str, Any] = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.harness.seed


# ============================================================================
# CONSTRUCCIÓN DESDE DICCIONARIO
# ============================================================================

def _coerce(name: str, value: Any, default: Any, tipo: Optional[type]) -> Any:
    """Convierte un valor crudo al tipo del valor por defecto del campo."""
    if value is None:
        return None
    target = tipo or type(default)
    try:
        if isinstance(default, Enum) or (isinstance(target, type) and issubclass(target, Enum)):
            return target(value)
        if target is bool:
            return parse_bool(value)
        if target is int:
            if isinstance(value, bool):
                raise ValueError("booleano")
            as_float = float(value)
            if not as_float.is_integer():
                raise ValueError("no entero")
            return int(as_float)
        if target is float:
            as_float = float(value)
            if not math.isfinite(as_float):
                raise ValueError("no finito")
            return as_float
        if target is tuple:
            items = value if isinstance(value, (list, tuple)) else [value]
            return tuple(int(float(v)) for v in items)
        if target is str:
            return str(value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Valor inválido para {name}: {value!r} ({e})")
    return value


def _build_section(cls: Type[T], raw: Dict[str, Any], section: str,
                   extra: Optional[Dict[str, Any]] = None) -> T:
    """
    Construye una dataclass de sección a partir de un diccionario plano.

    Args:
        cls: Dataclass destino
        raw: Valores crudos de la sección
        section: Nombre de la sección (para mensajes)
        extra: Campos ya construidos que no vienen del diccionario

    Returns:
        Instancia de ``cls``

    Raises:
        ConfigurationError: Si hay claves desconocidas o valores inválidos
    """
    campos = {f.name: f for f in dataclasses.fields(cls)}
    kwargs: Dict[str, Any] = dict(extra or {})
    for key, value in raw.items():
        if key in kwargs:
            continue
        if key not in campos:
            raise ConfigurationError(f"Clave de configuración desconocida: {section}.{key}")
        f = campos[key]
        default = f.default if f.default is not dataclasses.MISSING else None
        kwargs[key] = _coerce(f"{section}.{key}", value, default, f.metadata.get("tipo"))
    return cls(**kwargs)


def settings_from_dict(raw: Dict[str, Any]) -> Settings:
    """
    Construye y valida ``Settings`` a partir de la configuración anidada.

    Args:
        raw: Diccionario con secciones world, encoder, pretrain, bank,
            controller, harness y logs

    Returns:
        Settings validados

    Raises:
        ConfigurationError: Si alguna sección o valor es inválido
    """
    conocidas = {"world", "encoder", "pretrain", "bank", "controller", "harness", "logs"}
    desconocidas = sorted(set(raw) - conocidas)
    if desconocidas:
        raise ConfigurationError(f"Secciones de configuración desconocidas: {desconocidas}")

    controller_raw = dict(get_section(raw, "controller"))
    retrieval_raw = {k: controller_raw.pop(k) for k in ("k", "tau", "alpha") if k in controller_raw}
    retrieval = _build_section(RetrievalParams, retrieval_raw, "controller")

    harness = _build_section(HarnessSettings, get_section(raw, "harness"), "harness").validate()
    pretrain_raw = dict(get_section(raw, "pretrain"))
    pretrain_raw.setdefault("seed", harness.seed)

    settings = Settings(
        world=_build_section(EpisodeConfig, get_section(raw, "world"), "world").validate(),
        encoder=_build_section(EncoderShape, get_section(raw, "encoder"), "encoder").validate(),
        pretrain=_build_section(PretrainHyper, pretrain_raw, "pretrain").validate(),
        bank=_build_section(BankSettings, get_section(raw, "bank"), "bank").validate(),
        controller=_build_section(ControllerConfig, controller_raw, "controller",
                                  extra={"retrieval": retrieval}).validate(),
        harness=harness,
        logs=dict(get_section(raw, "logs")),
    )
    logger.debug(f"Configuración validada (semilla base {settings.seed})")
    return settings


def load_settings(config_param: Union[Dict[str, Any], str, None] = None,
                  seed: Optional[int] = None,
                  out: Optional[str] = None,
                  threads: Optional[int] = None,
                  environ: Optional[Dict[str, str]] = None,
                  dotenv_path: Optional[str] = None) -> Settings:
    """
    Carga la configuración desde archivo/dict, aplica el entorno y las banderas globales.

    Prioridad (de menor a mayor): valores por defecto, archivo, entorno
    ``ERA__*``, banderas de la CLI.

    Args:
        config_param: Ruta, string JSON, dict o None
        seed: Semilla global (--seed)
        out: Directorio de salida (--out)
        threads: Número de hilos de evaluación (--threads)
        environ: Variables de entorno (default: os.environ)
        dotenv_path: Archivo .env opcional

    Returns:
        Settings validados
    """
    raw = load_config_from_param(config_param)
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}
    apply_env_overrides(raw, environ=environ, dotenv_path=dotenv_path)
    harness = raw.setdefault("harness", {})
    if seed is not None:
        harness["seed"] = seed
    if out is not None:
        harness["out"] = out
    if threads is not None:
        harness["threads"] = threads
    return settings_from_dict(raw)
