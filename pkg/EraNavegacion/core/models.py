"""
Modelos de datos del dominio: estado del mundo, listas de eventos, entradas
del banco, códigos de estado, trazas de decisión y reportes.

Los vectores 3D se representan como ``np.ndarray`` de forma (3,) en float64.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from EraNavegacion.core.enums import EntrySource, IntruderKind, TerminalStatus

Vec3 = np.ndarray
LatentCode = np.ndarray

KIND_ORDER: Tuple[IntruderKind, ...] = (IntruderKind.TYPE_A, IntruderKind.TYPE_B, IntruderKind.TYPE_C)


def vec3(values: Sequence[float]) -> Vec3:
    """
    Convierte una secuencia de 3 números en un vector float64.

    Args:
        values: Secuencia con x, y, z

    Returns:
        Arreglo de forma (3,)
    """
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"Se esperaba un vector de 3 componentes, se recibió forma {arr.shape}")
    return arr


def clamp_norm(v: Vec3, max_norm: float) -> Vec3:
    """
    Recorta la norma de un vector sin cambiar su dirección.

    Args:
        v: Vector
        max_norm: Norma máxima

    Returns:
        Vector recortado (copia)
    """
    norm = float(np.linalg.norm(v))
    if norm > max_norm and norm > 0.0:
        return v * (max_norm / norm)
    return np.array(v, dtype=np.float64)


def to_list(v: np.ndarray) -> List[float]:
    """Lista de floats Python (precisión completa al serializar)."""
    return [float(x) for x in np.asarray(v, dtype=np.float64).reshape(-1)]


# ============================================================================
# MUNDO
# ============================================================================

@dataclass
class EgoState:
    """Estado del agente ego: posición, velocidad comandada y meta del episodio."""
    position: Vec3
    velocity: Vec3
    goal: Vec3


@dataclass
class Intruder:
    """Intruso esférico con identificador único dentro del episodio."""
    id: int
    kind: IntruderKind
    position: Vec3
    velocity: Vec3
    risk: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"id": int(self.id), "kind": self.kind.value, "p": to_list(self.position), "v": to_list(self.velocity)}


@dataclass
class WorldState:
    """
    Estado completo del mundo en un instante.

    ``rng`` es el generador explícito del mundo; ``had_warning`` y
    ``min_separation`` se actualizan en cada paso para que classify dependa
    solo de la geometría acumulada.
    """
    time: float
    ego: EgoState
    intruders: List[Intruder]
    rng: np.random.Generator
    steps: int = 0
    had_warning: bool = False
    min_separation: float = float("inf")

    def separations(self) -> np.ndarray:
        """Distancias ego-intruso en el orden de la lista."""
        if not self.intruders:
            return np.zeros(0)
        positions = np.stack([intr.position for intr in self.intruders])
        return np.linalg.norm(positions - self.ego.position, axis=1)


@dataclass
class EpisodeOutcome:
    """Resultado de un episodio con el esquema de métricas del benchmark."""
    terminal: TerminalStatus
    had_warning: bool
    decision_steps: int
    min_separation: float
    wall_reaction_ms: float
    sim_steps: int = 0
    seed: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "terminal": self.terminal.value,
            "had_warning": bool(self.had_warning),
            "decision_steps": int(self.decision_steps),
            "min_separation": float(self.min_separation) if np.isfinite(self.min_separation) else None,
            "wall_reaction_ms": float(self.wall_reaction_ms),
            "sim_steps": int(self.sim_steps),
            "seed": int(self.seed),
        }


# ============================================================================
# EVENTOS
# ============================================================================

@dataclass(frozen=True)
class EventElement:
    """Registro semántico de un intruso en el marco del ego (trasladado, ejes del mundo)."""
    object_id: int
    rel_position: Vec3
    rel_velocity: Vec3
    kind: IntruderKind
    risk: float

    @property
    def kind_onehot(self) -> np.ndarray:
        onehot = np.zeros(3)
        onehot[KIND_ORDER.index(self.kind)] = 1.0
        return onehot

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": int(self.object_id),
            "p": to_list(self.rel_position),
            "v": to_list(self.rel_velocity),
            "kind": self.kind.value,
            "risk": float(self.risk),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EventElement":
        return cls(
            object_id=int(data["id"]),
            rel_position=vec3(data["p"]),
            rel_velocity=vec3(data["v"]),
            kind=IntruderKind(data["kind"]),
            risk=float(data["risk"]),
        )


@dataclass(frozen=True)
class GlobalState:
    """Estado global: velocidad propia, rapidez, vector unitario y distancia a la meta."""
    self_velocity: Vec3
    speed: float
    target_unit: Vec3
    target_distance: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "vel": to_list(self.self_velocity),
            "speed": float(self.speed),
            "target_unit": to_list(self.target_unit),
            "target_distance": float(self.target_distance),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GlobalState":
        return cls(
            self_velocity=vec3(data["vel"]),
            speed=float(data["speed"]),
            target_unit=vec3(data["target_unit"]),
            target_distance=float(data["target_distance"]),
        )


@dataclass(frozen=True)
class EventList:
    """Conjunto no ordenado de elementos más el estado global en un instante."""
    elements: Tuple[EventElement, ...]
    global_state: GlobalState
    timestamp: float

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def ids(self) -> List[int]:
        return [e.object_id for e in self.elements]

    def permuted(self, order: Sequence[int]) -> "EventList":
        """Copia con los elementos en otro orden (mismo conjunto)."""
        return EventList(tuple(self.elements[i] for i in order), self.global_state, self.timestamp)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": float(self.timestamp),
            "elements": [e.to_dict() for e in self.elements],
            "global": self.global_state.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EventList":
        return cls(
            elements=tuple(EventElement.from_dict(e) for e in data["elements"]),
            global_state=GlobalState.from_dict(data["global"]),
            timestamp=float(data["t"]),
        )


# ============================================================================
# BANCO DE CONOCIMIENTO
# ============================================================================

@dataclass
class BankEntry:
    """Experiencia almacenada (z, a, r) con su procedencia."""
    id: int
    z: LatentCode
    a: Vec3
    r: float
    episode: int = 0
    step: int = 0
    source: EntrySource = EntrySource.EXPERT

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": int(self.id),
            "z": to_list(self.z),
            "a": to_list(self.a),
            "r": float(self.r),
            "origin": {"episode": int(self.episode), "step": int(self.step), "source": self.source.value},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BankEntry":
        origin = data.get("origin", {})
        return cls(
            id=int(data["id"]),
            z=np.array(data["z"], dtype=np.float64),
            a=vec3(data["a"]),
            r=float(data["r"]),
            episode=int(origin.get("episode", 0)),
            step=int(origin.get("step", 0)),
            source=EntrySource(origin.get("source", EntrySource.EXPERT.value)),
        )


@dataclass
class Candidate:
    """Candidato recuperado: similitud, peso de recuperación y resultado del filtro."""
    entry_id: int
    sim: float
    weight: float = 0.0
    delta_v: float = 0.0
    passed: bool = True


@dataclass
class SearchResult:
    """Resultado de una búsqueda top-k; ``partial`` indica menos de k por listas vacías."""
    candidates: List[Candidate]
    partial: bool = False
    approximate: bool = False


# ============================================================================
# CONTROLADOR
# ============================================================================

@dataclass
class StatusCode:
    """Registro de interacción (E_t, a_t, r_t, E_{t+1}) de una decisión disparada."""
    E_t: EventList
    a_t: Vec3
    r_t: float
    E_next: Optional[EventList]
    episode: int = 0
    step: int = 0
    warning: bool = False


@dataclass
class Cluster:
    """Grupo de candidatos con acciones de dirección similar."""
    member_ids: List[int]
    weight: float
    leader_id: int


@dataclass
class DecisionTrace:
    """Traza completa de una decisión para auditoría e interpretabilidad."""
    z: LatentCode
    candidates: List[Candidate]
    clusters: List[Cluster]
    winner: int
    action: Vec3
    latency_ms: float
    margin: float = 0.0
    fallback: Optional[str] = None
    selection: str = "cbs"
    shield: Optional[str] = None

    def survivors(self) -> List[Candidate]:
        """Candidatos que entraron a los clusters (incluye el respaldo de menor ΔV), en orden de candidato."""
        members = {i for cl in self.clusters for i in cl.member_ids}
        return [c for c in self.candidates if c.entry_id in members]

    def final_weights(self) -> Dict[int, float]:
        """Pesos renormalizados sobre los sobrevivientes del filtro."""
        survivors = self.survivors()
        total = float(sum(c.weight for c in survivors))
        if total <= 0.0:
            return {c.entry_id: 1.0 / len(survivors) for c in survivors} if survivors else {}
        return {c.entry_id: c.weight / total for c in survivors}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "z": to_list(self.z),
            "cands": [
                {"id": int(c.entry_id), "sim": float(c.sim), "w": float(c.weight),
                 "dv": float(c.delta_v), "pass": bool(c.passed)}
                for c in self.candidates
            ],
            "clusters": [{"ids": [int(i) for i in cl.member_ids], "W": float(cl.weight)} for cl in self.clusters],
            "win": int(self.winner),
            "action": to_list(self.action),
            "ms": float(self.latency_ms),
            "margin": float(self.margin),
            "fallback": self.fallback,
            "selection": self.selection,
            "shield": self.shield,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DecisionTrace":
        candidates = [
            Candidate(entry_id=int(c["id"]), sim=float(c["sim"]), weight=float(c["w"]),
                      delta_v=float(c["dv"]), passed=bool(c["pass"]))
            for c in data["cands"]
        ]
        clusters = [
            Cluster(member_ids=[int(i) for i in cl["ids"]], weight=float(cl["W"]),
                    leader_id=int(cl["ids"][0]) if cl["ids"] else -1)
            for cl in data["clusters"]
        ]
        return cls(
            z=np.array(data["z"], dtype=np.float64),
            candidates=candidates,
            clusters=clusters,
            winner=int(data["win"]),
            action=vec3(data["action"]),
            latency_ms=float(data["ms"]),
            margin=float(data.get("margin", 0.0)),
            fallback=data.get("fallback"),
            selection=data.get("selection", "cbs"),
            shield=data.get("shield"),
        )


# ============================================================================
# ARNÉS
# ============================================================================

@dataclass
class DatasetRecord:
    """Par (E_t, a*) del experto con su procedencia."""
    E: EventList
    a_star: Vec3
    episode: int
    step: int

    def to_dict(self) -> Dict[str, Any]:
        return {"episode": int(self.episode), "step": int(self.step), "E": self.E.to_dict(), "a": to_list(self.a_star)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DatasetRecord":
        return cls(E=EventList.from_dict(data["E"]), a_star=vec3(data["a"]),
                   episode=int(data["episode"]), step=int(data["step"]))


@dataclass
class MetricsReport:
    """Reporte con las columnas de la tabla de métricas unificada."""
    policy: str
    difficulty: str
    seeds: int
    success_rate: float
    collision_rate: float
    warning_rate: float
    timeout_rate: float
    avg_steps: float
    reaction_ms: float
    bank_size: int
    shield_rate: float = 0.0
    seed_list: List[int] = field(default_factory=list)
    episodes: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "policy": self.policy,
            "difficulty": self.difficulty,
            "seeds": int(self.seeds),
            "success_rate": float(self.success_rate),
            "collision_rate": float(self.collision_rate),
            "warning_rate": float(self.warning_rate),
            "timeout_rate": float(self.timeout_rate),
            "avg_steps": float(self.avg_steps),
            "reaction_ms": float(self.reaction_ms),
            "bank_size": int(self.bank_size),
            "shield_rate": float(self.shield_rate),
            "seed_list": [int(s) for s in self.seed_list],
            "episodes": self.episodes,
        }


@dataclass
class BenchReport:
    """Latencias por etapa, recall y escalado del banco."""
    sizes: List[int]
    stages: Dict[str, Dict[str, Dict[str, float]]]
    recall_at_k: Dict[str, float]
    scaling_ratio: float
    memory_bytes: Dict[str, int]
    calls: int
    k: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sizes": [int(s) for s in self.sizes],
            "calls": int(self.calls),
            "k": int(self.k),
            "stages_ms": self.stages,
            "recall_at_k": self.recall_at_k,
            "retrieval_scaling_ratio": float(self.scaling_ratio),
            "memory_bytes": self.memory_bytes,
        }
