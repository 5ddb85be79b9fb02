"""Enumeraciones para el módulo EraNavegacion."""
from enum import Enum


class IntruderKind(str, Enum):
    """Arquetipos de intrusos del currículo adversarial."""
    TYPE_A = "A"  # perturbaciones estocásticas
    TYPE_B = "B"  # interceptores dirigidos al ego
    TYPE_C = "C"  # obstáculos estáticos


class TerminalStatus(str, Enum):
    """Estados terminales de un episodio."""
    SUCCESS = "Success"
    COLLISION = "Collision"
    TIMEOUT = "Timeout"


class EntrySource(str, Enum):
    """Procedencia de una entrada del banco."""
    EXPERT = "expert"
    ONLINE = "online"


class FallbackMode(str, Enum):
    """Respaldo cuando ningún candidato supera el filtro de Lyapunov."""
    MIN_DELTA_V = "min_delta_v"
    VPF_EXPERT = "vpf_expert"


class ShieldReason(str, Enum):
    """Motivo por el que una decisión ERA cedió la acción al experto VPF."""
    PROXIMITY = "proximity"  # intruso dentro del radio de advertencia
    NOVELTY = "novelty"  # ningún recuerdo suficientemente similar


class SelectionMode(str, Enum):
    """Fusión de acciones: selección por clusters o promedio directo (ablación)."""
    CBS = "cbs"
    AVERAGE = "average"


class Difficulty(str, Enum):
    """Perfiles de dificultad fija del benchmark."""
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"
    EXTREME = "extreme"


class PolicyKind(str, Enum):
    """Políticas evaluables."""
    ERA = "era"
    ERA_AVERAGE = "era-average"
    EXPERT = "expert"
