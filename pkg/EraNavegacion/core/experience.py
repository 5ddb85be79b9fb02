"""Buffer de experiencia: códigos de estado de un episodio y sus trazas de decisión."""
import math
from dataclasses import dataclass, field
from typing import List, Optional

from EraNavegacion.core.models import DecisionTrace, EpisodeOutcome, EventList, StatusCode, Vec3
from shared.utils.exceptions import SimulationError
from shared.utils.helpers import safe_mean


@dataclass
class ExperienceBuffer:
    """Lista ordenada de StatusCode de un episodio; solo admite agregar mientras está abierto."""
    episode: int = 0
    records: List[StatusCode] = field(default_factory=list)
    traces: List[Optional[DecisionTrace]] = field(default_factory=list)
    outcome: Optional[EpisodeOutcome] = None

    def __len__(self) -> int:
        return len(self.records)

    @property
    def closed(self) -> bool:
        return self.outcome is not None

    def rewards(self) -> List[float]:
        return [s.r_t for s in self.records]

    def close(self, outcome: EpisodeOutcome) -> None:
        self.outcome = outcome


def record_status(buffer: ExperienceBuffer, E_t: EventList, a_t: Vec3, r_t: float,
                  E_next: Optional[EventList], warning: bool = False,
                  trace: Optional[DecisionTrace] = None, step: Optional[int] = None) -> StatusCode:
    """
    Agrega un código de estado con sus etiquetas de episodio y paso.

    Args:
        buffer: Buffer abierto
        E_t: Lista de eventos de la decisión
        a_t: Acción aplicada
        r_t: Recompensa de la transición
        E_next: Lista siguiente (None en el paso terminal)
        warning: Si hubo violación del radio de advertencia en el paso
        trace: Traza de la decisión (None si actuó el experto)
        step: Paso de simulación (default: posición en el buffer)

    Returns:
        El StatusCode agregado

    Raises:
        SimulationError: Si el buffer está cerrado, r_t no es finita o el tiempo no avanza
    """
    if buffer.closed:
        raise SimulationError(f"El buffer del episodio {buffer.episode} ya está cerrado")
    if not math.isfinite(r_t):
        raise SimulationError(f"Recompensa no finita: {r_t}")
    if buffer.records and E_t.timestamp <= buffer.records[-1].E_t.timestamp:
        raise SimulationError("Las marcas de tiempo deben ser estrictamente crecientes en un episodio")
    status = StatusCode(E_t=E_t, a_t=a_t, r_t=float(r_t), E_next=E_next,
                        episode=buffer.episode,
                        step=len(buffer.records) if step is None else int(step), warning=warning)
    buffer.records.append(status)
    buffer.traces.append(trace)
    return status


def j_perf(buffer: ExperienceBuffer) -> float:
    """Media de r_t sobre el buffer (0.0 si está vacío)."""
    return safe_mean(buffer.rewards())
