"""
Políticas ejecutables por el runner de episodios.

Una política recibe la lista de eventos disparada (o None) y el mundo, y
retorna la acción junto con la traza de decisión si la hubo.
"""
from typing import Callable, Optional, Tuple

from EraNavegacion.core.controller import EraController
from EraNavegacion.core.dynamics import TransitionModel
from EraNavegacion.core.encoder import EncoderParams
from EraNavegacion.core.enums import PolicyKind, SelectionMode
from EraNavegacion.core.knowledge_bank import KnowledgeBank
from EraNavegacion.core.models import DecisionTrace, EventList, Vec3, WorldState
from EraNavegacion.core.settings import ControllerConfig, EpisodeConfig
from EraNavegacion.core.vpf import attraction_action, vpf_action

PolicyFn = Callable[[Optional[EventList], WorldState], Vec3]


class ExpertPolicy:
    """Supervisor VPF; sin eventos disparados solo atrae hacia la meta."""

    def __init__(self, cfg: EpisodeConfig) -> None:
        self.cfg = cfg

    def act(self, E: Optional[EventList], world: WorldState) -> Tuple[Vec3, Optional[DecisionTrace]]:
        if E is None:
            return attraction_action(world, self.cfg), None
        return vpf_action(world, self.cfg), None

    def __call__(self, E: Optional[EventList], world: WorldState) -> Vec3:
        return self.act(E, world)[0]


class EraPolicy:
    """Controlador ERA; sin eventos disparados usa atracción pura hacia la meta."""

    def __init__(self, controller: EraController) -> None:
        self.controller = controller

    @property
    def cfg(self) -> EpisodeConfig:
        return self.controller.episode_config

    def act(self, E: Optional[EventList], world: WorldState) -> Tuple[Vec3, Optional[DecisionTrace]]:
        if E is None:
            return attraction_action(world, self.cfg), None
        return self.controller.decide(E)

    def __call__(self, E: Optional[EventList], world: WorldState) -> Vec3:
        return self.act(E, world)[0]


def make_policy(kind: PolicyKind, cfg: EpisodeConfig,
                bank: Optional[KnowledgeBank] = None,
                encoder: Optional[EncoderParams] = None,
                model: Optional[TransitionModel] = None,
                controller_config: Optional[ControllerConfig] = None,
                report_timing: bool = True):
    """
    Crea la política pedida para un episodio.

    Args:
        kind: era, era-average o expert
        cfg: Configuración del episodio
        bank: Banco (requerido para ERA)
        encoder: Codificador (requerido para ERA)
        model: Dinámica latente (requerida para ERA)
        controller_config: Configuración del controlador
        report_timing: Si False las trazas reportan latencia 0.0

    Returns:
        ExpertPolicy o EraPolicy
    """
    kind = PolicyKind(kind)
    if kind == PolicyKind.EXPERT:
        return ExpertPolicy(cfg)
    if bank is None or encoder is None or model is None:
        raise ValueError("La política ERA requiere banco, codificador y modelo")
    config = controller_config or ControllerConfig()
    if kind == PolicyKind.ERA_AVERAGE:
        config = config.with_selection(SelectionMode.AVERAGE)
    controller = EraController(bank, encoder, model, config, cfg, report_timing=report_timing)
    return EraPolicy(controller)
