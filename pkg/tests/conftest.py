# coding: utf-8
"""Fixtures compartidas: mundos pequeños, listas de eventos sintéticas y un codificador diminuto."""
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
import pytest

from EraNavegacion.core.encoder import EncoderParams
from EraNavegacion.core.enums import IntruderKind
from EraNavegacion.core.features import FeatureScales
from EraNavegacion.core.models import EgoState, EventElement, EventList, GlobalState, Intruder, WorldState, vec3
from EraNavegacion.core.seeding import rng_from_seed
from EraNavegacion.core.settings import EncoderShape, EpisodeConfig, Settings, settings_from_dict

ElementSpec = Tuple[int, Sequence[float], Sequence[float], IntruderKind, float]


def build_events(elements: Iterable[ElementSpec], velocity: Sequence[float] = (1.0, 0.0, 0.0),
                 target_unit: Sequence[float] = (1.0, 0.0, 0.0), target_distance: float = 20.0,
                 timestamp: float = 0.0) -> EventList:
    """Arma una EventList a partir de tuplas (id, p, v, tipo, riesgo)."""
    items = tuple(
        EventElement(object_id=i, rel_position=vec3(p), rel_velocity=vec3(v), kind=kind, risk=risk)
        for i, p, v, kind, risk in elements
    )
    v = vec3(velocity)
    gs = GlobalState(self_velocity=v, speed=float(np.linalg.norm(v)),
                     target_unit=vec3(target_unit), target_distance=float(target_distance))
    return EventList(elements=items, global_state=gs, timestamp=timestamp)


def build_world(positions: Sequence[Sequence[float]], kinds: Optional[Sequence[IntruderKind]] = None,
                ego: Sequence[float] = (0.0, 0.0, 10.0), goal: Sequence[float] = (40.0, 0.0, 10.0),
                velocities: Optional[Sequence[Sequence[float]]] = None) -> WorldState:
    """Mundo armado a mano con intrusos en posiciones fijas."""
    kinds = kinds or [IntruderKind.TYPE_C] * len(positions)
    velocities = velocities or [(0.0, 0.0, 0.0)] * len(positions)
    intruders = [Intruder(id=i, kind=k, position=vec3(p), velocity=vec3(v))
                 for i, (p, k, v) in enumerate(zip(positions, kinds, velocities))]
    return WorldState(time=0.0, ego=EgoState(vec3(ego), np.zeros(3), vec3(goal)),
                      intruders=intruders, rng=rng_from_seed(0))


@pytest.fixture
def events_factory() -> Callable[..., EventList]:
    return build_events


@pytest.fixture
def world_factory() -> Callable[..., WorldState]:
    return build_world


@pytest.fixture
def world_cfg() -> EpisodeConfig:
    return EpisodeConfig(intruder_count=5, seed=7).validate()


@pytest.fixture
def small_shape() -> EncoderShape:
    return EncoderShape(hidden=8, latent=4).validate()


@pytest.fixture
def tiny_encoder(small_shape) -> EncoderParams:
    return EncoderParams.initialize(small_shape, FeatureScales(), rng_from_seed(3))


@pytest.fixture
def sample_events(events_factory) -> EventList:
    return events_factory([
        (0, (3.0, 1.0, 0.0), (-1.0, 0.0, 0.0), IntruderKind.TYPE_A, 0.4),
        (1, (-2.0, 4.0, 0.5), (0.0, 0.0, 0.0), IntruderKind.TYPE_C, 0.1),
        (2, (6.0, -3.0, -1.0), (-2.0, 1.0, 0.0), IntruderKind.TYPE_B, 0.7),
    ], velocity=(2.0, 0.5, 0.0), target_unit=(0.6, 0.8, 0.0), target_distance=25.0, timestamp=1.5)


def build_tiny_settings(out) -> Settings:
    """Settings reducidos para correr el pipeline completo en segundos."""
    return settings_from_dict({
        "world": {"max_sim_steps": 400},
        "encoder": {"hidden": 8, "latent": 4},
        "pretrain": {"epochs": 2, "batch_size": 32, "pairs_per_batch": 8},
        "controller": {"k": 4},
        "harness": {
            "seed": 11,
            "out": str(out),
            "expert_episodes": 3,
            "curriculum_episodes": 2,
            "eval_seeds": 2,
            "difficulty": "easy",
            "bench_sizes": [20, 40],
            "bench_calls": 5,
        },
    })


@pytest.fixture
def tiny_settings(tmp_path) -> Settings:
    return build_tiny_settings(tmp_path / "artifacts")


@pytest.fixture
def tiny_settings_factory():
    return build_tiny_settings
