import numpy as np
import pytest

from EraNavegacion.core.models import clamp_norm
from EraNavegacion.core.settings import EpisodeConfig
from EraNavegacion.core.vpf import (
    attraction_action,
    potential,
    potential_gradient,
    vortex_term,
    vpf_action,
    vpf_from_events,
    vpf_velocity,
)
from EraNavegacion.core.world import observe


@pytest.mark.parametrize("position", [(0.0, 0.0, 0.0), (0.3, -0.4, 0.2), (1.2, 1.5, -0.3)])
def test_gradient_matches_central_differences(position):
    cfg = EpisodeConfig()
    goal = np.array([10.0, 0.0, 0.0])
    obstacles = [np.array([1.0, 0.5, 0.0]), np.array([0.5, 1.8, 0.1])]
    p = np.array(position)
    eps = 1e-6
    numeric = np.array([
        (potential(p + eps * e, goal, obstacles, cfg) - potential(p - eps * e, goal, obstacles, cfg)) / (2 * eps)
        for e in np.eye(3)
    ])
    assert np.allclose(potential_gradient(p, goal, obstacles, cfg), numeric, rtol=1e-4, atol=1e-5)


def test_attraction_only_far_from_obstacles():
    cfg = EpisodeConfig()
    goal = np.array([2.0, 1.0, 0.0])
    action = vpf_velocity(np.zeros(3), goal, [np.array([30.0, 0.0, 0.0])], cfg)
    assert np.allclose(action, cfg.k_att * goal)


def test_action_is_clamped_to_v_max():
    cfg = EpisodeConfig()
    action = vpf_velocity(np.zeros(3), np.array([40.0, 0.0, 0.0]), [], cfg)
    assert np.linalg.norm(action) == pytest.approx(cfg.v_max)


def test_collinear_obstacle_needs_vortex_to_turn():
    position = np.zeros(3)
    goal = np.array([10.0, 0.0, 0.0])
    obstacles = [np.array([1.0, 0.0, 0.0])]

    plain = vpf_velocity(position, goal, obstacles, EpisodeConfig())
    assert plain[1] == 0.0 and plain[2] == 0.0
    assert np.array_equal(vortex_term(position, goal, obstacles, EpisodeConfig()), np.zeros(3))

    swirling = EpisodeConfig(k_vortex=0.5)
    assert vortex_term(position, goal, obstacles, swirling)[1] < 0.0
    assert vpf_velocity(position, goal, obstacles, swirling)[1] < 0.0


def test_default_action_is_clamped_negative_gradient_at_random_states(world_factory):
    cfg = EpisodeConfig()
    rng = np.random.default_rng(99)
    eps = 1e-6
    for _ in range(100):
        ego = np.array([0.0, 0.0, 10.0]) + rng.uniform(-3.0, 3.0, size=3)
        goal = ego + rng.uniform(-40.0, 40.0, size=3)
        offsets = rng.normal(size=(3, 3))
        offsets *= (rng.uniform(0.4, 2.5, size=3) / np.linalg.norm(offsets, axis=1))[:, None]
        world = world_factory(ego + offsets, ego=ego, goal=goal)
        obstacles = [intr.position for intr in world.intruders]
        numeric = np.array([
            (potential(ego + eps * e, goal, obstacles, cfg) - potential(ego - eps * e, goal, obstacles, cfg))
            / (2 * eps)
            for e in np.eye(3)
        ])
        expected = clamp_norm(-numeric, cfg.v_max)
        assert np.allclose(vpf_action(world, cfg), expected, rtol=0.0, atol=1e-5)


def test_exact_overlap_stays_finite():
    cfg = EpisodeConfig()
    goal = np.array([10.0, 0.0, 0.0])
    obstacles = [np.zeros(3)]
    assert potential(np.zeros(3), goal, obstacles, cfg) == float("inf")
    action = vpf_velocity(np.zeros(3), goal, obstacles, cfg)
    assert np.all(np.isfinite(action))
    assert np.linalg.norm(action) <= cfg.v_max + 1e-12


def test_event_frame_reconstruction_matches_world_action(world_factory):
    cfg = EpisodeConfig()
    world = world_factory([(2.0, 2.5, 10.0), (4.0, 3.0, 11.0)], ego=(1.0, 2.0, 10.0), goal=(30.0, 2.0, 10.0))
    E = observe(world, cfg)
    assert len(E) == 2
    assert np.allclose(vpf_from_events(E, cfg), vpf_action(world, cfg), atol=1e-9)


def test_no_events_means_zero_reconstruction_and_pure_attraction(world_factory):
    cfg = EpisodeConfig()
    world = world_factory([], ego=(0.0, 0.0, 10.0), goal=(3.0, 0.0, 10.0))
    assert np.array_equal(vpf_from_events(None, cfg), np.zeros(3))
    assert np.allclose(attraction_action(world, cfg), [3.0, 0.0, 0.0])
