import dataclasses

import numpy as np
import pytest

from EraNavegacion.core.enums import PolicyKind, TerminalStatus
from EraNavegacion.services.episode_runner import execute_episode, run_episode
from EraNavegacion.services.policies import ExpertPolicy, make_policy
from shared.utils.exceptions import EpisodeAbortedError
from shared.utils.file_helpers import dumps_stable


def test_expert_episode_is_reproducible(world_cfg):
    first = run_episode(ExpertPolicy(world_cfg), world_cfg)
    second = run_episode(make_policy(PolicyKind.EXPERT, world_cfg), world_cfg)
    outcome, statuses, trajectory = first
    assert dumps_stable(trajectory) == dumps_stable(second[2])
    assert dataclasses.replace(outcome, wall_reaction_ms=0.0) == dataclasses.replace(second[0], wall_reaction_ms=0.0)
    assert outcome.terminal in TerminalStatus
    assert outcome.decision_steps == len(statuses)
    assert len(trajectory) == outcome.sim_steps
    steps = [s.step for s in statuses]
    assert steps == sorted(set(steps))


def test_quiet_sky_times_out_without_decisions(world_cfg):
    cfg = world_cfg.with_changes(intruder_count=0, max_sim_steps=20)
    outcome, statuses, trajectory = run_episode(lambda E, world: np.zeros(3), cfg)
    assert outcome.terminal == TerminalStatus.TIMEOUT
    assert statuses == []
    assert len(trajectory) == 20
    assert outcome.wall_reaction_ms == 0.0


def test_failing_policy_aborts_with_seed_and_step(world_cfg):
    def broken(E, world):
        raise RuntimeError("sin acción")

    with pytest.raises(EpisodeAbortedError) as info:
        execute_episode(broken, world_cfg)
    assert info.value.seed == world_cfg.seed
    assert info.value.step == 0

    with pytest.raises(EpisodeAbortedError):
        execute_episode(lambda E, world: np.array([np.nan, 0.0, 0.0]), world_cfg)


def test_timing_can_be_suppressed(world_cfg):
    result = execute_episode(ExpertPolicy(world_cfg), world_cfg, record_trajectory=False, report_timing=False)
    assert result.trajectory == []
    assert result.outcome.wall_reaction_ms == 0.0
    assert result.buffer.outcome == result.outcome
    assert all(trace is None for trace in result.buffer.traces)
