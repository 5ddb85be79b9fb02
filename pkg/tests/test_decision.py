import numpy as np
import pytest

from EraNavegacion.core.controller import EraController, replay_action
from EraNavegacion.core.dynamics import TransitionModel
from EraNavegacion.core.encoder import encode
from EraNavegacion.core.enums import FallbackMode, IntruderKind, SelectionMode, ShieldReason, TerminalStatus
from EraNavegacion.core.knowledge_bank import KnowledgeBank
from EraNavegacion.core.models import BankEntry, Candidate, Cluster, DecisionTrace
from EraNavegacion.core.retrieval import compute_weights
from EraNavegacion.core.selection import cluster_actions, filter_stable, fuse, fuse_average, select_cluster
from EraNavegacion.core.settings import ControllerConfig, EpisodeConfig, RetrievalParams
from EraNavegacion.core.vpf import attraction_action, vpf_from_events
from EraNavegacion.core.world import classify, sense_events, step
from shared.utils.exceptions import BankError, EmptyBankError, EncoderError, InvalidEntryError

FORK_ACTIONS = {0: np.array([1.0, 0.0, 0.0]), 1: np.array([0.9, 0.1, 0.0]), 2: np.array([-1.0, 0.0, 0.0])}
FORK_WEIGHTS = {0: 0.3, 1: 0.25, 2: 0.45}


def fork_candidates():
    return [Candidate(entry_id=i, sim=0.9, weight=FORK_WEIGHTS[i]) for i in (0, 1, 2)]


# ---------------------------------------------------------------- pesos

def test_softmax_weights_reference_values():
    cands = [Candidate(entry_id=0, sim=0.9), Candidate(entry_id=1, sim=0.7)]
    compute_weights(cands, [1.0, 1.0], RetrievalParams(tau=0.1, alpha=1.0))
    assert cands[0].weight == pytest.approx(0.8808, abs=1e-4)
    assert cands[1].weight == pytest.approx(0.1192, abs=1e-4)


def test_low_reliability_loses_weight():
    cands = [Candidate(entry_id=0, sim=0.8), Candidate(entry_id=1, sim=0.8)]
    compute_weights(cands, [1.0, 0.5], RetrievalParams(tau=0.1, alpha=1.0))
    assert cands[0].weight == pytest.approx(2.0 / 3.0)
    assert sum(c.weight for c in cands) == pytest.approx(1.0)


def test_weights_on_random_candidate_sets_match_softmax_oracle():
    rng = np.random.default_rng(21)
    for _ in range(200):
        size = int(rng.integers(1, 33))
        sims = rng.uniform(-1.0, 1.0, size=size)
        reliabilities = rng.uniform(0.05, 1.0, size=size)
        params = RetrievalParams(tau=float(rng.uniform(0.05, 1.0)), alpha=float(rng.uniform(0.0, 2.0)))
        cands = [Candidate(entry_id=i, sim=float(s)) for i, s in enumerate(sims)]
        compute_weights(cands, reliabilities, params)
        raw = reliabilities ** params.alpha * np.exp(sims / params.tau)
        expected = raw / raw.sum()
        weights = np.array([c.weight for c in cands])
        assert abs(weights.sum() - 1.0) <= 1e-9
        assert np.allclose(weights, expected, rtol=0.0, atol=1e-6)


def test_entries_outside_the_candidate_set_weigh_nothing(tiny_encoder, sample_events):
    rng = np.random.default_rng(5)
    bank = KnowledgeBank(d=tiny_encoder.latent)
    for i in range(40):
        bank.insert(BankEntry(id=i, z=rng.normal(size=tiny_encoder.latent), a=np.ones(3), r=1.0))
    result = bank.search(encode(tiny_encoder, sample_events), 8, use_ann=False)
    compute_weights(result.candidates, [1.0] * len(result.candidates), RetrievalParams())
    weights = {c.entry_id: c.weight for c in result.candidates}
    outside = [i for i in bank.ids() if i not in weights]
    assert len(outside) == 32
    assert all(weights.get(i, 0.0) == 0.0 for i in outside)
    assert sum(weights.values()) == pytest.approx(1.0, abs=1e-9)


def test_weights_reject_bad_input():
    with pytest.raises(BankError):
        compute_weights([], [], RetrievalParams())
    with pytest.raises(InvalidEntryError):
        compute_weights([Candidate(entry_id=0, sim=0.5)], [0.0], RetrievalParams())


# ---------------------------------------------------------------- filtro

@pytest.fixture
def damped_model():
    gamma = np.zeros((2, 3))
    gamma[0, 0] = gamma[1, 1] = 1.0
    return TransitionModel(psi=0.5 * np.eye(2), gamma=gamma)


def test_filter_keeps_energy_decreasing_actions(damped_model):
    actions = {0: np.zeros(3), 1: np.array([2.0, 0.0, 0.0]), 2: np.array([-1.0, 0.0, 0.0])}
    cands = [Candidate(entry_id=i, sim=0.5, weight=w) for i, w in zip((0, 1, 2), (0.2, 0.5, 0.3))]
    result = filter_stable(cands, actions, np.array([1.0, 0.0]), damped_model)
    assert [c.entry_id for c in result.survivors] == [0, 2]
    assert result.weights == pytest.approx({0: 0.4, 2: 0.6})
    assert result.deltas[1] == pytest.approx(5.25)
    assert cands[1].passed is False
    assert result.fallback is None


def test_fallback_keeps_lowest_delta(damped_model):
    actions = {0: np.array([3.0, 0.0, 0.0]), 1: np.array([2.0, 0.0, 0.0])}
    cands = [Candidate(entry_id=i, sim=0.5, weight=0.5) for i in (0, 1)]
    result = filter_stable(cands, actions, np.array([1.0, 0.0]), damped_model)
    assert [c.entry_id for c in result.survivors] == [1]
    assert result.weights == {1: 1.0}
    assert result.fallback == FallbackMode.MIN_DELTA_V
    assert not result.survivors[0].passed


def test_expert_fallback_signals_instead_of_selecting(damped_model):
    actions = {0: np.array([3.0, 0.0, 0.0])}
    result = filter_stable([Candidate(entry_id=0, sim=0.5, weight=1.0)], actions, np.array([1.0, 0.0]),
                           damped_model, fallback=FallbackMode.VPF_EXPERT)
    assert result.survivors == []
    assert result.expert_signal


def test_margin_shifts_the_threshold(damped_model):
    actions = {0: np.zeros(3)}
    cands = [Candidate(entry_id=0, sim=0.5, weight=1.0)]
    assert filter_stable(cands, actions, np.array([1.0, 0.0]), damped_model, margin=-1.0).fallback is not None
    assert filter_stable(cands, actions, np.array([1.0, 0.0]), damped_model, margin=-0.5).fallback is None


# ---------------------------------------------------------------- CBS

def test_fork_is_resolved_by_heavier_cluster():
    clusters = cluster_actions(fork_candidates(), FORK_WEIGHTS, FORK_ACTIONS, threshold=0.5)
    assert [cl.member_ids for cl in clusters] == [[2], [0, 1]]
    winner = select_cluster(clusters)
    assert winner == 1
    action = fuse(clusters[winner], FORK_WEIGHTS, FORK_ACTIONS, v_max=5.0)
    assert np.allclose(action, [0.525 / 0.55, 0.025 / 0.55, 0.0])


def test_plain_average_collapses_into_the_gap():
    action = fuse_average(fork_candidates(), FORK_WEIGHTS, FORK_ACTIONS, v_max=5.0)
    assert np.allclose(action, [0.075, 0.025, 0.0])


def test_fuse_reference_and_clamp():
    actions = {1: np.array([1.0, 0.0, 0.0]), 2: np.array([0.0, 1.0, 0.0])}
    cluster = Cluster(member_ids=[1, 2], weight=1.0, leader_id=1)
    assert np.allclose(fuse(cluster, {1: 0.5, 2: 0.5}, actions, v_max=5.0), [0.5, 0.5, 0.0])
    fast = Cluster(member_ids=[3], weight=1.0, leader_id=3)
    assert np.linalg.norm(fuse(fast, {3: 1.0}, {3: np.array([10.0, 0.0, 0.0])}, v_max=5.0)) == pytest.approx(5.0)


def test_cluster_tie_goes_to_lower_founder():
    clusters = [Cluster(member_ids=[4], weight=0.5, leader_id=4), Cluster(member_ids=[2], weight=0.5, leader_id=2)]
    assert select_cluster(clusters) == 1


def test_zero_actions_form_their_own_cluster():
    actions = {0: np.zeros(3), 1: np.array([1.0, 0.0, 0.0]), 2: np.zeros(3)}
    weights = {0: 0.5, 1: 0.3, 2: 0.2}
    cands = [Candidate(entry_id=i, sim=0.5, weight=w) for i, w in weights.items()]
    clusters = cluster_actions(cands, weights, actions, threshold=0.5)
    assert sorted(map(sorted, (cl.member_ids for cl in clusters))) == [[0, 2], [1]]


# ---------------------------------------------------------------- controlador

@pytest.fixture
def fork_bank(tiny_encoder, sample_events):
    """Cinco experiencias del mismo entorno: tres esquivan por la izquierda y dos por la derecha."""
    z = encode(tiny_encoder, sample_events)
    bank = KnowledgeBank(d=tiny_encoder.latent)
    for i in range(5):
        lateral = 4.0 if i < 3 else -4.0
        bank.insert(BankEntry(id=i, z=z.copy(), a=np.array([0.0, lateral, 0.0]), r=1.0))
    return bank


def make_controller(bank, encoder, model=None, **changes):
    config = ControllerConfig(retrieval=RetrievalParams(k=8), use_ann=False, **changes)
    return EraController(bank, encoder, model or TransitionModel.zeros(encoder.latent), config, EpisodeConfig())


def test_cbs_commits_to_one_side(fork_bank, tiny_encoder, sample_events):
    action, trace = make_controller(fork_bank, tiny_encoder).decide(sample_events)
    assert np.allclose(action, [0.0, 4.0, 0.0])
    assert len(trace.clusters) == 2
    assert trace.clusters[trace.winner].member_ids == [0, 1, 2]


def test_average_ablation_lands_in_between(fork_bank, tiny_encoder, sample_events):
    controller = make_controller(fork_bank, tiny_encoder, selection=SelectionMode.AVERAGE)
    action, trace = controller.decide(sample_events)
    assert np.allclose(action, [0.0, 0.8, 0.0])
    assert trace.selection == "average"


@pytest.mark.parametrize("selection", [SelectionMode.CBS, SelectionMode.AVERAGE])
def test_trace_replays_bit_for_bit(fork_bank, tiny_encoder, sample_events, selection):
    controller = make_controller(fork_bank, tiny_encoder, selection=selection)
    action, trace = controller.decide(sample_events)
    again, _ = controller.decide(sample_events)
    assert np.array_equal(action, again)
    assert np.array_equal(replay_action(trace, fork_bank, 5.0), action)
    restored = DecisionTrace.from_dict(trace.to_dict())
    assert np.array_equal(replay_action(restored, fork_bank, 5.0), action)


def test_unstable_candidates_defer_to_expert(fork_bank, tiny_encoder, sample_events):
    explosive = TransitionModel(psi=2.0 * np.eye(tiny_encoder.latent), gamma=np.zeros((tiny_encoder.latent, 3)))
    controller = make_controller(fork_bank, tiny_encoder, model=explosive, fallback=FallbackMode.VPF_EXPERT)
    action, trace = controller.decide(sample_events)
    assert np.allclose(action, vpf_from_events(sample_events, EpisodeConfig()))
    assert trace.winner == -1 and trace.fallback == "vpf_expert"
    assert replay_action(trace, fork_bank, 5.0) is None

    controller = make_controller(fork_bank, tiny_encoder, model=explosive)
    action, trace = controller.decide(sample_events)
    assert trace.fallback == "min_delta_v"
    assert len(trace.survivors()) == 1


def test_timing_can_be_disabled(fork_bank, tiny_encoder, sample_events):
    controller = make_controller(fork_bank, tiny_encoder)
    controller.report_timing = False
    _, trace = controller.decide(sample_events)
    assert trace.latency_ms == 0.0
    assert set(controller.last_stage_s) == {"encode", "retrieve", "stabilize", "fuse", "end_to_end"}


def test_decide_rejects_empty_inputs(tiny_encoder, sample_events, events_factory, fork_bank):
    with pytest.raises(EmptyBankError):
        make_controller(KnowledgeBank(d=tiny_encoder.latent), tiny_encoder).decide(sample_events)
    with pytest.raises(EncoderError):
        make_controller(fork_bank, tiny_encoder).decide(events_factory([]))


# ---------------------------------------------------------------- escudo

def test_intruder_inside_warning_radius_hands_over_to_expert(tiny_encoder, events_factory):
    close = events_factory([(0, (1.0, 0.2, 0.0), (-1.0, 0.0, 0.0), IntruderKind.TYPE_B, 0.9),
                            (1, (5.0, 3.0, 0.0), (0.0, 0.0, 0.0), IntruderKind.TYPE_C, 0.1)])
    z = encode(tiny_encoder, close)
    bank = KnowledgeBank(d=tiny_encoder.latent)
    for i in range(3):
        bank.insert(BankEntry(id=i, z=z.copy(), a=np.array([4.0, 0.0, 0.0]), r=1.0))

    action, trace = make_controller(bank, tiny_encoder).decide(close)
    assert np.array_equal(action, vpf_from_events(close, EpisodeConfig()))
    assert trace.shield == ShieldReason.PROXIMITY.value
    assert trace.winner == -1 and trace.clusters == []
    assert len(trace.candidates) == 3
    assert replay_action(trace, bank, 5.0) is None
    assert DecisionTrace.from_dict(trace.to_dict()).shield == "proximity"

    unshielded, trace = make_controller(bank, tiny_encoder, proximity_shield=False).decide(close)
    assert np.allclose(unshielded, [4.0, 0.0, 0.0])
    assert trace.shield is None


def test_unfamiliar_situation_hands_over_to_expert(tiny_encoder, sample_events):
    z = encode(tiny_encoder, sample_events)
    bank = KnowledgeBank(d=tiny_encoder.latent)
    other = np.random.default_rng(2).normal(size=z.shape)
    other -= (other @ z) / (z @ z) * z
    bank.insert(BankEntry(id=0, z=other, a=np.array([0.0, 4.0, 0.0]), r=1.0))

    action, trace = make_controller(bank, tiny_encoder).decide(sample_events)
    assert trace.shield == ShieldReason.NOVELTY.value
    assert np.array_equal(action, vpf_from_events(sample_events, EpisodeConfig()))
    assert trace.final_weights() == {}

    action, trace = make_controller(bank, tiny_encoder, min_similarity=-0.5).decide(sample_events)
    assert trace.shield is None
    assert np.allclose(action, [0.0, 4.0, 0.0])


# ---------------------------------------------------------------- pasillo

def fly(controller, world, cfg):
    outcome = classify(world, cfg, world.steps)
    while outcome is None:
        E = sense_events(world, cfg)
        action = controller.decide(E)[0] if E is not None else attraction_action(world, cfg)
        step(world, action, cfg)
        outcome = classify(world, cfg, world.steps)
    return outcome


@pytest.mark.parametrize("seed", range(10))
def test_corridor_average_collides_while_cbs_passes(seed, tiny_encoder, world_factory):
    """Un obstáculo fijo sobre la ruta; tres recuerdos lo esquivan por un lado y dos por el otro."""
    rng = np.random.default_rng(seed)
    cfg = EpisodeConfig(max_sim_steps=400)
    ahead = float(rng.uniform(4.0, 8.0))
    offset = float(rng.uniform(-0.1, 0.1))
    goal = (float(rng.uniform(30.0, 45.0)), 0.0, 10.0)

    def corridor():
        return world_factory([(ahead, offset, 10.0)], goal=goal)

    z = encode(tiny_encoder, sense_events(corridor(), cfg))
    bank = KnowledgeBank(d=tiny_encoder.latent)
    for i in range(5):
        a = np.array([3.0, 2.0, 0.0]) if i < 3 else np.array([3.0, -3.0, 0.0])
        bank.insert(BankEntry(id=i, z=z.copy(), a=a, r=1.0))

    unshielded = {"proximity_shield": False, "min_similarity": -1.0}
    averaged = fly(make_controller(bank, tiny_encoder, selection=SelectionMode.AVERAGE, **unshielded),
                   corridor(), cfg)
    committed = fly(make_controller(bank, tiny_encoder, **unshielded), corridor(), cfg)
    assert averaged.terminal == TerminalStatus.COLLISION
    assert committed.terminal != TerminalStatus.COLLISION
    assert committed.min_separation > cfg.collision_radius
