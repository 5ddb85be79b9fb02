import numpy as np
import pytest

from EraNavegacion.core.encoder import EncoderParams
from EraNavegacion.core.enums import IntruderKind
from EraNavegacion.core.features import FeatureScales
from EraNavegacion.core.pretraining import FeaturizedDataset, make_batch, numerical_gradient, objective, pretrain
from EraNavegacion.core.seeding import rng_from_seed
from EraNavegacion.core.settings import EncoderShape, PretrainHyper
from shared.utils.exceptions import DatasetError, TrainingDivergenceError

KINDS = (IntruderKind.TYPE_A, IntruderKind.TYPE_B, IntruderKind.TYPE_C)


@pytest.fixture
def expert_pairs(events_factory):
    """Pares (E, a*) sintéticos con listas de 0 a 3 elementos."""
    rng = rng_from_seed(21)
    pairs = []
    for n in range(8):
        count = n % 4
        elements = [
            (i, rng.uniform(-8, 8, size=3), rng.uniform(-3, 3, size=3), KINDS[(n + i) % 3], float(rng.uniform()))
            for i in range(count)
        ]
        E = events_factory(elements, velocity=rng.uniform(-2, 2, size=3), target_distance=10.0 + n,
                           timestamp=0.05 * n)
        pairs.append((E, rng.uniform(-5, 5, size=3)))
    return pairs


def test_analytic_gradient_matches_numerical(expert_pairs):
    shape = EncoderShape(hidden=5, latent=3)
    scales = FeatureScales()
    rng = rng_from_seed(2)
    data = FeaturizedDataset.build(expert_pairs, scales)
    batch = make_batch(data, np.arange(len(data)), 12, rng, shape)
    params = EncoderParams.initialize(shape, scales, rng)
    hyper = PretrainHyper(lambda_m=1.0, lambda_i=1.0, isotropy_weight=0.1)

    _, _, grad = objective(params, batch, hyper)
    theta = params.flatten()

    def loss_at(vector):
        return objective(params.unflatten(vector), batch, hyper, with_grad=False)[0]

    numeric = numerical_gradient(loss_at, theta, range(theta.size))
    assert np.allclose(grad, numeric, rtol=1e-4, atol=1e-6)


def test_full_batch_imitation_loss_decreases(expert_pairs):
    hyper = PretrainHyper(lambda_m=0.0, lambda_i=1.0, learning_rate=0.01, momentum=0.0,
                          batch_size=len(expert_pairs), epochs=15, pairs_per_batch=0, seed=1)
    _, curve = pretrain(expert_pairs, hyper, EncoderShape(hidden=8, latent=4))
    losses = [point["loss"] for point in curve]
    assert len(losses) == 16
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))
    assert losses[-1] < losses[0]


def test_pretraining_is_reproducible(expert_pairs):
    hyper = PretrainHyper(epochs=2, batch_size=4, pairs_per_batch=4, seed=5)
    first, _ = pretrain(expert_pairs, hyper, EncoderShape(hidden=6, latent=3))
    second, _ = pretrain(expert_pairs, hyper, EncoderShape(hidden=6, latent=3))
    assert np.array_equal(first.flatten(), second.flatten())


def test_empty_dataset_is_rejected():
    with pytest.raises(DatasetError):
        pretrain([], PretrainHyper())


def test_non_finite_loss_stops_training(expert_pairs, mocker):
    parts = {"imitation": 1.0, "metric": 0.0, "isotropy": 0.0}

    def fake_objective(params, batch, hyper, with_grad=True):
        if not with_grad:
            return 1.0, parts, None
        return float("nan"), parts, np.zeros(params.flatten().size)

    mocker.patch("EraNavegacion.core.pretraining.objective", side_effect=fake_objective)
    with pytest.raises(TrainingDivergenceError) as info:
        pretrain(expert_pairs, PretrainHyper(epochs=3, batch_size=4), EncoderShape(hidden=4, latent=2))
    assert info.value.epoch == 1
    assert info.value.batch == 0
    assert info.value.last_loss == 1.0
