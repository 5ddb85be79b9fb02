import numpy as np
import pytest

from EraNavegacion.core.encoder import EncoderParams, encode, encode_batch, encode_features
from EraNavegacion.core.enums import IntruderKind
from EraNavegacion.core.features import FeatureScales, featurize
from EraNavegacion.core.settings import EncoderShape
from shared.utils.exceptions import EncoderError


def test_encoding_is_permutation_invariant(tiny_encoder, sample_events):
    z = encode(tiny_encoder, sample_events)
    assert z.shape == (4,)
    for order in ([2, 0, 1], [1, 2, 0], [2, 1, 0]):
        assert np.allclose(encode(tiny_encoder, sample_events.permuted(order)), z, atol=1e-12)


def test_permutation_invariance_on_random_triples(events_factory):
    rng = np.random.default_rng(17)
    kinds = list(IntruderKind)
    for _ in range(1000):
        params = EncoderParams.initialize(EncoderShape(hidden=16, latent=32), FeatureScales(), rng)
        n = int(rng.integers(1, 13))
        E = events_factory(
            [(i, rng.uniform(-10.0, 10.0, size=3), rng.uniform(-3.0, 3.0, size=3),
              kinds[int(rng.integers(len(kinds)))], float(rng.uniform())) for i in range(n)],
            velocity=rng.uniform(-5.0, 5.0, size=3), target_unit=(0.0, 1.0, 0.0),
            target_distance=float(rng.uniform(1.0, 45.0)), timestamp=float(rng.uniform(0.0, 30.0)))
        order = [int(i) for i in rng.permutation(n)]
        assert np.max(np.abs(encode(params, E.permuted(order)) - encode(params, E))) <= 1e-12


def test_empty_list_pools_to_zero(tiny_encoder, events_factory):
    E = events_factory([])
    _, g = featurize(E, tiny_encoder.scales)
    expected = tiny_encoder.W2 @ np.concatenate([np.zeros(tiny_encoder.hidden), g]) + tiny_encoder.b2
    assert np.allclose(encode(tiny_encoder, E), expected)


def test_batch_encoding_matches_single(tiny_encoder, sample_events, events_factory):
    events = [sample_events, events_factory([]), sample_events.permuted([1, 0, 2])]
    Z = encode_batch(tiny_encoder, events)
    assert Z.shape == (3, 4)
    for row, E in zip(Z, events):
        assert np.allclose(row, encode(tiny_encoder, E), atol=1e-12)


def test_wrong_feature_width_is_rejected(tiny_encoder):
    with pytest.raises(EncoderError):
        encode_features(tiny_encoder, np.zeros((2, 9)), np.zeros(8))
    with pytest.raises(EncoderError):
        encode_features(tiny_encoder, np.zeros((2, 10)), np.zeros(7))


def test_serialized_weights_reproduce_codes(tiny_encoder, sample_events):
    restored = EncoderParams.from_dict(tiny_encoder.to_dict(), FeatureScales.from_dict(tiny_encoder.scales.to_dict()))
    assert np.array_equal(encode(restored, sample_events), encode(tiny_encoder, sample_events))


def test_non_finite_weights_fail_validation(tiny_encoder):
    broken = tiny_encoder.copy()
    broken.W1[0, 0] = np.nan
    with pytest.raises(EncoderError):
        broken.validate()


def test_flatten_unflatten_keeps_shapes(tiny_encoder):
    theta = tiny_encoder.flatten()
    again = tiny_encoder.unflatten(theta)
    assert np.array_equal(again.flatten(), theta)
    with pytest.raises(EncoderError):
        tiny_encoder.unflatten(np.zeros(theta.size + 1))
