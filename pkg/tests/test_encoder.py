# tests/test_encoder.py

import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from snncodec.core.encoder import (
    encode, encode_step, spike_count_readout, temporal_permutation, temporal_shuffle,
    threshold_schedule, threshold_step, thresholds_to_logits,
)
from snncodec.core.tensor import SpikeBackward, Tensor, backward, tensor_sum
from snncodec.errors import ContractError, DimensionError, NumericError
from snncodec.models import EncoderMode, EncoderParams, EncoderState

BW = SpikeBackward.surrogate()


def _trace(x, thetas, mode):
    """Spikes and residuals of a scalar input under an explicit threshold sequence."""
    state = EncoderState(x=Tensor([x]), theta=Tensor([thetas[0]]))
    spikes, residuals = [], [x]
    for theta in thetas:
        s, state = encode_step(state, mode, Tensor([theta]), BW)
        spikes.append(int(s.data[0]))
        residuals.append(float(state.x.data[0]))
    return tuple(spikes), residuals


def _scalar_params(thresholds):
    theta0, logits = thresholds_to_logits(thresholds)
    return EncoderParams.create(1, len(thresholds), theta0, lt_enabled=False, logits=logits)


def _scalar_image(x):
    return Tensor(np.full((1, 1, 1), x))


class ThresholdStepTestCase(unittest.TestCase):
    def test_halving(self):
        self.assertEqual(threshold_step(Tensor([1.0]), Tensor([0.0])).data[0], 0.5)
        self.assertEqual(threshold_step(Tensor([0.5]), Tensor([0.0])).data[0], 0.25)

    def test_saturated_logit(self):
        out = threshold_step(Tensor([1.0]), Tensor([20.0])).data[0]
        self.assertAlmostEqual(out, 1.0, places=8)
        self.assertLess(out, 1.0)

    def test_rounding_logit_still_shrinks(self):
        theta = Tensor.parameter([1.0, 0.75])
        a = Tensor.parameter([40.0, 500.0])
        out = threshold_step(theta, a)
        assert_array_equal(out.data, np.nextafter([1.0, 0.75], 0.0))
        backward(tensor_sum(out))
        assert_array_equal(theta.grad, [1.0, 1.0])

    def test_schedule_stays_strictly_decreasing(self):
        params = EncoderParams.create(2, 6, 1.0, logits=np.full((6, 2), 60.0))
        schedule = threshold_schedule(params)
        self.assertTrue((np.diff(schedule, axis=0) < 0).all())

    def test_non_finite_logit(self):
        with self.assertRaises(NumericError):
            threshold_step(Tensor([1.0]), Tensor([np.nan]))


class EncodeStepTestCase(unittest.TestCase):
    def test_phase_trace(self):
        spikes, residuals = _trace(0.9, (1.0, 0.66, 0.33), EncoderMode.PHASE)
        self.assertEqual(spikes, (0, 1, 0))
        assert_allclose(residuals[1:], [0.9, 0.24, 0.24], atol=1e-12)

    def test_ttfs_trace(self):
        spikes, residuals = _trace(0.7, (1.0, 0.5, 0.25), EncoderMode.TTFS)
        self.assertEqual(spikes, (0, 1, 0))
        self.assertEqual(residuals[2:], [0.0, 0.0])

    def test_rate_trace(self):
        spikes, residuals = _trace(0.7, (1.0, 0.5, 0.25), EncoderMode.RATE)
        self.assertEqual(spikes, (0, 1, 1))
        self.assertEqual(set(residuals), {0.7})

    def test_zero_input_never_fires(self):
        for mode in (EncoderMode.RATE, EncoderMode.PHASE, EncoderMode.TTFS):
            spikes, _ = _trace(0.0, (1.0, 0.5, 0.25, 0.125), mode)
            self.assertEqual(spikes, (0, 0, 0, 0))

    def test_direct_rejected(self):
        state = EncoderState(x=Tensor([1.0]), theta=Tensor([1.0]))
        with self.assertRaises(ContractError):
            encode_step(state, EncoderMode.DIRECT, Tensor([1.0]), BW)

    def test_nonpositive_threshold_rejected(self):
        state = EncoderState(x=Tensor([1.0]), theta=Tensor([1.0]))
        with self.assertRaises(ContractError):
            encode_step(state, EncoderMode.RATE, Tensor([0.0]), BW)


class EncodeTestCase(unittest.TestCase):
    def test_direct_replicates(self):
        rng = np.random.default_rng(0)
        x = Tensor(rng.random((2, 3, 4, 4)))
        out = encode(x, EncoderParams.create(3, 4), EncoderMode.DIRECT, BW)
        self.assertEqual(out.shape, (4, 2, 3, 4, 4))
        for t in range(4):
            assert_array_equal(out.data[t], x.data)

    def test_phase_with_illustrative_ladder(self):
        out = encode(_scalar_image(0.9), _scalar_params([1.0, 0.66, 0.33]), EncoderMode.PHASE, BW)
        assert_array_equal(out.data.reshape(-1), [0.0, 1.0, 0.0])

    def test_rate_with_frozen_threshold(self):
        params = EncoderParams.create(1, 4, 1.0, lt_enabled=False, logits=np.full((4, 1), 50.0))
        out = encode(_scalar_image(1.2), params, EncoderMode.RATE, BW)
        assert_array_equal(out.data.reshape(-1), [1.0, 1.0, 1.0, 1.0])

    def test_default_schedule_halves(self):
        assert_array_equal(threshold_schedule(EncoderParams.create(2, 4))[:, 0], [1.0, 0.5, 0.25, 0.125])

    def test_channel_mismatch(self):
        with self.assertRaises(DimensionError):
            encode(Tensor(np.zeros((2, 4, 4))), EncoderParams.create(3, 4), EncoderMode.TTFS, BW)

    def test_bad_rank(self):
        with self.assertRaises(DimensionError):
            encode(Tensor(np.zeros((4, 4))), EncoderParams.create(4, 4), EncoderMode.TTFS, BW)

    def test_bernoulli_rate_is_seeded(self):
        params = EncoderParams.create(1, 4, bernoulli_rate=True)
        image = Tensor(np.full((1, 20, 20), 0.3))
        first = encode(image, params, EncoderMode.RATE, BW, rng=np.random.default_rng(9)).data
        second = encode(image, params, EncoderMode.RATE, BW, rng=np.random.default_rng(9)).data
        assert_array_equal(first, second)
        # at theta0 = 1 the first step fires with probability 0.3
        self.assertTrue(0.15 < first[0].mean() < 0.45)
        with self.assertRaises(ContractError):
            encode(image, params, EncoderMode.RATE, BW)

    def test_thresholds_to_logits_round_trip(self):
        ladder = [1.0, 0.66, 0.33]
        assert_allclose(threshold_schedule(_scalar_params(ladder))[:, 0], ladder, rtol=1e-12)
        with self.assertRaises(ContractError):
            thresholds_to_logits([1.0, 1.0])
        with self.assertRaises(ContractError):
            thresholds_to_logits([1.0, -0.5])


class EncoderInvariantTestCase(unittest.TestCase):
    """Properties over 10^5 random inputs and random learnable schedules."""

    def setUp(self):
        rng = np.random.default_rng(11)
        self.x = Tensor(rng.uniform(0.0, 2.0, size=(1, 250, 400)))
        self.params = EncoderParams.create(1, 6, logits=rng.uniform(-5.0, 5.0, size=(6, 1)))
        self.rng = rng

    def test_ttfs_fires_at_most_once(self):
        out = encode(self.x, self.params, EncoderMode.TTFS, BW)
        self.assertLessEqual(out.data.sum(axis=0).max(), 1.0)

    def test_ttfs_fires_at_most_once_for_any_sign(self):
        x = Tensor(self.rng.normal(0.0, 2.0, size=(1, 100, 100)))
        out = encode(x, self.params, EncoderMode.TTFS, BW)
        self.assertLessEqual(out.data.sum(axis=0).max(), 1.0)

    def test_phase_telescopes(self):
        thetas = threshold_schedule(self.params)[:, 0]
        state = EncoderState(x=self.x, theta=Tensor([thetas[0]]))
        emitted = np.zeros(self.x.shape)
        for theta in thetas:
            s, state = encode_step(state, EncoderMode.PHASE, Tensor(theta), BW)
            emitted += s.data * theta
            self.assertTrue((state.x.data >= 0).all())
        assert_allclose(self.x.data, state.x.data + emitted, rtol=0, atol=1e-12)

    def test_rate_monotone_in_input(self):
        lower = Tensor(np.clip(self.x.data - self.rng.uniform(0.0, 0.5, size=self.x.shape), 0.0, None))
        high = encode(self.x, self.params, EncoderMode.RATE, BW).data
        low = encode(lower, self.params, EncoderMode.RATE, BW).data
        self.assertTrue((high >= low).all())

    def test_thresholds_decrease_and_stay_positive(self):
        schedule = threshold_schedule(self.params)
        self.assertTrue((schedule > 0).all())
        self.assertTrue((np.diff(schedule, axis=0) < 0).all())

    def test_exact_zero_blocks_threshold_gradient(self):
        params = EncoderParams.create(1, 4)
        out = encode(Tensor(np.full((1, 3, 3), 0.6)), params, EncoderMode.PHASE, SpikeBackward.exact_zero())
        backward(tensor_sum(out))
        self.assertTrue(params.a.grad is None or not params.a.grad.any())

    def test_surrogate_reaches_threshold_logits(self):
        params = EncoderParams.create(1, 4)
        out = encode(Tensor(np.full((1, 3, 3), 0.6)), params, EncoderMode.PHASE, BW)
        backward(tensor_sum(out))
        self.assertTrue(params.a.grad[:3].any())

    def test_frozen_logits_get_no_gradient(self):
        params = EncoderParams.create(1, 4, lt_enabled=False)
        out = encode(Tensor(np.full((1, 3, 3), 0.6)), params, EncoderMode.PHASE, BW)
        backward(tensor_sum(out))
        self.assertIsNone(params.a.grad)
        self.assertEqual(params.parameters(), [])


class TemporalShuffleTestCase(unittest.TestCase):
    def test_reversal(self):
        train = Tensor(np.array([0.0, 1.0, 0.0, 1.0]).reshape(4, 1))
        out = temporal_shuffle(train, permutation=[3, 2, 1, 0])
        assert_array_equal(out.data.reshape(-1), [1.0, 0.0, 1.0, 0.0])
        self.assertEqual(out.data.sum(), 2.0)

    def test_identity_permutation(self):
        rng = np.random.default_rng(2)
        train = Tensor((rng.random((4, 3, 5)) < 0.4).astype(float))
        assert_array_equal(temporal_shuffle(train, permutation=range(4)).data, train.data)

    def test_all_zero_train(self):
        for seed in range(5):
            self.assertFalse(temporal_shuffle(Tensor(np.zeros((4, 6))), seed).data.any())

    def test_seeded_permutation(self):
        assert_array_equal(temporal_permutation(8, 3), temporal_permutation(8, 3))
        self.assertEqual(sorted(temporal_permutation(8, 3).tolist()), list(range(8)))

    def test_spike_count_readout_invariant(self):
        rng = np.random.default_rng(6)
        train = Tensor((rng.random((4, 2, 3, 5, 5)) < 0.3).astype(float))
        counts = spike_count_readout(train).data
        for seed in range(10):
            assert_array_equal(spike_count_readout(temporal_shuffle(train, seed)).data, counts)

    def test_not_a_permutation(self):
        with self.assertRaises(ContractError):
            temporal_shuffle(Tensor(np.zeros((3, 2))), permutation=[0, 0, 1])

    def test_shuffle_gradient_routes_back(self):
        train = Tensor.parameter(np.zeros((3, 2)))
        weights = Tensor(np.arange(6.0).reshape(3, 2))
        backward(tensor_sum(temporal_shuffle(train, permutation=[2, 0, 1]) * weights))
        assert_array_equal(train.grad, [[2.0, 3.0], [4.0, 5.0], [0.0, 1.0]])


if __name__ == '__main__':
    unittest.main()
