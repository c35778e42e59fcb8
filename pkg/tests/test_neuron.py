# tests/test_neuron.py

import unittest

import numpy as np
from numpy.testing import assert_array_equal

from snncodec.core.neuron import lif_run, lif_step
from snncodec.core.oracle import enumerate_boundaries, pattern_for, simulate_constant
from snncodec.core.tensor import SpikeBackward, Tensor
from snncodec.errors import ContractError, DimensionError
from snncodec.models import LifParams, LifState

BW = SpikeBackward.surrogate()


def _step(v, current, params=None, t=0):
    params = params or LifParams.standard()
    s, state = lif_step(LifState(Tensor([v])), Tensor([current]), params, t, BW)
    return s.data[0], state.v.data[0]


def _constant_train(x, time_steps=4, params=None):
    params = params or LifParams.standard(time_steps)
    currents = Tensor(np.full((time_steps, 1), x))
    return ''.join(str(int(b)) for b in lif_run(currents, params, BW).data[:, 0])


class LifStepTestCase(unittest.TestCase):
    def test_fires_and_resets(self):
        self.assertEqual(_step(0.0, 2.0), (1.0, 0.0))

    def test_subthreshold(self):
        s, v = _step(0.8, 1.0)
        self.assertEqual(s, 0.0)
        self.assertAlmostEqual(v, 0.9, places=15)

    def test_quiescent(self):
        self.assertEqual(_step(0.0, 0.0), (0.0, 0.0))

    def test_learnable_step(self):
        params = LifParams(decay=0.5, v_th=1.0, time_steps=1, learnable=True,
                           decay_t=Tensor.parameter([[0.0]]), beta_t=Tensor.parameter([[2.0]]))
        s, state = lif_step(LifState(Tensor([[0.0]])), Tensor([[1.0]]), params, 0, BW)
        self.assertEqual(s.data[0, 0], 1.0)
        self.assertEqual(state.v.data[0, 0], 1.0)

    def test_step_outside_window(self):
        with self.assertRaises(DimensionError):
            _step(0.0, 1.0, t=4)

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionError):
            lif_step(LifState(Tensor([0.0, 0.0])), Tensor([1.0]), LifParams.standard(), 0, BW)

    def test_soft_reset_identity(self):
        rng = np.random.default_rng(0)
        params = LifParams.standard()
        state = LifState.rest((500,))
        for t in range(params.time_steps):
            current = rng.uniform(0.0, 3.0, size=500)
            h = params.decay * state.v.data + (1.0 - params.decay) * current
            s, state = lif_step(state, Tensor(current), params, t, BW)
            assert_array_equal(state.v.data + s.data * params.v_th, h)

    def test_invalid_params(self):
        with self.assertRaises(ContractError):
            LifParams(decay=1.0)
        with self.assertRaises(ContractError):
            LifParams(v_th=0.0)
        with self.assertRaises(ContractError):
            LifParams(learnable=True)


class LifRunTestCase(unittest.TestCase):
    def test_constant_current_patterns(self):
        self.assertEqual(_constant_train(1.5), '0101')
        self.assertEqual(_constant_train(0.5), '0000')
        self.assertEqual(_constant_train(2.5), '1111')

    def test_time_mismatch(self):
        with self.assertRaises(DimensionError):
            lif_run(Tensor(np.zeros((3, 2))), LifParams.standard(4), BW)

    def test_dense_grid_matches_oracle(self):
        xs = np.arange(3001) / 1000.0
        currents = Tensor(np.tile(xs, (4, 1)))
        train = lif_run(currents, LifParams.standard(4), BW).data
        boundaries = enumerate_boundaries(4, 0.5, 1.0)
        for column, x in enumerate(xs):
            bits = tuple(int(b) for b in train[:, column])
            self.assertEqual(bits, pattern_for(boundaries, x).bits, msg=f"X={x}")
            self.assertEqual(bits, simulate_constant(x).bits, msg=f"X={x}")

    def test_spike_count_monotone_in_input(self):
        xs = np.arange(3001) / 1000.0
        counts = lif_run(Tensor(np.tile(xs, (4, 1))), LifParams.standard(4), BW).data.sum(axis=0)
        self.assertTrue((np.diff(counts) >= 0).all())

    def test_learnable_reproduces_standard(self):
        rng = np.random.default_rng(4)
        currents = Tensor(rng.uniform(0.0, 3.0, size=(4, 6, 5)))
        standard = lif_run(currents, LifParams.standard(4, 0.5, 1.0), BW)
        learnable = lif_run(currents, LifParams.learnable_for(5, 4, 0.5, 1.0), BW)
        assert_array_equal(learnable.data, standard.data)

    def test_learnable_conv_layout(self):
        rng = np.random.default_rng(5)
        currents = Tensor(rng.uniform(0.0, 3.0, size=(4, 2, 3, 2, 2)))
        standard = lif_run(currents, LifParams.standard(4), BW)
        learnable = lif_run(currents, LifParams.learnable_for(3, 4), BW)
        assert_array_equal(learnable.data, standard.data)

    def test_learnable_channel_mismatch(self):
        with self.assertRaises(DimensionError):
            lif_run(Tensor(np.zeros((4, 2, 3))), LifParams.learnable_for(5, 4), BW)


if __name__ == '__main__':
    unittest.main()
