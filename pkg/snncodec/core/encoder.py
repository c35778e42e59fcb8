# snncodec/core/encoder.py
"""
Unified learnable temporal encoding.

At every step s_t = spike(x_t - theta_t); theta_{t+1} = theta_t * sigmoid(a_t) with a
learnable logit per (step, channel). The residual update picks the code:
phase subtracts the threshold, TTFS zeroes the residual after the first spike,
rate leaves it alone. Direct encoding replicates the input unchanged.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, logit

from snncodec.core.tensor import Tensor, channel_view, select, sigmoid, spike, stack, take, tensor_sum
from snncodec.errors import ContractError, DimensionError, NumericError
from snncodec.models.encoding import EncoderMode, EncoderState


def threshold_step(theta, a_t):
    """
    theta * sigmoid(a_t), broadcast per channel.

    sigmoid rounds to 1.0 for logits above ~37; such entries are pulled down to
    the next float below theta, with the gradient of the unclamped product.
    """
    if not np.isfinite(a_t.data).all():
        raise NumericError("threshold logits must be finite")
    out = theta * sigmoid(a_t)
    excess = out.data - np.nextafter(theta.data, 0.0)
    if (excess > 0).any():
        out = out - Tensor(np.maximum(excess, 0.0))
    return out


def encode_step(state, mode, theta_t, bw):
    """Emit one spike frame and update the residual by the mode's rule."""
    if mode is EncoderMode.DIRECT:
        raise ContractError("direct encoding has no per-step spike rule; use encode()")
    if (theta_t.data <= 0).any():
        raise ContractError("thresholds must stay positive")
    s = spike(state.x - theta_t, bw)
    if mode is EncoderMode.PHASE:
        x_next = state.x - s * theta_t
    elif mode is EncoderMode.TTFS:
        x_next = state.x - s * state.x
    else:
        x_next = state.x
    return s, EncoderState(x=x_next, theta=theta_t)


def _channel_axis(x):
    if x.ndim == 3:
        return 0
    if x.ndim == 4:
        return 1
    raise DimensionError(f"encoder input must be [C,H,W] or [B,C,H,W], got {x.shape}")


def encode(x, params, mode, bw, rng=None):
    """
    Turn a static input into a [T, ...] sequence.

    Direct mode returns T real-valued copies of `x`. Other modes return the
    binary spike train. With `params.bernoulli_rate` and rate mode, each step
    fires with probability clip(x / theta_t, 0, 1) using `rng`.
    """
    if mode is EncoderMode.DIRECT:
        return stack([x] * params.time_steps)

    axis = _channel_axis(x)
    if x.shape[axis] != params.channels:
        raise DimensionError(f"input has {x.shape[axis]} channels, encoder has {params.channels}")
    stochastic = params.bernoulli_rate and mode is EncoderMode.RATE
    if stochastic and rng is None:
        raise ContractError("the Bernoulli rate variant needs a seeded generator")

    theta = Tensor(np.full(params.channels, params.theta0))
    state = EncoderState(x=x, theta=theta)
    frames = []
    for t in range(params.time_steps):
        theta_t = channel_view(theta, x.ndim, axis)
        if stochastic:
            uniform = Tensor(rng.random(x.shape))
            frames.append(spike(x - theta_t * uniform, bw))
        else:
            s, state = encode_step(state, mode, theta_t, bw)
            frames.append(s)
        if t + 1 < params.time_steps:
            theta = threshold_step(theta, select(params.a, t))
    return stack(frames)


def threshold_schedule(params):
    """Realised thresholds theta_0 .. theta_{T-1} per channel, as an array [T, C]."""
    theta = np.full(params.channels, params.theta0)
    rows = []
    for t in range(params.time_steps):
        rows.append(theta.copy())
        theta = np.minimum(theta * expit(params.a.data[t]), np.nextafter(theta, 0.0))
    return np.stack(rows)


def thresholds_to_logits(thresholds, channels=1):
    """
    Logits reproducing an explicit strictly decreasing threshold ladder.

    Returns (theta0, logits[T, C]); the last row is unused by the schedule and set to 0.
    """
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if thresholds.ndim != 1 or thresholds.size < 1:
        raise ContractError("thresholds must be a non-empty sequence")
    if (thresholds <= 0).any() or (np.diff(thresholds) >= 0).any():
        raise ContractError(f"thresholds must be positive and strictly decreasing, got {thresholds.tolist()}")
    ratios = np.append(thresholds[1:] / thresholds[:-1], 0.5)
    logits = np.repeat(logit(ratios)[:, None], channels, axis=1)
    return float(thresholds[0]), logits


def temporal_permutation(time_steps, seed):
    return np.random.default_rng(seed).permutation(time_steps)


def temporal_shuffle(spike_train, seed=None, permutation=None):
    """Permute the leading time axis; per-neuron spike counts are unchanged."""
    if spike_train.ndim < 1 or spike_train.shape[0] < 1:
        raise DimensionError("spike train needs a leading time axis")
    if permutation is None:
        permutation = temporal_permutation(spike_train.shape[0], seed)
    permutation = np.asarray(permutation)
    if sorted(permutation.tolist()) != list(range(spike_train.shape[0])):
        raise ContractError(f"{permutation.tolist()} is not a permutation of {spike_train.shape[0]} steps")
    return take(spike_train, permutation)


def spike_count_readout(spike_train):
    """Per-neuron spike totals over time."""
    return tensor_sum(spike_train, axis=0)

