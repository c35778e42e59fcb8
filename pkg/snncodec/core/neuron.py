# snncodec/core/neuron.py
"""Soft-reset LIF dynamics over a time loop, standard or with learnable per-step constants."""

from __future__ import annotations

from snncodec.core.tensor import channel_view, select, sigmoid, spike, stack
from snncodec.errors import DimensionError
from snncodec.models.lif import LifState


def channel_axis(ndim):
    return 1 if ndim >= 2 else 0


def lif_step(state, input_current, params, t, bw):
    """
    One step of the neuron.

    standard:  H = L*V + (1-L)*I
    learnable: H = sigmoid(decay_t[t])*V + beta_t[t]*I  (per channel)
    then S = spike(H - v_th) and the soft reset V' = H - S*v_th.
    """
    if not 0 <= t < params.time_steps:
        raise DimensionError(f"time step {t} outside [0, {params.time_steps})")
    if state.v.shape != input_current.shape:
        raise DimensionError(f"membrane {state.v.shape} does not match input {input_current.shape}")

    if params.learnable:
        ndim = input_current.ndim
        axis = channel_axis(ndim)
        if input_current.shape[axis] != params.channels:
            raise DimensionError(f"input has {input_current.shape[axis]} channels, neuron has {params.channels}")
        decay = channel_view(sigmoid(select(params.decay_t, t)), ndim, axis)
        beta = channel_view(select(params.beta_t, t), ndim, axis)
        h = decay * state.v + beta * input_current
    else:
        h = params.decay * state.v + (1.0 - params.decay) * input_current

    s = spike(h - params.v_th, bw)
    v_next = h - s * params.v_th
    return s, LifState(v_next)


def lif_run(currents, params, bw):
    """Fold lif_step over the leading time axis starting from rest; returns stacked spikes."""
    if currents.ndim < 1 or currents.shape[0] != params.time_steps:
        raise DimensionError(f"leading dimension {currents.shape[:1]} != T={params.time_steps}")
    state = LifState.rest(currents.shape[1:])
    spikes = []
    for t in range(params.time_steps):
        s, state = lif_step(state, select(currents, t), params, t, bw)
        spikes.append(s)
    return stack(spikes)
