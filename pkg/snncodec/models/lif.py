# snncodec/models/lif.py

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logit

from snncodec.core.tensor import Tensor
from snncodec.errors import ContractError, DimensionError


@dataclass
class LifParams:
    """Neuron constants; in learnable mode also per-step, per-channel decay logits and input weights."""
    decay: float = 0.5
    v_th: float = 1.0
    time_steps: int = 4
    learnable: bool = False
    decay_t: Tensor | None = None
    beta_t: Tensor | None = None

    def __post_init__(self):
        if not 0 < self.decay < 1:
            raise ContractError(f"decay must lie in (0, 1), got {self.decay}")
        if not self.v_th > 0:
            raise ContractError(f"v_th must be positive, got {self.v_th}")
        if self.time_steps < 1:
            raise ContractError(f"time_steps must be >= 1, got {self.time_steps}")
        if self.learnable:
            if self.decay_t is None or self.beta_t is None:
                raise ContractError("learnable LIF needs decay_t and beta_t")
            if self.decay_t.ndim != 2 or self.decay_t.shape != self.beta_t.shape:
                raise DimensionError(f"decay_t {self.decay_t.shape} and beta_t {self.beta_t.shape} must both be [T, C]")
            if self.decay_t.shape[0] != self.time_steps:
                raise DimensionError(f"decay_t has {self.decay_t.shape[0]} steps, expected {self.time_steps}")

    @classmethod
    def standard(cls, time_steps=4, decay=0.5, v_th=1.0):
        return cls(decay=decay, v_th=v_th, time_steps=time_steps)

    @classmethod
    def learnable_for(cls, channels, time_steps=4, decay=0.5, v_th=1.0):
        """Learnable variant initialised so that it starts identical to the standard neuron."""
        shape = (time_steps, channels)
        return cls(
            decay=decay, v_th=v_th, time_steps=time_steps, learnable=True,
            decay_t=Tensor.parameter(np.full(shape, logit(decay))),
            beta_t=Tensor.parameter(np.full(shape, 1.0 - decay)),
        )

    @property
    def channels(self):
        return self.decay_t.shape[1] if self.learnable else None

    def parameters(self):
        return [self.decay_t, self.beta_t] if self.learnable else []


@dataclass
class LifState:
    v: Tensor

    @classmethod
    def rest(cls, shape):
        return cls(Tensor(np.zeros(shape)))
