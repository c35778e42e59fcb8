# snncodec/models/encoding.py

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from snncodec.core.tensor import Tensor
from snncodec.errors import ContractError, DimensionError


class EncoderMode(str, enum.Enum):
    DIRECT = "direct"  # replicate real-valued features; first LIF layer spikes them
    RATE = "rate"      # residual never updated
    PHASE = "phase"    # each spike subtracts its threshold from the residual
    TTFS = "ttfs"      # residual zeroed after the first spike


@dataclass
class EncoderParams:
    time_steps: int
    a: Tensor
    theta0: float = 1.0
    lt_enabled: bool = True
    bernoulli_rate: bool = False

    def __post_init__(self):
        if self.time_steps < 1:
            raise ContractError(f"time_steps must be >= 1, got {self.time_steps}")
        if not self.theta0 > 0:
            raise ContractError(f"theta0 must be positive, got {self.theta0}")
        if self.a.ndim != 2 or self.a.shape[0] != self.time_steps:
            raise DimensionError(f"threshold logits must be [T, C] with T={self.time_steps}, got {self.a.shape}")

    @classmethod
    def create(cls, channels, time_steps=4, theta0=1.0, lt_enabled=True, bernoulli_rate=False, logits=None):
        """Zero logits give the frozen schedule: theta halves every step."""
        data = np.zeros((time_steps, channels)) if logits is None else np.array(logits, dtype=np.float64)
        a = Tensor(data, requires_grad=lt_enabled)
        return cls(time_steps=time_steps, a=a, theta0=theta0, lt_enabled=lt_enabled, bernoulli_rate=bernoulli_rate)

    @property
    def channels(self):
        return self.a.shape[1]

    def parameters(self):
        return [self.a] if self.lt_enabled else []


@dataclass
class EncoderState:
    x: Tensor
    theta: Tensor
