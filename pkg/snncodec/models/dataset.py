# snncodec/models/dataset.py

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from snncodec.errors import ContractError


@dataclass(frozen=True)
class Dataset:
    images: np.ndarray  # [N, C, H, W], values in [0, 1]
    labels: np.ndarray  # [N] class indices
    class_count: int

    def __post_init__(self):
        if self.images.ndim != 4:
            raise ContractError(f"images must be [N, C, H, W], got {self.images.shape}")
        if len(self.labels) != len(self.images) or len(self.images) < 1:
            raise ContractError(f"{len(self.images)} images vs {len(self.labels)} labels")
        if self.labels.min() < 0 or self.labels.max() >= self.class_count:
            raise ContractError(f"labels must lie in [0, {self.class_count})")
        if self.images.min() < 0.0 or self.images.max() > 1.0:
            raise ContractError("pixel values must lie in [0, 1]")
        self.images.setflags(write=False)
        self.labels.setflags(write=False)

    def __len__(self):
        return len(self.labels)

    @property
    def image_shape(self):
        return self.images.shape[1:]
