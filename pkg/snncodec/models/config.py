# snncodec/models/config.py

from __future__ import annotations

import enum
import hashlib
import json
from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from snncodec.errors import ConfigError
from snncodec.models.encoding import EncoderMode


class NeuronVariant(str, enum.Enum):
    STANDARD = "standard"    # fixed decay L, input weight (1 - L)
    LEARNABLE = "learnable"  # per-step, per-channel decay and input weight


# Default train/test subset sizes per dataset
SUBSET_SIZES = {
    'synth': (400, 200),
    'mnist': (2000, 1000),
    'cifar10': (4000, 2000),
}

DEFAULT_SEEDS = (35, 1000, 0)


def _split_csv(value):
    if isinstance(value, str):
        return tuple(int(part) for part in value.split(',') if part.strip())
    return value


def _lower(value):
    return value.strip().lower() if isinstance(value, str) else value


class AblationFlags(BaseModel):
    """The LT / LC / SG toggles."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    lt: bool = True  # learnable threshold logits
    lc: bool = True  # convolution front-end present
    sg: bool = True  # surrogate backward instead of exact zero

    def label(self, base='TTFS'):
        parts = [base] + [name.upper() for name in ('lt', 'lc', 'sg') if getattr(self, name)]
        return '+'.join(parts)


class ModelConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    mode: EncoderMode = EncoderMode.TTFS
    flags: AblationFlags = AblationFlags()
    time_steps: int = Field(4, ge=1)
    in_channels: int = Field(1, ge=1)
    height: int = Field(28, ge=1)
    width: int = Field(28, ge=1)
    front_channels: int = Field(16, ge=1)
    conv_channels: tuple[int, int] = (32, 32)
    hidden: int = Field(128, ge=1)
    neuron_variant: NeuronVariant = NeuronVariant.STANDARD
    class_count: int = Field(10, ge=1)
    decay: float = Field(0.5, gt=0, lt=1)
    v_th: float = Field(1.0, gt=0)
    theta0: float = Field(1.0, gt=0)
    surrogate_alpha: float = Field(4.0, gt=0)
    init_gain: float = Field(3.0, gt=0)
    target_rate: float = Field(0.15, gt=0, lt=1)  # per-layer firing rate set by calibration
    rate_bernoulli: bool = False
    seed: int = Field(0, ge=0)

    @field_validator('mode', 'neuron_variant', mode='before')
    @classmethod
    def _lower_enums(cls, value):
        return _lower(value)

    @model_validator(mode='after')
    def _direct_needs_front_conv(self):
        if self.mode is EncoderMode.DIRECT and not self.flags.lc:
            raise ValueError("direct encoding replicates convolutional features: it requires lc=true")
        return self

    @classmethod
    def create(cls, **kwargs):
        try:
            return cls(**kwargs)
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def encoder_channels(self):
        return self.front_channels if self.flags.lc else self.in_channels

    def digest(self):
        canonical = json.dumps(self.model_dump(mode='json'), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


class RunConfig(BaseModel):
    """Flat key=value run description: model fields plus training and data fields."""
    model_config = ConfigDict(extra='forbid')

    mode: EncoderMode = EncoderMode.TTFS
    lt: bool = True
    lc: bool = True
    sg: bool = True
    time_steps: int = Field(4, ge=1)
    decay: float = Field(0.5, gt=0, lt=1)
    v_th: float = Field(1.0, gt=0)
    theta0: float = Field(1.0, gt=0)
    surrogate_alpha: float = Field(4.0, gt=0)
    front_channels: int = Field(16, ge=1)
    conv_channels: tuple[int, int] = (32, 32)
    hidden: int = Field(128, ge=1)
    neuron_variant: NeuronVariant = NeuronVariant.STANDARD
    init_gain: float = Field(3.0, gt=0)
    target_rate: float = Field(0.15, gt=0, lt=1)  # per-layer firing rate set by calibration
    rate_bernoulli: bool = False

    epochs: int = Field(5, ge=1)
    lr: float = Field(0.05, gt=0)
    momentum: float = Field(0.9, ge=0, lt=1)
    batch_size: int = Field(32, ge=1)

    dataset: Literal['synth', 'mnist', 'cifar10'] = 'synth'
    data_dir: str = ''
    train_size: int | None = Field(None, ge=1)
    test_size: int | None = Field(None, ge=1)
    synth_classes: int = Field(4, ge=1)
    synth_side: int = Field(8, ge=2)
    data_seed: int = Field(0, ge=0)
    seeds: tuple[Annotated[int, Field(ge=0)], ...] = DEFAULT_SEEDS

    @field_validator('conv_channels', 'seeds', mode='before')
    @classmethod
    def _split_lists(cls, value):
        return _split_csv(value)

    @field_validator('mode', 'neuron_variant', 'dataset', mode='before')
    @classmethod
    def _lower_enums(cls, value):
        return _lower(value)

    @field_validator('train_size', 'test_size', mode='before')
    @classmethod
    def _blank_is_default(cls, value):
        return None if value == '' else value

    @field_validator('seeds')
    @classmethod
    def _some_seed(cls, value):
        if not value:
            raise ValueError("at least one seed is required")
        return value

    @classmethod
    def create(cls, **kwargs):
        try:
            return cls(**kwargs)
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def parse_text(cls, text):
        values = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            if '=' not in line:
                raise ConfigError(f"line {number}: expected key=value, got {raw!r}")
            key, value = line.split('=', 1)
            values[key.strip()] = value.strip()
        return cls.create(**values)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding='utf-8') as handle:
            return cls.parse_text(handle.read())

    @property
    def flags(self):
        return AblationFlags(lt=self.lt, lc=self.lc, sg=self.sg)

    def subset_sizes(self):
        default_train, default_test = SUBSET_SIZES[self.dataset]
        return self.train_size or default_train, self.test_size or default_test

    def to_model_config(self, seed, in_channels, height, width, class_count, **overrides):
        fields = dict(
            mode=self.mode, flags=self.flags, time_steps=self.time_steps,
            in_channels=in_channels, height=height, width=width,
            front_channels=self.front_channels, conv_channels=self.conv_channels,
            hidden=self.hidden, neuron_variant=self.neuron_variant, class_count=class_count,
            decay=self.decay, v_th=self.v_th, theta0=self.theta0,
            surrogate_alpha=self.surrogate_alpha, init_gain=self.init_gain, target_rate=self.target_rate,
            rate_bernoulli=self.rate_bernoulli, seed=seed,
        )
        fields.update(overrides)
        return ModelConfig.create(**fields)

    def to_text(self):
        """Render back to the key=value format, every key explicit."""
        lines = []
        for key, value in self.model_dump(mode='json').items():
            if isinstance(value, (list, tuple)):
                value = ','.join(str(v) for v in value)
            elif isinstance(value, bool):
                value = 'true' if value else 'false'
            elif value is None:
                value = ''
            lines.append(f"{key}={value}")
        return '\n'.join(lines) + '\n'
