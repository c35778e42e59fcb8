# snncodec/commands/common.py

import functools
import json

import click
from pydantic import ValidationError

from snncodec.core.data import load_dataset
from snncodec.errors import ConfigError, ContractError, DimensionError, FormatError
from snncodec.models import RunConfig

# Exit code for a failed check (verification, accuracy bound); usage errors exit 2.
EXIT_CHECK_FAILED = 1


def usage_errors(func):
    """Report bad input as a click usage error (exit 2) instead of a traceback."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ConfigError, ContractError, DimensionError, FormatError, ValidationError) as exc:
            raise click.UsageError(str(exc)) from exc
    return wrapper


def load_run_config(path, **overrides):
    """RunConfig from a key=value file (or all defaults), with CLI overrides applied."""
    config = RunConfig.from_file(path) if path else RunConfig()
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if overrides:
        config = RunConfig.create(**{**config.model_dump(), **overrides})
    return config


def datasets_for(run_config, settings):
    return load_dataset(run_config, run_config.data_dir or settings['DATA_DIR'])


def model_config_for(run_config, dataset, seed, **overrides):
    channels, height, width = dataset.image_shape
    return run_config.to_model_config(seed, channels, height, width, dataset.class_count, **overrides)


def dumps(record):
    """One canonical JSON line; identical input gives identical bytes."""
    return json.dumps(record, sort_keys=True, separators=(',', ':'))


def fmt(value):
    return f"{value:.6f}"
