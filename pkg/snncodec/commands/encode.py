# snncodec/commands/encode.py

import numpy as np
import click

from snncodec.commands.common import usage_errors
from snncodec.core.encoder import encode, thresholds_to_logits
from snncodec.core.tensor import SpikeBackward, Tensor
from snncodec.errors import ConfigError
from snncodec.models import EncoderMode, EncoderParams


def _parse_floats(text):
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def read_input(path):
    """Image [C, H, W] from a .npy array (0-3 dims) or a comma-separated text grid."""
    if path.endswith('.npy'):
        array = np.load(path, allow_pickle=False).astype(np.float64)
    else:
        array = np.loadtxt(path, delimiter=',', ndmin=2, dtype=np.float64)
    if array.ndim > 3:
        raise ConfigError(f"{path}: expected at most 3 dimensions, got {array.shape}")
    while array.ndim < 3:
        array = array[None]
    return array


def spikes_to_csv(train, real_valued=False):
    """Nonzero entries of a [T, C, H, W] train as t,channel,row,col,spike lines."""
    lines = ["t,channel,row,col,spike"]
    if real_valued:
        lines.append("# real-valued")
    total = 0
    for t, c, r, col in zip(*np.nonzero(train)):
        value = train[t, c, r, col]
        lines.append(f"{t},{c},{r},{col},{float(value)!r}" if real_valued else f"{t},{c},{r},{col},1")
        total += 1
    lines.append(f"# total={total}")
    return "\n".join(lines) + "\n"


@click.command('encode')
@click.option('--mode', type=click.Choice([m.value for m in EncoderMode], case_sensitive=False), required=True)
@click.option('--input', 'input_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help=".npy array or comma-separated grid.")
@click.option('--value', type=float, default=None, help="Encode a single scalar instead of a file.")
@click.option('--t', 'time_steps', type=int, default=None, help="Time steps (default 4, or the --thresholds length).")
@click.option('--thresholds', default=None, help="Explicit decreasing ladder, e.g. 1,0.66,0.33.")
@click.option('--theta0', type=float, default=1.0, show_default=True)
@click.option('--bernoulli', is_flag=True, help="Seeded stochastic rate variant.")
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True)
@click.option('--out', type=click.File('w'), default='-', show_default=True)
@usage_errors
def encode_cmd(mode, input_path, value, time_steps, thresholds, theta0, bernoulli, seed, out):
    """Dump the spike train of one input as CSV."""
    if (input_path is None) == (value is None):
        raise click.UsageError("give exactly one of --input or --value")
    image = read_input(input_path) if input_path else np.full((1, 1, 1), value)
    if (image < 0).any():
        raise ConfigError("encoder inputs must be nonnegative")
    channels = image.shape[0]

    logits = None
    if thresholds is not None:
        theta0, logits = thresholds_to_logits(_parse_floats(thresholds), channels)
        if time_steps is not None and time_steps != len(logits):
            raise ConfigError(f"--t {time_steps} disagrees with {len(logits)} thresholds")
        time_steps = len(logits)
    params = EncoderParams.create(channels, time_steps or 4, theta0, lt_enabled=False,
                                  bernoulli_rate=bernoulli, logits=logits)

    mode = EncoderMode(mode.lower())
    rng = np.random.default_rng(seed)
    train = encode(Tensor(image), params, mode, SpikeBackward.surrogate(), rng=rng).data
    out.write(spikes_to_csv(train, real_valued=mode is EncoderMode.DIRECT))
