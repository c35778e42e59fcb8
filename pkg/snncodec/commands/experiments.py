# snncodec/commands/experiments.py

import logging

import click
import numpy as np
from joblib import Parallel, delayed

from snncodec.commands.common import (
    EXIT_CHECK_FAILED, datasets_for, fmt, load_run_config, model_config_for, usage_errors,
)
from snncodec.core.checkpoint import read_checkpoint
from snncodec.core.network import (
    CALIBRATION_SIZE, build_model, check_compatible, encoder_count_change, evaluate, train,
)
from snncodec.errors import ConfigError
from snncodec.models import AblationFlags, EncoderMode, NeuronVariant

logger = logging.getLogger(__name__)

TOGGLES = ('lt', 'lc', 'sg')
DEFAULT_SHUFFLE_SEEDS = 10


def run_cell(cfg, run_config, train_ds, test_ds):
    """Final eval accuracy of one (config, seed) grid cell."""
    model = build_model(cfg, train_ds.images[:CALIBRATION_SIZE])
    _, history = train(model, train_ds, test_ds, run_config.epochs, run_config.lr,
                       cfg.seed, run_config.momentum, run_config.batch_size)
    return history[-1]['eval_accuracy']


def run_grid(cfgs, run_config, train_ds, test_ds, workers):
    """Accuracy per config digest; identical cells are trained once."""
    unique = {}
    for cfg in cfgs:
        unique.setdefault(cfg.digest(), cfg)
    logger.info("grid started", extra={'cells': len(unique), 'workers': workers})
    results = Parallel(n_jobs=workers)(
        delayed(run_cell)(cfg, run_config, train_ds, test_ds) for cfg in unique.values()
    )
    return dict(zip(unique, results))


def ladder(grid):
    """Cumulative flag rows: nothing on, then each toggle of `grid` switched on in turn."""
    if not grid or len(set(grid)) != len(grid) or any(name not in TOGGLES for name in grid):
        raise ConfigError(f"--grid must list distinct toggles from {','.join(TOGGLES)}, got {','.join(grid)}")
    return [AblationFlags(**{name: name in grid[:k] for name in TOGGLES}) for k in range(len(grid) + 1)]


def pick_seeds(run_config, n_seeds):
    if n_seeds is None:
        return run_config.seeds
    if not 1 <= n_seeds <= len(run_config.seeds):
        raise ConfigError(f"--seeds {n_seeds}: the config lists {len(run_config.seeds)} seeds")
    return run_config.seeds[:n_seeds]


def summarize(accuracies):
    values = np.asarray(accuracies)
    return fmt(values.mean()), fmt(values.std()), ';'.join(fmt(v) for v in values)


def _bool(value):
    return 'true' if value else 'false'


@click.command('ablate')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--grid', default=','.join(TOGGLES), show_default=True, help="Toggles switched on cumulatively.")
@click.option('--seeds', 'n_seeds', type=int, default=None, help="Use the first N seeds of the config.")
@click.option('--front-channels', 'extra_channels', type=int, multiple=True,
              help="Rerun the ladder with this many front conv channels (repeatable).")
@click.pass_obj
@usage_errors
def ablate_cmd(settings, config_path, grid, n_seeds, extra_channels):
    """Accuracy ladder over the LT / LC / SG toggles, mean and std over seeds."""
    run_config = load_run_config(config_path)
    rows = ladder([part.strip().lower() for part in grid.split(',') if part.strip()])
    seeds = pick_seeds(run_config, n_seeds)
    blocks = list(dict.fromkeys((run_config.front_channels,) + tuple(extra_channels)))
    train_ds, test_ds = datasets_for(run_config, settings)

    cells = {}
    for channels in blocks:
        for flags in rows:
            for seed in seeds:
                # the front conv only exists with lc on
                front = channels if flags.lc else run_config.front_channels
                cells[channels, flags, seed] = model_config_for(run_config, train_ds, seed,
                                                                flags=flags, front_channels=front)
    results = run_grid(cells.values(), run_config, train_ds, test_ds, settings['THREADS'])

    base = run_config.mode.value.upper()
    click.echo("front_channels,row,lt,lc,sg,mean,std,accuracies")
    for channels in blocks:
        means = {}
        for flags in rows:
            accuracies = [results[cells[channels, flags, seed].digest()] for seed in seeds]
            means[flags.lt, flags.lc, flags.sg] = float(np.mean(accuracies))
            mean, std, listed = summarize(accuracies)
            click.echo(f"{channels},{flags.label(base)},{_bool(flags.lt)},{_bool(flags.lc)},{_bool(flags.sg)},"
                       f"{mean},{std},{listed}")
        for (lt, lc, sg), value in means.items():
            if sg and (lt, lc, False) in means:
                click.echo(f"# sg_gap,front_channels={channels},lt={_bool(lt)},lc={_bool(lc)},"
                           f"gap={fmt(value - means[lt, lc, False])}")


@click.command('encodings')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--seeds', 'n_seeds', type=int, default=None, help="Use the first N seeds of the config.")
@click.pass_obj
@usage_errors
def encodings_cmd(settings, config_path, n_seeds):
    """Every encoding mode under both neuron variants, mean and std over seeds."""
    run_config = load_run_config(config_path)
    seeds = pick_seeds(run_config, n_seeds)
    train_ds, test_ds = datasets_for(run_config, settings)

    cells = {}
    for mode in EncoderMode:
        if mode is EncoderMode.DIRECT and not run_config.lc:
            click.echo("direct encoding needs lc=true; skipped", err=True)
            continue
        for variant in NeuronVariant:
            for seed in seeds:
                cells[mode, variant, seed] = model_config_for(run_config, train_ds, seed,
                                                              mode=mode, neuron_variant=variant)
    results = run_grid(cells.values(), run_config, train_ds, test_ds, settings['THREADS'])

    click.echo("mode,neuron_variant,mean,std,accuracies")
    for mode in EncoderMode:
        for variant in NeuronVariant:
            if (mode, variant, seeds[0]) not in cells:
                continue
            mean, std, listed = summarize([results[cells[mode, variant, seed].digest()] for seed in seeds])
            click.echo(f"{mode.value},{variant.value},{mean},{std},{listed}")


@click.command('shuffle-eval')
@click.option('--checkpoint', 'checkpoint_path', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--dataset', type=click.Choice(['synth', 'mnist', 'cifar10']), default=None)
@click.option('--seeds', 'n_seeds', type=int, default=DEFAULT_SHUFFLE_SEEDS, show_default=True,
              help="Shuffle seeds 0..N-1.")
@click.option('--max-drop', type=float, default=None, help="Fail (exit 1) if the mean drop exceeds this many points.")
@click.pass_context
@usage_errors
def shuffle_eval_cmd(ctx, checkpoint_path, config_path, dataset, n_seeds, max_drop):
    """Accuracy before and after permuting the encoder output over time."""
    if n_seeds < 1:
        raise ConfigError(f"--seeds must be >= 1, got {n_seeds}")
    model = read_checkpoint(checkpoint_path).to_model()
    run_config = load_run_config(config_path, dataset=dataset)
    _, test_ds = datasets_for(run_config, ctx.obj)
    check_compatible(model.cfg, test_ds)

    before = evaluate(model, test_ds)
    drops, count_changes = [], []
    click.echo("seed,before,after,count_change")
    for seed in range(n_seeds):
        after = evaluate(model, test_ds, shuffle_seed=seed)
        change = encoder_count_change(model, test_ds, seed)
        drops.append(100.0 * (before - after))
        count_changes.append(change)
        click.echo(f"{seed},{fmt(before)},{fmt(after)},{fmt(change)}")
    mean_drop = float(np.mean(drops))
    click.echo(f"# mean_drop={mean_drop:.4f}")

    if any(count_changes):
        click.echo("temporal shuffling changed encoder spike counts", err=True)
        ctx.exit(EXIT_CHECK_FAILED)
    if max_drop is not None and mean_drop > max_drop:
        click.echo(f"mean drop {mean_drop:.4f} points exceeds {max_drop}", err=True)
        ctx.exit(EXIT_CHECK_FAILED)
