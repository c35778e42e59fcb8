# snncodec/commands/training.py

import logging
import os

import click

from snncodec.commands.common import datasets_for, dumps, load_run_config, model_config_for, usage_errors
from snncodec.core.checkpoint import read_checkpoint, save_checkpoint
from snncodec.core.network import CALIBRATION_SIZE, Trainer, build_model, check_compatible, evaluate

logger = logging.getLogger(__name__)

METRICS_FILE = 'metrics.jsonl'
CHECKPOINT_FILE = 'model.ckpt'


def train_run(run_config, settings, seed):
    """Build, train and evaluate one model; returns (checkpoint, history, final accuracy)."""
    train_ds, test_ds = datasets_for(run_config, settings)
    cfg = model_config_for(run_config, train_ds, seed)
    model = build_model(cfg, train_ds.images[:CALIBRATION_SIZE])
    trainer = Trainer(model, train_ds, test_ds, epochs=run_config.epochs, lr=run_config.lr,
                      seed=seed, momentum=run_config.momentum, batch_size=run_config.batch_size)
    checkpoint, history = trainer.run()
    return checkpoint, history, history[-1]['eval_accuracy']


@click.command('train')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help="key=value run file; missing keys take their defaults.")
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None,
              help="Directory for metrics.jsonl and model.ckpt (default: settings OUTPUT_DIR).")
@click.option('--seed', type=click.IntRange(min=0), default=None,
              help="Model/training seed (default: first of the config's seeds).")
@click.pass_obj
@usage_errors
def train_cmd(settings, config_path, out_dir, seed):
    """Train one model and write its metric log and checkpoint."""
    run_config = load_run_config(config_path)
    seed = run_config.seeds[0] if seed is None else seed
    out_dir = out_dir or settings['OUTPUT_DIR']
    os.makedirs(out_dir, exist_ok=True)

    checkpoint, history, accuracy = train_run(run_config, settings, seed)
    save_checkpoint(checkpoint, os.path.join(out_dir, CHECKPOINT_FILE))

    final = {'event': 'final', 'epoch': checkpoint.epoch, 'eval_accuracy': accuracy}
    with open(os.path.join(out_dir, METRICS_FILE), 'w', encoding='utf-8') as handle:
        handle.write(dumps({'event': 'run_header', 'config': run_config.model_dump(mode='json'),
                            'seed': seed, 'digest': checkpoint.config.digest()}) + '\n')
        for entry in history:
            handle.write(dumps({'event': 'epoch', **entry}) + '\n')
        handle.write(dumps(final) + '\n')
    click.echo(dumps(final))


@click.command('eval')
@click.option('--checkpoint', 'checkpoint_path', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help="Run file naming the evaluation data (dataset, sizes, data_dir).")
@click.option('--dataset', type=click.Choice(['synth', 'mnist', 'cifar10']), default=None)
@click.pass_obj
@usage_errors
def eval_cmd(settings, checkpoint_path, config_path, dataset):
    """Accuracy of a saved model on the test split."""
    model = read_checkpoint(checkpoint_path).to_model()
    run_config = load_run_config(config_path, dataset=dataset)
    _, test_ds = datasets_for(run_config, settings)
    check_compatible(model.cfg, test_ds)
    accuracy = evaluate(model, test_ds)
    logger.info("evaluated", extra={'checkpoint': checkpoint_path, 'accuracy': accuracy})
    click.echo(dumps({'accuracy': accuracy, 'samples': len(test_ds)}))
