# snncodec/__init__.py

import click

from snncodec.logs import configure_logging, reset_logging


# The factory accepts a 'config_class' argument, like the settings classes in config.py
def create_cli(config_class):
    # Every UPPERCASE attribute of the config class becomes a setting.
    settings = {key: getattr(config_class, key) for key in dir(config_class) if key.isupper()}

    @click.group()
    @click.option('--log-level', default=None, help="Override the configured log level.")
    @click.pass_context
    def cli(ctx, log_level):
        """Spiking encoding lab: oracle, encoders, training and ablation runs."""
        ctx.ensure_object(dict)
        ctx.obj.update(settings)
        default_level = 'DEBUG' if settings['DEBUG'] else settings['LOG_LEVEL']
        configure_logging((log_level or default_level).upper())
        ctx.call_on_close(reset_logging)

    # Import and register the command modules
    from .commands.oracle import oracle_cmd
    from .commands.encode import encode_cmd
    from .commands.training import eval_cmd, train_cmd
    from .commands.experiments import ablate_cmd, encodings_cmd, shuffle_eval_cmd
    for command in (oracle_cmd, encode_cmd, train_cmd, eval_cmd, ablate_cmd, shuffle_eval_cmd, encodings_cmd):
        cli.add_command(command)

    return cli
