# snncodec/commands/oracle.py

import click

from snncodec.commands.common import EXIT_CHECK_FAILED, usage_errors
from snncodec.core.oracle import boundaries_to_csv, boundaries_to_table, enumerate_boundaries, verify_boundaries

# Disagreements listed on stderr before the exit; the rest are counted only.
MAX_REPORTED = 10


@click.command('oracle')
@click.option('--t', 'time_steps', type=int, default=4, show_default=True, help="Time steps T.")
@click.option('--decay', type=float, default=0.5, show_default=True, help="Membrane decay L in (0, 1).")
@click.option('--vth', 'v_th', type=float, default=1.0, show_default=True, help="Firing threshold.")
@click.option('--format', 'fmt', type=click.Choice(['csv', 'table']), default='table', show_default=True)
@click.option('--verify', 'n_samples', type=int, default=None,
              help="Cross-check N uniform samples plus every boundary +-1e-9 against simulation.")
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True)
@click.pass_context
@usage_errors
def oracle_cmd(ctx, time_steps, decay, v_th, fmt, n_samples, seed):
    """Exact firing patterns of a LIF neuron under constant input."""
    boundaries = enumerate_boundaries(time_steps, decay, v_th)
    render = boundaries_to_csv if fmt == 'csv' else boundaries_to_table
    click.echo(render(boundaries), nl=False)

    if n_samples is None:
        return
    report = verify_boundaries(time_steps, decay, v_th, n_samples, seed)
    click.echo(f"verified {report.agreements} samples, {len(report.disagreements)} disagreements", err=True)
    if not report.ok:
        for x, expected, simulated in report.disagreements[:MAX_REPORTED]:
            click.echo(f"X={x!r}: oracle {expected}, simulation {simulated}", err=True)
        ctx.exit(EXIT_CHECK_FAILED)
