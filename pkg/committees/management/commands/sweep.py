# committees/management/commands/sweep.py
import logging

from django.core.management.base import BaseCommand
import pandas as pd
from tabulate import tabulate

from committees.exceptions import PanelforgeError
from committees.simulator import SUMMARY_COLUMNS, linear_fit, run_trials, summarize_trials
from committees.utils import export_trials, frame_to_text, persist_records, write_output

from ._common import add_experiment_arguments, build_instance, resolve_config

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Run every configured strategy over every committee size and aggregate tau and loss over seeds'

    def add_arguments(self, parser):
        add_experiment_arguments(parser)
        parser.add_argument('--trials-out', help='Also write every individual trial to this file')
        parser.add_argument('--threads', type=int, help='Worker threads (default: PANELFORGE_THREADS)')

    def handle(self, *args, **options):
        config = resolve_config(options)
        instance = build_instance(config)
        threads = options.get('threads')

        records = []
        failures = []
        for strategy_config in config.strategies:
            strategy = strategy_config.build(horizon=config.horizon)
            for committee_size in sorted(set(config.k)):
                try:
                    batch = run_trials(
                        strategy, instance.distribution, instance.target, committee_size, config.seeds,
                        threads=threads, t_max=config.effective_t_max,
                    )
                except PanelforgeError as exc:
                    # remaining cells of the sweep still run
                    failures.append((strategy.name, committee_size, str(exc)))
                    logger.error(f'{strategy.name} K={committee_size} failed: {exc}')
                    self.stderr.write(self.style.ERROR(f'{strategy.name} K={committee_size}: {exc}'))
                    continue
                records.extend(batch)
                self.stdout.write(f'{strategy.name} K={committee_size}: {len(batch)} trials done')

        summary = summarize_trials(records) if records else pd.DataFrame(columns=list(SUMMARY_COLUMNS))
        fmt = config.output.get('format', 'csv')
        path = config.output.get('path')
        if path:
            write_output(frame_to_text(summary, fmt), path)
            self.stdout.write(self.style.SUCCESS(f'Summary written to {path}'))
        else:
            write_output(frame_to_text(summary, fmt), stdout=self.stdout)
        if options.get('trials_out'):
            write_output(export_trials(records, fmt), options['trials_out'])

        fits = []
        for name, group in summary.groupby('strategy', sort=True):
            group = group.dropna(subset=['mean_tau'])
            if len(group) >= 2:
                fit = linear_fit(group['k'], group['mean_tau'])
                fits.append([name, f'{fit.slope:.4f}', f'{fit.intercept:.2f}', f'{fit.r_squared:.4f}'])
                logger.info(f'{name}: mean tau ~ {fit.slope:.4f} K + {fit.intercept:.2f} (R^2 {fit.r_squared:.4f})')
        if fits:
            self.stdout.write(tabulate(fits, headers=['strategy', 'slope', 'intercept', 'R^2']))

        if options.get('persist') and records:
            run = persist_records(records, 'SWEEP', config.to_dict(), instance.space)
            self.stdout.write(f'Stored as run #{run.pk}')
        if failures:
            self.stderr.write(self.style.WARNING(f'{len(failures)} sweep cells failed'))
