# committees/management/commands/regret.py
import logging

from django.core.management.base import BaseCommand, CommandError

from committees.cmdp import solve_known_p
from committees.exceptions import PanelforgeError
from committees.simulator import run_horizon_trials
from committees.utils import frame_to_text, regret_frame, regret_summary, write_output

from ._common import add_experiment_arguments, build_instance, resolve_config

logger = logging.getLogger(__name__)

DEFAULT_HORIZON = 2 ** 14


class Command(BaseCommand):
    help = 'Run strategies for a fixed number of candidates and report regret against the optimal gain'

    def add_arguments(self, parser):
        add_experiment_arguments(parser, persist=False)
        parser.add_argument('--horizon', type=int, help=f'Candidates per run (default: {DEFAULT_HORIZON})')
        parser.add_argument('--raw', action='store_true', help='Write one row per seed and checkpoint instead of means')
        parser.add_argument('--threads', type=int, help='Worker threads (default: PANELFORGE_THREADS)')

    def handle(self, *args, **options):
        config = resolve_config(options)
        instance = build_instance(config)
        horizon = options.get('horizon') or config.horizon or DEFAULT_HORIZON
        if horizon < 1:
            raise CommandError('--horizon must be at least 1', returncode=1)

        try:
            g_star = solve_known_p(instance.distribution, instance.target).gain
        except PanelforgeError as exc:
            raise CommandError(f'Cannot compute the optimal gain: {exc}', returncode=1)
        self.stdout.write(f'Optimal gain g* = {g_star:.6f}')

        records = []
        for strategy_config in config.strategies:
            strategy = strategy_config.build(horizon=horizon)
            records.extend(run_horizon_trials(
                strategy, instance.distribution, instance.target, horizon, g_star, config.seeds,
                threads=options.get('threads'),
            ))
            logger.info(f'{strategy.name}: {len(config.seeds)} runs to T={horizon} done')

        frame = regret_frame(records) if options.get('raw') else regret_summary(records)
        fmt = config.output.get('format', 'csv')
        path = config.output.get('path')
        write_output(frame_to_text(frame, fmt), path, stdout=None if path else self.stdout)
        if path:
            self.stdout.write(self.style.SUCCESS(f'Regret table written to {path}'))
