# committees/management/commands/run.py
from pathlib import Path
import logging

from django.core.management.base import BaseCommand, CommandError
from tabulate import tabulate

from committees.exceptions import PanelforgeError
from committees.policies import DecisionTrace
from committees.simulator import run_until_k
from committees.utils import export_trials, persist_records, write_output

from ._common import add_experiment_arguments, build_instance, resolve_config

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Run one selection trial and report tau, the representation loss and the committee counts'

    def add_arguments(self, parser):
        add_experiment_arguments(parser)
        parser.add_argument('--trace', help='Write the per-candidate decision trace (CSV) to this file')

    def handle(self, *args, **options):
        config = resolve_config(options)
        instance = build_instance(config)
        strategy = config.strategies[0].build(horizon=config.horizon)
        committee_size = config.k[0]
        seed = config.seed

        trace_file = None
        trace = None
        if options.get('trace'):
            trace_path = Path(options['trace'])
            trace_path.parent.mkdir(parents=True, exist_ok=True)
            trace_file = open(trace_path, 'w', newline='', encoding='utf-8')
            trace = DecisionTrace(trace_file)
        try:
            record = run_until_k(
                strategy, instance.distribution, instance.target, committee_size, seed,
                t_max=config.effective_t_max, trace=trace,
            )
        except PanelforgeError as exc:
            logger.error(f'Trial {strategy.name} K={committee_size} seed={seed} failed: {exc}')
            raise CommandError(f'Trial failed: {exc}', returncode=1)
        finally:
            if trace_file is not None:
                trace_file.close()

        fmt = config.output.get('format', 'csv')
        path = config.output.get('path')
        if path:
            write_output(export_trials([record], fmt), path)
            self.stdout.write(self.style.SUCCESS(f'Trial record written to {path}'))
        else:
            write_output(export_trials([record], fmt), stdout=self.stdout)

        self.stdout.write(tabulate(
            [[instance.space.feature_names[i], ' / '.join(str(n) for n in counts)]
             for i, counts in enumerate(record.cell_counts)],
            headers=['feature', 'accepted per value'],
        ))
        if options.get('persist'):
            run = persist_records([record], 'RUN', config.to_dict(), instance.space)
            self.stdout.write(f'Stored as run #{run.pk}')

        if not record.completed:
            raise CommandError(
                f'Trial timed out after {record.tau} candidates with {record.accepted}/{committee_size} accepted',
                returncode=2,
            )
        logger.info(f'{strategy.name} K={committee_size} seed={seed}: tau={record.tau} loss={record.loss:.4f}')
