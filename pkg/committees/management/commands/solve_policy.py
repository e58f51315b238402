# committees/management/commands/solve_policy.py
from pathlib import Path
import logging

from django.core.management.base import BaseCommand, CommandError
from tabulate import tabulate

from committees.cmdp import solve_known_p
from committees.domain import hoeffding_loss_bound
from committees.exceptions import PanelforgeError
from committees.simulator import negative_binomial_moments
from committees.utils import write_output

from ._common import build_instance, parse_k_list, resolve_config

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Solve the known-distribution program and print the optimal stationary policy'

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Experiment configuration (JSON); default is the embedded Brexit instance')
        parser.add_argument('--k', help='Committee size(s) for the expected-tau table')
        parser.add_argument('--delta', type=float, default=0.1, help='Confidence level of the loss bound (default: 0.1)')
        parser.add_argument('--out', help='Write the policy JSON to this file')
        parser.add_argument('--lp-dump', help='Write the program in plain-text form to this file')
        parser.add_argument('--show-cells', action='store_true', help='Print the accept probability of every cell')

    def handle(self, *args, **options):
        config = resolve_config({'config': options.get('config')})
        instance = build_instance(config)
        ks = parse_k_list(options['k']) if options.get('k') else config.k

        try:
            solution = solve_known_p(instance.distribution, instance.target)
        except PanelforgeError as exc:
            raise CommandError(f'No optimal policy: {exc}', returncode=1)

        if options.get('lp_dump'):
            Path(options['lp_dump']).write_text(solution.program.to_text(), encoding='utf-8')
        if options.get('out'):
            write_output(solution.policy.to_json(), options['out'])
            self.stdout.write(self.style.SUCCESS(f"Policy written to {options['out']}"))

        self.stdout.write(f'Optimal gain g* = {solution.gain:.6f} ({solution.solution.iterations} pivots)')
        rows = []
        for k in ks:
            mean, variance = negative_binomial_moments(k, solution.gain)
            rows.append([k, f'{mean:.2f}', f'{variance:.2f}', f"{hoeffding_loss_bound(instance.target, k, options['delta']):.4f}"])
        self.stdout.write(tabulate(rows, headers=['K', 'E[tau]', 'Var[tau]', 'loss bound']))

        if options.get('show_cells'):
            cells = [
                [instance.space.decode(index).label(), f'{instance.distribution[index]:.5f}', f'{solution.policy[index]:.4f}']
                for index in range(instance.space.size)
            ]
            self.stdout.write(tabulate(cells, headers=['candidate', 'p', 'accept prob']))
        logger.info(f'Solved the known-distribution program on {instance.space.size} cells: g*={solution.gain:.6f}')
