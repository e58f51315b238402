# committees/management/commands/brexit_dataset.py
from django.core.management.base import BaseCommand
from tabulate import tabulate

from committees.datasets import BREXIT_SUBSETS, brexit_instance, brexit_table


class Command(BaseCommand):
    help = 'Print the embedded Brexit assembly targets and volunteer marginals'

    def add_arguments(self, parser):
        parser.add_argument(
            '--features',
            choices=sorted(BREXIT_SUBSETS),
            default='full',
            help='Feature subset whose candidate space is summarized (default: full)',
        )

    def handle(self, *args, **options):
        table = brexit_table()
        self.stdout.write(tabulate(
            table[['feature', 'values', 'targets', 'marginals']].values.tolist(),
            headers=['feature', 'values', 'targets', 'marginals'],
        ))
        for _, row in table.iterrows():
            for column in ('target_sum', 'marginal_sum'):
                if row[column] != 1.0:
                    kind = column.split('_')[0]
                    self.stdout.write(self.style.WARNING(
                        f"{row['feature']} {kind}s sum to {row[column]:.3f}; renormalized on load"
                    ))

        instance = brexit_instance(options['features'])
        self.stdout.write(f"Features: {', '.join(instance.space.feature_names)}")
        self.stdout.write(f'Candidate space size |X| = {instance.space.size}')
        self.stdout.write(f'd_tilde = {instance.space.d_tilde()}')
