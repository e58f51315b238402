# committees/management/commands/export_trials.py
from django.core.management.base import BaseCommand, CommandError

from committees.models import ExperimentRun, TrialResult
from committees.utils import stored_trials_csv, write_output


class Command(BaseCommand):
    help = 'Export stored trial results as CSV'

    def add_arguments(self, parser):
        parser.add_argument('--run', type=int, help='Only trials of this run id')
        parser.add_argument('--strategy', help='Only trials of this strategy')
        parser.add_argument('--out', help='Write to this file instead of stdout')

    def handle(self, *args, **options):
        trials = TrialResult.objects.all()
        if options.get('run') is not None:
            if not ExperimentRun.objects.filter(pk=options['run']).exists():
                raise CommandError(f"No stored run with id {options['run']}", returncode=1)
            trials = trials.filter(run_id=options['run'])
        if options.get('strategy'):
            trials = trials.filter(strategy=options['strategy'])

        text = stored_trials_csv(trials)
        if options.get('out'):
            write_output(text, options['out'])
            self.stdout.write(self.style.SUCCESS(f"Exported {trials.count()} trials to {options['out']}"))
        else:
            write_output(text, stdout=self.stdout)
