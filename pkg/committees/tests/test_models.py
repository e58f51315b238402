from django.test import TestCase

from committees.cmdp import accept_all, reject_all
from committees.models import ExperimentRun, TrialResult
from committees.policies import StationaryStrategy
from committees.simulator import run_until_k
from committees.utils import persist_records, stored_trials_csv

from .fixtures import balanced_instance


class PersistenceTests(TestCase):
    def setUp(self):
        _, self.p, self.target = balanced_instance()

    def test_persist_completed_and_timed_out_trials(self):
        records = [
            run_until_k(StationaryStrategy(accept_all(self.p.space)), self.p, self.target, 5, seed=0),
            run_until_k(StationaryStrategy(reject_all(self.p.space)), self.p, self.target, 5, seed=1, t_max=20),
        ]
        run = persist_records(records, 'RUN', {'k': [5]}, self.p.space, label='smoke')

        self.assertEqual(run.space_fingerprint, self.p.space.fingerprint())
        self.assertEqual(run.trials.count(), 2)
        completed, timed_out = run.trials.order_by('seed')
        self.assertEqual(completed.status, 'COMPLETED')
        self.assertEqual(completed.cell_counts, records[0].cell_counts)
        self.assertEqual(timed_out.status, 'TIMED_OUT')
        self.assertIsNone(timed_out.loss)
        self.assertEqual(timed_out.rejected, 20)

    def test_stored_trials_csv(self):
        record = run_until_k(StationaryStrategy(accept_all(self.p.space)), self.p, self.target, 3, seed=4)
        run = persist_records([record], 'SWEEP', {}, self.p.space)
        lines = stored_trials_csv(TrialResult.objects.all()).splitlines()
        self.assertTrue(lines[0].startswith('run,strategy,k,seed,tau'))
        self.assertTrue(lines[1].startswith(f'{run.pk},cmdp,3,4,3,'))
        self.assertIn('Completed', lines[1])

    def test_deleting_a_run_removes_its_trials(self):
        record = run_until_k(StationaryStrategy(accept_all(self.p.space)), self.p, self.target, 2, seed=0)
        run = persist_records([record], 'RUN', {}, self.p.space)
        run.delete()
        self.assertEqual(TrialResult.objects.count(), 0)

    def test_str(self):
        record = run_until_k(StationaryStrategy(accept_all(self.p.space)), self.p, self.target, 2, seed=0)
        run = persist_records([record], 'SWEEP', {}, self.p.space)
        self.assertIn('Committee-size sweep', str(run))
        self.assertEqual(str(run.trials.get()), 'cmdp K=2 seed=0: tau=2')
        self.assertEqual(ExperimentRun.objects.count(), 1)
