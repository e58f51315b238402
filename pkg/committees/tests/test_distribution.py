import math
import os
import tempfile

from django.test import SimpleTestCase
import numpy as np

from committees.distribution import (
    ConfidenceKind, EmpiricalEstimate, JointDistribution, bayes_adjust, bernstein_confidence_set,
    bernstein_intervals, from_marginals, from_table, l1_confidence_set, l1_radius, load_joint_csv,
    normalize_vector,
)
from committees.domain import CandidateSpace
from committees.exceptions import BadMarginal, DegenerateInput, NoSamples, ShapeMismatch

from .fixtures import FJ, MS, balanced_instance, gender_age_space


class JointDistributionTests(SimpleTestCase):
    def test_rejects_off_simplex(self):
        with self.assertRaises(BadMarginal):
            JointDistribution(gender_age_space(), [0.5, 0.5, 0.5, -0.5])
        with self.assertRaises(BadMarginal):
            JointDistribution(gender_age_space(), [0.25, 0.25, 0.25, 0.2])
        with self.assertRaises(ShapeMismatch):
            JointDistribution(gender_age_space(), [0.5, 0.5])

    def test_marginals(self):
        _, p, _ = balanced_instance()
        self.assertTrue(np.allclose(p.marginal(0), [7 / 12, 5 / 12]))
        self.assertTrue(np.allclose(p.marginal(1), [7 / 12, 5 / 12]))

    def test_sampling_is_deterministic(self):
        _, p, _ = balanced_instance()
        self.assertEqual(p.sample(np.random.default_rng(3)), p.sample(np.random.default_rng(3)))
        self.assertTrue(np.array_equal(
            p.sample_indices(np.random.default_rng(9), 50),
            p.sample_indices(np.random.default_rng(9), 50),
        ))

    def test_sampling_frequencies(self):
        _, p, _ = balanced_instance()
        draws = p.sample_indices(np.random.default_rng(0), 60_000)
        frequencies = np.bincount(draws, minlength=4) / draws.size
        # 4 standard deviations of a binomial proportion at n = 60000
        self.assertTrue(np.all(np.abs(frequencies - p.probabilities) < 4 * math.sqrt(0.25 / 60_000)))

    def test_point_mass_only_returns_its_cell(self):
        p = JointDistribution(gender_age_space(), [0.0, 0.0, 0.0, 1.0])
        draws = p.sample_indices(np.random.default_rng(1), 1000)
        self.assertTrue(np.all(draws == FJ))
        self.assertFalse(p.strictly_positive())
        self.assertEqual(list(p.support()), [FJ])


class MarginalTests(SimpleTestCase):
    def test_independent_product(self):
        space = gender_age_space()
        p = from_marginals(space, [[0.4, 0.6], [0.3, 0.7]])
        self.assertAlmostEqual(p[MS], 0.12)
        self.assertAlmostEqual(p[FJ], 0.42)

    def test_three_decimal_rows_are_renormalized_with_warning(self):
        with self.assertLogs('committees.distribution', level='WARNING') as logs:
            vector = normalize_vector([0.565, 0.434], label='Marginal of vote')
        self.assertAlmostEqual(vector.sum(), 1.0)
        self.assertIn('vote', logs.output[0])

    def test_far_from_one_is_rejected(self):
        with self.assertRaises(BadMarginal):
            normalize_vector([0.5, 0.4])
        with self.assertRaises(BadMarginal):
            from_marginals(gender_age_space(), [[0.4, 0.6]])

    def test_from_table(self):
        space = gender_age_space()
        p = from_table(space, {(1, 1): 0.5, (2, 2): 0.5})
        self.assertEqual(p[MS], 0.5)
        self.assertEqual(p[FJ], 0.5)

    def test_joint_csv(self):
        space = gender_age_space()
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'joint.csv')
            with open(path, 'w') as handle:
                handle.write('gender,age,probability\n1,1,0.4\n1,2,0.1\n2,1,0.2\n2,2,0.3\n')
            p = load_joint_csv(path, space)
        self.assertTrue(np.allclose(p.probabilities, [0.4, 0.1, 0.2, 0.3]))

    def test_joint_csv_missing_column(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'joint.csv')
            with open(path, 'w') as handle:
                handle.write('gender,probability\n1,1.0\n')
            with self.assertRaises(BadMarginal):
                load_joint_csv(path, gender_age_space())


class BayesAdjustTests(SimpleTestCase):
    def test_posterior(self):
        adjusted = bayes_adjust([0.5, 0.5], [0.02, 0.06])
        self.assertTrue(np.allclose(adjusted, [0.25, 0.75]))

    def test_all_zero_rates(self):
        with self.assertRaises(DegenerateInput):
            bayes_adjust([0.5, 0.5], [0.0, 0.0])

    def test_zero_rate_value_vanishes(self):
        adjusted = bayes_adjust([0.3, 0.3, 0.4], [0.1, 0.0, 0.1])
        self.assertEqual(adjusted[1], 0.0)


class ConfidenceSetTests(SimpleTestCase):
    def estimate(self, counts):
        return EmpiricalEstimate(gender_age_space(), counts)

    def test_no_samples(self):
        with self.assertRaises(NoSamples):
            l1_radius(self.estimate([0, 0, 0, 0]), 0.1, 4)
        with self.assertRaises(NoSamples):
            bernstein_intervals(self.estimate([0, 0, 0, 0]), 0.1, 4)

    def test_l1_radius_formula(self):
        estimate = self.estimate([10, 5, 3, 2])
        expected = math.sqrt(2 * 4 * math.log(6 * 4 * 21 * 20 / 0.1) / 20)
        self.assertAlmostEqual(l1_radius(estimate, 0.1, 4), expected)

    def test_l1_radius_shrinks(self):
        small = l1_radius(self.estimate([10, 10, 10, 10]), 0.1, 4)
        large = l1_radius(self.estimate([1000, 1000, 1000, 1000]), 0.1, 4)
        self.assertLess(large, small)

    def test_bernstein_intervals_are_clipped(self):
        lower, upper = bernstein_intervals(self.estimate([3, 0, 1, 0]), 0.1, 4)
        self.assertTrue(np.all(lower >= 0) and np.all(upper <= 1))
        self.assertTrue(np.all(lower <= upper))

    def test_bernstein_zero_count_width(self):
        estimate = self.estimate([100, 0, 50, 50])
        lower, upper = bernstein_intervals(estimate, 0.1, 4)
        self.assertEqual(lower[1], 0.0)
        self.assertAlmostEqual(upper[1], (7 / 3) * math.log(6 * 4 * 201 / 0.1) / 200)

    def test_sets_contain_their_center(self):
        estimate = self.estimate([7, 5, 3, 1])
        for cset in (l1_confidence_set(estimate, 0.1), bernstein_confidence_set(estimate, 0.1)):
            self.assertTrue(cset.contains(cset.center))
        self.assertIs(l1_confidence_set(estimate, 0.1).kind, ConfidenceKind.L1_BALL)
        self.assertEqual(l1_confidence_set(estimate, 0.1).episode_start, 17)

    def test_l1_contains(self):
        cset = l1_confidence_set(self.estimate([1, 1, 1, 1]), 0.1)
        far = np.array([1.0, 0.0, 0.0, 0.0])
        self.assertEqual(cset.contains(far), np.abs(far - 0.25).sum() <= cset.l1_radius)

    def test_invalid_delta(self):
        with self.assertRaises(ValueError):
            l1_radius(self.estimate([1, 1, 1, 1]), 1.5, 4)

    def test_estimate_records(self):
        estimate = EmpiricalEstimate(CandidateSpace((2, 2)))
        estimate.record(2)
        estimate.record(2)
        estimate.record(0)
        self.assertEqual(estimate.total, 3)
        self.assertTrue(np.allclose(estimate.frequencies(), [1 / 3, 0, 2 / 3, 0]))
        snapshot = estimate.snapshot()
        estimate.record(1)
        self.assertEqual(snapshot.total, 3)


class CoverageTests(SimpleTestCase):
    def setUp(self):
        self.space = gender_age_space()
        self.p = JointDistribution(self.space, [0.25, 0.25, 0.25, 0.25])

    def estimates(self, runs=200, total=500):
        rng = np.random.default_rng(2024)
        for _ in range(runs):
            draws = self.p.sample_indices(rng, total)
            yield EmpiricalEstimate(self.space, np.bincount(draws, minlength=self.space.size))

    def test_l1_ball_covers_the_true_distribution(self):
        covered = [l1_confidence_set(estimate, 0.1).contains(self.p) for estimate in self.estimates()]
        self.assertGreaterEqual(np.mean(covered), 0.9)

    def test_bernstein_box_covers_the_true_distribution(self):
        covered = [bernstein_confidence_set(estimate, 0.1).contains(self.p) for estimate in self.estimates()]
        self.assertGreaterEqual(np.mean(covered), 0.9)


class RadiusExampleTests(SimpleTestCase):
    def test_l1_radius_at_one_hundred_samples(self):
        estimate = EmpiricalEstimate(gender_age_space(), [25, 25, 25, 25])
        self.assertAlmostEqual(l1_radius(estimate, 0.1, 4), 1.0845, places=4)

    def test_l1_radius_grows_as_delta_shrinks(self):
        estimate = EmpiricalEstimate(gender_age_space(), [25, 25, 25, 25])
        radii = [l1_radius(estimate, delta, 4) for delta in (0.5, 0.1, 0.05, 0.01, 0.001)]
        self.assertEqual(radii, sorted(radii))
        self.assertEqual(len(set(radii)), len(radii))

    def test_bernstein_width_at_one_quarter(self):
        estimate = EmpiricalEstimate(gender_age_space(), [25, 25, 25, 25])
        lower, upper = bernstein_intervals(estimate, 0.1, 4)
        log_term = math.log(6 * 4 * 101 / 0.1)
        width = math.sqrt(2) * math.sqrt(0.1875 * log_term / 100) + (7 / 3) * log_term / 100
        self.assertTrue(np.allclose(upper, 0.25 + width))
        self.assertTrue(np.allclose(lower, max(0.0, 0.25 - width)))


class BayesAdjustExampleTests(SimpleTestCase):
    def test_uniform_rates_keep_the_population(self):
        population = [0.2, 0.5, 0.3]
        self.assertTrue(np.allclose(bayes_adjust(population, [0.04, 0.04, 0.04]), population))

    def test_unequal_rates(self):
        self.assertTrue(np.allclose(bayes_adjust([0.5, 0.5], [0.2, 0.1]), [2 / 3, 1 / 3]))
