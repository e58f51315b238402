import math

from django.test import SimpleTestCase
import numpy as np

from committees.domain import (
    CandidateSpace, Committee, RepresentationProfile, TargetProfile, constraint_deviation, greedy_loss_bound,
    hoeffding_loss_bound, representation_loss, representation_profile,
)
from committees.exceptions import EmptyCommittee, InvalidSpace, InvalidTarget, ShapeMismatch

from .fixtures import FJ, FS, MJ, MS, gender_age_space


class CandidateSpaceTests(SimpleTestCase):
    def test_encode_decode_last_feature_fastest(self):
        space = CandidateSpace((2, 3, 2))
        self.assertEqual(space.size, 12)
        self.assertEqual(space.encode((0, 0, 1)), 1)
        self.assertEqual(space.encode((0, 1, 0)), 2)
        self.assertEqual(space.encode((1, 0, 0)), 6)
        self.assertEqual(space.decode(11).values, (1, 2, 1))

    def test_every_index_decodes_to_itself(self):
        space = CandidateSpace((3, 2, 4))
        for index in range(space.size):
            self.assertEqual(space.encode(space.decode(index).values), index)

    def test_labels_are_one_based(self):
        space = gender_age_space()
        candidate = space.from_labels((2, 1))
        self.assertEqual(candidate.index, FS)
        self.assertEqual(candidate.label(), '2-1')

    def test_rejects_degenerate_domains(self):
        with self.assertRaises(InvalidSpace):
            CandidateSpace(())
        with self.assertRaises(InvalidSpace):
            CandidateSpace((2, 1))
        with self.assertRaises(InvalidSpace):
            CandidateSpace((2, 2), ('a', 'a'))

    def test_out_of_range_value(self):
        space = gender_age_space()
        with self.assertRaises(InvalidSpace):
            space.encode((0, 2))
        with self.assertRaises(ShapeMismatch):
            space.encode((0,))

    def test_d_tilde_and_fingerprint(self):
        space = CandidateSpace((2, 2, 3, 8, 2, 2))
        self.assertEqual(space.d_tilde(), 13)
        self.assertEqual(space.fingerprint(), CandidateSpace((2, 2, 3, 8, 2, 2)).fingerprint())
        self.assertNotEqual(space.fingerprint(), CandidateSpace((2, 2, 3, 8, 2, 3)).fingerprint())

    def test_value_matrix_matches_decode(self):
        space = CandidateSpace((2, 3))
        for index in range(space.size):
            self.assertEqual(tuple(space.value_matrix[index]), space.decode(index).values)
        self.assertEqual(space.indicator(1, 2).sum(), 2)


class TargetProfileTests(SimpleTestCase):
    def test_valid_profile(self):
        target = TargetProfile(gender_age_space(), ([0.5, 0.5], [0.75, 0.25]))
        self.assertEqual(target.d_tilde(), 2)
        self.assertAlmostEqual(target[1][0], 0.75)

    def test_sum_not_one_names_the_feature(self):
        with self.assertRaisesMessage(InvalidTarget, 'age'):
            TargetProfile(gender_age_space(), ([0.5, 0.5], [0.7, 0.2]))

    def test_boundary_values_rejected(self):
        with self.assertRaises(InvalidTarget):
            TargetProfile(gender_age_space(), ([1.0, 0.0], [0.5, 0.5]))

    def test_wrong_length(self):
        with self.assertRaises(ShapeMismatch):
            TargetProfile(gender_age_space(), ([0.5, 0.5], [0.2, 0.3, 0.5]))


class RepresentationLossTests(SimpleTestCase):
    def setUp(self):
        self.space = gender_age_space()
        self.target = TargetProfile(self.space, ([0.5, 0.5], [0.75, 0.25]))

    def members(self, *indices):
        return Committee(self.space, [self.space.decode(i) for i in indices])

    def test_perfect_committee_has_zero_loss(self):
        committee = self.members(MS, MS, FS, FJ)
        profile = representation_profile(committee)
        self.assertEqual(representation_loss(profile, self.target), 0.0)

    def test_loss_is_max_cell_deviation(self):
        committee = self.members(MS, MS, MS, FS)
        profile = representation_profile(committee)
        self.assertTrue(np.allclose(profile[0], [0.75, 0.25]))
        self.assertAlmostEqual(representation_loss(profile, self.target), 0.25)

    def test_single_member(self):
        profile = representation_profile(self.members(MJ))
        self.assertAlmostEqual(representation_loss(profile, self.target), 0.75)
        self.assertAlmostEqual(constraint_deviation(profile, self.target), 0.75)

    def test_empty_committee(self):
        with self.assertRaises(EmptyCommittee):
            representation_profile(Committee(self.space))

    def test_mismatched_spaces(self):
        profile = representation_profile(Committee(CandidateSpace((3, 2)), [CandidateSpace((3, 2)).decode(0)]))
        with self.assertRaises(ShapeMismatch):
            representation_loss(profile, self.target)

    def test_counts_stay_consistent_with_members(self):
        committee = self.members(MS, FJ, FS)
        committee.remove(self.space.decode(FJ))
        for kept, rebuilt in zip(committee.counts, committee.recount()):
            self.assertTrue(np.array_equal(kept, rebuilt))
        self.assertEqual(len(committee), 2)


class BoundTests(SimpleTestCase):
    def test_greedy_bound(self):
        space = CandidateSpace((2, 3))
        self.assertAlmostEqual(greedy_loss_bound(space, 20, 0.05), 2 / 20 + 0.05)

    def test_hoeffding_bound(self):
        target = TargetProfile(gender_age_space(), ([0.5, 0.5], [0.5, 0.5]))
        self.assertAlmostEqual(hoeffding_loss_bound(target, 400, 0.1), math.sqrt(math.log(40) / 800))
        self.assertAlmostEqual(hoeffding_loss_bound(target, 400, 0.1), 0.0679, places=4)


def random_vectors(rng, sizes):
    vectors = []
    for size in sizes:
        weights = rng.uniform(0.1, 1.0, size=size)
        vectors.append(weights / weights.sum())
    return tuple(vectors)


class LossMetricTests(SimpleTestCase):
    def setUp(self):
        self.space = CandidateSpace((2, 3, 4))
        self.rng = np.random.default_rng(5)

    def loss(self, a, b):
        return representation_loss(RepresentationProfile(self.space, a), TargetProfile(self.space, b))

    def test_metric_properties_on_random_profiles(self):
        for _ in range(100):
            a, b, c = (random_vectors(self.rng, self.space.domain_sizes) for _ in range(3))
            self.assertEqual(self.loss(a, a), 0.0)
            self.assertGreater(self.loss(a, b), 0.0)
            self.assertAlmostEqual(self.loss(a, b), self.loss(b, a), places=15)
            self.assertLessEqual(self.loss(a, c), self.loss(a, b) + self.loss(b, c) + 1e-15)

    def test_insertion_order_does_not_matter(self):
        target = TargetProfile(self.space, random_vectors(self.rng, self.space.domain_sizes))
        members = [self.space.decode(int(i)) for i in self.rng.integers(0, self.space.size, size=30)]
        losses = set()
        for _ in range(10):
            order = self.rng.permutation(len(members))
            committee = Committee(self.space, [members[i] for i in order])
            losses.add(representation_loss(representation_profile(committee), target))
        self.assertEqual(len(losses), 1)


class CommitteeCountTests(SimpleTestCase):
    def test_incremental_counts_match_a_recount(self):
        space = CandidateSpace((2, 3, 4))
        rng = np.random.default_rng(11)
        committee = Committee(space)
        for _ in range(500):
            if len(committee) and rng.random() < 0.3:
                committee.remove(committee.members[int(rng.integers(len(committee)))])
            else:
                committee.add(space.decode(int(rng.integers(space.size))))
            for kept, rebuilt in zip(committee.counts, committee.recount()):
                self.assertTrue(np.array_equal(kept, rebuilt))

    def test_large_uniform_committee(self):
        space = gender_age_space()
        rng = np.random.default_rng(1000)
        committee = Committee(space, [space.decode(int(i)) for i in rng.integers(0, 4, size=1000)])
        profile = representation_profile(committee)
        for vector in profile.vectors:
            self.assertAlmostEqual(vector.sum(), 1.0, places=12)
            self.assertTrue(np.all(np.abs(vector - 0.5) <= 0.06))

    def test_space_size_limit(self):
        self.assertEqual(CandidateSpace((2,) * 31).size, 2 ** 31)
        with self.assertRaises(InvalidSpace):
            CandidateSpace((2,) * 32)
