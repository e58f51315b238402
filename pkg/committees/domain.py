# committees/domain.py
"""
Core combinatorial types: candidate spaces, candidates, target profiles,
committees, representation profiles and the l-infinity representation loss.

Feature values are 0-based internally and 1-based in anything shown to users.
"""
from dataclasses import dataclass
from functools import cached_property
import hashlib
import math

import numpy as np

from .exceptions import EmptyCommittee, InvalidSpace, InvalidTarget, ShapeMismatch

MAX_SPACE_SIZE = 2 ** 31
SIMPLEX_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class CandidateSpace:
    """Product of d finite feature domains, flattened by mixed-radix encoding
    (the last feature varies fastest)."""

    domain_sizes: tuple
    feature_names: tuple = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.domain_sizes)
        if not sizes:
            raise InvalidSpace('A candidate space needs at least one feature')
        for i, size in enumerate(sizes):
            if size < 2:
                raise InvalidSpace(f'Feature {i + 1} has domain size {size}; every domain needs at least 2 values')
        if math.prod(sizes) > MAX_SPACE_SIZE:
            raise InvalidSpace(f'Candidate space has {math.prod(sizes)} cells, above the limit of {MAX_SPACE_SIZE}')

        names = self.feature_names
        if names is None:
            names = tuple(f'feature_{i + 1}' for i in range(len(sizes)))
        names = tuple(str(n) for n in names)
        if len(names) != len(sizes):
            raise InvalidSpace(f'{len(names)} feature names given for {len(sizes)} features')
        if len(set(names)) != len(names):
            raise InvalidSpace('Feature names must be unique')

        object.__setattr__(self, 'domain_sizes', sizes)
        object.__setattr__(self, 'feature_names', names)

    def __eq__(self, other):
        if not isinstance(other, CandidateSpace):
            return NotImplemented
        return self.domain_sizes == other.domain_sizes

    def __hash__(self):
        return hash(self.domain_sizes)

    @property
    def num_features(self):
        return len(self.domain_sizes)

    @cached_property
    def size(self):
        return math.prod(self.domain_sizes)

    @cached_property
    def _radix(self):
        # weight of each feature in the flat index
        weights = []
        acc = 1
        for size in reversed(self.domain_sizes):
            weights.append(acc)
            acc *= size
        return tuple(reversed(weights))

    def encode(self, values):
        """Flat index of a 0-based value vector."""
        if len(values) != self.num_features:
            raise ShapeMismatch(f'Expected {self.num_features} feature values, got {len(values)}')
        index = 0
        for i, (value, size, weight) in enumerate(zip(values, self.domain_sizes, self._radix)):
            value = int(value)
            if not 0 <= value < size:
                raise InvalidSpace(f'Value {value + 1} of feature {self.feature_names[i]} is outside [1, {size}]')
            index += value * weight
        return index

    def decode(self, index):
        """Candidate stored at a flat index."""
        index = int(index)
        if not 0 <= index < self.size:
            raise InvalidSpace(f'Flat index {index} is outside [0, {self.size})')
        values = []
        rest = index
        for weight in self._radix:
            value, rest = divmod(rest, weight)
            values.append(value)
        return Candidate(tuple(values), index)

    def candidate(self, values):
        """Candidate from 0-based values."""
        values = tuple(int(v) for v in values)
        return Candidate(values, self.encode(values))

    def from_labels(self, labels):
        """Candidate from 1-based values, as users write them."""
        return self.candidate(int(v) - 1 for v in labels)

    @cached_property
    def value_matrix(self):
        """(|X|, d) array of the 0-based values of every cell."""
        grids = np.indices(self.domain_sizes).reshape(self.num_features, -1)
        return grids.T.copy()

    def indicator(self, feature, value):
        """Boolean mask over flat indices of the cells with x^feature = value."""
        return self.value_matrix[:, feature] == value

    def d_tilde(self):
        return sum(size - 1 for size in self.domain_sizes)

    def fingerprint(self):
        """Stable hash used to detect policies stored for another space."""
        payload = '|'.join(f'{name}:{size}' for name, size in zip(self.feature_names, self.domain_sizes))
        return hashlib.sha256(payload.encode()).hexdigest()

    def check_same(self, other):
        if self.domain_sizes != other.domain_sizes:
            raise ShapeMismatch(f'Candidate spaces differ: {self.domain_sizes} vs {other.domain_sizes}')


@dataclass(frozen=True)
class Candidate:
    values: tuple
    index: int

    def label(self):
        """1-based rendering, e.g. '2-1-3'."""
        return '-'.join(str(v + 1) for v in self.values)

    def __len__(self):
        return len(self.values)


def _as_vectors(space, vectors, name):
    if len(vectors) != space.num_features:
        raise ShapeMismatch(f'{name} has {len(vectors)} vectors for {space.num_features} features')
    arrays = []
    for i, (vector, size) in enumerate(zip(vectors, space.domain_sizes)):
        array = np.array(vector, dtype=float)
        if array.shape != (size,):
            raise ShapeMismatch(
                f'{name} for feature {space.feature_names[i]} has length {array.size}, expected {size}'
            )
        arrays.append(array)
    return tuple(arrays)


@dataclass(frozen=True, eq=False)
class TargetProfile:
    """Desired proportion of every feature value in the committee."""

    space: CandidateSpace
    vectors: tuple

    def __post_init__(self):
        arrays = _as_vectors(self.space, self.vectors, 'Target')
        for name, array in zip(self.space.feature_names, arrays):
            if not np.all(np.isfinite(array)):
                raise InvalidTarget(f'Target for feature {name} has non-finite entries')
            if np.any(array <= 0.0) or np.any(array >= 1.0):
                raise InvalidTarget(f'Target for feature {name} must lie strictly inside (0, 1)')
            if abs(array.sum() - 1.0) > SIMPLEX_TOLERANCE:
                raise InvalidTarget(f'Target for feature {name} sums to {array.sum():.12g}, not 1')
            array.setflags(write=False)
        object.__setattr__(self, 'vectors', arrays)

    def d_tilde(self):
        return self.space.d_tilde()

    def __getitem__(self, feature):
        return self.vectors[feature]


class Committee:
    """Multiset of accepted candidates with incrementally kept cell counts N_j^i."""

    def __init__(self, space, members=()):
        self.space = space
        self.members = []
        self.counts = [np.zeros(size, dtype=np.int64) for size in space.domain_sizes]
        for member in members:
            self.add(member)

    def add(self, candidate):
        self.members.append(candidate)
        for i, value in enumerate(candidate.values):
            self.counts[i][value] += 1

    def remove(self, candidate):
        # ValueError from list.remove when the candidate is not a member
        self.members.remove(candidate)
        for i, value in enumerate(candidate.values):
            self.counts[i][value] -= 1

    def recount(self):
        """Counts rebuilt from the member list."""
        counts = [np.zeros(size, dtype=np.int64) for size in self.space.domain_sizes]
        for member in self.members:
            for i, value in enumerate(member.values):
                counts[i][value] += 1
        return counts

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True, eq=False)
class RepresentationProfile:
    """Realized per-feature proportions lambda^i of a committee."""

    space: CandidateSpace
    vectors: tuple

    def __post_init__(self):
        object.__setattr__(self, 'vectors', _as_vectors(self.space, self.vectors, 'Profile'))

    def __getitem__(self, feature):
        return self.vectors[feature]


def representation_profile(committee, space=None):
    """
    Proportions N_j^i / |C| of every feature value.

    Raises:
        EmptyCommittee: the committee has no members
    """
    space = space or committee.space
    space.check_same(committee.space)
    size = len(committee)
    if size == 0:
        raise EmptyCommittee('Cannot compute the representation profile of an empty committee')
    return RepresentationProfile(space, tuple(counts / size for counts in committee.counts))


def _check_shapes(profile, target):
    if profile.space.domain_sizes != target.space.domain_sizes:
        raise ShapeMismatch(
            f'Profile space {profile.space.domain_sizes} does not match target space {target.space.domain_sizes}'
        )


def representation_loss(profile, target):
    """l-infinity distance max_{i,j} |lambda_j^i - rho_j^i| over every feature value."""
    _check_shapes(profile, target)
    return max(float(np.max(np.abs(lam - rho))) for lam, rho in zip(profile.vectors, target.vectors))


def constraint_deviation(profile, target):
    """Same distance restricted to j in [D_i - 1], the cells carrying independent constraints."""
    _check_shapes(profile, target)
    return max(float(np.max(np.abs(lam[:-1] - rho[:-1]))) for lam, rho in zip(profile.vectors, target.vectors))


def greedy_loss_bound(space, committee_size, epsilon):
    """Almost-sure loss bound of the quota strategy: (max_i D_i - 1)/K + epsilon."""
    return (max(space.domain_sizes) - 1) / committee_size + epsilon


def hoeffding_loss_bound(target, committee_size, delta):
    """Loss level the optimal stationary policy stays under with probability 1 - delta."""
    return math.sqrt(math.log(2 * target.d_tilde() / delta) / (2 * committee_size))
