# committees/distribution.py
"""
Candidate distributions over the flattened space, empirical estimates and the
confidence sets the learner builds around them.
"""
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
import logging
import math

from django.conf import settings
import numpy as np
import pandas as pd

from .domain import SIMPLEX_TOLERANCE
from .exceptions import BadMarginal, DegenerateInput, NoSamples, ShapeMismatch

logger = logging.getLogger(__name__)


def _panelforge_setting(key, default):
    return getattr(settings, 'PANELFORGE', {}).get(key, default)


def normalize_vector(values, label='vector', tolerance=None):
    """
    Bring a probability vector back onto the simplex.

    Published tables are rounded to three decimals, so rows summing to 0.999
    are renormalized with a warning; anything further off is rejected.

    Args:
        values: non-negative entries
        label: name used in log and error messages
        tolerance: largest accepted |sum - 1| (default MARGINAL_TOLERANCE)

    Returns:
        np.ndarray: the vector scaled to sum to 1
    """
    if tolerance is None:
        tolerance = _panelforge_setting('MARGINAL_TOLERANCE', 5e-3)
    array = np.array(values, dtype=float)
    if array.ndim != 1 or array.size == 0:
        raise BadMarginal(f'{label} must be a non-empty vector')
    if not np.all(np.isfinite(array)) or np.any(array < 0):
        raise BadMarginal(f'{label} has negative or non-finite entries')
    total = array.sum()
    if abs(total - 1.0) > tolerance:
        raise BadMarginal(f'{label} sums to {total:.6g}; more than {tolerance:g} away from 1')
    if abs(total - 1.0) > SIMPLEX_TOLERANCE:
        logger.warning(f'{label} sums to {total:.6g}; renormalizing')
    return array / total


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense probability table p over the flat indices of a candidate space."""

    space: object
    probabilities: np.ndarray

    def __post_init__(self):
        probabilities = np.array(self.probabilities, dtype=float)
        if probabilities.shape != (self.space.size,):
            raise ShapeMismatch(f'Distribution has {probabilities.size} cells, space has {self.space.size}')
        if not np.all(np.isfinite(probabilities)) or np.any(probabilities < 0) or np.any(probabilities > 1):
            raise BadMarginal('Joint probabilities must lie in [0, 1]')
        if abs(probabilities.sum() - 1.0) > SIMPLEX_TOLERANCE:
            raise BadMarginal(f'Joint probabilities sum to {probabilities.sum():.12g}, not 1')
        probabilities.setflags(write=False)
        object.__setattr__(self, 'probabilities', probabilities)

    def __getitem__(self, index):
        return float(self.probabilities[index])

    def support(self):
        return np.flatnonzero(self.probabilities > 0)

    def strictly_positive(self):
        return bool(self.probabilities.min() > 0)

    def marginal(self, feature):
        return np.bincount(
            self.space.value_matrix[:, feature],
            weights=self.probabilities,
            minlength=self.space.domain_sizes[feature],
        )

    @cached_property
    def _cdf(self):
        cdf = np.cumsum(self.probabilities)
        cdf /= cdf[-1]
        cdf[-1] = 1.0
        return cdf

    def sample_index(self, rng):
        return int(np.searchsorted(self._cdf, rng.random(), side='right'))

    def sample_indices(self, rng, count):
        return np.searchsorted(self._cdf, rng.random(count), side='right')

    def sample(self, rng):
        """One candidate drawn from p; deterministic given the generator state."""
        return self.space.decode(self.sample_index(rng))


def sample(dist, rng):
    return dist.sample(rng)


def from_marginals(space, marginals):
    """
    Joint distribution of independent features, p(x) = prod_i marginal_i[x^i].

    Raises:
        BadMarginal: a vector is malformed or off the simplex
    """
    if len(marginals) != space.num_features:
        raise BadMarginal(f'{len(marginals)} marginals given for {space.num_features} features')
    joint = np.ones(1)
    for name, size, marginal in zip(space.feature_names, space.domain_sizes, marginals):
        vector = normalize_vector(marginal, label=f'Marginal of {name}')
        if vector.size != size:
            raise BadMarginal(f'Marginal of {name} has {vector.size} entries, expected {size}')
        joint = np.multiply.outer(joint, vector).ravel()
    return JointDistribution(space, joint / joint.sum())


def from_table(space, table):
    """Explicit joint table, mapping 1-based value tuples to probabilities."""
    probabilities = np.zeros(space.size)
    for labels, probability in table.items():
        probabilities[space.from_labels(labels).index] += float(probability)
    return JointDistribution(space, normalize_vector(probabilities, label='Joint table'))


def load_joint_csv(path, space):
    """
    Explicit joint table from CSV: one row per cell, one column per feature
    (1-based values, named as the space's features) and a `probability` column.
    Cells absent from the file get probability 0.
    """
    frame = pd.read_csv(path)
    missing = [name for name in (*space.feature_names, 'probability') if name not in frame.columns]
    if missing:
        raise BadMarginal(f'Joint table {path} is missing columns: {", ".join(missing)}')
    values = frame[list(space.feature_names)].to_numpy(dtype=int) - 1
    probabilities = np.zeros(space.size)
    for row, probability in zip(values, frame['probability'].to_numpy(dtype=float)):
        probabilities[space.encode(row)] += probability
    logger.info(f'Loaded joint table {path} with {len(frame)} rows')
    return JointDistribution(space, normalize_vector(probabilities, label=f'Joint table {path}'))


def bayes_adjust(population_marginal, volunteer_rates):
    """
    P[x^i = j | volunteer] from the population marginal and P[volunteer | x^i = j].

    Raises:
        DegenerateInput: no value has both population mass and a positive rate
    """
    population = np.asarray(population_marginal, dtype=float)
    rates = np.asarray(volunteer_rates, dtype=float)
    if population.shape != rates.shape:
        raise ShapeMismatch(f'Population marginal has {population.size} entries, rates have {rates.size}')
    if np.any(population < 0) or np.any(rates < 0):
        raise BadMarginal('Population marginal and volunteer rates must be non-negative')
    product = population * rates
    total = product.sum()
    if total <= 0:
        raise DegenerateInput('Volunteer rates leave no probability mass')
    return product / total


class EmpiricalEstimate:
    """Counts n(x) of observed candidates; single writer per trial."""

    def __init__(self, space, counts=None):
        self.space = space
        if counts is None:
            counts = np.zeros(space.size, dtype=np.int64)
        self.counts = np.array(counts, dtype=np.int64)
        self.total = int(self.counts.sum())

    def record(self, index):
        self.counts[index] += 1
        self.total += 1

    def frequencies(self):
        if self.total == 0:
            raise NoSamples('No candidates observed yet')
        return self.counts / self.total

    def as_distribution(self):
        return JointDistribution(self.space, self.frequencies())

    def snapshot(self):
        return EmpiricalEstimate(self.space, self.counts.copy())


class ConfidenceKind(Enum):
    L1_BALL = 'l1'
    BERNSTEIN_BOX = 'bernstein'


@dataclass(frozen=True, eq=False)
class ConfidenceSet:
    kind: ConfidenceKind
    center: JointDistribution
    delta: float
    episode_start: int
    l1_radius: float = None
    lower: np.ndarray = None
    upper: np.ndarray = None

    def contains(self, q, tolerance=1e-12):
        q = np.asarray(getattr(q, 'probabilities', q), dtype=float)
        if self.kind is ConfidenceKind.L1_BALL:
            return bool(np.abs(q - self.center.probabilities).sum() <= self.l1_radius + tolerance)
        return bool(np.all(q >= self.lower - tolerance) and np.all(q <= self.upper + tolerance))


def _check_delta(delta):
    if not 0 < delta < 1:
        raise ValueError(f'Confidence parameter delta must lie in (0, 1), got {delta}')


def l1_radius(estimate, delta, space_size):
    """
    beta = sqrt(2|X| log(6|X| tau (tau - 1) / delta) / (tau - 1)) with tau - 1 = samples seen.

    Raises:
        NoSamples: nothing observed yet
    """
    _check_delta(delta)
    samples = estimate.total
    if samples < 1:
        raise NoSamples('The l1 radius needs at least one observed candidate')
    tau = samples + 1
    return math.sqrt(2 * space_size * math.log(6 * space_size * tau * samples / delta) / samples)


def bernstein_intervals(estimate, delta, space_size, horizon=None, b1=None, b2=None):
    """
    Per-cell empirical-Bernstein intervals [p_hat - w, p_hat + w] clipped to [0, 1], with
    w = b1 sqrt(var log(6|X| tau / delta) / n) + b2 log(6|X| tau / delta) / n and
    var = p_hat (1 - p_hat).

    Returns:
        tuple: (lower, upper) arrays over flat indices
    """
    _check_delta(delta)
    samples = estimate.total
    if samples < 1:
        raise NoSamples('Bernstein intervals need at least one observed candidate')
    tau = samples + 1
    if horizon is not None and tau > horizon:
        logger.warning(f'Episode start {tau} is past the horizon hint {horizon}; the delta split no longer covers it')
    b1 = _panelforge_setting('BERNSTEIN_B1', math.sqrt(2.0)) if b1 is None else b1
    b2 = _panelforge_setting('BERNSTEIN_B2', 7.0 / 3.0) if b2 is None else b2

    p_hat = estimate.counts / samples
    log_term = math.log(6 * space_size * tau / delta)
    denominator = max(1, samples)
    width = b1 * np.sqrt(p_hat * (1 - p_hat) * log_term / denominator) + b2 * log_term / denominator
    return np.clip(p_hat - width, 0.0, 1.0), np.clip(p_hat + width, 0.0, 1.0)


def l1_confidence_set(estimate, delta):
    return ConfidenceSet(
        kind=ConfidenceKind.L1_BALL,
        center=estimate.as_distribution(),
        delta=delta,
        episode_start=estimate.total + 1,
        l1_radius=l1_radius(estimate, delta, estimate.space.size),
    )


def bernstein_confidence_set(estimate, delta, horizon=None, b1=None, b2=None):
    lower, upper = bernstein_intervals(estimate, delta, estimate.space.size, horizon=horizon, b1=b1, b2=b2)
    return ConfidenceSet(
        kind=ConfidenceKind.BERNSTEIN_BOX,
        center=estimate.as_distribution(),
        delta=delta,
        episode_start=estimate.total + 1,
        lower=lower,
        upper=upper,
    )
