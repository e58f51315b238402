# committees/policies.py
"""
Online selection strategies: the quota-based Greedy rule, the executor of a
fixed stationary policy, and the episodic optimistic learner.

A Strategy holds configuration and is shared by every trial; `start()`
returns the per-trial mutable run whose `step(candidate, rng)` decides.
"""
from enum import Enum
import csv
import logging
import math
import threading

import numpy as np

from .cmdp import accept_all, solve_known_p, solve_optimistic
from .distribution import EmpiricalEstimate, bernstein_confidence_set, l1_confidence_set
from .exceptions import CommitteeFull, InfeasibleProgram, NumericalFailure, SolverFallback

logger = logging.getLogger(__name__)

QUOTA_GUARD = 1e-9


class Decision(Enum):
    ACCEPT = 'accept'
    REJECT = 'reject'

    @property
    def accepted(self):
        return self is Decision.ACCEPT


class LearnerVariant(Enum):
    L1 = 'l1'
    BERNSTEIN = 'bernstein'


class GreedyState:
    """Per-cell quotas ceil(rho K) + eps K / (D_i - 1) and the counts filled so far."""

    def __init__(self, target, committee_size, epsilon):
        if committee_size < 1:
            raise ValueError(f'Committee size must be at least 1, got {committee_size}')
        if epsilon < 0:
            raise ValueError(f'Tolerance must be non-negative, got {epsilon}')
        self.space = target.space
        self.committee_size = committee_size
        self.epsilon = epsilon
        # the guard keeps ceil(0.75 * 4) at 3 despite float rounding
        self.quotas = [
            np.ceil(np.asarray(rho) * committee_size - QUOTA_GUARD) + epsilon * committee_size / (size - 1)
            for rho, size in zip(target.vectors, self.space.domain_sizes)
        ]
        self.counts = [np.zeros(size, dtype=np.int64) for size in self.space.domain_sizes]
        self.accepted = 0

    def quota(self, feature, value):
        return float(self.quotas[feature][value])

    def fits(self, candidate):
        return all(
            self.counts[i][value] + 1 <= self.quotas[i][value] + QUOTA_GUARD
            for i, value in enumerate(candidate.values)
        )

    def quotas_respected(self):
        return all(np.all(c <= q + QUOTA_GUARD) for c, q in zip(self.counts, self.quotas))


def greedy_step(state, candidate):
    """
    Accept iff adding the candidate keeps every feature-value count within quota.

    Only the cells the candidate belongs to change, so only those are checked.

    Raises:
        CommitteeFull: K candidates were already accepted
    """
    if state.accepted >= state.committee_size:
        raise CommitteeFull(f'Committee already holds {state.committee_size} members')
    if not state.fits(candidate):
        return Decision.REJECT
    for i, value in enumerate(candidate.values):
        state.counts[i][value] += 1
    state.accepted += 1
    return Decision.ACCEPT


def stationary_step(policy, candidate, rng):
    return Decision.ACCEPT if rng.random() < policy.accept_prob[candidate.index] else Decision.REJECT


class LearnerState:
    """
    Episode bookkeeping of the optimistic learner.

    An episode ends after step t once the in-episode visits of x_t reach
    max(1, n(x_t) at episode start); the next policy is solved from all
    counts up to t and held fixed for the whole following episode.
    """

    def __init__(self, target, variant, delta, horizon=None):
        if not 0 < delta < 1:
            raise ValueError(f'Confidence parameter delta must lie in (0, 1), got {delta}')
        self.space = target.space
        self.target = target
        self.variant = LearnerVariant(variant)
        self.delta = delta
        self.horizon = horizon
        self.t = 0
        self.episode = 1
        self.episode_start = 1
        self.estimate = EmpiricalEstimate(self.space)
        self.snapshot = np.zeros(self.space.size, dtype=np.int64)
        self.policy = accept_all(self.space)
        self.episode_ends = []
        self.fallbacks = []

    def episode_over(self, index):
        visits = self.estimate.counts[index] - self.snapshot[index]
        return visits >= max(1, self.snapshot[index])

    def start_episode(self):
        self.episode += 1
        self.episode_start = self.t + 1
        self.snapshot = self.estimate.counts.copy()
        self.episode_ends.append(self.t)
        try:
            if self.variant is LearnerVariant.L1:
                cset = l1_confidence_set(self.estimate, self.delta)
            else:
                cset = bernstein_confidence_set(self.estimate, self.delta, horizon=self.horizon)
            self.policy = solve_optimistic(cset, self.target).policy
        except (InfeasibleProgram, NumericalFailure) as exc:
            self.fallbacks.append(SolverFallback(f'Episode {self.episode}: {exc}'))
            logger.warning(f'Episode {self.episode} starting at t={self.episode_start}: {exc}; keeping the previous policy')


def learner_step(state, candidate, rng):
    """
    Decide with the current episode policy, then record the candidate and
    close the episode when its counter has doubled.
    """
    state.t += 1
    decision = stationary_step(state.policy, candidate, rng)
    state.estimate.record(candidate.index)
    if state.episode_over(candidate.index):
        state.start_episode()
    return decision


class _Run:
    episodes = 0
    fallbacks = ()
    last_accept_prob = float('nan')


class GreedyRun(_Run):
    def __init__(self, target, committee_size, epsilon):
        self.state = GreedyState(target, committee_size, epsilon)

    def step(self, candidate, rng):
        fits = self.state.accepted < self.state.committee_size and self.state.fits(candidate)
        self.last_accept_prob = 1.0 if fits else 0.0
        return greedy_step(self.state, candidate)


class StationaryRun(_Run):
    def __init__(self, policy):
        self.policy = policy

    def step(self, candidate, rng):
        self.last_accept_prob = self.policy[candidate.index]
        return stationary_step(self.policy, candidate, rng)


class LearnerRun(_Run):
    def __init__(self, target, variant, delta, horizon=None):
        self.state = LearnerState(target, variant, delta, horizon=horizon)

    @property
    def episodes(self):
        return self.state.episode

    @property
    def fallbacks(self):
        return self.state.fallbacks

    def step(self, candidate, rng):
        self.last_accept_prob = self.state.policy[candidate.index]
        return learner_step(self.state, candidate, rng)


class GreedyStrategy:
    name = 'greedy'

    def __init__(self, epsilon=0.0):
        self.epsilon = float(epsilon)

    def start(self, p, target, committee_size):
        return GreedyRun(target, committee_size, self.epsilon)

    def params(self):
        return {'epsilon': self.epsilon}


class StationaryStrategy:
    """Executes one stationary policy; solves the known-distribution program on first use."""

    name = 'cmdp'

    def __init__(self, policy=None):
        self.policy = policy
        self.solution = None
        self._lock = threading.Lock()

    def resolve(self, p, target):
        with self._lock:
            if self.policy is None:
                self.solution = solve_known_p(p, target)
                self.policy = self.solution.policy
                logger.info(f'Optimal stationary policy has gain {self.solution.gain:.6f}')
            return self.policy

    def start(self, p, target, committee_size):
        return StationaryRun(self.resolve(p, target))

    def params(self):
        return {}


class LearnerStrategy:
    def __init__(self, variant=LearnerVariant.L1, delta=0.1, horizon=None):
        self.variant = LearnerVariant(variant)
        self.delta = float(delta)
        self.horizon = horizon

    @property
    def name(self):
        return 'rlcmdp' if self.variant is LearnerVariant.L1 else 'rlcmdp-b'

    def start(self, p, target, committee_size):
        return LearnerRun(target, self.variant, self.delta, horizon=self.horizon)

    def params(self):
        return {'delta': self.delta, 'variant': self.variant.value}


STRATEGY_NAMES = ('greedy', 'cmdp', 'rlcmdp', 'rlcmdp-b')


def build_strategy(name, epsilon=0.0, delta=0.1, horizon=None, policy=None):
    """Strategy for one of the command-line names greedy, cmdp, rlcmdp, rlcmdp-b."""
    if name == 'greedy':
        return GreedyStrategy(epsilon)
    if name == 'cmdp':
        return StationaryStrategy(policy)
    if name == 'rlcmdp':
        return LearnerStrategy(LearnerVariant.L1, delta, horizon)
    if name == 'rlcmdp-b':
        return LearnerStrategy(LearnerVariant.BERNSTEIN, delta, horizon)
    raise ValueError(f"Unknown strategy '{name}'; expected one of {', '.join(STRATEGY_NAMES)}")


class DecisionTrace:
    """Append-only audit log of decisions, one CSV row per screened candidate."""

    HEADER = ('t', 'candidate', 'episode', 'accept_prob', 'decision')

    def __init__(self, stream):
        self.writer = csv.writer(stream)
        self.writer.writerow(self.HEADER)
        self.rows = 0

    def record(self, t, candidate, episode, accept_prob, decision):
        prob = '' if math.isnan(accept_prob) else f'{accept_prob:.12g}'
        self.writer.writerow([t, candidate.index, episode, prob, decision.value])
        self.rows += 1
