# committees/cmdp.py
"""
Occupation-measure programs for the committee CMDP and the stationary
policies they induce.

Variables are laid out as [mu(x, 0) for x in X] + [mu(x, 1) for x in X],
followed by [beta(x) for x in X] in the l1 extended program. Action 1 accepts.
"""
from dataclasses import dataclass
import json
import logging

import numpy as np

from .distribution import ConfidenceKind
from .exceptions import InfeasibleProgram, NotStrictlyPositive, NumericalFailure, ShapeMismatch
from .lp import LinearProgram, solve

logger = logging.getLogger(__name__)

ZERO_MASS = 1e-12
UNVISITED_ACCEPT_PROB = 0.5
TIE_BREAK_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class StationaryPolicy:
    """Probability of accepting a candidate, per flat index of the space."""

    space: object
    accept_prob: np.ndarray

    def __post_init__(self):
        accept_prob = np.array(self.accept_prob, dtype=float)
        if accept_prob.shape != (self.space.size,):
            raise ShapeMismatch(f'Policy has {accept_prob.size} entries, space has {self.space.size}')
        if np.any(accept_prob < 0) or np.any(accept_prob > 1):
            raise ValueError('Accept probabilities must lie in [0, 1]')
        accept_prob.setflags(write=False)
        object.__setattr__(self, 'accept_prob', accept_prob)

    def __getitem__(self, index):
        return float(self.accept_prob[index])

    def to_json(self):
        return json.dumps({
            'fingerprint': self.space.fingerprint(),
            'domain_sizes': list(self.space.domain_sizes),
            'feature_names': list(self.space.feature_names),
            'accept_prob': {str(i): float(q) for i, q in enumerate(self.accept_prob)},
        }, indent=2)

    @classmethod
    def from_json(cls, text, space):
        """
        Raises:
            ShapeMismatch: the stored policy was computed for another space
        """
        payload = json.loads(text)
        if payload.get('fingerprint') != space.fingerprint():
            raise ShapeMismatch('Stored policy was computed for a different candidate space')
        accept_prob = np.zeros(space.size)
        for index, value in payload['accept_prob'].items():
            accept_prob[int(index)] = float(value)
        return cls(space, accept_prob)


def accept_all(space):
    return StationaryPolicy(space, np.ones(space.size))


def reject_all(space):
    return StationaryPolicy(space, np.zeros(space.size))


@dataclass(frozen=True, eq=False)
class OccupationMeasure:
    space: object
    mu: np.ndarray

    def __post_init__(self):
        mu = np.clip(np.array(self.mu, dtype=float), 0.0, None)
        if mu.shape != (2 * self.space.size,):
            raise ShapeMismatch(f'Occupation measure has {mu.size} entries, expected {2 * self.space.size}')
        mu.setflags(write=False)
        object.__setattr__(self, 'mu', mu)

    @property
    def rejected(self):
        return self.mu[:self.space.size]

    @property
    def accepted(self):
        return self.mu[self.space.size:]

    @property
    def state_marginal(self):
        """mu(x) = mu(x, 0) + mu(x, 1), the candidate distribution the measure plans for."""
        return self.rejected + self.accepted

    def acceptance_proportions(self, feature):
        """Share of accepted mass carrying each value of `feature`."""
        accepted = self.accepted
        return np.bincount(
            self.space.value_matrix[:, feature],
            weights=accepted,
            minlength=self.space.domain_sizes[feature],
        ) / accepted.sum()


def extract_policy(mu, p=None):
    """pi(x) = mu(x, 1) / (mu(x, 0) + mu(x, 1)); cells carrying no mass get 1/2."""
    if p is not None:
        mu.space.check_same(p.space)
    mass = mu.state_marginal
    accept_prob = np.full(mu.space.size, UNVISITED_ACCEPT_PROB)
    visited = mass > ZERO_MASS
    accept_prob[visited] = mu.accepted[visited] / mass[visited]
    return StationaryPolicy(mu.space, np.clip(accept_prob, 0.0, 1.0))


def gain(policy, p):
    """Long-run selection rate sum_x p(x) pi(x)."""
    policy.space.check_same(p.space)
    return float(np.clip(p.probabilities @ policy.accept_prob, 0.0, 1.0))


def _representation_rows(space, target, width):
    # sum_x mu(x, 1) (1{x^i = j} - rho_j^i) = 0 for j < D_i - 1
    rows = []
    offset = space.size
    for feature, size in enumerate(space.domain_sizes):
        for value in range(size - 1):
            row = np.zeros(width)
            row[offset:offset + space.size] = space.indicator(feature, value) - target[feature][value]
            rows.append(row)
    return rows


def _simplex_row(space, width):
    row = np.zeros(width)
    row[:2 * space.size] = 1.0
    return row


def _reward(space, width):
    objective = np.zeros(width)
    objective[space.size:2 * space.size] = 1.0
    return objective


def build_known_p_lp(p, target, allow_zero_cells=False):
    """
    Program over occupation measures when p is known: maximize the
    acceptance rate subject to mu(x, 0) + mu(x, 1) = p(x) and the
    representation equalities.

    Raises:
        NotStrictlyPositive: p has an empty cell and allow_zero_cells is off
    """
    space = p.space
    space.check_same(target.space)
    if not allow_zero_cells and not p.strictly_positive():
        raise NotStrictlyPositive('The known-distribution program needs p(x) > 0 for every candidate')
    width = 2 * space.size
    consistency = np.hstack([np.eye(space.size), np.eye(space.size)])
    a_eq = np.vstack([_simplex_row(space, width), consistency, *_representation_rows(space, target, width)])
    b_eq = np.concatenate([[1.0], p.probabilities, np.zeros(a_eq.shape[0] - 1 - space.size)])
    return LinearProgram(_reward(space, width), a_eq, b_eq)


def build_extended_lp_l1(cset, target):
    """
    Optimistic program over the l1 ball around p_hat: free per-cell
    deviations beta(x) >= 0 with |mu(x) - p_hat(x)| <= beta(x) and a total
    budget sum_x beta(x) <= radius.
    """
    if cset.kind is not ConfidenceKind.L1_BALL:
        raise ValueError(f'Expected an l1 confidence set, got {cset.kind.value}')
    space = cset.center.space
    space.check_same(target.space)
    size = space.size
    width = 3 * size
    p_hat = cset.center.probabilities

    a_eq = np.vstack([_simplex_row(space, width), *_representation_rows(space, target, width)])
    b_eq = np.zeros(a_eq.shape[0])
    b_eq[0] = 1.0

    marginal = np.hstack([np.eye(size), np.eye(size), np.zeros((size, size))])
    deviation = np.hstack([np.zeros((size, 2 * size)), np.eye(size)])
    budget = np.zeros(width)
    budget[2 * size:] = 1.0
    a_ub = np.vstack([marginal - deviation, -marginal - deviation, budget])
    b_ub = np.concatenate([p_hat, -p_hat, [cset.l1_radius]])
    return LinearProgram(_reward(space, width), a_eq, b_eq, a_ub, b_ub)


def build_extended_lp_bernstein(cset, target):
    """Optimistic program over the per-cell interval box lower(x) <= mu(x) <= upper(x)."""
    if cset.kind is not ConfidenceKind.BERNSTEIN_BOX:
        raise ValueError(f'Expected a Bernstein confidence set, got {cset.kind.value}')
    space = cset.center.space
    space.check_same(target.space)
    width = 2 * space.size

    a_eq = np.vstack([_simplex_row(space, width), *_representation_rows(space, target, width)])
    b_eq = np.zeros(a_eq.shape[0])
    b_eq[0] = 1.0
    marginal = np.hstack([np.eye(space.size), np.eye(space.size)])
    a_ub = np.vstack([marginal, -marginal])
    b_ub = np.concatenate([cset.upper, -cset.lower])
    return LinearProgram(_reward(space, width), a_eq, b_eq, a_ub, b_ub)


@dataclass(frozen=True, eq=False)
class CmdpSolution:
    program: LinearProgram
    solution: object
    measure: OccupationMeasure
    policy: StationaryPolicy
    gain: float


def _solve_or_raise(program, label):
    solution = solve(program)
    if not solution.is_optimal:
        raise InfeasibleProgram(f'{label} program is {solution.status.value}', status=solution.status)
    return solution


def solve_known_p(p, target, allow_zero_cells=False):
    """
    Optimal stationary policy for a known distribution.

    Raises:
        NotStrictlyPositive: see build_known_p_lp
        InfeasibleProgram: no representative measure exists
        NumericalFailure: the solver could not certify a status
    """
    program = build_known_p_lp(p, target, allow_zero_cells=allow_zero_cells)
    solution = _solve_or_raise(program, 'Known-distribution')
    measure = OccupationMeasure(p.space, solution.values)
    policy = extract_policy(measure, p)
    logger.debug(f'Known-distribution optimum {solution.objective_value:.6f} after {solution.iterations} pivots')
    return CmdpSolution(program, solution, measure, policy, float(solution.objective_value))


def solve_optimistic(cset, target):
    """
    Optimistic measure over a confidence set.

    For the l1 ball a second pass keeps the optimal acceptance rate and
    spends as little of the deviation budget as possible, so the plan stays
    close to p_hat and does not empty cells it has evidence for.

    Raises:
        InfeasibleProgram: the set holds no representative measure
        NumericalFailure: the solver could not certify a status
    """
    space = cset.center.space
    if cset.kind is ConfidenceKind.L1_BALL:
        program = build_extended_lp_l1(cset, target)
    else:
        program = build_extended_lp_bernstein(cset, target)
    solution = _solve_or_raise(program, f'Optimistic {cset.kind.value}')
    optimum = float(solution.objective_value)

    if cset.kind is ConfidenceKind.L1_BALL:
        solution = _closest_optimal(program, solution, space)

    measure = OccupationMeasure(space, solution.values[:2 * space.size])
    return CmdpSolution(program, solution, measure, extract_policy(measure), optimum)


def _closest_optimal(program, first, space):
    size = space.size
    keep_optimum = np.zeros(program.num_variables)
    keep_optimum[size:2 * size] = -1.0
    spend = np.zeros(program.num_variables)
    spend[2 * size:] = -1.0
    second = LinearProgram(
        spend,
        program.a_eq,
        program.b_eq,
        np.vstack([program.a_ub, keep_optimum]),
        np.concatenate([program.b_ub, [-(first.objective_value - TIE_BREAK_SLACK)]]),
    )
    try:
        solution = solve(second)
    except NumericalFailure as exc:
        logger.warning(f'Tie-break pass failed ({exc}); keeping the first optimum')
        return first
    if not solution.is_optimal:
        logger.warning(f'Tie-break pass is {solution.status.value}; keeping the first optimum')
        return first
    return solution
