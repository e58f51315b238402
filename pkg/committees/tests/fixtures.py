# committees/tests/fixtures.py
"""Shared instances and a brute-force oracle for the tests."""
from itertools import combinations

import numpy as np

from committees.distribution import JointDistribution
from committees.domain import CandidateSpace, TargetProfile

# gender (M, F) x age (S, J): flat indices MS=0, MJ=1, FS=2, FJ=3
MS, MJ, FS, FJ = range(4)


def gender_age_space():
    return CandidateSpace((2, 2), ('gender', 'age'))


def balanced_instance():
    """p = (1/3, 1/4, 1/4, 1/6) with parity targets; the optimal gain is 5/6."""
    space = gender_age_space()
    p = JointDistribution(space, [1 / 3, 1 / 4, 1 / 4, 1 / 6])
    target = TargetProfile(space, ([0.5, 0.5], [0.5, 0.5]))
    return space, p, target


def small_committee_instance(rare=0.05):
    """Gender parity with three seniors for one junior; FJ is rare."""
    space = gender_age_space()
    p = JointDistribution(space, [0.5 - rare, 0.25, 0.25, rare])
    target = TargetProfile(space, ([0.5, 0.5], [0.75, 0.25]))
    return space, p, target


def random_instance(rng, sizes=(2, 2)):
    """Strictly positive p and interior targets on a random small space."""
    space = CandidateSpace(sizes)
    weights = rng.uniform(0.2, 1.0, size=space.size)
    p = JointDistribution(space, weights / weights.sum())
    vectors = []
    for size in sizes:
        rho = rng.uniform(0.2, 1.0, size=size)
        vectors.append(rho / rho.sum())
    return space, p, TargetProfile(space, tuple(vectors))


def vertex_optimum(lp, tolerance=1e-9):
    """
    Best objective over the basic feasible solutions of a small program,
    by enumerating every basis. Returns None when no vertex is feasible.
    Only programs with zero lower bounds are supported.
    """
    n = lp.num_variables
    finite = np.flatnonzero(np.isfinite(lp.var_upper))
    bounds = np.zeros((finite.size, n))
    bounds[np.arange(finite.size), finite] = 1.0
    a_ub = np.vstack([lp.a_ub, bounds])
    b_ub = np.concatenate([lp.b_ub, lp.var_upper[finite]])
    m_eq, m_ub = lp.a_eq.shape[0], a_ub.shape[0]

    matrix = np.zeros((m_eq + m_ub, n + m_ub))
    matrix[:m_eq, :n] = lp.a_eq
    matrix[m_eq:, :n] = a_ub
    matrix[m_eq:, n:] = np.eye(m_ub)
    rhs = np.concatenate([lp.b_eq, b_ub])

    # keep a maximal set of independent rows
    rows = []
    for i in range(matrix.shape[0]):
        if np.linalg.matrix_rank(matrix[rows + [i]]) == len(rows) + 1:
            rows.append(i)
    matrix, rhs = matrix[rows], rhs[rows]
    rank = len(rows)
    costs = np.concatenate([lp.objective, np.zeros(m_ub)])

    best = None
    for columns in combinations(range(matrix.shape[1]), rank):
        basis = matrix[:, columns]
        if abs(np.linalg.det(basis)) < 1e-12:
            continue
        values = np.linalg.solve(basis, rhs)
        if np.any(values < -tolerance):
            continue
        point = np.zeros(matrix.shape[1])
        point[list(columns)] = values
        if np.max(np.abs(matrix @ point - rhs)) > 1e-7:
            continue
        value = float(costs @ point)
        if best is None or value > best:
            best = value
    return best
