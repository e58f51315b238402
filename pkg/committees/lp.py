# committees/lp.py
"""
Small dense linear-programming model and a two-phase tableau simplex.

Every program is a maximization:

    max  c.v
    s.t. A_eq v  = b_eq
         A_ub v <= b_ub
         lower <= v <= upper

Pivoting follows Bland's rule, so degenerate programs cannot cycle and the
same input always yields the same pivot sequence.
"""
from dataclasses import dataclass
from enum import Enum
import logging

from django.conf import settings
import numpy as np

from .exceptions import NumericalFailure

logger = logging.getLogger(__name__)


def _lp_setting(key, default):
    return getattr(settings, 'PANELFORGE', {}).get(key, default)


def _matrix(rows, width, name):
    if rows is None:
        return np.zeros((0, width))
    matrix = np.array(rows, dtype=float)
    if matrix.size == 0:
        return np.zeros((0, width))
    if matrix.ndim != 2 or matrix.shape[1] != width:
        raise ValueError(f'{name} must have {width} columns, got shape {matrix.shape}')
    return matrix


def _vector(values, length, name, default=0.0):
    if values is None:
        return np.full(length, default)
    vector = np.array(values, dtype=float).reshape(-1)
    if vector.shape != (length,):
        raise ValueError(f'{name} must have {length} entries, got {vector.size}')
    return vector


@dataclass(frozen=True, eq=False)
class LinearProgram:
    objective: np.ndarray
    a_eq: np.ndarray = None
    b_eq: np.ndarray = None
    a_ub: np.ndarray = None
    b_ub: np.ndarray = None
    var_lower: np.ndarray = None
    var_upper: np.ndarray = None

    def __post_init__(self):
        objective = np.array(self.objective, dtype=float).reshape(-1)
        n = objective.size
        if n == 0:
            raise ValueError('A linear program needs at least one variable')
        a_eq = _matrix(self.a_eq, n, 'a_eq')
        a_ub = _matrix(self.a_ub, n, 'a_ub')
        b_eq = _vector(self.b_eq, a_eq.shape[0], 'b_eq')
        b_ub = _vector(self.b_ub, a_ub.shape[0], 'b_ub')
        lower = _vector(self.var_lower, n, 'var_lower')
        upper = _vector(self.var_upper, n, 'var_upper', default=np.inf)

        for name, array in (('objective', objective), ('a_eq', a_eq), ('b_eq', b_eq),
                            ('a_ub', a_ub), ('b_ub', b_ub), ('var_lower', lower)):
            if not np.all(np.isfinite(array)):
                raise ValueError(f'{name} has non-finite coefficients')
        if np.any(np.isnan(upper)) or np.any(upper == -np.inf):
            raise ValueError('var_upper entries must be finite or +inf')

        for name, value in (('objective', objective), ('a_eq', a_eq), ('b_eq', b_eq), ('a_ub', a_ub),
                            ('b_ub', b_ub), ('var_lower', lower), ('var_upper', upper)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def num_variables(self):
        return self.objective.size

    def violation(self, values):
        """Largest absolute violation of any constraint or bound by `values`."""
        values = np.asarray(values, dtype=float)
        worst = 0.0
        if self.a_eq.shape[0]:
            worst = max(worst, float(np.max(np.abs(self.a_eq @ values - self.b_eq))))
        if self.a_ub.shape[0]:
            worst = max(worst, float(np.max(self.a_ub @ values - self.b_ub)))
        worst = max(worst, float(np.max(self.var_lower - values)))
        finite = np.isfinite(self.var_upper)
        if finite.any():
            worst = max(worst, float(np.max(values[finite] - self.var_upper[finite])))
        return worst

    def to_text(self):
        """
        Plain-text dump: `max`, the objective line, one constraint per line
        (`coefficients <= rhs`, `= rhs` or `>= rhs`), then `end`. Bounds other
        than v >= 0 are written as single-variable rows; the format has no
        negative variables, so negative lower bounds raise ValueError.
        """
        if np.any(self.var_lower < 0):
            raise ValueError('Negative lower bounds cannot be written in the text format')

        def row(coefficients, sign, rhs):
            return ' '.join(repr(float(a)) for a in coefficients) + f' {sign} {float(rhs)!r}'

        n = self.num_variables
        lines = ['max', ' '.join(repr(float(c)) for c in self.objective)]
        lines += [row(a, '=', b) for a, b in zip(self.a_eq, self.b_eq)]
        lines += [row(a, '<=', b) for a, b in zip(self.a_ub, self.b_ub)]
        for k in range(n):
            unit = np.zeros(n)
            unit[k] = 1.0
            if self.var_lower[k] != 0.0:
                lines.append(row(unit, '>=', self.var_lower[k]))
            if np.isfinite(self.var_upper[k]):
                lines.append(row(unit, '<=', self.var_upper[k]))
        lines.append('end')
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_text(cls, text):
        """Parse the `to_text` format; `min` programs are negated into maximizations."""
        lines = [line.strip() for line in text.strip().splitlines()
                 if line.strip() and not line.strip().startswith('#')]
        if len(lines) < 2:
            raise ValueError('Program text needs a sense line and an objective line')
        sense = lines[0].lower()
        if sense not in ('min', 'max'):
            raise ValueError("First line must be 'min' or 'max'")
        objective = np.array([float(x) for x in lines[1].split()])
        if sense == 'min':
            objective = -objective

        a_eq, b_eq, a_ub, b_ub = [], [], [], []
        for line in lines[2:]:
            if line.lower() == 'end':
                break
            if '<=' in line:
                left, rhs = line.split('<=')
                sign = 1.0
                target_a, target_b = a_ub, b_ub
            elif '>=' in line:
                left, rhs = line.split('>=')
                sign = -1.0
                target_a, target_b = a_ub, b_ub
            elif '=' in line:
                left, rhs = line.split('=')
                sign = 1.0
                target_a, target_b = a_eq, b_eq
            else:
                raise ValueError(f'Constraint line has no <=, >= or =: {line!r}')
            coefficients = [float(x) for x in left.split()]
            if len(coefficients) != objective.size:
                raise ValueError(f'Constraint has {len(coefficients)} coefficients, expected {objective.size}')
            target_a.append([sign * a for a in coefficients])
            target_b.append(sign * float(rhs))
        return cls(objective, a_eq or None, b_eq or None, a_ub or None, b_ub or None)


class LpStatus(Enum):
    OPTIMAL = 'Optimal'
    INFEASIBLE = 'Infeasible'
    UNBOUNDED = 'Unbounded'


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    values: np.ndarray = None
    objective_value: float = float('nan')
    iterations: int = 0

    @property
    def is_optimal(self):
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Dense simplex tableau; the last row holds reduced costs of a maximization."""

    def __init__(self, matrix, rhs, basis, tolerance, max_iterations):
        self.table = np.hstack([matrix, rhs[:, None]])
        self.basis = list(basis)
        self.tolerance = tolerance
        self.max_iterations = max_iterations
        self.iterations = 0

    def set_objective(self, costs):
        objective = np.zeros(self.table.shape[1])
        objective[:costs.size] = -costs
        for row, column in enumerate(self.basis):
            if objective[column] != 0.0:
                objective -= objective[column] * self.table[row]
        self.table = np.vstack([self.table, objective])

    def drop_objective(self):
        self.table = self.table[:-1]

    def pivot(self, row, column):
        pivot_row = self.table[row] / self.table[row, column]
        self.table -= np.outer(self.table[:, column], pivot_row)
        self.table[row] = pivot_row
        self.basis[row] = column
        self.iterations += 1

    def run(self, eligible):
        """Pivot until optimal; returns False when the program is unbounded."""
        while True:
            reduced = self.table[-1, :eligible]
            candidates = np.flatnonzero(reduced < -self.tolerance)
            if candidates.size == 0:
                return True
            column = int(candidates[0])
            entries = self.table[:-1, column]
            rows = np.flatnonzero(entries > self.tolerance)
            if rows.size == 0:
                return False
            if self.iterations >= self.max_iterations:
                raise NumericalFailure(f'Simplex hit the iteration cap of {self.max_iterations}')
            ratios = self.table[rows, -1] / entries[rows]
            ties = rows[ratios <= ratios.min() + self.tolerance]
            row = int(ties[np.argmin([self.basis[r] for r in ties])])
            self.pivot(row, column)

    @property
    def value(self):
        return self.table[-1, -1]


def _standard_form(lp):
    """
    Shift v = lower + y and return (A, b, basis, artificial_rows) for
    A y' = b, y' >= 0, b >= 0, where y' appends one slack per inequality.
    """
    n = lp.num_variables
    lower = lp.var_lower
    a_ub = lp.a_ub
    b_ub = lp.b_ub - a_ub @ lower
    finite = np.flatnonzero(np.isfinite(lp.var_upper))
    if finite.size:
        bounds = np.zeros((finite.size, n))
        bounds[np.arange(finite.size), finite] = 1.0
        a_ub = np.vstack([a_ub, bounds])
        b_ub = np.concatenate([b_ub, lp.var_upper[finite] - lower[finite]])
    b_eq = lp.b_eq - lp.a_eq @ lower

    m_eq, m_ub = lp.a_eq.shape[0], a_ub.shape[0]
    matrix = np.zeros((m_eq + m_ub, n + m_ub))
    matrix[:m_eq, :n] = lp.a_eq
    matrix[m_eq:, :n] = a_ub
    matrix[m_eq:, n:] = np.eye(m_ub)
    rhs = np.concatenate([b_eq, b_ub])

    flipped = rhs < 0
    matrix[flipped] *= -1.0
    rhs[flipped] *= -1.0

    needs_artificial = np.ones(m_eq + m_ub, dtype=bool)
    needs_artificial[m_eq:] = flipped[m_eq:]
    basis = [n + (row - m_eq) if not needs_artificial[row] else -1 for row in range(m_eq + m_ub)]
    return matrix, rhs, basis, np.flatnonzero(needs_artificial)


def solve(lp, pivot_tolerance=None, feasibility_tolerance=None, max_iterations=None):
    """
    Solve a LinearProgram with the two-phase simplex method.

    Returns:
        LpSolution: Optimal (values satisfy every constraint within the
        feasibility tolerance), Infeasible or Unbounded

    Raises:
        NumericalFailure: iteration cap reached, or the final point fails the
        feasibility re-check
    """
    if pivot_tolerance is None:
        pivot_tolerance = _lp_setting('LP_PIVOT_TOLERANCE', 1e-9)
    if feasibility_tolerance is None:
        feasibility_tolerance = _lp_setting('LP_FEASIBILITY_TOLERANCE', 1e-7)
    if pivot_tolerance < 0 or feasibility_tolerance < 0:
        raise ValueError('Solver tolerances must be non-negative')

    matrix, rhs, basis, artificial_rows = _standard_form(lp)
    rows, columns = matrix.shape
    if max_iterations is None:
        max_iterations = _lp_setting('LP_MAX_ITERATIONS', None) or 50 * (rows + columns) + 1000

    # phase one: maximize minus the sum of artificials
    artificial = np.zeros((rows, artificial_rows.size))
    for k, row in enumerate(artificial_rows):
        artificial[row, k] = 1.0
        basis[row] = columns + k
    tableau = _Tableau(np.hstack([matrix, artificial]), rhs, basis, pivot_tolerance, max_iterations)
    phase_one_costs = np.concatenate([np.zeros(columns), -np.ones(artificial_rows.size)])
    tableau.set_objective(phase_one_costs)
    tableau.run(columns + artificial_rows.size)
    if tableau.value < -feasibility_tolerance:
        logger.debug(f'Phase one ended with infeasibility {-tableau.value:.3g}')
        return LpSolution(LpStatus.INFEASIBLE, iterations=tableau.iterations)

    # drive remaining artificials out of the basis, dropping redundant rows
    kept_rows = list(range(rows))
    row = 0
    while row < len(tableau.basis):
        if tableau.basis[row] >= columns:
            pivots = np.flatnonzero(np.abs(tableau.table[row, :columns]) > pivot_tolerance)
            if pivots.size:
                tableau.pivot(row, int(pivots[0]))
            else:
                tableau.table = np.delete(tableau.table, row, axis=0)
                del tableau.basis[row]
                del kept_rows[row]
                continue
        row += 1
    tableau.drop_objective()
    tableau.table = np.delete(tableau.table, np.s_[columns:columns + artificial_rows.size], axis=1)

    # phase two
    costs = np.zeros(columns)
    costs[:lp.num_variables] = lp.objective
    tableau.set_objective(costs)
    if not tableau.run(columns):
        return LpSolution(LpStatus.UNBOUNDED, objective_value=float('inf'), iterations=tableau.iterations)

    values = _basic_solution(tableau, matrix[kept_rows], rhs[kept_rows], columns, feasibility_tolerance)
    point = lp.var_lower + values[:lp.num_variables]
    if lp.violation(point) > feasibility_tolerance:
        point = lp.var_lower + _tableau_values(tableau, columns)[:lp.num_variables]
        violation = lp.violation(point)
        if violation > feasibility_tolerance:
            logger.error(f'Simplex optimum violates constraints by {violation:.3g}')
            raise NumericalFailure(f'Optimal point violates constraints by {violation:.3g}')

    return LpSolution(
        LpStatus.OPTIMAL,
        values=point,
        objective_value=float(lp.objective @ point),
        iterations=tableau.iterations,
    )


def _tableau_values(tableau, columns):
    values = np.zeros(columns)
    for row, column in enumerate(tableau.basis):
        values[column] = tableau.table[row, -1]
    return np.maximum(values, 0.0)


def _basic_solution(tableau, matrix, rhs, columns, tolerance):
    """Basic variables recomputed from the original columns, B x_B = b."""
    if not tableau.basis:
        return np.zeros(columns)
    try:
        basic = np.linalg.solve(matrix[:, tableau.basis], rhs)
    except np.linalg.LinAlgError:
        return _tableau_values(tableau, columns)
    if np.any(basic < -tolerance):
        return _tableau_values(tableau, columns)
    values = np.zeros(columns)
    values[tableau.basis] = np.maximum(basic, 0.0)
    return values
