#!/usr/bin/env python3
"""
Exact-rational linear programming.

Two-phase primal simplex over ``fractions.Fraction`` with Bland's rule
(lowest-index entering column, lowest-index leaving basic variable), dual
extraction by solving ``B^T y = c_B`` exactly, and a zero-sum matrix game
solver built on top.

Dual sign convention: for a minimization, duals of ``<=`` rows are <= 0 and
duals of ``>=`` rows are >= 0; for a maximization the signs flip. In both
cases ``objective_value == sum(dual[i] * rhs[i])`` at optimality.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, List, Literal, Optional, Sequence, Tuple

try:
    from .config import get_settings
    from .errors import CertificateError, MalformedLinearProgramError
except ImportError:
    from config import get_settings
    from errors import CertificateError, MalformedLinearProgramError


logger = logging.getLogger(__name__)

Relation = Literal["<=", "=", ">="]
Sense = Literal["min", "max"]
Status = Literal["optimal", "infeasible", "unbounded"]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Constraint:
    """One row: ``row . x  relation  rhs``."""
    row: Tuple[Fraction, ...]
    relation: Relation
    rhs: Fraction


@dataclass
class LinearProgram:
    """Objective plus constraints; variables are >= 0 unless listed as free."""
    objective: List[Fraction]
    constraints: List[Constraint] = field(default_factory=list)
    sense: Sense = "min"
    free_variables: FrozenSet[int] = frozenset()

    @property
    def num_variables(self) -> int:
        return len(self.objective)

    def add_constraint(self, row: Sequence, relation: Relation, rhs) -> None:
        self.constraints.append(Constraint(
            row=tuple(Fraction(v) for v in row),
            relation=relation,
            rhs=Fraction(rhs),
        ))


@dataclass(frozen=True)
class LpSolution:
    """Result of ``solve``; ``ray`` is set for unbounded/infeasible outcomes."""
    status: Status
    primal: Tuple[Fraction, ...] = ()
    dual: Tuple[Fraction, ...] = ()
    objective_value: Optional[Fraction] = None
    ray: Optional[Tuple[Fraction, ...]] = None
    pivots: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


@dataclass(frozen=True)
class MatrixGameSolution:
    """Saddle point of a zero-sum matrix game (row player minimizes)."""
    value: Fraction
    row_strategy: Tuple[Fraction, ...]
    column_strategy: Tuple[Fraction, ...]
    pivots: int = field(default=0, compare=False)


def solve_linear_system(matrix: Sequence[Sequence[Fraction]],
                        rhs: Sequence[Fraction]) -> Optional[List[Fraction]]:
    """Solve a square system exactly by Gauss-Jordan; None when singular."""
    n = len(matrix)
    aug = [[Fraction(v) for v in matrix[i]] + [Fraction(rhs[i])] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        piv = aug[col][col]
        aug[col] = [v / piv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


class _Tableau:
    """Dense tableau ``B^-1 A | B^-1 b`` with its basis."""

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], basis: List[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, c: int) -> None:
        piv = self.rows[r][c]
        self.rows[r] = [v / piv for v in self.rows[r]]
        self.rhs[r] = self.rhs[r] / piv
        for i in range(len(self.rows)):
            if i != r:
                f = self.rows[i][c]
                if f != 0:
                    pr = self.rows[r]
                    self.rows[i] = [a - f * b for a, b in zip(self.rows[i], pr)]
                    self.rhs[i] = self.rhs[i] - f * self.rhs[r]
        self.basis[r] = c
        self.pivots += 1

    def reduced_costs(self, cost: List[Fraction], allowed: Sequence[int]) -> List[Tuple[int, Fraction]]:
        out = []
        for j in allowed:
            rc = cost[j] - sum(cost[self.basis[i]] * self.rows[i][j]
                               for i in range(len(self.rows)) if self.rows[i][j] != 0)
            out.append((j, rc))
        return out

    def run(self, cost: List[Fraction], allowed: Sequence[int]) -> Tuple[str, Optional[int]]:
        """Bland-rule iterations; returns ("optimal", None) or ("unbounded", column)."""
        while True:
            entering = None
            for j, rc in self.reduced_costs(cost, allowed):
                if rc < 0:
                    entering = j
                    break
            if entering is None:
                return "optimal", None

            leaving = None
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (best is None or ratio < best
                            or (ratio == best and self.basis[i] < self.basis[leaving])):
                        best = ratio
                        leaving = i
            if leaving is None:
                return "unbounded", entering
            self.pivot(leaving, entering)


def _validate(lp: LinearProgram) -> None:
    n = lp.num_variables
    if n == 0:
        raise MalformedLinearProgramError("LP has no variables")
    if lp.sense not in ("min", "max"):
        raise MalformedLinearProgramError(f"Unknown objective sense: {lp.sense}")
    for j in lp.free_variables:
        if not 0 <= j < n:
            raise MalformedLinearProgramError(f"Free variable index {j} out of range")
    for i, con in enumerate(lp.constraints):
        if len(con.row) != n:
            raise MalformedLinearProgramError(
                f"Constraint {i} has {len(con.row)} coefficients, expected {n}")
        if con.relation not in ("<=", "=", ">="):
            raise MalformedLinearProgramError(f"Constraint {i} has unknown relation '{con.relation}'")


def solve(lp: LinearProgram, verify: Optional[bool] = None) -> LpSolution:
    """Solve exactly; optimal solutions carry a dual certificate."""
    _validate(lp)
    n = lp.num_variables
    m = len(lp.constraints)

    # Standard-form columns: free variables split into x+ and x-.
    columns: List[Tuple[int, int]] = []
    for j in range(n):
        columns.append((j, 1))
        if j in lp.free_variables:
            columns.append((j, -1))
    n_std = len(columns)

    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    relations: List[str] = []
    row_sign: List[int] = []
    for con in lp.constraints:
        row = [con.row[j] * s for j, s in columns]
        b = con.rhs
        rel = con.relation
        sign = 1
        if b < 0:
            row = [-v for v in row]
            b = -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
            sign = -1
        rows.append(row)
        rhs.append(b)
        relations.append(rel)
        row_sign.append(sign)

    # Slack/surplus then artificial columns.
    n_slack = sum(1 for rel in relations if rel != "=")
    n_art = sum(1 for rel in relations if rel != "<=")
    total = n_std + n_slack + n_art
    full = [r + [ZERO] * (n_slack + n_art) for r in rows]
    basis: List[int] = []
    slack_col = n_std
    art_col = n_std + n_slack
    artificials = set()
    for i, rel in enumerate(relations):
        if rel == "<=":
            full[i][slack_col] = ONE
            basis.append(slack_col)
            slack_col += 1
        elif rel == ">=":
            full[i][slack_col] = -ONE
            slack_col += 1
            full[i][art_col] = ONE
            basis.append(art_col)
            artificials.add(art_col)
            art_col += 1
        else:
            full[i][art_col] = ONE
            basis.append(art_col)
            artificials.add(art_col)
            art_col += 1
    original_columns = [list(r) for r in full]

    tab = _Tableau([list(r) for r in full], list(rhs), basis)
    active_rows = list(range(m))

    # Phase 1: minimize the sum of artificials.
    if artificials:
        cost1 = [ONE if j in artificials else ZERO for j in range(total)]
        tab.run(cost1, range(total))
        infeasibility = sum(tab.rhs[i] for i in range(len(tab.rows)) if tab.basis[i] in artificials)
        logger.debug("phase 1 finished after %d pivots, infeasibility %s", tab.pivots, infeasibility)
        if infeasibility > 0:
            farkas = _basis_duals(original_columns, active_rows, tab.basis, cost1)
            ray = tuple(row_sign[i] * farkas[i] for i in range(m))
            return LpSolution(status="infeasible", ray=ray, pivots=tab.pivots)

        # Drive zero-valued artificials out of the basis; drop redundant rows.
        r = 0
        while r < len(tab.rows):
            if tab.basis[r] in artificials:
                col = next((j for j in range(total)
                            if j not in artificials and tab.rows[r][j] != 0), None)
                if col is None:
                    logger.debug("dropping redundant constraint %d", active_rows[r])
                    del tab.rows[r]
                    del tab.rhs[r]
                    del tab.basis[r]
                    del active_rows[r]
                    continue
                tab.pivot(r, col)
            r += 1

    # Phase 2 on the real objective (maximization solved as min of -c).
    flip = -1 if lp.sense == "max" else 1
    cost2 = [ZERO] * total
    for k, (j, s) in enumerate(columns):
        cost2[k] = flip * s * Fraction(lp.objective[j])
    allowed = [j for j in range(total) if j not in artificials]
    status, entering = tab.run(cost2, allowed)
    logger.debug("phase 2 finished with status %s after %d pivots", status, tab.pivots)

    if status == "unbounded":
        direction = [ZERO] * total
        direction[entering] = ONE
        for i, b in enumerate(tab.basis):
            direction[b] = -tab.rows[i][entering]
        ray = [ZERO] * n
        for k, (j, s) in enumerate(columns):
            ray[j] += s * direction[k]
        return LpSolution(status="unbounded", ray=tuple(ray), pivots=tab.pivots)

    values = [ZERO] * total
    for i, b in enumerate(tab.basis):
        values[b] = tab.rhs[i]
    primal = [ZERO] * n
    for k, (j, s) in enumerate(columns):
        primal[j] += s * values[k]

    y = _basis_duals(original_columns, active_rows, tab.basis, cost2)
    dual = tuple(flip * row_sign[i] * y[i] for i in range(m))
    objective_value = sum((Fraction(c) * x for c, x in zip(lp.objective, primal)), ZERO)

    solution = LpSolution(
        status="optimal",
        primal=tuple(primal),
        dual=dual,
        objective_value=objective_value,
        pivots=tab.pivots,
    )
    if verify is None:
        verify = get_settings().verify_lp
    if verify:
        issues = verify_certificate(lp, solution)
        if issues:
            raise CertificateError(issues)
    return solution


def _basis_duals(columns: List[List[Fraction]], active_rows: List[int],
                 basis: List[int], cost: List[Fraction]) -> List[Fraction]:
    """Solve B^T y = c_B on the active rows; inactive (redundant) rows get 0."""
    size = len(active_rows)
    full_duals = [ZERO] * len(columns)
    if size == 0:
        return full_duals
    bt = [[columns[active_rows[i]][basis[k]] for i in range(size)] for k in range(size)]
    cb = [cost[basis[k]] for k in range(size)]
    y = solve_linear_system(bt, cb)
    if y is None:
        raise CertificateError(["basis matrix is singular"])
    for i, r in enumerate(active_rows):
        full_duals[r] = y[i]
    return full_duals


def verify_certificate(lp: LinearProgram, solution: LpSolution) -> List[str]:
    """Recheck an optimal solution by direct substitution; returns the list of issues."""
    issues: List[str] = []
    if not solution.is_optimal:
        return issues
    x = solution.primal
    y = solution.dual
    flip = -1 if lp.sense == "max" else 1

    for j, v in enumerate(x):
        if j not in lp.free_variables and v < 0:
            issues.append(f"variable {j} is negative ({v})")

    for i, con in enumerate(lp.constraints):
        lhs = sum((a * v for a, v in zip(con.row, x)), ZERO)
        if con.relation == "<=" and lhs > con.rhs:
            issues.append(f"row {i} violated: {lhs} > {con.rhs}")
        elif con.relation == ">=" and lhs < con.rhs:
            issues.append(f"row {i} violated: {lhs} < {con.rhs}")
        elif con.relation == "=" and lhs != con.rhs:
            issues.append(f"row {i} violated: {lhs} != {con.rhs}")

        # In min-form, duals of <= rows are <= 0 and of >= rows are >= 0.
        d = flip * y[i]
        if con.relation == "<=" and d > 0:
            issues.append(f"dual {i} has the wrong sign ({y[i]})")
        if con.relation == ">=" and d < 0:
            issues.append(f"dual {i} has the wrong sign ({y[i]})")
        if d != 0 and lhs != con.rhs:
            issues.append(f"complementary slackness fails on row {i}")

    for j in range(lp.num_variables):
        reduced = flip * Fraction(lp.objective[j]) - sum(
            (flip * y[i] * con.row[j] for i, con in enumerate(lp.constraints)), ZERO)
        if j in lp.free_variables:
            if reduced != 0:
                issues.append(f"free variable {j} has nonzero reduced cost {reduced}")
        else:
            if reduced < 0:
                issues.append(f"variable {j} has negative reduced cost {reduced}")
            if reduced != 0 and x[j] != 0:
                issues.append(f"complementary slackness fails on variable {j}")

    dual_objective = sum((yi * con.rhs for yi, con in zip(y, lp.constraints)), ZERO)
    if dual_objective != solution.objective_value:
        issues.append(f"duality gap: primal {solution.objective_value} vs dual {dual_objective}")
    return issues


def is_feasible(lp: LinearProgram) -> Optional[Tuple[Fraction, ...]]:
    """Feasibility check ignoring the objective; returns a feasible point or None."""
    probe = LinearProgram(
        objective=[ZERO] * lp.num_variables,
        constraints=list(lp.constraints),
        sense="min",
        free_variables=lp.free_variables,
    )
    result = solve(probe)
    return result.primal if result.is_optimal else None


def solve_matrix_game(matrix: Sequence[Sequence]) -> MatrixGameSolution:
    """Value and optimal mixtures; rows minimize the payoff, columns maximize it."""
    if not matrix or not matrix[0]:
        raise MalformedLinearProgramError("Matrix game needs at least one row and one column")
    n_rows = len(matrix)
    n_cols = len(matrix[0])
    if any(len(r) != n_cols for r in matrix):
        raise MalformedLinearProgramError("Matrix game rows have different lengths")
    payoff = [[Fraction(v) for v in r] for r in matrix]

    # Variables: row mixture rho_0..rho_{m-1}, then the free game value v.
    lp = LinearProgram(objective=[ZERO] * n_rows + [ONE], free_variables=frozenset({n_rows}))
    for j in range(n_cols):
        lp.add_constraint([payoff[i][j] for i in range(n_rows)] + [-ONE], "<=", 0)
    lp.add_constraint([ONE] * n_rows + [ZERO], "=", 1)

    result = solve(lp)
    if not result.is_optimal:
        raise CertificateError([f"matrix game LP ended with status {result.status}"])

    value = result.primal[n_rows]
    rho = tuple(result.primal[:n_rows])
    kappa = [-d for d in result.dual[:n_cols]]
    total = sum(kappa, ZERO)
    kappa = tuple(k / total for k in kappa)
    return MatrixGameSolution(value=value, row_strategy=rho, column_strategy=kappa,
                              pivots=result.pivots)


def saddle_gap(matrix: Sequence[Sequence], game: MatrixGameSolution) -> Tuple[Fraction, Fraction]:
    """(max over columns of rho^T M, min over rows of M kappa); equal at a saddle point."""
    payoff = [[Fraction(v) for v in r] for r in matrix]
    upper = max(sum((game.row_strategy[i] * payoff[i][j] for i in range(len(payoff))), ZERO)
                for j in range(len(payoff[0])))
    lower = min(sum((payoff[i][j] * game.column_strategy[j] for j in range(len(payoff[0]))), ZERO)
                for i in range(len(payoff)))
    return upper, lower
