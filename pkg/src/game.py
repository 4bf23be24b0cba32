#!/usr/bin/env python3
"""
Minimax decision rules against a credal set.

The a priori game (bookie picks a distribution before X is seen) is solved as
one LP over the rule's action weights; the a posteriori game at an observation
is a matrix game of actions against the conditioned outcome distributions.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

try:
    from .credal import (CredalSet, Distribution, EventSet, JointDistribution,
                         MarginalSet, conditioned_marginal_set, distribution,
                         find_common_observation_marginal, find_independent_witness,
                         format_vector, marginal_y_set,
                         reachable_observations, to_fraction)
    from .errors import CertificateError, ShapeMismatchError, UnreachableObservationError
    from .lp_core import LinearProgram, solve, solve_matrix_game
except ImportError:
    from credal import (CredalSet, Distribution, EventSet, JointDistribution,
                        MarginalSet, conditioned_marginal_set, distribution,
                        find_common_observation_marginal, find_independent_witness,
                        format_vector, marginal_y_set,
                        reachable_observations, to_fraction)
    from errors import CertificateError, ShapeMismatchError, UnreachableObservationError
    from lp_core import LinearProgram, solve, solve_matrix_game


logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class LossFunction:
    """Loss table L(y, a): rows are outcomes, columns are actions. Negative entries are gains."""
    table: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in row) for row in self.table)
        if not rows or not rows[0]:
            raise ShapeMismatchError("Loss table is empty")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ShapeMismatchError("Loss table rows have different lengths")
        object.__setattr__(self, "table", rows)

    @classmethod
    def zero_one(cls, size: int) -> "LossFunction":
        return cls(tuple(tuple(ZERO if y == a else ONE for a in range(size)) for y in range(size)))

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.table), len(self.table[0])

    def scaled(self, factor) -> "LossFunction":
        f = Fraction(factor)
        return LossFunction(tuple(tuple(f * v for v in row) for row in self.table))

    def act_loss(self, q: Sequence[Fraction], act: Sequence[Fraction]) -> Fraction:
        """Expected loss of a randomized act under an outcome distribution q."""
        return sum((q[y] * act[a] * self.table[y][a]
                    for y in range(len(q)) if q[y] != 0
                    for a in range(len(act)) if act[a] != 0), ZERO)


@dataclass(frozen=True)
class DecisionRule:
    """For each observation, a distribution over actions."""
    rows: Tuple[Distribution, ...]

    def __post_init__(self):
        rows = tuple(distribution(r) for r in self.rows)
        if not rows:
            raise ShapeMismatchError("Decision rule has no rows")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ShapeMismatchError("Decision rule rows have different lengths")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def constant(cls, n_x: int, act: Sequence) -> "DecisionRule":
        return cls(tuple(tuple(act) for _ in range(n_x)))

    @classmethod
    def deterministic(cls, n_a: int, choices: Sequence[int]) -> "DecisionRule":
        return cls(tuple(tuple(ONE if a == c else ZERO for a in range(n_a)) for c in choices))

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), len(self.rows[0])


@dataclass(frozen=True)
class GameSolution:
    """Equilibrium of the a priori game."""
    value: Fraction
    rule: DecisionRule
    bookie_mixture: Tuple[Tuple[int, Fraction], ...]    # (vertex index, weight), zeros dropped
    aggregate: JointDistribution                        # sum of weight * vertex
    pivots: int = field(default=0, compare=False)       # simplex pivots of the game LP

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(k for k, _ in self.bookie_mixture)


@dataclass(frozen=True)
class PosteriorSolution:
    """Equilibrium of the game played after observing one value of X."""
    observation: str
    value: Fraction
    act: Distribution
    marginals: MarginalSet                              # (P | X=x)_Y
    bookie_mixture: Tuple[Tuple[int, Fraction], ...]    # over marginals.vertices
    aggregate: Distribution
    pivots: int = field(default=0, compare=False)


@dataclass(frozen=True)
class EquilibriumCertificate:
    """Exact pass/fail per equilibrium clause."""
    value_is_worst_case: bool          # max over vertices of E_v[L_rule] equals the value
    support_attains_value: bool        # every mixture support point reaches that max
    bayes_value_matches: bool          # min over rules of E_aggregate equals the value
    mixture_is_distribution: bool
    aggregate_matches_mixture: bool
    worst_case: Fraction
    bayes_value: Fraction

    @property
    def passed(self) -> bool:
        return all(self.clauses().values())

    def clauses(self) -> Dict[str, bool]:
        return {
            "value_is_worst_case": self.value_is_worst_case,
            "support_attains_value": self.support_attains_value,
            "bayes_value_matches": self.bayes_value_matches,
            "mixture_is_distribution": self.mixture_is_distribution,
            "aggregate_matches_mixture": self.aggregate_matches_mixture,
        }

    def failures(self) -> List[str]:
        return [name for name, ok in self.clauses().items() if not ok]


@dataclass(frozen=True)
class IgnoreCheck:
    """Sufficient condition for an information-ignoring rule to be a priori optimal."""
    holds: bool
    witnesses: Tuple[Tuple[Distribution, Optional[JointDistribution]], ...]
    common_marginal: Optional[Distribution] = None    # one X-marginal serving every generator


@dataclass(frozen=True)
class InconsistencyEntry:
    observation: str
    posterior_value: Fraction
    apriori_act: Distribution
    apriori_act_worst_case: Fraction    # worst case of the a priori act under P|X=x
    gap: Fraction                       # apriori_act_worst_case - posterior_value, >= 0


@dataclass(frozen=True)
class InconsistencyReport:
    prior: GameSolution
    entries: Tuple[InconsistencyEntry, ...]

    @property
    def act_divergence(self) -> bool:
        return any(e.gap > 0 for e in self.entries)

    @property
    def value_divergence(self) -> bool:
        if not self.entries:
            return False
        values = [e.posterior_value for e in self.entries]
        return not min(values) <= self.prior.value <= max(values)

    @property
    def flagged(self) -> bool:
        return self.act_divergence or self.value_divergence


def _check_shapes(credal: CredalSet, loss: LossFunction,
                  rule: Optional[DecisionRule] = None) -> None:
    n_x, n_y = credal.space.shape
    n_a = len(credal.space.a_labels)
    if loss.shape != (n_y, n_a):
        raise ShapeMismatchError(f"Loss table is {loss.shape}, expected {(n_y, n_a)}")
    if rule is not None and rule.shape != (n_x, n_a):
        raise ShapeMismatchError(f"Decision rule is {rule.shape}, expected {(n_x, n_a)}")


def expected_loss(p: JointDistribution, loss: LossFunction, rule: DecisionRule) -> Fraction:
    """E_p[L_rule] = sum over x, y of p(x,y) * sum over a of rule(x)(a) L(y,a)."""
    n_x, n_y = p.shape
    if loss.shape[0] != n_y or rule.shape != (n_x, loss.shape[1]):
        raise ShapeMismatchError(
            f"Distribution {p.shape}, loss {loss.shape} and rule {rule.shape} do not fit together")
    return sum((loss.act_loss(p.probs[x], rule.rows[x]) for x in range(n_x)), ZERO)


def worst_case_loss(credal: CredalSet, loss: LossFunction, rule: DecisionRule) -> Fraction:
    """max over P of E[L_rule]; linear in the distribution, so vertices suffice."""
    _check_shapes(credal, loss, rule)
    return max(expected_loss(v, loss, rule) for v in credal.vertices)


def _mixture(weights: Sequence[Fraction]) -> Tuple[Tuple[int, Fraction], ...]:
    return tuple((k, w) for k, w in enumerate(weights) if w != 0)


def solve_apriori(credal: CredalSet, loss: LossFunction) -> GameSolution:
    """min over rules of max over P of expected loss, with the bookie's optimal mixture."""
    _check_shapes(credal, loss)
    n_x, n_y = credal.space.shape
    n_a = len(credal.space.a_labels)
    n_rule = n_x * n_a

    # Variables: rule weights d(x,a) at x * n_a + a, then the free bound t.
    lp = LinearProgram(objective=[ZERO] * n_rule + [ONE], free_variables=frozenset({n_rule}))
    for v in credal.vertices:
        row = [ZERO] * (n_rule + 1)
        for x in range(n_x):
            for a in range(n_a):
                row[x * n_a + a] = sum((v.probs[x][y] * loss.table[y][a] for y in range(n_y)), ZERO)
        row[n_rule] = -ONE
        lp.add_constraint(row, "<=", 0)
    for x in range(n_x):
        row = [ZERO] * (n_rule + 1)
        for a in range(n_a):
            row[x * n_a + a] = ONE
        lp.add_constraint(row, "=", 1)

    result = solve(lp)
    if not result.is_optimal:
        raise CertificateError([f"a priori game LP ended with status {result.status}"])

    rule = DecisionRule(tuple(tuple(result.primal[x * n_a:(x + 1) * n_a]) for x in range(n_x)))
    weights = [-d for d in result.dual[:len(credal.vertices)]]
    total = sum(weights, ZERO)
    weights = [w / total for w in weights]
    aggregate = JointDistribution(tuple(
        tuple(sum((w * v.probs[x][y] for w, v in zip(weights, credal.vertices)), ZERO)
              for y in range(n_y))
        for x in range(n_x)
    ))
    logger.debug("a priori value %s after %d pivots", result.objective_value, result.pivots)
    return GameSolution(
        value=result.objective_value,
        rule=rule,
        bookie_mixture=_mixture(weights),
        aggregate=aggregate,
        pivots=result.pivots,
    )


def _matrix_game(marginals: MarginalSet, loss: LossFunction, n_a: int):
    acts = [tuple(ONE if b == a else ZERO for b in range(n_a)) for a in range(n_a)]
    matrix = [[loss.act_loss(q, act) for q in marginals.vertices] for act in acts]
    return solve_matrix_game(matrix)


def cell_game(credal: CredalSet, loss: LossFunction, event: EventSet):
    """Matrix game of actions against (P | event)_Y; returns (marginals, game solution)."""
    _check_shapes(credal, loss)
    marginals = conditioned_marginal_set(credal, event)
    return marginals, _matrix_game(marginals, loss, len(credal.space.a_labels))


def solve_aposteriori(credal: CredalSet, loss: LossFunction, observation: str) -> PosteriorSolution:
    """Best randomized act against the worst conditioned outcome distribution at X = x."""
    event = EventSet.singleton(credal.space, observation)
    if observation not in reachable_observations(credal):
        raise UnreachableObservationError(
            f"Observation '{observation}' has probability zero under every distribution in the set")
    marginals, game = cell_game(credal, loss, event)
    weights = list(game.column_strategy)
    aggregate = tuple(
        sum((w * q[y] for w, q in zip(weights, marginals.vertices)), ZERO)
        for y in range(len(credal.space.y_labels))
    )
    return PosteriorSolution(
        observation=observation,
        value=game.value,
        act=game.row_strategy,
        marginals=marginals,
        bookie_mixture=_mixture(weights),
        aggregate=aggregate,
        pivots=game.pivots,
    )


def bayes_rule(p: JointDistribution, loss: LossFunction) -> Tuple[DecisionRule, Fraction]:
    """Deterministic per-observation best response to p (lowest action index on ties)."""
    n_x, _ = p.shape
    n_a = loss.shape[1]
    choices = []
    value = ZERO
    for x in range(n_x):
        losses = [loss.act_loss(p.probs[x], tuple(ONE if b == a else ZERO for b in range(n_a)))
                  for a in range(n_a)]
        best = min(losses)
        choices.append(losses.index(best))
        value += best
    return DecisionRule.deterministic(n_a, choices), value


def certify_equilibrium(credal: CredalSet, loss: LossFunction,
                        solution: GameSolution) -> EquilibriumCertificate:
    """Recheck every equilibrium condition of an a priori solution exactly."""
    losses = [expected_loss(v, loss, solution.rule) for v in credal.vertices]
    worst = max(losses)
    _, bayes_value = bayes_rule(solution.aggregate, loss)

    weights = [w for _, w in solution.bookie_mixture]
    in_range = all(0 <= k < len(credal.vertices) for k in solution.support)
    mixture_ok = in_range and all(w >= 0 for w in weights) and sum(weights, ZERO) == 1

    aggregate_ok = False
    if in_range:
        n_x, n_y = credal.space.shape
        combined = tuple(
            tuple(sum((w * credal.vertices[k].probs[x][y] for k, w in solution.bookie_mixture), ZERO)
                  for y in range(n_y))
            for x in range(n_x)
        )
        aggregate_ok = combined == solution.aggregate.probs

    return EquilibriumCertificate(
        value_is_worst_case=worst == solution.value,
        support_attains_value=in_range and all(losses[k] == worst == solution.value
                                               for k in solution.support),
        bayes_value_matches=(bayes_value == solution.value
                             and expected_loss(solution.aggregate, loss, solution.rule) == solution.value),
        mixture_is_distribution=mixture_ok,
        aggregate_matches_mixture=aggregate_ok,
        worst_case=worst,
        bayes_value=bayes_value,
    )


def certify_posterior(credal: CredalSet, loss: LossFunction, observation: str) -> EquilibriumCertificate:
    """The same clauses for the game at one observation, over conditioned marginals."""
    sol = solve_aposteriori(credal, loss, observation)
    losses = [loss.act_loss(q, sol.act) for q in sol.marginals.vertices]
    worst = max(losses)
    n_a = len(credal.space.a_labels)
    bayes_value = min(loss.act_loss(sol.aggregate, tuple(ONE if b == a else ZERO for b in range(n_a)))
                      for a in range(n_a))
    weights = [w for _, w in sol.bookie_mixture]
    combined = tuple(
        sum((w * sol.marginals.vertices[k][y] for k, w in sol.bookie_mixture), ZERO)
        for y in range(len(credal.space.y_labels))
    )
    return EquilibriumCertificate(
        value_is_worst_case=worst == sol.value,
        support_attains_value=all(losses[k] == sol.value for k, _ in sol.bookie_mixture),
        bayes_value_matches=bayes_value == sol.value,
        mixture_is_distribution=all(w >= 0 for w in weights) and sum(weights, ZERO) == 1,
        aggregate_matches_mixture=combined == sol.aggregate,
        worst_case=worst,
        bayes_value=bayes_value,
    )


def check_ignore_optimal(credal: CredalSet) -> IgnoreCheck:
    """Look for independent members w (x) q of P covering every q in P_Y.

    Per-generator witnesses alone do not cover mixtures of generators, so the
    check holds only when a single X-marginal w works for all of them.
    """
    generators = marginal_y_set(credal).vertices
    common = find_common_observation_marginal(credal, generators)
    if common is not None:
        witnesses = [(q, JointDistribution.product(common, q)) for q in generators]
        return IgnoreCheck(holds=True, witnesses=tuple(witnesses), common_marginal=common)

    witnesses = []
    for q in generators:
        w = find_independent_witness(credal, q)
        if w is None:
            logger.debug("no independent witness for outcome marginal %s", format_vector(q))
        witnesses.append((q, w))
    return IgnoreCheck(holds=False, witnesses=tuple(witnesses))


def ignore_rule_value(credal: CredalSet, loss: LossFunction) -> Tuple[Fraction, Distribution]:
    """Best constant act against P_Y: the value of ignoring the observation."""
    _check_shapes(credal, loss)
    game = _matrix_game(marginal_y_set(credal), loss, len(credal.space.a_labels))
    return game.value, game.row_strategy


def ignores_information(rule: DecisionRule) -> bool:
    return all(r == rule.rows[0] for r in rule.rows)


def posterior_rule(credal: CredalSet, loss: LossFunction) -> DecisionRule:
    """Rule built from the a posteriori optimal act at every reachable observation."""
    reachable = set(reachable_observations(credal))
    _, fallback = ignore_rule_value(credal, loss)
    rows = []
    for x in credal.space.x_labels:
        rows.append(solve_aposteriori(credal, loss, x).act if x in reachable else fallback)
    return DecisionRule(tuple(rows))


def posterior_worst_case(credal: CredalSet, loss: LossFunction, observation: str,
                         act: Sequence[Fraction]) -> Fraction:
    marginals = conditioned_marginal_set(credal, EventSet.singleton(credal.space, observation))
    return max(loss.act_loss(q, act) for q in marginals.vertices)


def detect_time_inconsistency(credal: CredalSet, loss: LossFunction) -> InconsistencyReport:
    """Compare the a priori optimal rule with the optimum after each observation."""
    prior = solve_apriori(credal, loss)
    entries = []
    for label in reachable_observations(credal):
        post = solve_aposteriori(credal, loss, label)
        act = prior.rule.rows[credal.space.x_index(label)]
        worst = posterior_worst_case(credal, loss, label, act)
        entries.append(InconsistencyEntry(
            observation=label,
            posterior_value=post.value,
            apriori_act=act,
            apriori_act_worst_case=worst,
            gap=worst - post.value,
        ))
    return InconsistencyReport(prior=prior, entries=tuple(entries))
