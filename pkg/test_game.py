#!/usr/bin/env python3
"""
Tests for the a priori and a posteriori games and their certificates.
"""

from dataclasses import replace
from fractions import Fraction as F

import pytest

from conftest import make_space, singleton_credal
from src.credal import CredalSet, JointDistribution, MarginalSet
from src.errors import ShapeMismatchError, UnreachableObservationError
from src.game import (DecisionRule, LossFunction, bayes_rule, certify_equilibrium,
                      certify_posterior, check_ignore_optimal, detect_time_inconsistency,
                      expected_loss, ignore_rule_value, ignores_information,
                      posterior_rule, solve_aposteriori, solve_apriori, worst_case_loss)

HALF = F(1, 2)


def test_example1_apriori(example1):
    solution = solve_apriori(example1.credal, example1.loss)

    assert solution.value == F(1, 3)
    assert solution.rule == example1.rule("predict_one")
    assert sum(w for _, w in solution.bookie_mixture) == 1


@pytest.mark.parametrize("observation", ["0", "1"])
def test_example1_aposteriori(example1, observation):
    solution = solve_aposteriori(example1.credal, example1.loss, observation)

    assert solution.value == HALF
    assert solution.act == (HALF, HALF)
    assert solution.marginals.same_set(MarginalSet.full_simplex(example1.space.y_labels))
    assert solution.marginals.boundary_approximation


def test_example1_time_inconsistency(example1):
    report = detect_time_inconsistency(example1.credal, example1.loss)

    assert report.flagged
    assert report.act_divergence
    assert [e.gap for e in report.entries] == [HALF, HALF]
    assert [e.apriori_act_worst_case for e in report.entries] == [1, 1]


def test_monty_apriori_switches(monty):
    solution = solve_apriori(monty.credal, monty.loss)

    assert solution.value == F(1, 3)
    assert solution.rule == monty.rule("switch")


def test_monty_aposteriori(monty):
    at_g2 = solve_aposteriori(monty.credal, monty.loss, "G2")
    at_g3 = solve_aposteriori(monty.credal, monty.loss, "G3")
    labels = monty.space.y_labels

    assert at_g2.value == HALF
    assert at_g3.value == HALF
    assert at_g2.marginals.same_set(MarginalSet.from_points(labels, [(HALF, 0, HALF), (0, 0, 1)]))
    assert at_g3.marginals.same_set(MarginalSet.from_points(labels, [(0, 1, 0), (HALF, HALF, 0)]))
    assert not at_g2.marginals.boundary_approximation


def test_monty_value_divergence_without_act_gap(monty):
    report = detect_time_inconsistency(monty.credal, monty.loss)

    assert not report.act_divergence
    assert report.value_divergence
    assert report.flagged
    assert [e.posterior_value for e in report.entries] == [HALF, HALF]


def test_named_monty_rules(monty):
    worst = {name: worst_case_loss(monty.credal, monty.loss, monty.rule(name))
             for name in ("switch", "stick", "condition_uniform", "ignore_uniform")}

    assert worst == {
        "switch": F(1, 3),
        "stick": F(2, 3),
        "condition_uniform": HALF,
        "ignore_uniform": F(2, 3),
    }


def test_ignore_rule(example1, monty, walley):
    assert ignore_rule_value(example1.credal, example1.loss) == (F(1, 3), (F(0), F(1)))
    assert ignore_rule_value(monty.credal, monty.loss)[0] == F(2, 3)

    assert check_ignore_optimal(example1.credal).holds
    assert check_ignore_optimal(walley.credal).holds
    monty_check = check_ignore_optimal(monty.credal)
    assert not monty_check.holds
    assert monty_check.witnesses[0][1] is None


def test_ignoring_is_optimal_when_witnesses_exist(walley):
    value, _ = ignore_rule_value(walley.credal, walley.loss)
    assert solve_apriori(walley.credal, walley.loss).value == value == HALF


@pytest.mark.parametrize("name", ["example1", "monty_hall", "walley_coins"])
def test_equilibrium_certificates(name, request):
    fixture = {"example1": "example1", "monty_hall": "monty", "walley_coins": "walley"}[name]
    scenario = request.getfixturevalue(fixture)
    solution = solve_apriori(scenario.credal, scenario.loss)

    certificate = certify_equilibrium(scenario.credal, scenario.loss, solution)
    assert certificate.passed, certificate.failures()
    assert certificate.bayes_value == solution.value

    for x in scenario.space.x_labels:
        assert certify_posterior(scenario.credal, scenario.loss, x).passed


def test_certificate_catches_wrong_value(example1):
    solution = solve_apriori(example1.credal, example1.loss)
    bad = replace(solution, value=solution.value + 1)

    certificate = certify_equilibrium(example1.credal, example1.loss, bad)
    assert not certificate.passed
    assert "value_is_worst_case" in certificate.failures()


def test_certificate_catches_bad_mixture(example1):
    solution = solve_apriori(example1.credal, example1.loss)
    bad = replace(solution, bookie_mixture=((0, F(2)),))

    failures = certify_equilibrium(example1.credal, example1.loss, bad).failures()
    assert "mixture_is_distribution" in failures
    assert "aggregate_matches_mixture" in failures


def test_precise_prior_is_consistent(space_2x2):
    credal = singleton_credal(space_2x2, [[F(1, 4), F(1, 4)], [F(1, 8), F(3, 8)]])
    loss = LossFunction.zero_one(2)

    report = detect_time_inconsistency(credal, loss)
    assert not report.flagged
    assert all(e.gap == 0 for e in report.entries)

    rule, value = bayes_rule(credal.vertices[0], loss)
    assert value == solve_apriori(credal, loss).value == F(3, 8)
    assert rule.rows == ((1, 0), (0, 1))


def test_unreachable_observation(space_2x2):
    credal = singleton_credal(space_2x2, [[F(1, 2), F(1, 2)], [0, 0]])
    with pytest.raises(UnreachableObservationError):
        solve_aposteriori(credal, LossFunction.zero_one(2), "x1")


def test_posterior_rule_falls_back_to_ignore_act(space_2x2):
    credal = singleton_credal(space_2x2, [[F(1, 4), F(3, 4)], [0, 0]])
    loss = LossFunction.zero_one(2)
    rule = posterior_rule(credal, loss)

    assert rule.rows[0] == (0, 1)
    assert rule.rows[1] == ignore_rule_value(credal, loss)[1]


def test_example1_posterior_rule_randomizes(example1):
    rule = posterior_rule(example1.credal, example1.loss)
    assert rule == example1.rule("randomize")
    assert ignores_information(rule)
    assert worst_case_loss(example1.credal, example1.loss, rule) == HALF


def test_loss_scaling_scales_value(monty):
    doubled = monty.loss.scaled(2)
    assert solve_apriori(monty.credal, doubled).value == F(2, 3)


def test_shape_checks(example1):
    wrong_loss = LossFunction.zero_one(3)
    with pytest.raises(ShapeMismatchError):
        solve_apriori(example1.credal, wrong_loss)

    wide_rule = DecisionRule.constant(3, (HALF, HALF))
    with pytest.raises(ShapeMismatchError):
        worst_case_loss(example1.credal, example1.loss, wide_rule)
    with pytest.raises(ShapeMismatchError):
        expected_loss(example1.credal.vertices[0], example1.loss, wide_rule)
    with pytest.raises(ShapeMismatchError):
        LossFunction(((F(0), F(1)), (F(1),)))


def test_decision_rule_constructors():
    rule = DecisionRule.deterministic(3, [2, 0])
    assert rule.rows == ((0, 0, 1), (1, 0, 0))
    assert not ignores_information(rule)
    assert ignores_information(DecisionRule.constant(4, ("1/4", "3/4")))


def test_gains_are_negative_losses():
    space = make_space(1, 2, 2)
    credal = singleton_credal(space, [[HALF, HALF]])
    loss = LossFunction(((F(-2), F(0)), (F(1), F(0))))

    # act 0 pays -2 or 1, averaging -1/2
    assert solve_apriori(credal, loss).value == F(-1, 2)


def test_separate_witnesses_do_not_make_ignoring_optimal(space_2x2):
    # X reveals Y exactly, yet each vertex is itself a product distribution
    credal = CredalSet.from_vertices(space_2x2, [
        JointDistribution(((F(1), F(0)), (F(0), F(0)))),
        JointDistribution(((F(0), F(0)), (F(0), F(1)))),
    ])
    loss = LossFunction.zero_one(2)
    check = check_ignore_optimal(credal)

    assert not check.holds
    assert all(w is not None for _, w in check.witnesses)
    assert solve_apriori(credal, loss).value == 0
    assert ignore_rule_value(credal, loss)[0] == HALF


def test_common_witness_is_reported(example1):
    check = check_ignore_optimal(example1.credal)
    assert check.common_marginal is not None
    assert sum(check.common_marginal) == 1
