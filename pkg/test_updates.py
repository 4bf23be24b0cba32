#!/usr/bin/env python3
"""
Tests for partitions, conditioning rules, calibration and the narrower-than order.
"""

from fractions import Fraction as F

import pytest

from src.credal import (CredalSet, EventSet, JointDistribution, MarginalSet,
                        condition_set, same_set)
from src.errors import DomainMismatchError, InvalidPartitionError, SizeBoundExceededError
from src.game import ignores_information, solve_apriori, worst_case_loss
from src.updates import (Partition, RuleOrder, UpdateRuleOnP, c_conditioning,
                         c_conditioning_rule, calibration_violations, cell_game_value,
                         enumerate_partitions, is_calibrated_relative,
                         is_generalized_conditioning_on, narrower_than, range_decomposition,
                         rule_is_based_on_c_conditioning, sharp_partitions)

HALF = F(1, 2)


def test_partition_is_canonical():
    partition = Partition(("a", "b", "c"), (("c", "a"), ("b",)))

    assert partition.cells == (("a", "c"), ("b",))
    assert str(partition) == "{a, c} | {b}"
    assert partition.to_rgs() == (0, 1, 0)
    assert Partition.from_rgs(("a", "b", "c"), (0, 1, 0)) == partition
    assert partition.cell_of("c") == ("a", "c")


@pytest.mark.parametrize("cells", [
    (("a",), ()),
    (("a", "b"), ("b", "c")),
    (("a", "b"),),
    (("a", "b", "c", "d"),),
])
def test_invalid_partitions(cells):
    with pytest.raises(InvalidPartitionError):
        Partition(("a", "b", "c"), cells)


@pytest.mark.parametrize("n, bell", [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)])
def test_partition_counts(n, bell):
    labels = [str(i) for i in range(n)]
    partitions = list(enumerate_partitions(labels))

    assert len(partitions) == bell
    assert len(set(partitions)) == bell
    assert partitions[0] == Partition.trivial(labels)
    assert partitions[-1] == Partition.singletons(labels)


def test_partition_search_is_bounded():
    with pytest.raises(SizeBoundExceededError):
        list(enumerate_partitions(["a", "b", "c"], max_size=2))


def test_conditioning_images(walley):
    rule = c_conditioning(walley.credal, walley.partition("singletons"))
    full = MarginalSet.full_simplex(walley.space.y_labels)

    assert rule.domain == ("H", "T")
    assert rule.marginal_image("H").same_set(full)
    assert rule.marginal_image("T").same_set(full)

    trivial = c_conditioning(walley.credal, walley.partition("trivial"))
    assert same_set(trivial.image("H"), walley.credal)


def test_range_decomposition_merges_equal_images(example1):
    rule = c_conditioning(example1.credal, example1.partition("singletons"))
    decomposition = range_decomposition(rule)

    assert decomposition.cells == (("0", "1"),)
    assert decomposition.ranges[0].same_set(MarginalSet.full_simplex(example1.space.y_labels))


@pytest.mark.parametrize("fixture", ["example1", "monty", "walley"])
@pytest.mark.parametrize("partition", ["singletons", "trivial"])
def test_conditioning_is_calibrated(fixture, partition, request):
    scenario = request.getfixturevalue(fixture)
    rule = c_conditioning(scenario.credal, scenario.partition(partition))

    assert calibration_violations(scenario.credal, rule) == []
    assert is_calibrated_relative(scenario.credal, rule, audit=False)


def _overconfident_rule(walley):
    heads_twice = JointDistribution(((F(1), F(0)), (F(0), F(0))))
    images = {
        "H": CredalSet.singleton(walley.space, heads_twice),
        "T": condition_set(walley.credal, EventSet.singleton(walley.space, "T")),
    }
    return UpdateRuleOnP.custom(walley.credal, images)


def test_overconfident_rule_is_not_calibrated(walley):
    rule = _overconfident_rule(walley)
    violations = calibration_violations(walley.credal, rule)

    assert violations
    assert "['H']" in violations[0]
    assert not is_calibrated_relative(walley.credal, rule)


def test_rule_missing_an_observation(walley):
    partial = UpdateRuleOnP.custom(walley.credal, {"H": walley.credal})
    with pytest.raises(DomainMismatchError):
        range_decomposition(partial)
    with pytest.raises(DomainMismatchError):
        partial.image("T")


def test_narrower_than(walley):
    singletons = c_conditioning(walley.credal, walley.partition("singletons"))
    trivial = c_conditioning(walley.credal, walley.partition("trivial"))
    full = UpdateRuleOnP.full_simplex_rule(walley.credal)

    assert narrower_than(singletons, singletons) == RuleOrder.EQUAL
    assert narrower_than(singletons, trivial) == RuleOrder.INCOMPARABLE
    assert narrower_than(singletons, full) == RuleOrder.STRICTLY_NARROWER
    assert narrower_than(full, trivial) == RuleOrder.STRICTLY_WIDER
    assert narrower_than(singletons, trivial, compare_marginals=True) == RuleOrder.STRICTLY_WIDER


def test_narrower_than_needs_the_same_credal_set(walley, example1):
    first = c_conditioning(walley.credal, walley.partition("trivial"))
    second = c_conditioning(example1.credal, example1.partition("trivial"))
    with pytest.raises(DomainMismatchError):
        narrower_than(first, second)


def test_sharp_partitions(walley, monty):
    assert sharp_partitions(walley.credal) == [Partition.trivial(("H", "T")),
                                               Partition.singletons(("H", "T"))]
    assert len(sharp_partitions(monty.credal)) >= 1
    with pytest.raises(SizeBoundExceededError):
        sharp_partitions(walley.credal, max_size=1)


def test_sharp_partitions_by_outcome_marginals(walley):
    # singletons dilate to the full simplex, the trivial partition keeps (1/2, 1/2)
    assert sharp_partitions(walley.credal, compare_marginals=True) == [Partition.trivial(("H", "T"))]
    assert sharp_partitions(walley.credal) != sharp_partitions(walley.credal, compare_marginals=True)


def test_generalized_conditioning(walley):
    rule = c_conditioning(walley.credal, walley.partition("singletons"))
    found, partition = is_generalized_conditioning_on(walley.credal, rule)

    assert found
    assert partition == walley.partition("singletons")
    assert is_generalized_conditioning_on(walley.credal, _overconfident_rule(walley)) == (False, None)


def test_cell_game_value(example1, monty):
    assert cell_game_value(example1.credal, example1.loss, ("0",)) == (HALF, (HALF, HALF))
    assert cell_game_value(monty.credal, monty.loss, ("G2", "G3"))[0] == F(2, 3)


@pytest.mark.parametrize("rule, partition, expected", [
    ("condition_uniform", "singletons", True),
    ("switch", "singletons", True),
    ("stick", "singletons", False),
    ("ignore_uniform", "trivial", True),
    ("switch", "trivial", False),
    ("condition_uniform", "trivial", False),
])
def test_monty_rules_based_on_conditioning(monty, rule, partition, expected):
    assert rule_is_based_on_c_conditioning(
        monty.credal, monty.loss, monty.rule(rule), monty.partition(partition)) is expected


def test_neither_conditioning_rule_is_minimax(monty):
    minimax = solve_apriori(monty.credal, monty.loss).value
    assert worst_case_loss(monty.credal, monty.loss, monty.rule("ignore_uniform")) == F(2, 3) > minimax
    assert worst_case_loss(monty.credal, monty.loss, monty.rule("condition_uniform")) == HALF > minimax


def test_conditioning_rules_are_based_on_their_partition(monty, example1):
    for scenario in (monty, example1):
        for name in ("singletons", "trivial"):
            partition = scenario.partition(name)
            rule = c_conditioning_rule(scenario.credal, scenario.loss, partition)
            assert rule_is_based_on_c_conditioning(scenario.credal, scenario.loss, rule, partition)

    trivial_rule = c_conditioning_rule(monty.credal, monty.loss, monty.partition("trivial"))
    assert ignores_information(trivial_rule)
    assert worst_case_loss(monty.credal, monty.loss, trivial_rule) == F(2, 3)
