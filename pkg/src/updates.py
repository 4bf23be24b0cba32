#!/usr/bin/env python3
"""
Update rules evaluated at a fixed credal set: conditioning on partition cells,
calibration, the narrower-than order and the search for sharply calibrated
partitions.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

try:
    from .config import get_settings
    from .credal import (CredalSet, Distribution, EventSet, JointDistribution, MarginalSet,
                         condition_distribution, condition_set, event_probability,
                         format_vector, marginal_y, reachable_observations, same_set,
                         subset_of)
    from .errors import (DomainMismatchError, EmptyConditionedSetError,
                         InvalidPartitionError, SizeBoundExceededError)
    from .game import DecisionRule, LossFunction, cell_game, ignore_rule_value
except ImportError:
    from config import get_settings
    from credal import (CredalSet, Distribution, EventSet, JointDistribution, MarginalSet,
                        condition_distribution, condition_set, event_probability,
                        format_vector, marginal_y, reachable_observations, same_set,
                        subset_of)
    from errors import (DomainMismatchError, EmptyConditionedSetError,
                        InvalidPartitionError, SizeBoundExceededError)
    from game import DecisionRule, LossFunction, cell_game, ignore_rule_value


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty cells covering ``labels``; cells and their members follow label order."""
    labels: Tuple[str, ...]
    cells: Tuple[Tuple[str, ...], ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        seen: Dict[str, int] = {}
        for i, cell in enumerate(self.cells):
            if not cell:
                raise InvalidPartitionError(f"Cell {i} is empty")
            for x in cell:
                if x not in labels:
                    raise InvalidPartitionError(f"Cell {i} refers to undeclared observation '{x}'")
                if x in seen:
                    raise InvalidPartitionError(f"Observation '{x}' appears in cells {seen[x]} and {i}")
                seen[x] = i
        missing = [x for x in labels if x not in seen]
        if missing:
            raise InvalidPartitionError(f"Observations not covered by any cell: {missing}")

        order = {x: k for k, x in enumerate(labels)}
        cells = sorted((tuple(sorted(c, key=order.__getitem__)) for c in self.cells),
                       key=lambda c: order[c[0]])
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "cells", tuple(cells))

    @classmethod
    def singletons(cls, labels: Sequence[str]) -> "Partition":
        return cls(tuple(labels), tuple((x,) for x in labels))

    @classmethod
    def trivial(cls, labels: Sequence[str]) -> "Partition":
        return cls(tuple(labels), (tuple(labels),))

    @classmethod
    def from_rgs(cls, labels: Sequence[str], rgs: Sequence[int]) -> "Partition":
        cells: Dict[int, List[str]] = {}
        for x, block in zip(labels, rgs):
            cells.setdefault(block, []).append(x)
        return cls(tuple(labels), tuple(tuple(cells[b]) for b in sorted(cells)))

    def cell_of(self, x: str) -> Tuple[str, ...]:
        for cell in self.cells:
            if x in cell:
                return cell
        raise InvalidPartitionError(f"Observation '{x}' is not in the partition")

    def to_rgs(self) -> Tuple[int, ...]:
        return tuple(next(i for i, c in enumerate(self.cells) if x in c) for x in self.labels)

    def __str__(self) -> str:
        return " | ".join("{" + ", ".join(c) + "}" for c in self.cells)


def _restricted_growth_strings(n: int) -> Iterator[Tuple[int, ...]]:
    """All restricted growth strings of length n, lexicographically."""
    if n == 0:
        return
    prefix = [0]

    def extend(top: int) -> Iterator[Tuple[int, ...]]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for block in range(top + 2):
            prefix.append(block)
            yield from extend(max(top, block))
            prefix.pop()

    yield from extend(0)


def enumerate_partitions(labels: Sequence[str], max_size: Optional[int] = None) -> Iterator[Partition]:
    """Every partition of ``labels``, in restricted-growth-string order."""
    bound = max_size if max_size is not None else get_settings().max_partition_size
    if len(labels) > bound:
        raise SizeBoundExceededError(
            f"Partition search over {len(labels)} observations exceeds the bound of {bound}")
    for rgs in _restricted_growth_strings(len(labels)):
        yield Partition.from_rgs(labels, rgs)


class RuleOrder(Enum):
    EQUAL = "equal"
    STRICTLY_NARROWER = "strictly-narrower"
    STRICTLY_WIDER = "strictly-wider"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class UpdateRuleOnP:
    """An update rule evaluated at one credal set: observation -> set of joint distributions."""
    credal: CredalSet
    images: Tuple[Tuple[str, CredalSet], ...]
    provenance: str = "custom"

    @classmethod
    def custom(cls, credal: CredalSet, images: Mapping[str, CredalSet],
               provenance: str = "custom") -> "UpdateRuleOnP":
        for x, image in images.items():
            credal.space.x_index(x)
            if image.space != credal.space:
                raise DomainMismatchError(f"Image at '{x}' lives on a different space")
        ordered = tuple((x, images[x]) for x in credal.space.x_labels if x in images)
        return cls(credal, ordered, provenance)

    @classmethod
    def full_simplex_rule(cls, credal: CredalSet) -> "UpdateRuleOnP":
        full = CredalSet.full_simplex(credal.space)
        return cls.custom(credal, {x: full for x in reachable_observations(credal)}, "full-simplex")

    @property
    def domain(self) -> Tuple[str, ...]:
        return tuple(x for x, _ in self.images)

    def image(self, x: str) -> CredalSet:
        for label, image in self.images:
            if label == x:
                return image
        raise DomainMismatchError(f"Update rule is not defined at observation '{x}'")

    def marginal_image(self, x: str) -> MarginalSet:
        image = self.image(x)
        return MarginalSet.from_points(self.credal.space.y_labels,
                                       (marginal_y(v) for v in image.vertices),
                                       image.boundary_approximation)


@dataclass(frozen=True)
class RangeDecomposition:
    """Distinct outcome-marginal images and the observations producing each."""
    ranges: Tuple[MarginalSet, ...]
    cells: Tuple[Tuple[str, ...], ...]

    def __iter__(self):
        return iter(zip(self.ranges, self.cells))


def c_conditioning(credal: CredalSet, partition: Partition) -> UpdateRuleOnP:
    """x -> P | X in C(x); observations in unreachable cells get no image."""
    if partition.labels != credal.space.x_labels:
        raise DomainMismatchError("Partition does not cover the observations of the credal set")
    images = {}
    for cell in partition.cells:
        try:
            image = condition_set(credal, EventSet(credal.space, cell))
        except EmptyConditionedSetError:
            logger.debug("cell %s is unreachable; no image", list(cell))
            continue
        for x in cell:
            images[x] = image
    return UpdateRuleOnP.custom(credal, images, f"c-conditioning {partition}")


def _require_domain(credal: CredalSet, rule: UpdateRuleOnP) -> List[str]:
    reachable = reachable_observations(credal)
    missing = [x for x in reachable if x not in rule.domain]
    if missing:
        raise DomainMismatchError(f"Update rule has no image at reachable observations {missing}")
    return reachable


def range_decomposition(rule: UpdateRuleOnP) -> RangeDecomposition:
    """Group reachable observations by equal outcome-marginal images."""
    ranges: List[MarginalSet] = []
    cells: List[List[str]] = []
    for x in _require_domain(rule.credal, rule):
        image = rule.marginal_image(x)
        for i, existing in enumerate(ranges):
            if existing.same_set(image):
                cells[i].append(x)
                break
        else:
            ranges.append(image)
            cells.append([x])
    return RangeDecomposition(tuple(ranges), tuple(tuple(c) for c in cells))


def calibration_violations(credal: CredalSet, rule: UpdateRuleOnP,
                           audit: Optional[bool] = None) -> List[str]:
    """Members of P whose conditional on a range's cell falls outside that range."""
    if audit is None:
        audit = get_settings().calibration_audit
    candidates = list(credal.vertices)
    if audit:
        for p, r in itertools.combinations(credal.vertices, 2):
            candidates.append(JointDistribution(tuple(
                tuple((a + b) / 2 for a, b in zip(row_p, row_r))
                for row_p, row_r in zip(p.probs, r.probs)
            )))

    violations = []
    for announced, cell in range_decomposition(rule):
        event = EventSet(credal.space, cell)
        for k, p in enumerate(candidates):
            if event_probability(p, event) == 0:
                continue
            q = marginal_y(condition_distribution(p, event))
            if not announced.contains(q):
                origin = f"vertex {k}" if k < len(credal.vertices) else "vertex midpoint"
                violations.append(
                    f"{origin} conditioned on X in {list(cell)} gives {format_vector(q)}, "
                    f"outside the announced set")
    return violations


def is_calibrated_relative(credal: CredalSet, rule: UpdateRuleOnP,
                           audit: Optional[bool] = None) -> bool:
    return len(calibration_violations(credal, rule, audit)) == 0


def _image_for(rule: UpdateRuleOnP, x: str, compare_marginals: bool):
    return rule.marginal_image(x) if compare_marginals else rule.image(x)


def _included(inner, outer) -> bool:
    if isinstance(inner, MarginalSet):
        return inner.subset_of(outer)
    return subset_of(inner, outer)


def narrower_than(first: UpdateRuleOnP, second: UpdateRuleOnP,
                  compare_marginals: bool = False) -> RuleOrder:
    """Compare two rules image by image over the reachable observations."""
    if first.credal.space != second.credal.space or (
            first.credal != second.credal and not same_set(first.credal, second.credal)):
        raise DomainMismatchError("Update rules are evaluated at different credal sets")
    reachable = _require_domain(first.credal, first)
    _require_domain(second.credal, second)

    forward = backward = True
    for x in reachable:
        a = _image_for(first, x, compare_marginals)
        b = _image_for(second, x, compare_marginals)
        forward = forward and _included(a, b)
        backward = backward and _included(b, a)
        if not forward and not backward:
            return RuleOrder.INCOMPARABLE
    if forward and backward:
        return RuleOrder.EQUAL
    return RuleOrder.STRICTLY_NARROWER if forward else RuleOrder.STRICTLY_WIDER


def sharp_partitions(credal: CredalSet, max_size: Optional[int] = None,
                     compare_marginals: bool = False) -> List[Partition]:
    """Partitions whose conditioning has no strictly narrower conditioning rule.

    With ``compare_marginals`` the rules are ordered by their outcome-marginal
    images instead of their joint images.
    """
    partitions = list(enumerate_partitions(credal.space.x_labels, max_size))
    rules = [c_conditioning(credal, c) for c in partitions]
    logger.debug("comparing %d partitions pairwise", len(partitions))

    minimal = []
    for i, rule in enumerate(rules):
        dominated = any(
            narrower_than(other, rule, compare_marginals) == RuleOrder.STRICTLY_NARROWER
            for j, other in enumerate(rules) if j != i
        )
        if not dominated:
            minimal.append(partitions[i])
    return minimal


def is_generalized_conditioning_on(credal: CredalSet, rule: UpdateRuleOnP,
                                   max_size: Optional[int] = None) -> Tuple[bool, Optional[Partition]]:
    """Look for a partition whose conditioning reproduces the rule at every reachable observation."""
    reachable = _require_domain(credal, rule)
    for partition in enumerate_partitions(credal.space.x_labels, max_size):
        candidate = c_conditioning(credal, partition)
        if all(x in candidate.domain and same_set(candidate.image(x), rule.image(x))
               for x in reachable):
            return True, partition
    return False, None


def cell_game_value(credal: CredalSet, loss: LossFunction,
                    cell: Sequence[str]) -> Tuple[Fraction, Distribution]:
    """Value and optimal act of the matrix game against (P | X in cell)_Y."""
    _, game = cell_game(credal, loss, EventSet(credal.space, tuple(cell)))
    return game.value, game.row_strategy


def rule_is_based_on_c_conditioning(credal: CredalSet, loss: LossFunction,
                                    rule: DecisionRule, partition: Partition) -> bool:
    """Each act is optimal for its cell's game, and acts are constant within a cell."""
    reachable = reachable_observations(credal)
    values: Dict[Tuple[str, ...], Fraction] = {}
    acts: Dict[Tuple[str, ...], Distribution] = {}
    for x in reachable:
        cell = partition.cell_of(x)
        act = rule.rows[credal.space.x_index(x)]
        if cell in acts and acts[cell] != act:
            return False
        acts[cell] = act
        if cell not in values:
            values[cell], _ = cell_game_value(credal, loss, cell)
        marginals = condition_set(credal, EventSet(credal.space, cell)).vertices
        worst = max(loss.act_loss(marginal_y(v), act) for v in marginals)
        if worst != values[cell]:
            return False
    return True


def c_conditioning_rule(credal: CredalSet, loss: LossFunction, partition: Partition) -> DecisionRule:
    """Decision rule playing each cell's minimax act; unreachable cells play the ignore act."""
    _, fallback = ignore_rule_value(credal, loss)
    by_cell: Dict[Tuple[str, ...], Distribution] = {}
    rows = []
    for x in credal.space.x_labels:
        cell = partition.cell_of(x)
        if cell not in by_cell:
            try:
                _, by_cell[cell] = cell_game_value(credal, loss, cell)
            except EmptyConditionedSetError:
                by_cell[cell] = fallback
        rows.append(by_cell[cell])
    return DecisionRule(tuple(rows))
