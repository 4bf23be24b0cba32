#!/usr/bin/env python3
"""
Exact distributions and credal sets over a finite product space X x Y.

Credal sets are kept in V-representation: a vertex list whose convex hull is
the set. Membership and inclusion are decided by feasibility LPs in rational
arithmetic (see lp_core).
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

try:
    from .errors import (DimensionMismatchError, EmptyConditionedSetError,
                         InvalidCredalSetError, InvalidDistributionError,
                         UnknownLabelError)
    from .lp_core import LinearProgram, is_feasible
except ImportError:
    from errors import (DimensionMismatchError, EmptyConditionedSetError,
                        InvalidCredalSetError, InvalidDistributionError,
                        UnknownLabelError)
    from lp_core import LinearProgram, is_feasible


logger = logging.getLogger(__name__)

# A distribution over a single label set (Y, X or A).
Distribution = Tuple[Fraction, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def to_fraction(value) -> Fraction:
    """Exact conversion; floats are refused so that nothing inexact leaks in."""
    if isinstance(value, float):
        raise InvalidDistributionError(f"Refusing inexact float {value!r}; use 'p/q' strings")
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InvalidDistributionError(f"Not a rational number: {value!r}")


def distribution(values: Iterable) -> Distribution:
    """Validated distribution over one label set."""
    dist = tuple(to_fraction(v) for v in values)
    if not dist:
        raise InvalidDistributionError("Distribution has no entries")
    if any(v < 0 for v in dist):
        raise InvalidDistributionError(f"Distribution has a negative entry: {format_vector(dist)}")
    if sum(dist) != 1:
        raise InvalidDistributionError(f"Distribution sums to {sum(dist)}, not 1")
    return dist


def point_mass(size: int, index: int) -> Distribution:
    return tuple(ONE if i == index else ZERO for i in range(size))


def format_vector(values: Sequence[Fraction]) -> str:
    return "(" + ", ".join(str(v) for v in values) + ")"


@dataclass(frozen=True)
class SpaceSpec:
    """Observation, outcome and action labels."""
    x_labels: Tuple[str, ...]
    y_labels: Tuple[str, ...]
    a_labels: Tuple[str, ...]

    def __post_init__(self):
        for name in ("x_labels", "y_labels", "a_labels"):
            labels = tuple(str(v) for v in getattr(self, name))
            object.__setattr__(self, name, labels)
            if not labels:
                raise InvalidCredalSetError(f"{name} must not be empty")
            if len(set(labels)) != len(labels):
                raise InvalidCredalSetError(f"{name} has duplicate labels: {list(labels)}")

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.x_labels), len(self.y_labels)

    def x_index(self, label: str) -> int:
        return self._index(self.x_labels, label, "observation")

    def y_index(self, label: str) -> int:
        return self._index(self.y_labels, label, "outcome")

    def a_index(self, label: str) -> int:
        return self._index(self.a_labels, label, "action")

    @staticmethod
    def _index(labels: Tuple[str, ...], label: str, kind: str) -> int:
        try:
            return labels.index(str(label))
        except ValueError:
            raise UnknownLabelError(f"Unknown {kind} label '{label}' (declared: {list(labels)})")


@dataclass(frozen=True)
class JointDistribution:
    """Exact probability table p(x, y); rows are observations."""
    probs: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in row) for row in self.probs)
        object.__setattr__(self, "probs", rows)
        if not rows or not rows[0]:
            raise InvalidDistributionError("Joint distribution table is empty")
        if any(len(r) != len(rows[0]) for r in rows):
            raise InvalidDistributionError("Joint distribution rows have different lengths")
        if any(v < 0 for r in rows for v in r):
            raise InvalidDistributionError("Joint distribution has a negative entry")
        total = sum(v for r in rows for v in r)
        if total != 1:
            raise InvalidDistributionError(f"Joint distribution sums to {total}, not 1")

    @classmethod
    def from_flat(cls, values: Sequence, n_x: int, n_y: int) -> "JointDistribution":
        return cls(tuple(tuple(values[i * n_y:(i + 1) * n_y]) for i in range(n_x)))

    @classmethod
    def product(cls, x_marginal: Sequence, y_marginal: Sequence) -> "JointDistribution":
        return cls(tuple(tuple(Fraction(m) * Fraction(q) for q in y_marginal) for m in x_marginal))

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.probs), len(self.probs[0])

    def flat(self) -> Tuple[Fraction, ...]:
        return tuple(v for r in self.probs for v in r)

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        x, y = index
        return self.probs[x][y]


@dataclass(frozen=True)
class EventSet:
    """The event X in S, for S a nonempty set of observation labels."""
    space: SpaceSpec
    labels: Tuple[str, ...]

    def __post_init__(self):
        requested = set(str(v) for v in self.labels)
        if not requested:
            raise InvalidCredalSetError("Event must contain at least one observation")
        unknown = requested - set(self.space.x_labels)
        if unknown:
            raise UnknownLabelError(f"Event refers to undeclared observations: {sorted(unknown)}")
        # canonical order follows the space
        object.__setattr__(self, "labels", tuple(x for x in self.space.x_labels if x in requested))

    @classmethod
    def singleton(cls, space: SpaceSpec, label: str) -> "EventSet":
        space.x_index(label)
        return cls(space, (label,))

    @classmethod
    def full(cls, space: SpaceSpec) -> "EventSet":
        return cls(space, space.x_labels)

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(self.space.x_index(x) for x in self.labels)


class CredalValidator:
    """Checks the structural invariants of a credal set."""

    @staticmethod
    def validate(credal: "CredalSet") -> List[str]:
        errors = []
        if not credal.vertices:
            errors.append("Credal set must have at least one vertex")
        n_x, n_y = credal.space.shape
        for k, v in enumerate(credal.vertices):
            if not isinstance(v, JointDistribution):
                errors.append(f"Vertex {k} is not a joint distribution")
                continue
            if v.shape != (n_x, n_y):
                errors.append(f"Vertex {k} has shape {v.shape}, expected {(n_x, n_y)}")
        return errors

    @staticmethod
    def is_valid(credal: "CredalSet") -> bool:
        return len(CredalValidator.validate(credal)) == 0


@dataclass(frozen=True)
class CredalSet:
    """Convex hull of ``vertices``; equality of sets is ``same_set``, not ``==``."""
    space: SpaceSpec
    vertices: Tuple[JointDistribution, ...]
    boundary_approximation: bool = field(default=False, compare=False)  # closure taken on conditioning

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        errors = CredalValidator.validate(self)
        if errors:
            raise InvalidCredalSetError("; ".join(errors))

    @classmethod
    def from_vertices(cls, space: SpaceSpec, vertices: Iterable[JointDistribution],
                      minimize: bool = True, boundary_approximation: bool = False) -> "CredalSet":
        vertices = list(vertices)
        if minimize:
            n_x, n_y = space.shape
            kept = minimize_points([v.flat() for v in vertices])
            vertices = [JointDistribution.from_flat(p, n_x, n_y) for p in kept]
        return cls(space, tuple(vertices), boundary_approximation)

    @classmethod
    def singleton(cls, space: SpaceSpec, p: JointDistribution) -> "CredalSet":
        return cls(space, (p,))

    @classmethod
    def full_simplex(cls, space: SpaceSpec) -> "CredalSet":
        n_x, n_y = space.shape
        size = n_x * n_y
        return cls(space, tuple(JointDistribution.from_flat(point_mass(size, i), n_x, n_y)
                                for i in range(size)))

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class MarginalSet:
    """Convex hull of distributions over one label set (P_Y, P_X, (P|E)_Y)."""
    labels: Tuple[str, ...]
    vertices: Tuple[Distribution, ...]
    boundary_approximation: bool = field(default=False, compare=False)

    @classmethod
    def from_points(cls, labels: Sequence[str], points: Iterable[Sequence[Fraction]],
                    boundary_approximation: bool = False) -> "MarginalSet":
        return cls(tuple(labels), tuple(minimize_points([tuple(p) for p in points])),
                   boundary_approximation)

    @classmethod
    def full_simplex(cls, labels: Sequence[str]) -> "MarginalSet":
        return cls(tuple(labels), tuple(point_mass(len(labels), i) for i in range(len(labels))))

    def contains(self, q: Sequence[Fraction]) -> bool:
        if len(q) != len(self.labels):
            raise DimensionMismatchError(
                f"Distribution of length {len(q)} tested against a set over {len(self.labels)} labels")
        return _hull_weights(self.vertices, tuple(Fraction(v) for v in q)) is not None

    def subset_of(self, other: "MarginalSet") -> bool:
        if self.labels != other.labels:
            raise DimensionMismatchError(f"Label sets differ: {list(self.labels)} vs {list(other.labels)}")
        return all(other.contains(v) for v in self.vertices)

    def same_set(self, other: "MarginalSet") -> bool:
        return self.subset_of(other) and other.subset_of(self)

    def is_singleton(self) -> bool:
        return len(self.vertices) == 1


@lru_cache(maxsize=4096)
def _hull_weights(points: Tuple[Tuple[Fraction, ...], ...],
                  target: Tuple[Fraction, ...]) -> Optional[Tuple[Fraction, ...]]:
    """Convex weights expressing ``target`` over ``points``, or None."""
    if not points:
        return None
    if target in points:
        return tuple(ONE if p == target else ZERO for p in points)
    k = len(points)
    lp = LinearProgram(objective=[ZERO] * k)
    lp.add_constraint([ONE] * k, "=", 1)
    for c in range(len(target)):
        lp.add_constraint([p[c] for p in points], "=", target[c])
    return is_feasible(lp)


def minimize_points(points: Sequence[Tuple[Fraction, ...]]) -> List[Tuple[Fraction, ...]]:
    """Drop duplicates, then every point inside the hull of the rest (input order)."""
    kept: List[Tuple[Fraction, ...]] = []
    for p in points:
        if p not in kept:
            kept.append(p)
    i = 0
    while i < len(kept):
        others = tuple(kept[:i] + kept[i + 1:])
        if others and _hull_weights(others, kept[i]) is not None:
            del kept[i]
        else:
            i += 1
    return kept


def _check_space(credal: CredalSet, shape: Tuple[int, int]) -> None:
    if credal.space.shape != shape:
        raise DimensionMismatchError(
            f"Distribution of shape {shape} does not live on a {credal.space.shape} space")


def marginal_y(p: JointDistribution) -> Distribution:
    n_x, n_y = p.shape
    return tuple(sum((p.probs[x][y] for x in range(n_x)), ZERO) for y in range(n_y))


def marginal_x(p: JointDistribution) -> Distribution:
    return tuple(sum(row, ZERO) for row in p.probs)


def event_probability(p: JointDistribution, e: EventSet) -> Fraction:
    return sum((sum(p.probs[x], ZERO) for x in e.indices), ZERO)


def condition_distribution(p: JointDistribution, e: EventSet) -> Optional[JointDistribution]:
    """p restricted to E and renormalized; None when p(E) = 0."""
    mass = event_probability(p, e)
    if mass == 0:
        return None
    inside = set(e.indices)
    return JointDistribution(tuple(
        tuple(v / mass for v in row) if x in inside else tuple(ZERO for _ in row)
        for x, row in enumerate(p.probs)
    ))


def condition_set(credal: CredalSet, e: EventSet) -> CredalSet:
    """Closed hull of the conditioned positive-mass vertices."""
    return _condition_set(credal, e, credal.boundary_approximation)


# CredalSet equality ignores the closure flag, so the flag is part of the key
@lru_cache(maxsize=1024)
def _condition_set(credal: CredalSet, e: EventSet, flagged: bool) -> CredalSet:
    if e.space != credal.space:
        raise DimensionMismatchError("Event and credal set are defined on different spaces")
    conditioned = []
    dropped = 0
    for v in credal.vertices:
        c = condition_distribution(v, e)
        if c is None:
            dropped += 1
        else:
            conditioned.append(c)
    if not conditioned:
        raise EmptyConditionedSetError(
            f"Every vertex gives the event X in {list(e.labels)} probability zero")
    if dropped:
        logger.debug("conditioning on %s dropped %d zero-mass vertices", list(e.labels), dropped)
    return CredalSet.from_vertices(
        credal.space, conditioned,
        boundary_approximation=flagged or dropped > 0,
    )


def contains(credal: CredalSet, p: JointDistribution) -> bool:
    _check_space(credal, p.shape)
    return _hull_weights(tuple(v.flat() for v in credal.vertices), p.flat()) is not None


def subset_of(inner: CredalSet, outer: CredalSet) -> bool:
    if inner.space != outer.space:
        raise DimensionMismatchError("Credal sets are defined on different spaces")
    return all(contains(outer, v) for v in inner.vertices)


def same_set(first: CredalSet, second: CredalSet) -> bool:
    return subset_of(first, second) and subset_of(second, first)


def reachable_observations(credal: CredalSet) -> List[str]:
    """Observations with positive probability under some vertex, in space order."""
    return [x for i, x in enumerate(credal.space.x_labels)
            if any(sum(v.probs[i], ZERO) > 0 for v in credal.vertices)]


def marginal_x_set(credal: CredalSet) -> MarginalSet:
    return MarginalSet.from_points(credal.space.x_labels,
                                   (marginal_x(v) for v in credal.vertices),
                                   credal.boundary_approximation)


def marginal_y_set(credal: CredalSet) -> MarginalSet:
    """P_Y; marginalization is linear, so vertex images generate it."""
    return MarginalSet.from_points(credal.space.y_labels,
                                   (marginal_y(v) for v in credal.vertices),
                                   credal.boundary_approximation)


def conditioned_marginal_set(credal: CredalSet, e: EventSet) -> MarginalSet:
    """(P|E)_Y."""
    conditioned = condition_set(credal, e)
    return MarginalSet.from_points(credal.space.y_labels,
                                   (marginal_y(v) for v in conditioned.vertices),
                                   conditioned.boundary_approximation)


def hull(credal: CredalSet) -> CredalSet:
    """All recombinations m(x) * c_x(y) of an X-marginal with per-x conditionals."""
    space = credal.space
    n_x, n_y = space.shape
    x_vertices = marginal_x_set(credal).vertices

    conditionals: Dict[int, Tuple[Distribution, ...]] = {}
    flagged = credal.boundary_approximation
    for label in reachable_observations(credal):
        cond = conditioned_marginal_set(credal, EventSet.singleton(space, label))
        conditionals[space.x_index(label)] = cond.vertices
        flagged = flagged or cond.boundary_approximation

    generators: List[Tuple[Fraction, ...]] = []
    for m in x_vertices:
        support = [x for x in range(n_x) if m[x] > 0]
        for choice in itertools.product(*(conditionals[x] for x in support)):
            rows = [[ZERO] * n_y for _ in range(n_x)]
            for x, c in zip(support, choice):
                rows[x] = [m[x] * cy for cy in c]
            point = tuple(v for r in rows for v in r)
            if point not in generators:
                generators.append(point)
    logger.debug("hull: %d X-marginal vertices, %d distinct recombinations",
                 len(x_vertices), len(generators))

    kept = minimize_points(generators)
    return CredalSet(space, tuple(JointDistribution.from_flat(p, n_x, n_y) for p in kept), flagged)


def equals_hull(credal: CredalSet) -> bool:
    return same_set(credal, hull(credal))


def find_independent_witness(credal: CredalSet, q: Sequence) -> Optional[JointDistribution]:
    """A member w (x) q of P with Y-marginal q, or None."""
    n_x, n_y = credal.space.shape
    if len(q) != n_y:
        raise DimensionMismatchError(f"Outcome distribution has {len(q)} entries, expected {n_y}")
    q = distribution(q)
    k = len(credal.vertices)

    # Variables: w_0..w_{|X|-1}, then lambda_0..lambda_{k-1}.
    lp = LinearProgram(objective=[ZERO] * (n_x + k))
    lp.add_constraint([ONE] * n_x + [ZERO] * k, "=", 1)
    lp.add_constraint([ZERO] * n_x + [ONE] * k, "=", 1)
    for x in range(n_x):
        for y in range(n_y):
            row = [ZERO] * (n_x + k)
            row[x] = -q[y]
            for j, v in enumerate(credal.vertices):
                row[n_x + j] = v.probs[x][y]
            lp.add_constraint(row, "=", 0)
    point = is_feasible(lp)
    if point is None:
        return None
    return JointDistribution.product(point[:n_x], q)


def lower_upper_probability(credal: CredalSet, y_event: Iterable[str]) -> Tuple[Fraction, Fraction]:
    """Envelope of Pr(Y in event) over P; a linear functional, so vertices suffice."""
    indices = {credal.space.y_index(y) for y in y_event}
    values = [sum((marginal_y(v)[i] for i in indices), ZERO) for v in credal.vertices]
    return min(values), max(values)


def _expectations(credal: CredalSet, gamble: Sequence[Sequence]) -> List[Fraction]:
    n_x, n_y = credal.space.shape
    if len(gamble) != n_x or any(len(r) != n_y for r in gamble):
        raise DimensionMismatchError(f"Gamble must be a {n_x}x{n_y} table")
    f = [[to_fraction(v) for v in r] for r in gamble]
    return [sum((v.probs[x][y] * f[x][y] for x in range(n_x) for y in range(n_y)), ZERO)
            for v in credal.vertices]


def lower_expectation(credal: CredalSet, gamble: Sequence[Sequence]) -> Fraction:
    return min(_expectations(credal, gamble))


def upper_expectation(credal: CredalSet, gamble: Sequence[Sequence]) -> Fraction:
    return max(_expectations(credal, gamble))


@dataclass(frozen=True)
class DilationEntry:
    """Prior outcome set versus the set conditioned on one observation."""
    observation: str
    conditioned: MarginalSet
    contains_prior: bool           # P_Y is inside (P|X=x)_Y
    strict: bool                   # ... and the inclusion is strict


@dataclass(frozen=True)
class DilationReport:
    prior: MarginalSet
    entries: Tuple[DilationEntry, ...]

    @property
    def dilates(self) -> bool:
        return bool(self.entries) and all(e.contains_prior and e.strict for e in self.entries)


def detect_dilation(credal: CredalSet) -> DilationReport:
    """Whether every possible observation strictly widens the outcome set."""
    prior = marginal_y_set(credal)
    entries = []
    for label in reachable_observations(credal):
        cond = conditioned_marginal_set(credal, EventSet.singleton(credal.space, label))
        inside = prior.subset_of(cond)
        strict = inside and not cond.subset_of(prior)
        entries.append(DilationEntry(label, cond, inside, strict))
    return DilationReport(prior, tuple(entries))


def find_common_observation_marginal(credal: CredalSet, outcome_marginals: Sequence[Sequence]
                                     ) -> Optional[Distribution]:
    """One w with w (x) q in P for every listed q, or None.

    By linearity in q, w (x) q is then in P for every q in the hull of the list.
    """
    n_x, n_y = credal.space.shape
    qs = [distribution(q) for q in outcome_marginals]
    if any(len(q) != n_y for q in qs):
        raise DimensionMismatchError(f"Outcome distributions must have {n_y} entries")
    k = len(credal.vertices)
    width = n_x + k * len(qs)

    # Variables: w_0..w_{|X|-1}, then one block of vertex weights per q.
    lp = LinearProgram(objective=[ZERO] * width)
    lp.add_constraint([ONE] * n_x + [ZERO] * (width - n_x), "=", 1)
    for g, q in enumerate(qs):
        start = n_x + g * k
        row = [ZERO] * width
        for j in range(k):
            row[start + j] = ONE
        lp.add_constraint(row, "=", 1)
        for x in range(n_x):
            for y in range(n_y):
                row = [ZERO] * width
                row[x] = -q[y]
                for j, v in enumerate(credal.vertices):
                    row[start + j] = v.probs[x][y]
                lp.add_constraint(row, "=", 0)
    point = is_feasible(lp)
    return None if point is None else tuple(point[:n_x])
