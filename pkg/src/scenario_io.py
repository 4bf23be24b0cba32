#!/usr/bin/env python3
"""
Scenario documents, builtin fixtures and report rendering.

A scenario bundles the observation/outcome/action labels, the loss table and
the credal set's vertices, plus optional named partitions and decision rules.
Documents are JSON; every rational is a "p/q" string.
"""

import json
import logging
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Context, Decimal
from fractions import Fraction
from functools import lru_cache, singledispatch
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError

try:
    from .credal import CredalSet, DilationReport, JointDistribution, SpaceSpec
    from .errors import (ScenarioParseError, ScenarioValidationError,
                         UnknownScenarioError)
    from .game import (DecisionRule, EquilibriumCertificate, GameSolution,
                       IgnoreCheck, InconsistencyReport, LossFunction,
                       PosteriorSolution)
    from .oracle import OracleCertificate
    from .updates import Partition, RangeDecomposition
except ImportError:
    from credal import CredalSet, DilationReport, JointDistribution, SpaceSpec
    from errors import (ScenarioParseError, ScenarioValidationError,
                        UnknownScenarioError)
    from game import (DecisionRule, EquilibriumCertificate, GameSolution,
                      IgnoreCheck, InconsistencyReport, LossFunction,
                      PosteriorSolution)
    from oracle import OracleCertificate
    from updates import Partition, RangeDecomposition


logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).parent / "scenarios"
BUILTIN_NAMES = ("example1", "monty_hall", "walley_coins")
BUILTIN_PREFIX = "builtin:"
SOLVER_METHOD = "two-phase simplex, Bland's rule"

_DISPLAY = Context(prec=6, rounding=ROUND_HALF_EVEN)


@dataclass(frozen=True)
class Scenario:
    """Labels, loss and credal set, plus named partitions and decision rules."""
    name: str
    space: SpaceSpec
    loss: LossFunction
    credal: CredalSet
    partitions: Dict[str, Partition] = field(default_factory=dict, hash=False)
    rules: Dict[str, DecisionRule] = field(default_factory=dict, hash=False)
    description: str = field(default="", compare=False)

    def partition(self, name: str) -> Partition:
        if name not in self.partitions:
            raise ScenarioValidationError(
                [f"Scenario '{self.name}' has no partition '{name}' (available: {sorted(self.partitions)})"])
        return self.partitions[name]

    def rule(self, name: str) -> DecisionRule:
        if name not in self.rules:
            raise ScenarioValidationError(
                [f"Scenario '{self.name}' has no rule '{name}' (available: {sorted(self.rules)})"])
        return self.rules[name]


class ScenarioDocument(BaseModel):
    """On-disk shape of a scenario."""
    model_config = ConfigDict(extra="forbid")

    name: str
    description: str = ""
    x_labels: List[str]
    y_labels: List[str]
    a_labels: List[str]
    loss: List[List[str]]                                   # |Y| rows x |A|
    vertices: List[List[List[str]]]                         # each |X| rows x |Y|
    partitions: Dict[str, List[List[str]]] = {}
    rules: Dict[str, Dict[str, Dict[str, str]]] = {}        # rule -> x -> a -> weight


def _parse_rational(text: str) -> Optional[Fraction]:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError, AttributeError):
        return None


class ScenarioValidator:
    """Cross-reference and probability checks on a parsed document."""

    @staticmethod
    def validate(doc: ScenarioDocument) -> List[str]:
        errors = []

        for name in ("x_labels", "y_labels", "a_labels"):
            labels = getattr(doc, name)
            if not labels:
                errors.append(f"{name} must not be empty")
            if len(set(labels)) != len(labels):
                errors.append(f"{name} has duplicate labels")
        n_x, n_y, n_a = len(doc.x_labels), len(doc.y_labels), len(doc.a_labels)

        if len(doc.loss) != n_y or any(len(r) != n_a for r in doc.loss):
            errors.append(f"loss must have {n_y} rows of {n_a} entries (outcomes x actions)")
        for i, row in enumerate(doc.loss):
            for j, v in enumerate(row):
                if _parse_rational(v) is None:
                    errors.append(f"loss[{i}][{j}] is not a rational: '{v}'")

        if not doc.vertices:
            errors.append("at least one vertex is required")
        for k, table in enumerate(doc.vertices):
            if len(table) != n_x or any(len(r) != n_y for r in table):
                errors.append(f"vertex {k} must have {n_x} rows of {n_y} entries (observations x outcomes)")
                continue
            values = [_parse_rational(v) for r in table for v in r]
            if any(v is None for v in values):
                errors.append(f"vertex {k} has an entry that is not a rational")
                continue
            if any(v < 0 for v in values):
                errors.append(f"vertex {k} has a negative entry")
            total = sum(values, Fraction(0))
            if total != 1:
                errors.append(f"vertex {k} sums to {total}, not 1")

        for name, cells in doc.partitions.items():
            members = [x for cell in cells for x in cell]
            unknown = sorted(set(members) - set(doc.x_labels))
            if unknown:
                errors.append(f"partition '{name}' refers to undeclared observations {unknown}")
            if any(not cell for cell in cells):
                errors.append(f"partition '{name}' has an empty cell")
            if len(members) != len(set(members)):
                errors.append(f"partition '{name}' has overlapping cells")
            missing = [x for x in doc.x_labels if x not in members]
            if missing:
                errors.append(f"partition '{name}' does not cover {missing}")

        for name, rows in doc.rules.items():
            unknown_x = sorted(set(rows) - set(doc.x_labels))
            if unknown_x:
                errors.append(f"rule '{name}' refers to undeclared observations {unknown_x}")
            missing = [x for x in doc.x_labels if x not in rows]
            if missing:
                errors.append(f"rule '{name}' has no act for {missing}")
            for x, weights in rows.items():
                unknown_a = sorted(set(weights) - set(doc.a_labels))
                if unknown_a:
                    errors.append(f"rule '{name}' at '{x}' refers to undeclared actions {unknown_a}")
                values = [_parse_rational(v) for v in weights.values()]
                if any(v is None for v in values):
                    errors.append(f"rule '{name}' at '{x}' has a weight that is not a rational")
                elif any(v < 0 for v in values) or sum(values, Fraction(0)) != 1:
                    errors.append(f"rule '{name}' at '{x}' is not a distribution over actions")
        return errors

    @staticmethod
    def is_valid(doc: ScenarioDocument) -> bool:
        return len(ScenarioValidator.validate(doc)) == 0


def _frac_table(rows: Sequence[Sequence[str]]):
    return tuple(tuple(Fraction(v.strip()) for v in r) for r in rows)


def scenario_from_document(doc: ScenarioDocument) -> Scenario:
    errors = ScenarioValidator.validate(doc)
    if errors:
        raise ScenarioValidationError(errors)

    space = SpaceSpec(tuple(doc.x_labels), tuple(doc.y_labels), tuple(doc.a_labels))
    vertices = [JointDistribution(_frac_table(t)) for t in doc.vertices]
    credal = CredalSet.from_vertices(space, vertices)
    if len(credal.vertices) < len(vertices):
        logger.info("scenario %s: %d redundant vertices removed", doc.name,
                    len(vertices) - len(credal.vertices))

    partitions = {name: Partition(space.x_labels, tuple(tuple(c) for c in cells))
                  for name, cells in doc.partitions.items()}
    rules = {}
    for name, rows in doc.rules.items():
        rules[name] = DecisionRule(tuple(
            tuple(Fraction(rows[x].get(a, "0")) for a in space.a_labels)
            for x in space.x_labels
        ))
    return Scenario(
        name=doc.name,
        space=space,
        loss=LossFunction(_frac_table(doc.loss)),
        credal=credal,
        partitions=partitions,
        rules=rules,
        description=doc.description,
    )


def parse_scenario(text: str) -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(e.msg, line=e.lineno, column=e.colno)
    try:
        doc = ScenarioDocument.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        path = ".".join(str(p) for p in first["loc"])
        raise ScenarioParseError(first["msg"], field=path)
    return scenario_from_document(doc)


def load_scenario(source: Union[str, Path]) -> Scenario:
    """Load from ``builtin:<name>``, a file path, or raw document text."""
    if isinstance(source, str):
        if source.startswith(BUILTIN_PREFIX):
            return builtin(source[len(BUILTIN_PREFIX):])
        if source.lstrip().startswith("{"):
            return parse_scenario(source)
    path = Path(source)
    if not path.is_file():
        raise ScenarioParseError(f"Scenario file not found: {path}")
    return parse_scenario(path.read_text(encoding="utf-8"))


@lru_cache(maxsize=None)
def builtin(name: str) -> Scenario:
    if name not in BUILTIN_NAMES:
        raise UnknownScenarioError(f"Unknown builtin scenario '{name}' (available: {list(BUILTIN_NAMES)})")
    return parse_scenario((SCENARIO_DIR / f"{name}.json").read_text(encoding="utf-8"))


def scenario_document(scenario: Scenario) -> Dict[str, Any]:
    space = scenario.space
    return ScenarioDocument(
        name=scenario.name,
        description=scenario.description,
        x_labels=list(space.x_labels),
        y_labels=list(space.y_labels),
        a_labels=list(space.a_labels),
        loss=[[str(v) for v in r] for r in scenario.loss.table],
        vertices=[[[str(v) for v in r] for r in vertex.probs] for vertex in scenario.credal.vertices],
        partitions={name: [list(c) for c in p.cells] for name, p in scenario.partitions.items()},
        rules={
            name: {x: {a: str(w) for a, w in zip(space.a_labels, row) if w != 0}
                   for x, row in zip(space.x_labels, rule.rows)}
            for name, rule in scenario.rules.items()
        },
    ).model_dump()


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_document(scenario), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def decimal_display(value: Fraction) -> str:
    """Six significant digits, round-half-even; display only."""
    return str(_DISPLAY.divide(Decimal(value.numerator), Decimal(value.denominator)))


def exact(value) -> Dict[str, str]:
    value = Fraction(value)
    return {"exact": str(value), "decimal": decimal_display(value)}


def labelled(labels: Sequence[str], values: Sequence[Fraction]) -> Dict[str, Dict[str, str]]:
    return {label: exact(v) for label, v in zip(labels, values)}


def joint_table(space: SpaceSpec, p: JointDistribution) -> Dict[str, Dict[str, Dict[str, str]]]:
    return {x: labelled(space.y_labels, row) for x, row in zip(space.x_labels, p.probs)}


def solver_metadata(pivots: int) -> Dict[str, Any]:
    return {"method": SOLVER_METHOD, "pivots": pivots}


@singledispatch
def to_document(result, space: SpaceSpec) -> Dict[str, Any]:
    raise TypeError(f"No report layout for {type(result).__name__}")


@to_document.register
def _(result: dict, space: SpaceSpec) -> Dict[str, Any]:
    return result


@to_document.register
def _(result: GameSolution, space: SpaceSpec) -> Dict[str, Any]:
    return {
        "value": exact(result.value),
        "rule": {x: labelled(space.a_labels, row) for x, row in zip(space.x_labels, result.rule.rows)},
        "bookie_mixture": [{"vertex": k, "weight": exact(w)} for k, w in result.bookie_mixture],
        "aggregate": joint_table(space, result.aggregate),
        "solver": solver_metadata(result.pivots),
    }


@to_document.register
def _(result: PosteriorSolution, space: SpaceSpec) -> Dict[str, Any]:
    return {
        "observation": result.observation,
        "value": exact(result.value),
        "act": labelled(space.a_labels, result.act),
        "conditioned_marginals": [labelled(space.y_labels, q) for q in result.marginals.vertices],
        "boundary_approximation": result.marginals.boundary_approximation,
        "bookie_mixture": [{"marginal": k, "weight": exact(w)} for k, w in result.bookie_mixture],
        "aggregate": labelled(space.y_labels, result.aggregate),
        "solver": solver_metadata(result.pivots),
    }


@to_document.register
def _(result: EquilibriumCertificate, space: SpaceSpec) -> Dict[str, Any]:
    return {
        "passed": result.passed,
        "clauses": result.clauses(),
        "worst_case": exact(result.worst_case),
        "bayes_value": exact(result.bayes_value),
    }


@to_document.register
def _(result: OracleCertificate, space: SpaceSpec) -> Dict[str, Any]:
    return {
        "passed": result.passed,
        "value": exact(result.value),
        "bayes_value": exact(result.bayes_value),
        "grid_value": exact(result.grid_value) if result.grid_value is not None else None,
        "grid_resolution": result.resolution,
    }


@to_document.register
def _(result: IgnoreCheck, space: SpaceSpec) -> Dict[str, Any]:
    return {
        "holds": result.holds,
        "common_observation_marginal": (labelled(space.x_labels, result.common_marginal)
                                        if result.common_marginal is not None else None),
        "witnesses": [
            {"outcome_marginal": labelled(space.y_labels, q),
             "witness": joint_table(space, w) if w is not None else None}
            for q, w in result.witnesses
        ],
    }


@to_document.register
def _(result: InconsistencyReport, space: SpaceSpec) -> Dict[str, Any]:
    return {
        "flagged": result.flagged,
        "act_divergence": result.act_divergence,
        "value_divergence": result.value_divergence,
        "apriori_value": exact(result.prior.value),
        "observations": [
            {
                "observation": e.observation,
                "posterior_value": exact(e.posterior_value),
                "apriori_act": labelled(space.a_labels, e.apriori_act),
                "apriori_act_worst_case": exact(e.apriori_act_worst_case),
                "gap": exact(e.gap),
            }
            for e in result.entries
        ],
    }


@to_document.register
def _(result: DilationReport, space: SpaceSpec) -> Dict[str, Any]:
    return {
        "dilates": result.dilates,
        "prior_marginals": [labelled(space.y_labels, q) for q in result.prior.vertices],
        "observations": [
            {
                "observation": e.observation,
                "contains_prior": e.contains_prior,
                "strict": e.strict,
                "conditioned_marginals": [labelled(space.y_labels, q) for q in e.conditioned.vertices],
            }
            for e in result.entries
        ],
    }


@to_document.register
def _(result: RangeDecomposition, space: SpaceSpec) -> Dict[str, Any]:
    return {
        "ranges": [
            {"observations": list(cell),
             "marginals": [labelled(space.y_labels, q) for q in announced.vertices]}
            for announced, cell in result
        ],
    }


@to_document.register
def _(result: Partition, space: SpaceSpec) -> Dict[str, Any]:
    return {"cells": [list(c) for c in result.cells]}


@to_document.register
def _(result: Scenario, space: SpaceSpec) -> Dict[str, Any]:
    return scenario_document(result)


def _is_exact(value) -> bool:
    return isinstance(value, dict) and set(value) == {"exact", "decimal"}


def _cell(value) -> str:
    if _is_exact(value):
        return f"{value['exact']} ({value['decimal']})"
    if isinstance(value, dict):
        return ", ".join(f"{k}={_cell(v)}" for k, v in value.items())
    if isinstance(value, list):
        return "; ".join(_cell(v) for v in value)
    if value is None:
        return "-"
    return str(value)


def _render_text(document: Dict[str, Any], depth: int = 0) -> List[str]:
    lines = []
    indent = "  " * depth
    for key, value in document.items():
        if isinstance(value, list) and value and all(isinstance(v, dict) and not _is_exact(v) for v in value):
            frame = pd.DataFrame([{k: _cell(v) for k, v in row.items()} for row in value])
            lines.append(f"{indent}{key}:")
            lines.extend(f"{indent}  {line}" for line in frame.to_string(index=False).splitlines())
        elif isinstance(value, dict) and not _is_exact(value) and value:
            lines.append(f"{indent}{key}:")
            lines.extend(_render_text(value, depth + 1))
        else:
            lines.append(f"{indent}{key}: {_cell(value)}")
    return lines


def render_report(document: Dict[str, Any], fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(document, indent=2, ensure_ascii=False) + "\n"
    if fmt == "text":
        return "\n".join(_render_text(document)) + "\n"
    raise ValueError(f"Unknown report format: {fmt}")


def build_report(result, scenario: Scenario, operation: Optional[str] = None,
                 **sections) -> Dict[str, Any]:
    """Report document for a solver/checker result plus optional extra sections.

    A pure function of the inputs: no timestamps, fixed key order.
    """
    document: Dict[str, Any] = {"scenario": scenario.name}
    if operation:
        document["operation"] = operation
    document.update(to_document(result, scenario.space))
    for name, section in sections.items():
        if section is not None:
            document[name] = to_document(section, scenario.space)
    return document


def emit_report(result, scenario: Scenario, fmt: str = "json", operation: Optional[str] = None,
                **sections) -> str:
    return render_report(build_report(result, scenario, operation, **sections), fmt)
