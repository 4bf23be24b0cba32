#!/usr/bin/env python3
"""
Tests for scenario documents, the builtin fixtures and report rendering.
"""

import json
from fractions import Fraction as F
from pathlib import Path

import pytest

from derive_builtin_vertices import derive_vertices, same_vertex_sets
from src.errors import ScenarioParseError, ScenarioValidationError, UnknownScenarioError
from src.game import detect_time_inconsistency, solve_aposteriori, solve_apriori
from src.report_saver import ReportSaver
from src.scenario_io import (BUILTIN_NAMES, SCENARIO_DIR, build_report, builtin,
                             decimal_display, dump_scenario, emit_report, load_scenario,
                             parse_scenario, scenario_document)


def _document(name="example1"):
    return json.loads((SCENARIO_DIR / f"{name}.json").read_text(encoding="utf-8"))


@pytest.mark.parametrize("name, count", [("example1", 4), ("monty_hall", 2), ("walley_coins", 2)])
def test_builtins_load(name, count):
    scenario = builtin(name)
    assert scenario.name == name
    assert len(scenario.credal.vertices) == count


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_frozen_vertices_match_constraint_description(name):
    assert same_vertex_sets(derive_vertices(name), builtin(name).credal.vertices)


def test_dump_then_parse_gives_the_same_scenario(monty):
    assert parse_scenario(dump_scenario(monty)) == monty


def test_load_sources(tmp_path, walley):
    path = tmp_path / "coins.json"
    path.write_text(dump_scenario(walley), encoding="utf-8")

    assert load_scenario(str(path)) == walley
    assert load_scenario(path) == walley
    assert load_scenario("builtin:walley_coins") is walley
    assert load_scenario(dump_scenario(walley)) == walley


def test_unknown_builtin():
    with pytest.raises(UnknownScenarioError):
        builtin("three_prisoners")
    with pytest.raises(UnknownScenarioError):
        load_scenario("builtin:three_prisoners")


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioParseError):
        load_scenario(str(tmp_path / "absent.json"))


def test_malformed_json_reports_position():
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario('{\n  "name": "broken",\n  "x_labels": [\n}')
    assert info.value.line == 4


def test_unknown_field_reports_path():
    doc = _document()
    doc["prior"] = "uniform"
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(json.dumps(doc))
    assert info.value.field == "prior"


def test_vertex_must_sum_to_one():
    doc = _document()
    doc["vertices"][0] = [["1/3", "2/3"], ["0", "-1/10"]]
    doc["vertices"][1] = [["1/3", "0"], ["0", "17/30"]]
    with pytest.raises(ScenarioValidationError) as info:
        parse_scenario(json.dumps(doc))

    assert any("vertex 1 sums to 9/10" in e for e in info.value.errors)
    assert any("vertex 0 has a negative entry" in e for e in info.value.errors)


def test_rule_with_undeclared_action():
    doc = _document("monty_hall")
    doc["rules"]["open_fourth"] = {"G2": {"4": "1"}, "G3": {"1": "1"}}
    with pytest.raises(ScenarioValidationError) as info:
        parse_scenario(json.dumps(doc))
    assert any("undeclared actions ['4']" in e for e in info.value.errors)


def test_partition_must_cover_observations():
    doc = _document("walley_coins")
    doc["partitions"]["half"] = [["H"]]
    with pytest.raises(ScenarioValidationError) as info:
        parse_scenario(json.dumps(doc))
    assert any("does not cover ['T']" in e for e in info.value.errors)


def test_loss_shape_is_checked():
    doc = _document()
    doc["loss"] = [["0", "1"]]
    with pytest.raises(ScenarioValidationError):
        parse_scenario(json.dumps(doc))


def test_missing_partition_name(example1):
    with pytest.raises(ScenarioValidationError):
        example1.partition("halves")
    with pytest.raises(ScenarioValidationError):
        example1.rule("always_zero")


def test_decimal_display():
    assert decimal_display(F(1, 3)) == "0.333333"
    assert decimal_display(F(2, 3)) == "0.666667"
    assert decimal_display(F(1, 2)) == "0.5"
    assert decimal_display(F(-1, 20)) == "-0.05"


def test_apriori_report(example1):
    solution = solve_apriori(example1.credal, example1.loss)
    document = json.loads(emit_report(solution, example1, operation="solve apriori"))

    assert document["scenario"] == "example1"
    assert document["value"] == {"exact": "1/3", "decimal": "0.333333"}
    assert document["rule"]["0"]["1"]["exact"] == "1"
    assert list(document) == [
        "scenario", "operation", "value", "rule", "bookie_mixture", "aggregate", "solver"]
    assert document["solver"] == {"method": "two-phase simplex, Bland's rule", "pivots": solution.pivots}
    assert solution.pivots > 0


def test_text_report(example1):
    report = detect_time_inconsistency(example1.credal, example1.loss)
    text = emit_report(report, example1, fmt="text", operation="detect inconsistency")

    assert "flagged: True" in text
    assert "apriori_value: 1/3 (0.333333)" in text
    assert "1/2 (0.5)" in text


def test_reports_are_deterministic(monty):
    solution = solve_apriori(monty.credal, monty.loss)
    first = emit_report(solution, monty)
    second = emit_report(solve_apriori(monty.credal, monty.loss), monty)
    assert first == second


def test_unknown_format(example1):
    with pytest.raises(ValueError):
        emit_report({"ok": True}, example1, fmt="yaml")


def test_scenario_document_keeps_named_rules(monty):
    doc = scenario_document(monty)
    assert doc["rules"]["switch"] == {"G2": {"3": "1"}, "G3": {"2": "1"}}
    assert doc["partitions"]["trivial"] == [["G2", "G3"]]


def test_report_saver(tmp_path, example1):
    document = build_report({"equals_hull": False}, example1, operation="check hull")
    saver = ReportSaver(str(tmp_path))

    first = saver.save_report(document, command="check hull")
    second = saver.save_report(document, command="check hull")

    assert first == second
    saved = json.loads(open(first["report"], encoding="utf-8").read())
    assert saved == document
    assert "equals_hull: False" in open(first["markdown"], encoding="utf-8").read()

    index = json.loads((tmp_path / "session_index.json").read_text())
    assert len(index["sessions"]) == 2
    assert index["sessions"][0]["scenario"] == "example1"


def test_aposteriori_report_carries_solver_metadata(monty):
    solution = solve_aposteriori(monty.credal, monty.loss, "G2")
    document = build_report(solution, monty, operation="solve aposteriori")

    assert document["solver"]["method"] == "two-phase simplex, Bland's rule"
    assert document["solver"]["pivots"] == solution.pivots > 0


def test_report_sessions_are_named_by_scenario_command_and_hash(tmp_path, example1):
    document = build_report({"equals_hull": False}, example1, operation="check hull")
    saved = ReportSaver(str(tmp_path)).save_report(document, command="check hull")

    session = Path(saved["report"]).parent.name
    prefix, digest = session.rsplit("_", 1)
    assert prefix == "example1_check_hull"
    assert len(digest) == 12
