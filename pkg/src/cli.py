#!/usr/bin/env python3
"""
Command-line front end.

    python -m src.cli solve apriori builtin:example1
    python -m src.cli solve aposteriori builtin:monty_hall --x G3 --certify
    python -m src.cli check calibration scenario.json --partition singletons

Reports go to stdout; status lines go to stderr. Exit status: 0 success,
1 a check or certificate failed, 2 usage, parse or bound errors.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Tuple

try:
    from .config import get_settings, load_settings, use_settings
    from .credal import equals_hull, hull, detect_dilation
    from .errors import CertificateError, CredalError
    from .game import (certify_equilibrium, certify_posterior, check_ignore_optimal,
                       detect_time_inconsistency, ignore_rule_value, solve_aposteriori,
                       solve_apriori, worst_case_loss)
    from .oracle import certify_solution
    from .report_saver import ReportSaver
    from .scenario_io import (Scenario, build_report, builtin, dump_scenario, exact,
                              load_scenario, render_report, to_document)
    from .updates import (c_conditioning, calibration_violations, range_decomposition,
                          rule_is_based_on_c_conditioning, sharp_partitions)
except ImportError:
    from config import get_settings, load_settings, use_settings
    from credal import equals_hull, hull, detect_dilation
    from errors import CertificateError, CredalError
    from game import (certify_equilibrium, certify_posterior, check_ignore_optimal,
                      detect_time_inconsistency, ignore_rule_value, solve_aposteriori,
                      solve_apriori, worst_case_loss)
    from oracle import certify_solution
    from report_saver import ReportSaver
    from scenario_io import (Scenario, build_report, builtin, dump_scenario, exact,
                             load_scenario, render_report, to_document)
    from updates import (c_conditioning, calibration_violations, range_decomposition,
                         rule_is_based_on_c_conditioning, sharp_partitions)


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so run() can return a status."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"❌ {self.prog}: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--certify", action="store_true", default=default(False),
                        help="cross-check results with exact certificates and the brute-force oracles")
    parser.add_argument("--json", action="store_true", default=default(False),
                        help="emit the report as JSON (default: text)")
    parser.add_argument("--max-partition-size", type=int, default=default(None),
                        help="largest number of observations for partition search")
    parser.add_argument("--save", action="store_true", default=default(False),
                        help="also archive the report under the configured output directory")
    parser.add_argument("--output-dir", default=default(None),
                        help="archive the report under this directory (implies --save)")
    parser.add_argument("-v", "--verbose", action="store_true", default=default(False),
                        help="debug logging on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="credal-minimax",
                     description="Minimax decisions and update rules for credal sets")
    _add_common(parser, suppress=False)
    commands = parser.add_subparsers(dest="command", parser_class=_Parser)
    commands.required = True

    def leaf(sub, name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        _add_common(p, suppress=True)
        return p

    solve = commands.add_parser("solve", help="solve the a priori or a posteriori game")
    solve_kinds = solve.add_subparsers(dest="kind", parser_class=_Parser)
    solve_kinds.required = True
    leaf(solve_kinds, "apriori").add_argument("scenario")
    post = leaf(solve_kinds, "aposteriori")
    post.add_argument("scenario")
    post.add_argument("--x", required=True, dest="observation", help="observed value of X")

    check = commands.add_parser("check", help="structural checks")
    check_kinds = check.add_subparsers(dest="kind", parser_class=_Parser)
    check_kinds.required = True
    leaf(check_kinds, "hull").add_argument("scenario")
    leaf(check_kinds, "ignore").add_argument("scenario")
    leaf(check_kinds, "dilation").add_argument("scenario")
    calibration = leaf(check_kinds, "calibration")
    calibration.add_argument("scenario")
    calibration.add_argument("--partition", required=True)
    rule = leaf(check_kinds, "rule")
    rule.add_argument("scenario")
    rule.add_argument("--rule", required=True, dest="rule_name")
    rule.add_argument("--partition", required=True)

    sharp = leaf(commands, "sharp-partitions")
    sharp.add_argument("scenario")
    sharp.add_argument("--compare-marginals", action="store_true",
                       help="order conditioning rules by outcome-marginal images instead of joint images")

    detect = commands.add_parser("detect", help="detect time inconsistency")
    detect_kinds = detect.add_subparsers(dest="kind", parser_class=_Parser)
    detect_kinds.required = True
    leaf(detect_kinds, "inconsistency").add_argument("scenario")

    leaf(commands, "builtin").add_argument("name")
    return parser


def _status(message: str) -> None:
    print(message, file=sys.stderr)


# Each handler returns (report document, exit status).
Handled = Tuple[Dict[str, Any], int]


def _solve_apriori(args, scenario: Scenario) -> Handled:
    solution = solve_apriori(scenario.credal, scenario.loss)
    _status(f"✅ a priori value {solution.value}")
    certificate = oracle = None
    status = EXIT_OK
    if args.certify:
        certificate = certify_equilibrium(scenario.credal, scenario.loss, solution)
        oracle = certify_solution(scenario.credal, scenario.loss, solution)
        if not (certificate.passed and oracle.passed):
            _status(f"❌ certificate failed: {certificate.failures() or ['oracle sandwich']}")
            status = EXIT_FAILED
    return build_report(solution, scenario, operation="solve apriori",
                        certificate=certificate, oracle=oracle), status


def _solve_aposteriori(args, scenario: Scenario) -> Handled:
    solution = solve_aposteriori(scenario.credal, scenario.loss, args.observation)
    _status(f"✅ a posteriori value at {args.observation}: {solution.value}")
    if solution.marginals.boundary_approximation:
        _status("⚠️  conditioned set is a closure: some vertices give this observation probability zero")
    certificate = None
    status = EXIT_OK
    if args.certify:
        certificate = certify_posterior(scenario.credal, scenario.loss, args.observation)
        if not certificate.passed:
            _status(f"❌ certificate failed: {certificate.failures()}")
            status = EXIT_FAILED
    return build_report(solution, scenario, operation="solve aposteriori",
                        certificate=certificate), status


def _check_hull(args, scenario: Scenario) -> Handled:
    recombined = hull(scenario.credal)
    equal = equals_hull(scenario.credal)
    _status(("✅" if equal else "❌") + f" P = hull(P): {equal}")
    document = {
        "equals_hull": equal,
        "vertex_count": len(scenario.credal.vertices),
        "hull_vertex_count": len(recombined.vertices),
        "boundary_approximation": recombined.boundary_approximation,
    }
    return build_report(document, scenario, operation="check hull"), EXIT_OK if equal else EXIT_FAILED


def _check_ignore(args, scenario: Scenario) -> Handled:
    check = check_ignore_optimal(scenario.credal)
    value, act = ignore_rule_value(scenario.credal, scenario.loss)
    document: Dict[str, Any] = dict(to_document(check, scenario.space))
    document["ignore_rule_value"] = exact(value)
    document["ignore_rule_act"] = {a: exact(w) for a, w in zip(scenario.space.a_labels, act)}
    if args.certify:
        document["apriori_value"] = exact(solve_apriori(scenario.credal, scenario.loss).value)
    _status(("✅" if check.holds else "❌") + f" independent witnesses found: {check.holds}")
    return build_report(document, scenario, operation="check ignore"), \
        EXIT_OK if check.holds else EXIT_FAILED


def _check_calibration(args, scenario: Scenario) -> Handled:
    partition = scenario.partition(args.partition)
    rule = c_conditioning(scenario.credal, partition)
    violations = calibration_violations(scenario.credal, rule)
    calibrated = not violations
    _status(("✅" if calibrated else "❌") + f" conditioning on {partition} calibrated: {calibrated}")
    document = {
        "partition": args.partition,
        "cells": [list(c) for c in partition.cells],
        "calibrated": calibrated,
        "violations": violations,
    }
    document.update(to_document(range_decomposition(rule), scenario.space))
    return build_report(document, scenario, operation="check calibration"), \
        EXIT_OK if calibrated else EXIT_FAILED


def _check_rule(args, scenario: Scenario) -> Handled:
    partition = scenario.partition(args.partition)
    decision_rule = scenario.rule(args.rule_name)
    based = rule_is_based_on_c_conditioning(scenario.credal, scenario.loss, decision_rule, partition)
    worst = worst_case_loss(scenario.credal, scenario.loss, decision_rule)
    minimax = solve_apriori(scenario.credal, scenario.loss).value
    _status(("✅" if based else "❌") + f" rule '{args.rule_name}' based on conditioning on {partition}: {based}")
    document = {
        "rule": args.rule_name,
        "partition": args.partition,
        "based_on_c_conditioning": based,
        "rule_worst_case": exact(worst),
        "minimax_value": exact(minimax),
        "minimax_optimal": worst == minimax,
    }
    return build_report(document, scenario, operation="check rule"), EXIT_OK if based else EXIT_FAILED


def _check_dilation(args, scenario: Scenario) -> Handled:
    report = detect_dilation(scenario.credal)
    _status(("✅" if report.dilates else "❌") + f" dilation: {report.dilates}")
    return build_report(report, scenario, operation="check dilation"), \
        EXIT_OK if report.dilates else EXIT_FAILED


def _sharp_partitions(args, scenario: Scenario) -> Handled:
    found = sharp_partitions(scenario.credal, args.max_partition_size, args.compare_marginals)
    _status(f"✅ {len(found)} sharply calibrated partition(s)")
    document = {
        "count": len(found),
        "compare_marginals": args.compare_marginals,
        "partitions": [{"cells": str(p)} for p in found],
    }
    return build_report(document, scenario, operation="sharp-partitions"), EXIT_OK


def _detect_inconsistency(args, scenario: Scenario) -> Handled:
    report = detect_time_inconsistency(scenario.credal, scenario.loss)
    marker = "⚠️ " if report.flagged else "✅"
    _status(f"{marker} time inconsistency flagged: {report.flagged}")
    certificate = None
    status = EXIT_OK
    if args.certify:
        certificate = certify_equilibrium(scenario.credal, scenario.loss, report.prior)
        if not certificate.passed:
            _status(f"❌ certificate failed: {certificate.failures()}")
            status = EXIT_FAILED
    return build_report(report, scenario, operation="detect inconsistency",
                        certificate=certificate), status


HANDLERS = {
    ("solve", "apriori"): _solve_apriori,
    ("solve", "aposteriori"): _solve_aposteriori,
    ("check", "hull"): _check_hull,
    ("check", "ignore"): _check_ignore,
    ("check", "calibration"): _check_calibration,
    ("check", "rule"): _check_rule,
    ("check", "dilation"): _check_dilation,
    ("sharp-partitions", None): _sharp_partitions,
    ("detect", "inconsistency"): _detect_inconsistency,
}


def _configure(args) -> None:
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s")
    overrides = {"max_partition_size": args.max_partition_size, "output_dir": args.output_dir}
    if args.certify:
        overrides["verify_lp"] = True
    use_settings(load_settings(**overrides))


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run the command, print its report; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        _configure(args)
        if args.command == "builtin":
            sys.stdout.write(dump_scenario(builtin(args.name)))
            return EXIT_OK

        scenario = load_scenario(args.scenario)
        _status(f"🔍 scenario '{scenario.name}': {len(scenario.credal.vertices)} vertices")
        handler = HANDLERS[(args.command, getattr(args, "kind", None))]
        document, status = handler(args, scenario)
    except CertificateError as e:
        _status(f"❌ {e}")
        return EXIT_FAILED
    except CredalError as e:
        _status(f"❌ {e}")
        return EXIT_USAGE

    sys.stdout.write(render_report(document, "json" if args.json else "text"))
    if args.save or args.output_dir:
        command = " ".join(filter(None, [args.command, getattr(args, "kind", None)]))
        saved = ReportSaver(get_settings().output_dir).save_report(document, command=command)
        _status(f"✅ report saved to {saved['report']}")
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
