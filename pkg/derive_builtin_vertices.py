#!/usr/bin/env python3
"""
Script to derive the vertex lists of the builtin scenarios from their
constraint descriptions and check (or rewrite) the frozen JSON documents.

Each builtin credal set is {p >= 0 : A p = b} over the flattened X x Y table.
Vertices are found by brute force: every choice of basic columns whose square
system has a nonnegative solution gives an extreme point.

    python derive_builtin_vertices.py            # check the frozen files
    python derive_builtin_vertices.py --write    # rewrite their vertex lists
"""

import argparse
import itertools
import json
import sys
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from src.credal import JointDistribution
from src.lp_core import solve_linear_system
from src.scenario_io import SCENARIO_DIR, builtin

# (coefficients by (x, y) label pair, rhs); every entry not named has coefficient 0
Constraint = Tuple[Dict[Tuple[str, str], int], Fraction]

THIRD = Fraction(1, 3)
HALF = Fraction(1, 2)

H_DESCRIPTIONS: Dict[str, List[Constraint]] = {
    # outcome marginal fixed at Pr(Y=1) = 2/3
    "example1": [
        ({(x, y): 1 for x in "01" for y in "01"}, Fraction(1)),
        ({("0", "1"): 1, ("1", "1"): 1}, Fraction(2, 3)),
    ],
    # car uniformly placed; host never opens the car's door
    "monty_hall": [
        ({("G2", "1"): 1, ("G3", "1"): 1}, THIRD),
        ({("G2", "2"): 1, ("G3", "2"): 1}, THIRD),
        ({("G2", "3"): 1, ("G3", "3"): 1}, THIRD),
        ({("G2", "2"): 1}, Fraction(0)),
        ({("G3", "3"): 1}, Fraction(0)),
    ],
    # both tosses fair, dependence arbitrary
    "walley_coins": [
        ({("H", "H"): 1, ("H", "T"): 1}, HALF),
        ({("H", "H"): 1, ("T", "H"): 1}, HALF),
        ({(x, y): 1 for x in "HT" for y in "HT"}, Fraction(1)),
    ],
}


def _independent_rows(rows: List[List[Fraction]], rhs: List[Fraction]):
    """Drop rows that are linear combinations of earlier ones (consistency assumed)."""
    kept_rows, kept_rhs, echelon = [], [], []
    for row, b in zip(rows, rhs):
        reduced = list(row)
        for pivot_col, basis_row in echelon:
            if reduced[pivot_col] != 0:
                f = reduced[pivot_col] / basis_row[pivot_col]
                reduced = [a - f * c for a, c in zip(reduced, basis_row)]
        pivot = next((j for j, v in enumerate(reduced) if v != 0), None)
        if pivot is None:
            continue
        echelon.append((pivot, reduced))
        kept_rows.append(row)
        kept_rhs.append(b)
    return kept_rows, kept_rhs


def derive_vertices(name: str) -> List[JointDistribution]:
    """Extreme points of the builtin's constraint polytope, in basis-enumeration order."""
    scenario = builtin(name)
    xs, ys = scenario.space.x_labels, scenario.space.y_labels
    cells = [(x, y) for x in xs for y in ys]

    rows = [[Fraction(coeffs.get(c, 0)) for c in cells] for coeffs, _ in H_DESCRIPTIONS[name]]
    rhs = [b for _, b in H_DESCRIPTIONS[name]]
    rows, rhs = _independent_rows(rows, rhs)
    m = len(rows)

    points: List[Tuple[Fraction, ...]] = []
    for basis in itertools.combinations(range(len(cells)), m):
        square = [[row[j] for j in basis] for row in rows]
        z = solve_linear_system(square, rhs)
        if z is None or any(v < 0 for v in z):
            continue
        point = [Fraction(0)] * len(cells)
        for j, v in zip(basis, z):
            point[j] = v
        if tuple(point) not in points:
            points.append(tuple(point))
    return [JointDistribution.from_flat(p, len(xs), len(ys)) for p in points]


def same_vertex_sets(first: Sequence[JointDistribution], second: Sequence[JointDistribution]) -> bool:
    return set(first) == set(second)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--write", action="store_true", help="rewrite the frozen vertex lists")
    args = parser.parse_args(argv)

    mismatches = 0
    for name in H_DESCRIPTIONS:
        print(f"🔍 Deriving vertices for {name}")
        derived = derive_vertices(name)
        frozen = builtin(name).credal.vertices
        if same_vertex_sets(derived, frozen):
            print(f"✅ {name}: {len(derived)} vertices match the frozen file")
            continue

        mismatches += 1
        print(f"❌ {name}: derived {len(derived)} vertices, frozen file has {len(frozen)}")
        if args.write:
            path = SCENARIO_DIR / f"{name}.json"
            document = json.loads(path.read_text(encoding="utf-8"))
            document["vertices"] = [[[str(v) for v in row] for row in p.probs] for p in derived]
            path.write_text(json.dumps(document, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
            print(f"   Rewrote {path}")

    if mismatches and not args.write:
        print("⚠️  Run with --write to refresh the frozen files")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
