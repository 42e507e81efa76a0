"""Named game specs shipped with the command-line tool.

Each entry is a plain JSON-able dict in the spec-file schema, so embedded
fixtures go through exactly the same parser as user files.
"""

from __future__ import annotations

import json

import numpy as np

from . import fixtures as fx
from .specfile import parametric_to_dict
from .uncertainty import FiniteSet, Polyhedron, UnionOfIntervals, contains

FREE_RIDER_SOLVER = {"penalty_tol": 1e-10, "max_iters": 2000}
INSPECTION_SOLVER = {"penalty_tol": 1e-8, "max_iters": 2000}
# the dual system is flat near its solutions; 1e-8 leaves near-duplicates
INSPECTION_DUAL_SOLVER = {"penalty_tol": 1e-9, "max_iters": 5000}


def _bimatrix(rows):
    return [[list(cell) for cell in row] for row in rows]


def nash_spec(name, rows, description="") -> dict:
    return {"regime": "nash", "name": name, "description": description,
            "actions": [len(rows), len(rows[0])], "payoffs": _bimatrix(rows)}


def dro_spec(name: str, game: str, mean: str, s: float, eps, singleton: bool = False,
             description: str = "") -> dict:
    key = f"{game}_singleton" if singleton else game
    poly = fx.SUPPORTS[key]
    return {"regime": "dro", "name": name, "description": description, "actions": [2, 2],
            "ambiguity": {"W": poly.W.tolist(), "h": poly.h.tolist(),
                          "m": fx.MEANS[game][mean].tolist(), "s": s},
            "risk": list(eps),
            "solver": dict(FREE_RIDER_SOLVER if game == "free_rider" else INSPECTION_SOLVER)}


def _robust(name, game, solver, description, method="auto") -> dict:
    return {"regime": "robust", "name": name, "description": description, "actions": [2, 2],
            "parametric": parametric_to_dict(game), "method": method, "solver": dict(solver)}


def _robust_poly(name, poly, solver, description) -> dict:
    return {"regime": "robust", "name": name, "description": description, "actions": [2, 2],
            "polyhedron": {"W": poly.W.tolist(), "h": poly.h.tolist()},
            "method": "condition3", "solver": dict(solver)}


def _build() -> dict[str, dict]:
    bos = [[(2, 1), (0, 0)], [(0, 0), (1, 2)]]
    bos_other = [[(2, 0), (0, 2)], [(0, 1), (1, 0)]]
    pennies = [[(-1, 1), (1, -1)], [(1, -1), (-1, 1)]]
    specs = [
        nash_spec("battle_of_sexes_nash", bos, "Battle of the Sexes, complete information"),
        nash_spec("matching_pennies_nash", pennies, "Matching Pennies"),
        {"regime": "bayesian", "name": "battle_of_sexes_bayesian",
         "description": "Battle of the Sexes with two equally likely payoff types",
         "actions": [2, 2],
         "types": [{"weight": 0.5, "payoffs": _bimatrix(bos)},
                   {"weight": 0.5, "payoffs": _bimatrix(bos_other)}]},
        _robust("free_rider_robust", fx.free_rider_parametric(), FREE_RIDER_SOLVER,
                "Free Rider, contribution cost c in [1/4, 5/8]"),
        _robust("free_rider_robust_condition2", fx.free_rider_parametric(), FREE_RIDER_SOLVER,
                "Free Rider over its two extreme games, no reduction attempted", "condition2"),
        _robust_poly("free_rider_robust_condition3", fx.SUPPORTS["free_rider"],
                     FREE_RIDER_SOLVER, "Free Rider through the polyhedral dual system"),
        _robust("inspection_robust", fx.inspection_parametric(), INSPECTION_SOLVER,
                "Inspection, g in [8,12], v in [16,24], h in [4,6], w = 15"),
        _robust("inspection_robust_condition2", fx.inspection_parametric(), INSPECTION_SOLVER,
                "Inspection over its eight extreme games, no reduction attempted",
                "condition2"),
        _robust_poly("inspection_robust_condition3", fx.SUPPORTS["inspection"],
                     INSPECTION_DUAL_SOLVER, "Inspection through the polyhedral dual system"),
        _robust("inspection_robust_discrete", fx.inspection_parametric(
                    supports=(FiniteSet((8, 8.5, 9, 12)),
                              UnionOfIntervals(((16, 18), (23, 23), (24, 24))),
                              FiniteSet((4, 6)))),
                INSPECTION_SOLVER, "Inspection with discrete and union parameter supports"),
        dro_spec("dro_free_rider_m1", "free_rider", "m1", 2, (1, 1),
                 description="Free Rider, nominal mean, risk neutral"),
        dro_spec("dro_free_rider_m2", "free_rider", "m2", 2, (1, 1),
                 description="Free Rider, mean at c = 1/2, risk neutral"),
        dro_spec("dro_free_rider_s0", "free_rider", "m1", 0, (0.5, 0.5),
                 description="Free Rider, zero dispersion"),
        dro_spec("dro_free_rider_singleton", "free_rider", "m2", 3, (0.5, 0.5), singleton=True,
                 description="Free Rider, support collapsed to c = 1/2"),
        dro_spec("dro_free_rider_m1_eps_0.5", "free_rider", "m1", 2, (0.5, 0.5),
                 description="Free Rider, nominal mean, s = 2, both players risk averse"),
        dro_spec("dro_free_rider_m1_eps_0.01", "free_rider", "m1", 2, (0.01, 0.01),
                 description="Free Rider, nominal mean, s = 2, extreme risk aversion"),
        dro_spec("dro_inspection_m1", "inspection", "m1", 4, (1, 1),
                 description="Inspection, nominal mean, risk neutral"),
        dro_spec("dro_inspection_m2", "inspection", "m2", 4, (1, 1),
                 description="Inspection, alternative mean, risk neutral"),
        dro_spec("dro_inspection_s0", "inspection", "m1", 0, (0.5, 0.5),
                 description="Inspection, zero dispersion"),
        dro_spec("dro_inspection_singleton", "inspection", "m2", 3, (0.5, 0.5), singleton=True,
                 description="Inspection, support collapsed to the alternative mean"),
        dro_spec("dro_inspection_m1_eps_1_0.25", "inspection", "m1", 4, (1, 0.25),
                 description="Inspection, s = 4, inspectee risk averse"),
        dro_spec("dro_inspection_m1_eps_0.25_1", "inspection", "m1", 4, (0.25, 1),
                 description="Inspection, s = 4, inspector risk averse"),
    ]
    return {d["name"]: d for d in specs}


FIXTURES = _build()
ALIASES = {"robust_free_rider": "free_rider_robust", "robust_inspection": "inspection_robust"}


def fixture_names() -> list[str]:
    return sorted(FIXTURES)


def fixture_dict(name: str) -> dict:
    key = ALIASES.get(name, name)
    if key not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; try --list-fixtures")
    # deep copy through the JSON value space
    return json.loads(json.dumps(FIXTURES[key]))


def self_check():
    """Every embedded mean must lie in its support."""
    for name, d in FIXTURES.items():
        if d["regime"] == "dro":
            a = d["ambiguity"]
            if not contains(Polyhedron(np.array(a["W"]), np.array(a["h"])), np.array(a["m"])):
                raise AssertionError(f"fixture {name}: mean outside support")


self_check()
