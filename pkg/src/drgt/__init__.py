"""Equilibrium enumeration for finite games under payoff uncertainty.

Complete-information, Bayesian, robust (worst case over a polyhedral set)
and distributionally robust (worst-case CVaR over a moment ambiguity set)
equilibria are all written as multilinear feasibility systems and solved
by multistart penalty minimisation.
"""

from .dro import (AmbiguitySet, DiscreteLossDistribution, RiskProfile, build_dro_system, cvar,
                  reduce)
from .games import (GameShape, PayoffTensor, bayesian_to_nash, build_Y, expected_payoff,
                    flatten, is_nash, unflatten)
from .multilinear import MultilinearExpr, MultilinearSystem
from .robust import NotApplicable, build_condition2, build_condition3, special_class_reduce
from .solver import SolverConfig, multistart_enumerate
from .uncertainty import (ExtremePointSet, FiniteSet, Interval, ParametricGame, Polyhedron,
                          UnionOfIntervals, box_extreme_points, contains,
                          parametric_to_polyhedron, vertex_enumerate)

__all__ = [
    "AmbiguitySet", "DiscreteLossDistribution", "ExtremePointSet", "FiniteSet", "GameShape",
    "Interval", "MultilinearExpr", "MultilinearSystem", "NotApplicable", "ParametricGame",
    "PayoffTensor", "Polyhedron", "RiskProfile", "SolverConfig", "UnionOfIntervals",
    "bayesian_to_nash", "box_extreme_points", "build_Y", "build_condition2", "build_condition3",
    "build_dro_system", "contains", "cvar", "expected_payoff", "flatten", "is_nash",
    "multistart_enumerate", "parametric_to_polyhedron", "reduce", "special_class_reduce",
    "unflatten", "vertex_enumerate",
]
