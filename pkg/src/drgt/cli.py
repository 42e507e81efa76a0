"""Command-line entry point: solve a game spec and print its equilibrium table.

Exit codes: 0 success, 2 bad spec or arguments, 3 no equilibrium found within
the solver budget, 4 internal error.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import presets
from .dro import InconsistentAmbiguityError, build_dro_system, reduce, worst_case_cvar_report
from .games import (DimensionError, PayoffTensor, bayesian_to_nash,
                    expected_payoff, flatten, is_nash)
from .robust import NotApplicable, build_condition2, build_condition3, special_class_reduce
from .solver import METHODS, EquilibriumReport, SolverConfig, multistart_enumerate
from .specfile import GameSpecFile, SpecError, emit_spec, parse_spec, spec_from_dict
from .uncertainty import (EmptySetError, ExtremePointSet, ParametricGame, UnsupportedError,
                          box_extreme_points, parametric_to_polyhedron, vertex_enumerate)

EXIT_OK, EXIT_SPEC, EXIT_EMPTY, EXIT_INTERNAL = 0, 2, 3, 4
CSV_HEADER = "eq_index,player,action,probability,mean_payoff,worst_case_value,residual"
EMPTY_NOTE = "# no equilibria found within budget"
# a survivor of a reduced path must be a Nash point of the reduced tensor
REDUCED_REGRET_TOL = 1e-3

WORST_LABELS = {
    "nash": "payoff (no uncertainty)",
    "bayesian": "expected payoff over types",
    "robust": "worst-case payoff over the uncertainty set",
    "dro": "worst-case CVaR of loss (lower is better)",
}


class InternalError(RuntimeError):
    pass


@dataclass
class EquilibriumTable:
    name: str
    regime: str
    path: str
    config: SolverConfig
    rows: list[EquilibriumReport]
    stats: dict = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)


# -- per-regime pieces ------------------------------------------------------

def nash_system(P: PayoffTensor):
    """A complete-information game is a robust game with one extreme point."""
    return build_condition2(ExtremePointSet(P.shape, flatten(P)[None, :]), P.shape)


def tensor_summary(P: PayoffTensor, mean: Callable | None = None,
                   worst: Callable | None = None) -> Callable:
    """Payoffs read off ``P``; ``mean``/``worst`` override the per-player columns."""
    def summarize(profile, y):
        per = []
        for i in range(P.shape.num_players):
            v = expected_payoff(P, profile, i, tol=None)
            per.append((mean(profile, i) if mean else v, worst(profile, i) if worst else v))
        return per, is_nash(P, profile).regrets
    return summarize


def _robust_points(spec: GameSpecFile) -> ExtremePointSet | None:
    g = spec.payload
    try:
        if isinstance(g, ParametricGame):
            return box_extreme_points(g)
        return vertex_enumerate(g, shape=spec.shape)
    except (EmptySetError, UnsupportedError, ValueError):
        return None


def _robust_columns(points: ExtremePointSet | None):
    """Mean at the centroid of the extreme games, worst case as the minimum over them."""
    if points is None:
        return (lambda prof, i: float("nan")), (lambda prof, i: float("nan"))
    tensors = points.tensors()
    centroid = PayoffTensor(np.mean([G.array for G in tensors], axis=0))

    def mean(prof, i):
        return expected_payoff(centroid, prof, i, tol=None)

    def worst(prof, i):
        return min(expected_payoff(G, prof, i, tol=None) for G in tensors)
    return mean, worst


def plan(spec: GameSpecFile):
    """``(system, summarize, path description, reduced tensor or None)`` for a spec."""
    shape = spec.shape
    if spec.regime == "nash":
        P = spec.payload
        return nash_system(P), tensor_summary(P), "complete information", P
    if spec.regime == "bayesian":
        P = bayesian_to_nash(spec.payload)
        return nash_system(P), tensor_summary(P), "expected game over types", P
    if spec.regime == "robust":
        points = _robust_points(spec)
        mean, worst = _robust_columns(points)
        g = spec.payload
        if spec.method == "condition3":
            poly = parametric_to_polyhedron(g, spec.tie_shared) if isinstance(g, ParametricGame) \
                else g
            sys_ = build_condition3(poly, shape)
            return sys_, _robust_summary(mean, worst), "polyhedral dual system", None
        if spec.method == "auto" and isinstance(g, ParametricGame):
            Q = special_class_reduce(g)
            if Q is not NotApplicable:
                return (nash_system(Q), tensor_summary(Q, mean, worst),
                        "one-signed parameters, reduced to a fixed game", Q)
        if points is None:
            raise SpecError("cannot enumerate the extreme points of the uncertainty set",
                            "polyhedron")
        return (build_condition2(points, shape), _robust_summary(mean, worst),
                f"extreme-point system over {len(points)} games", None)
    amb, risk = spec.payload, spec.risk
    name, Q = reduce(amb, risk)
    if Q is not NotApplicable:
        labels = {"singleton": "single-point support", "s_zero": "zero dispersion",
                  "risk_neutral": "all players risk neutral"}
        M = amb.mean_tensor()
        summarize = tensor_summary(
            Q, lambda prof, i: expected_payoff(M, prof, i, tol=None),
            lambda prof, i: -expected_payoff(Q, prof, i, tol=None))
        return nash_system(Q), summarize, f"{labels[name]}, reduced to the mean game", Q
    system = build_dro_system(shape, amb, risk)

    def summarize(profile, y):
        vals = worst_case_cvar_report(amb, risk, profile, system, y)
        return [(v.mean_payoff, v.worst_case_cvar) for v in vals], None
    return system, summarize, "worst-case CVaR system", None


def _robust_summary(mean, worst):
    def summarize(profile, y):
        n = len(profile)
        return [(mean(profile, i), worst(profile, i)) for i in range(n)], None
    return summarize


def run(spec: GameSpecFile, **overrides) -> EquilibriumTable:
    """Solve ``spec``; keyword overrides replace solver settings (``None`` is ignored)."""
    cfg = spec.solver_config(**overrides)
    system, summarize, path, reduced = plan(spec)
    stats: dict = {}
    rows = multistart_enumerate(system, cfg, summarize, stats)
    table = EquilibriumTable(spec.name, spec.regime, path, cfg, rows, stats)
    if reduced is not None:
        for k, r in enumerate(rows):
            if r.regrets is not None and np.max(r.regrets) > REDUCED_REGRET_TOL:
                raise InternalError(f"equilibrium {k + 1} has regret {np.max(r.regrets):.3g} "
                                    "in the reduced game")
    if not rows:
        table.diagnostics.append(
            f"0 of {stats.get('starts', 0)} starts reached penalty <= {cfg.penalty_tol:g}; "
            f"best penalty {stats.get('best_penalty', float('nan')):.3e}")
        table.diagnostics.append("try more --starts, a larger max_iters or a looser penalty_tol")
    return table


# -- output -----------------------------------------------------------------

def _fmt(v, digits: int = 6) -> str:
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    v = round(float(v), digits)
    if v == 0:
        v = 0.0
    return f"{v:.{digits}f}"


def _csv(table: EquilibriumTable) -> str:
    out = [CSV_HEADER]
    for k, r in enumerate(table.rows, start=1):
        for i, x in enumerate(r.profile):
            mean, worst = r.per_player[i] if r.per_player else (None, None)
            for j, p in enumerate(x):
                out.append(",".join([str(k), str(i + 1), str(j + 1), _fmt(p), _fmt(mean),
                                     _fmt(worst), f"{r.penalty_residual:.3e}"]))
    if not table.rows:
        out.append(EMPTY_NOTE)
        out += [f"# {d}" for d in table.diagnostics]
    return "\n".join(out) + "\n"


def _plain(table: EquilibriumTable) -> str:
    cfg = table.config
    s = table.stats
    buf = io.StringIO()
    buf.write(f"# {table.name or 'game'}  [{table.regime}]  {table.path}\n")
    buf.write(f"# {cfg.method}, {s.get('starts', cfg.num_starts)} starts from seed {cfg.seed}, "
              f"penalty_tol {cfg.penalty_tol:g}, {s.get('converged', 0)} converged, "
              f"{len(table.rows)} distinct\n")
    buf.write(f"# worst column: {WORST_LABELS[table.regime]}\n")
    if not table.rows:
        buf.write(EMPTY_NOTE + "\n")
        for d in table.diagnostics:
            buf.write(f"# {d}\n")
        return buf.getvalue()
    for k, r in enumerate(table.rows, start=1):
        buf.write(f"\nequilibrium {k}  residual {r.penalty_residual:.3e}  "
                  f"found by {r.starts_converged} starts\n")
        for i, x in enumerate(r.profile):
            mean, worst = r.per_player[i] if r.per_player else (None, None)
            strat = ", ".join(_fmt(p) for p in x)
            line = f"  player {i + 1}  ({strat})  mean {_fmt(mean)}  worst {_fmt(worst)}"
            if r.regrets is not None:
                line += f"  regret {_fmt(r.regrets[i])}"
            buf.write(line + "\n")
    return buf.getvalue()


def emit_table(table: EquilibriumTable, fmt: str = "plain") -> str:
    if fmt == "csv":
        return _csv(table)
    if fmt == "plain":
        return _plain(table)
    raise ValueError(f"unknown format {fmt!r}")


# -- entry point ------------------------------------------------------------

def load(args) -> GameSpecFile:
    if args.spec:
        return parse_spec(args.spec)
    try:
        return spec_from_dict(presets.fixture_dict(args.fixture))
    except KeyError as exc:
        raise SpecError(exc.args[0], "--fixture") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="drgt", description="Enumerate equilibria of nash, bayesian, robust and "
                                 "distributionally robust finite games.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", metavar="PATH", help="JSON game spec file")
    src.add_argument("--fixture", metavar="NAME", help="embedded game spec")
    src.add_argument("--list-fixtures", action="store_true", help="list embedded specs")
    p.add_argument("--method", choices=METHODS, help="descent direction (default bfgs)")
    p.add_argument("--starts", type=int, metavar="N", help="number of random starts")
    p.add_argument("--seed", type=int, metavar="S", help="base seed (default 42)")
    p.add_argument("--format", choices=("plain", "csv"), default="plain")
    p.add_argument("--dump-spec", action="store_true",
                   help="print the parsed spec as JSON and exit")
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.list_fixtures:
        for name in presets.fixture_names():
            out.write(f"{name:32s} {presets.FIXTURES[name].get('description', '')}\n")
        return EXIT_OK
    if args.starts is not None and args.starts < 1:
        err.write("error: --starts must be at least 1\n")
        return EXIT_SPEC
    try:
        spec = load(args)
        if args.dump_spec:
            out.write(emit_spec(spec))
            return EXIT_OK
        table = run(spec, method=args.method, num_starts=args.starts, seed=args.seed)
    except (SpecError, InconsistentAmbiguityError, DimensionError) as exc:
        err.write(f"spec error: {exc}\n")
        return EXIT_SPEC
    except Exception as exc:  # noqa: BLE001 - every other failure is ours
        err.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL
    out.write(emit_table(table, args.format))
    if not table.rows:
        for d in table.diagnostics:
            err.write(f"{d}\n")
        return EXIT_EMPTY
    return EXIT_OK

