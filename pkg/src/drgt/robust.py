"""Feasibility systems for robust-optimization equilibria and the sign reduction."""

from __future__ import annotations

import numpy as np

from .games import DimensionError, GameShape, PayoffTensor
from .multilinear import MultilinearExpr, MultilinearSystem, dot
from .uncertainty import ExtremePointSet, Polyhedron, ParametricGame


class _NotApplicable:
    """Returned by reductions whose preconditions do not hold."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotApplicable"

    def __bool__(self):
        return False


NotApplicable = _NotApplicable()


class Layout:
    """Hands out contiguous variable slots by name."""

    def __init__(self):
        self.blocks: dict[str, tuple[int, int]] = {}
        self.kinds: dict[str, str] = {}
        self.size = 0

    def add(self, name: str, n: int, kind: str = "zero") -> list[MultilinearExpr]:
        self.blocks[name] = (self.size, self.size + n)
        self.kinds[name] = kind
        self.size += n
        return [MultilinearExpr.var(k) for k in range(*self.blocks[name])]


def strategy_monomials(shape: GameShape, xs, skip: int | None = None) -> list[MultilinearExpr]:
    """``prod_{k != skip} x^k_{j_k}`` for every pure profile, in flat order."""
    out = []
    for prof in shape.profiles():
        e = MultilinearExpr.const(1.0)
        for k, j in enumerate(prof):
            if k != skip:
                e = e * xs[k][j]
        out.append(e)
    return out


def payoff_expr(P: PayoffTensor, i: int, xs, deviation: int | None = None) -> MultilinearExpr:
    """``pi_i(P; x)`` as a polynomial, or ``pi_i(P; x^{-i}, e_deviation)``."""
    shape = P.shape
    skip = None if deviation is None else i
    mons = strategy_monomials(shape, xs, skip)
    out = MultilinearExpr()
    for mon, prof in zip(mons, shape.profiles()):
        if deviation is not None and prof[i] != deviation:
            continue
        c = float(P.array[prof + (i,)])
        if c != 0.0:
            out = out + mon * c
    return out


def y_matrix_exprs(shape: GameShape, xs, i: int) -> list[list[MultilinearExpr]]:
    """Symbolic ``Y^i(x^{-i})`` as a ``D x a_i`` nested list (mostly zeros)."""
    N = shape.num_players
    zero = MultilinearExpr()
    Y = [[zero] * shape.actions[i] for _ in range(shape.dim)]
    for flat, (prof, mon) in enumerate(zip(shape.profiles(), strategy_monomials(shape, xs, i))):
        Y[flat * N + i] = list(Y[flat * N + i])
        Y[flat * N + i][prof[i]] = mon
    return Y


def simplex_rows(x) -> tuple[MultilinearExpr, list[MultilinearExpr]]:
    """``sum x - 1 = 0`` and ``-x_j <= 0``."""
    return dot([1.0] * len(x), x) - 1.0, [-v for v in x]


def _strategy_layout(shape: GameShape) -> tuple[Layout, list[list[MultilinearExpr]]]:
    lay = Layout()
    xs = [lay.add(f"x{i}", a, "strategy") for i, a in enumerate(shape.actions)]
    return lay, xs


def build_condition2(points: ExtremePointSet, shape: GameShape | None = None) -> MultilinearSystem:
    """Robust equilibria over the convex hull of ``points``.

    Per player ``i`` the blocks are ``z_i``, ``theta^i`` (weights over the
    points) and ``phi_i``; ``z_i`` is capped by the payoff at every point and
    ``phi_i`` bounds every pure deviation against the ``theta``-mixture, so
    ``z_i = phi_i`` forces ``x^i`` to maximise the worst-case payoff.
    """
    shape = shape or points.shape
    if points.shape != shape:
        raise DimensionError("extreme points do not match the game shape")
    tensors = points.tensors()
    if not tensors:
        raise ValueError("need at least one extreme point")
    lay, xs = _strategy_layout(shape)
    eqs: list[MultilinearExpr] = []
    ineqs: list[MultilinearExpr] = []
    upper: dict[str, list[int]] = {}
    blocks = []
    for i in range(shape.num_players):
        z = lay.add(f"z{i}", 1, "upper")[0]
        theta = lay.add(f"theta{i}", len(tensors), "simplex")
        phi = lay.add(f"phi{i}", 1, f"copy:z{i}")[0]
        blocks.append((z, theta, phi))
    for i, (z, theta, phi) in enumerate(blocks):
        eqs.append(z - phi)
        upper[f"z{i}"] = list(range(len(ineqs), len(ineqs) + len(tensors)))
        ineqs += [z - payoff_expr(G, i, xs) for G in tensors]
        s, nonneg = simplex_rows(xs[i])
        eqs.append(s)
        ineqs += nonneg
        s, nonneg = simplex_rows(theta)
        eqs.append(s)
        for j in range(shape.actions[i]):
            mix = MultilinearExpr()
            for th, G in zip(theta, tensors):
                mix = mix + th * payoff_expr(G, i, xs, deviation=j)
            ineqs.append(mix - phi)
        ineqs += nonneg
    return MultilinearSystem(lay.size, lay.blocks, eqs, ineqs, lay.kinds, upper,
                             tuple(f"x{i}" for i in range(shape.num_players)),
                             {"kind": "condition2", "shape": shape, "points": tensors})


def build_condition3(poly: Polyhedron, shape: GameShape) -> MultilinearSystem:
    """Robust equilibria over ``{v : W v <= h}`` through LP duality.

    Per player ``i``: ``eta^i`` (one per row) certifies the worst case of the
    player's own payoff and ``xi^i`` is a payoff vector in the set against
    which no pure deviation does better.  The rows are written for the set in
    the form ``{v : F v >= d}`` with ``F = -W`` and ``d = -h``.
    """
    if poly.dim != shape.dim:
        raise DimensionError(f"polyhedron in R^{poly.dim}, game has dimension {shape.dim}")
    poly.require_bounded()
    F, d = -poly.W, -poly.h
    m, D = F.shape
    lay, xs = _strategy_layout(shape)
    per = [(lay.add(f"eta{i}", m, "zero"), lay.add(f"xi{i}", D, "zero"))
           for i in range(shape.num_players)]
    eqs: list[MultilinearExpr] = []
    ineqs: list[MultilinearExpr] = []
    for i, (eta, xi) in enumerate(per):
        Y = y_matrix_exprs(shape, xs, i)
        d_eta = dot(d, eta)
        for j in range(shape.actions[i]):
            col = MultilinearExpr()
            for r in range(D):
                if Y[r][j].terms or Y[r][j].constant:
                    col = col + xi[r] * Y[r][j]
            ineqs.append(col - d_eta)
        for r in range(D):
            Yx = MultilinearExpr()
            for j in range(shape.actions[i]):
                if Y[r][j].terms or Y[r][j].constant:
                    Yx = Yx + Y[r][j] * xs[i][j]
            eqs.append(dot(F[:, r], eta) - Yx)
        s, nonneg = simplex_rows(xs[i])
        eqs.append(s)
        ineqs += nonneg
        ineqs += [-e for e in eta]
        ineqs += [d[k] - dot(F[k], xi) for k in range(m)]
    return MultilinearSystem(lay.size, lay.blocks, eqs, ineqs, lay.kinds, {},
                             tuple(f"x{i}" for i in range(shape.num_players)),
                             {"kind": "condition3", "shape": shape})


def special_class_reduce(game: ParametricGame):
    """Complete-information equivalent when every parameter moves each player's
    payoffs in one direction only; ``NotApplicable`` otherwise.

    A parameter that only lowers player ``i``'s payoffs is fixed at its
    maximum for that player and one that only raises them at its minimum.
    """
    shape = game.shape
    bounds = game.bounds()
    out = game.base.array.copy()
    for i in range(shape.num_players):
        for ell, C in enumerate(game.coeffs):
            c = C.player(i)
            if np.any(c > 0) and np.any(c < 0):
                return NotApplicable
            val = bounds[ell, 1] if np.any(c < 0) else bounds[ell, 0]
            out[..., i] += val * c
    return PayoffTensor(out)
