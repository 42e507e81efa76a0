"""Polyhedral payoff uncertainty: polyhedra, affine parametric games, vertices."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .games import DimensionError, GameShape, PayoffTensor, flatten, unflatten

MEMBERSHIP_TOL = 1e-9
DEDUP_TOL = 1e-9


class EmptySetError(ValueError):
    pass


class UnsupportedError(ValueError):
    pass


@dataclass(frozen=True)
class Polyhedron:
    """The set ``{v : W v <= h}`` over flattened payoff space."""

    W: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        h = np.array(self.h, dtype=float).ravel()
        if W.ndim == 1 and W.size == 0:
            W = W.reshape(0, 0)
        if W.ndim != 2 or W.shape[0] != h.size:
            raise DimensionError(f"W {W.shape} and h {h.shape} do not match")
        W.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "h", h)

    @classmethod
    def unconstrained(cls, dim: int) -> "Polyhedron":
        return cls(np.zeros((0, dim)), np.zeros(0))

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    @property
    def num_rows(self) -> int:
        return self.W.shape[0]

    def is_bounded(self) -> bool:
        """Cheap necessary check: every coordinate is bounded on both sides by some row."""
        if self.num_rows == 0:
            return self.dim == 0
        return bool(np.all((self.W > 0).any(axis=0) & (self.W < 0).any(axis=0)))

    def require_bounded(self):
        if not self.is_bounded():
            free = np.flatnonzero(~((self.W > 0).any(axis=0) & (self.W < 0).any(axis=0)))
            raise UnsupportedError(f"polyhedron is unbounded along coordinates {free.tolist()}")


def contains(poly: Polyhedron, v, tol: float = MEMBERSHIP_TOL) -> bool:
    v = np.asarray(v, dtype=float).ravel()
    if v.size != poly.dim:
        raise DimensionError(f"vector of length {v.size} for polyhedron in R^{poly.dim}")
    if poly.num_rows == 0:
        return True
    return bool(np.all(poly.W @ v <= poly.h + tol))


# -- parameter supports ----------------------------------------------------

@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("interval support must be bounded")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def bounds(self):
        return float(self.lo), float(self.hi)


@dataclass(frozen=True)
class FiniteSet:
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("finite support needs at least one value")
        if not all(np.isfinite(vals)):
            raise ValueError("finite support must be bounded")
        object.__setattr__(self, "values", vals)

    def bounds(self):
        return min(self.values), max(self.values)


@dataclass(frozen=True)
class UnionOfIntervals:
    """Finite union of closed intervals; isolated points are ``(p, p)``."""

    pieces: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pieces = tuple(Interval(*p).bounds() for p in self.pieces)
        if not pieces:
            raise ValueError("union of intervals needs at least one piece")
        object.__setattr__(self, "pieces", pieces)

    def bounds(self):
        return min(p[0] for p in self.pieces), max(p[1] for p in self.pieces)


Support = Interval | FiniteSet | UnionOfIntervals


@dataclass(frozen=True)
class ParametricGame:
    """Payoffs affine in parameters: ``base + sum_l f_l * coeffs[l]``."""

    base: PayoffTensor
    coeffs: tuple[PayoffTensor, ...]
    supports: tuple[Support, ...]
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        object.__setattr__(self, "supports", tuple(self.supports))
        if len(self.coeffs) != len(self.supports):
            raise DimensionError("one support per parameter is required")
        if any(c.shape != self.base.shape for c in self.coeffs):
            raise DimensionError("coefficient tensors must match the base shape")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"f{k + 1}" for k in range(len(self.coeffs))))

    @property
    def shape(self) -> GameShape:
        return self.base.shape

    @property
    def num_params(self) -> int:
        return len(self.coeffs)

    def bounds(self) -> np.ndarray:
        return np.array([s.bounds() for s in self.supports], dtype=float).reshape(-1, 2)

    def coeff_matrix(self) -> np.ndarray:
        """``D x v`` matrix so that ``flatten(P(f)) = flatten(base) + C @ f``."""
        if not self.coeffs:
            return np.zeros((self.shape.dim, 0))
        return np.column_stack([flatten(c) for c in self.coeffs])

    def evaluate(self, f) -> PayoffTensor:
        f = np.asarray(f, dtype=float).ravel()
        if f.size != self.num_params:
            raise DimensionError(f"expected {self.num_params} parameters, got {f.size}")
        return unflatten(flatten(self.base) + self.coeff_matrix() @ f, self.shape)


@dataclass(frozen=True)
class ExtremePointSet:
    shape: GameShape
    points: np.ndarray  # k x D, one flattened tensor per row

    def __len__(self):
        return self.points.shape[0]

    def tensors(self) -> list[PayoffTensor]:
        return [unflatten(p, self.shape) for p in self.points]


def _dedup_rows(points: np.ndarray, tol: float) -> np.ndarray:
    kept: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) > tol for q in kept):
            kept.append(p)
    if not kept:
        return np.zeros((0, points.shape[1] if points.ndim == 2 else 0))
    return np.array(kept)


def box_extreme_points(game: ParametricGame, max_params: int = 20) -> ExtremePointSet:
    """Payoff tensors at every corner of the parameter box.

    Finite and union supports contribute only their min and max; for payoffs
    affine in the parameters those corners span the induced payoff set.
    """
    if game.num_params > max_params:
        raise ValueError(f"{game.num_params} parameters exceeds the limit of {max_params}")
    bounds = game.bounds()
    axes = [sorted({lo, hi}) for lo, hi in bounds]
    base = flatten(game.base)
    C = game.coeff_matrix()
    pts = np.array([base + C @ np.array(corner, dtype=float)
                    for corner in itertools.product(*axes)]).reshape(-1, game.shape.dim)
    return ExtremePointSet(game.shape, _dedup_rows(pts, DEDUP_TOL))


def equality_rows(poly: Polyhedron, tol: float = 1e-12) -> np.ndarray:
    """Indices ``r`` such that another row is exactly ``(-W[r], -h[r])``."""
    W, h = poly.W, poly.h
    eq = []
    for r in range(poly.num_rows):
        neg = np.all(np.abs(W + W[r]) <= tol, axis=1) & (np.abs(h + h[r]) <= tol)
        if neg.any():
            eq.append(r)
    return np.array(eq, dtype=int)


def vertex_enumerate(poly: Polyhedron, max_dim: int = 12, max_rows: int = 64,
                     shape: GameShape | None = None) -> ExtremePointSet:
    """All vertices by brute-force basis enumeration.

    Rows that pair up as equalities are always part of the active set, so only
    the remaining rows are enumerated to complete a basis.
    """
    D, m = poly.dim, poly.num_rows
    if D > max_dim or m > max_rows:
        raise ValueError(f"vertex enumeration limited to D<={max_dim}, m<={max_rows}")
    poly.require_bounded()
    # drop exact duplicate rows
    _, first = np.unique(np.column_stack([poly.W, poly.h]).round(12), axis=0, return_index=True)
    keep = np.sort(first)
    W, h = poly.W[keep], poly.h[keep]
    reduced = Polyhedron(W, h)

    eq = equality_rows(reduced)
    # basis of the equality block
    eq_basis: list[int] = []
    for r in eq:
        cand = eq_basis + [int(r)]
        if np.linalg.matrix_rank(W[cand]) == len(cand):
            eq_basis = cand
    rest = [r for r in range(len(h)) if r not in set(eq.tolist())]
    need = D - len(eq_basis)

    found = []
    for combo in itertools.combinations(rest, need):
        rows = eq_basis + list(combo)
        A = W[rows]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        v = np.linalg.solve(A, h[rows])
        if np.all(W @ v <= h + MEMBERSHIP_TOL):
            found.append(v)
    if not found:
        raise EmptySetError("polyhedron has no vertices (empty)")
    pts = _dedup_rows(np.array(found), DEDUP_TOL)
    if shape is None:
        # a one-player game with D actions has a flat vector of length D
        shape = GameShape((D,))
    elif shape.dim != D:
        raise DimensionError(f"shape {shape.actions} does not have dimension {D}")
    return ExtremePointSet(shape, pts)


def parametric_to_polyhedron(game: ParametricGame, tie_shared: bool = True) -> Polyhedron:
    """Inequality description of the payoffs generated by an affine box game.

    With ``tie_shared`` each parameter is read off the first entry that
    depends on it alone; that entry gets the parameter's range as a pair of
    rows and every other entry is tied to those pivots by an equality pair,
    which describes the image of the box exactly.  Parameters without such an
    entry fall back to per-entry ranges.  Without ``tie_shared`` every entry
    gets its own range (the smallest enclosing box).  Constant entries are
    always an equality pair.
    """
    if not all(isinstance(s, Interval) for s in game.supports):
        raise UnsupportedError("parametric_to_polyhedron needs interval supports")
    D = game.shape.dim
    base = flatten(game.base)
    C = game.coeff_matrix()
    bounds = game.bounds()
    if C.size:
        lo = base + np.where(C > 0, C * bounds[:, 0], C * bounds[:, 1]).sum(axis=1)
        hi = base + np.where(C > 0, C * bounds[:, 1], C * bounds[:, 0]).sum(axis=1)
    else:
        lo, hi = base.copy(), base.copy()

    pivot: dict[int, int] = {}
    if tie_shared:
        for d in range(D):
            nz = np.flatnonzero(C[d])
            if nz.size == 1 and int(nz[0]) not in pivot:
                pivot[int(nz[0])] = d
    pivots = set(pivot.values())

    rows, rhs = [], []

    def pair(row, b_hi, b_lo):
        rows.extend([row, -row])
        rhs.extend([b_hi, -b_lo])

    for d in range(D):
        e = np.zeros(D)
        e[d] = 1.0
        nz = np.flatnonzero(C[d])
        if d in pivots or not nz.size or not all(int(k) in pivot for k in nz):
            pair(e, hi[d], lo[d])
            continue
        # v_d - sum_l (C[d,l] / C[p_l,l]) v_{p_l} is constant over the family
        row, const = e, base[d]
        for k in nz:
            p = pivot[int(k)]
            r = C[d, k] / C[p, k]
            row = row.copy()
            row[p] -= r
            const -= r * base[p]
        pair(row, const, const)
    return Polyhedron(np.array(rows), np.array(rhs))
