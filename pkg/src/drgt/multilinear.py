"""Multilinear feasibility systems and their compiled residual evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from numba import njit


class MultilinearExpr:
    """``constant + sum coef * prod(y[v] for v in vars)``.

    Variable multisets are kept sorted and identical ones are merged, so two
    expressions that are equal as polynomials compare equal.
    """

    __slots__ = ("_terms", "constant")

    def __init__(self, terms: Mapping[tuple[int, ...], float] | Iterable = (), constant: float = 0.0):
        acc: dict[tuple[int, ...], float] = {}
        items = terms.items() if isinstance(terms, Mapping) else ((v, c) for c, v in terms)
        const = float(constant)
        for vars_, coef in items:
            key = tuple(sorted(int(v) for v in vars_))
            if not key:
                const += float(coef)
                continue
            acc[key] = acc.get(key, 0.0) + float(coef)
        self._terms = {k: c for k, c in acc.items() if c != 0.0}
        self.constant = const

    @classmethod
    def var(cls, index: int, coef: float = 1.0) -> "MultilinearExpr":
        return cls({(index,): coef})

    @classmethod
    def const(cls, value: float) -> "MultilinearExpr":
        return cls({}, value)

    @property
    def terms(self) -> tuple[tuple[float, tuple[int, ...]], ...]:
        return tuple((c, k) for k, c in sorted(self._terms.items()))

    @property
    def degree(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    def variables(self) -> set[int]:
        return {v for k in self._terms for v in k}

    def _lift(self, other) -> "MultilinearExpr":
        return other if isinstance(other, MultilinearExpr) else MultilinearExpr.const(other)

    def __add__(self, other):
        other = self._lift(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0.0) + c
        return MultilinearExpr(acc, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self):
        return MultilinearExpr({k: -c for k, c in self._terms.items()}, -self.constant)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultilinearExpr):
            s = float(other)
            return MultilinearExpr({k: s * c for k, c in self._terms.items()}, s * self.constant)
        acc: dict[tuple[int, ...], float] = {}
        left = list(self._terms.items()) + [((), self.constant)]
        right = list(other._terms.items()) + [((), other.constant)]
        for ka, ca in left:
            for kb, cb in right:
                if ca == 0.0 or cb == 0.0:
                    continue
                key = tuple(sorted(ka + kb))
                acc[key] = acc.get(key, 0.0) + ca * cb
        const = acc.pop((), 0.0)
        return MultilinearExpr(acc, const)

    __rmul__ = __mul__

    def evaluate(self, y) -> float:
        y = np.asarray(y, dtype=float)
        return self.constant + sum(c * float(np.prod(y[list(k)])) for k, c in self._terms.items())

    def __eq__(self, other):
        if not isinstance(other, MultilinearExpr):
            return NotImplemented
        return self._terms == other._terms and self.constant == other.constant

    def __repr__(self):
        parts = [f"{c:+g}*" + "*".join(f"y{v}" for v in k) for c, k in self.terms]
        if self.constant or not parts:
            parts.append(f"{self.constant:+g}")
        return "MultilinearExpr(" + " ".join(parts) + ")"


def dot(coeffs, exprs) -> MultilinearExpr:
    """``sum_k coeffs[k] * exprs[k]`` skipping zero coefficients."""
    out = MultilinearExpr()
    for c, e in zip(coeffs, exprs):
        if c != 0.0:
            out = out + e * float(c)
    return out


@dataclass
class MultilinearSystem:
    """Equalities ``g = 0`` and inequalities ``g <= 0`` over ``num_vars`` variables.

    ``var_layout`` maps block names to ``(start, stop)`` slot ranges and
    ``block_kinds`` tells the solver how to initialise each block:
    ``strategy`` and ``simplex`` blocks are sampled on the simplex, ``upper``
    blocks start at the tightest bound among the inequality rows listed in
    ``upper_bounds``, ``copy:<name>`` blocks copy another block, everything
    else starts at zero.
    """

    num_vars: int
    var_layout: dict[str, tuple[int, int]]
    equalities: list[MultilinearExpr]
    inequalities: list[MultilinearExpr]
    block_kinds: dict[str, str] = field(default_factory=dict)
    upper_bounds: dict[str, list[int]] = field(default_factory=dict)
    strategy_blocks: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)
    _compiled: "CompiledSystem | None" = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        ranges = sorted(self.var_layout.values())
        prev = 0
        for a, b in ranges:
            if a != prev or b < a:
                raise ValueError(f"var_layout ranges must tile 0..num_vars, got {ranges}")
            prev = b
        if prev != self.num_vars:
            raise ValueError(f"var_layout covers {prev} slots, num_vars is {self.num_vars}")
        for e in self.equalities + self.inequalities:
            if any(v >= self.num_vars or v < 0 for v in e.variables()):
                raise ValueError("expression references a variable outside the system")

    def block(self, y, name: str) -> np.ndarray:
        a, b = self.var_layout[name]
        return np.asarray(y)[a:b]

    def strategies(self, y) -> tuple[np.ndarray, ...]:
        return tuple(self.block(y, n).copy() for n in self.strategy_blocks)

    @property
    def degree(self) -> int:
        return max((e.degree for e in self.equalities + self.inequalities), default=0)

    def compile(self) -> "CompiledSystem":
        if self._compiled is None:
            self._compiled = CompiledSystem.from_system(self)
        return self._compiled


@dataclass(frozen=True)
class CompiledSystem:
    """Flat term arrays for fast evaluation.

    Term ``t`` contributes ``coef[t] * prod(y_ext[V[t]])`` to constraint
    ``cid[t]``; ``y_ext`` is ``y`` with a trailing 1 used to pad short terms.
    Constraints ``0..n_eq-1`` are equalities, the rest inequalities.
    """

    num_vars: int
    n_eq: int
    const: np.ndarray
    cid: np.ndarray
    coef: np.ndarray
    V: np.ndarray

    @classmethod
    def from_system(cls, sys: MultilinearSystem) -> "CompiledSystem":
        exprs = list(sys.equalities) + list(sys.inequalities)
        dmax = max(1, sys.degree)
        pad = sys.num_vars
        cid, coef, rows = [], [], []
        for n, e in enumerate(exprs):
            for c, k in e.terms:
                cid.append(n)
                coef.append(c)
                rows.append(list(k) + [pad] * (dmax - len(k)))
        V = np.array(rows, dtype=np.int64).reshape(-1, dmax)
        return cls(sys.num_vars, len(sys.equalities),
                   np.array([e.constant for e in exprs], dtype=float),
                   np.array(cid, dtype=np.int64), np.array(coef, dtype=float), V)

    @property
    def num_constraints(self) -> int:
        return self.const.size

    def residuals(self, y) -> np.ndarray:
        return _residuals(np.asarray(y, dtype=float), self.const, self.cid, self.coef, self.V)

    def penalty(self, y) -> float:
        return _penalty(np.asarray(y, dtype=float), self.n_eq, self.const, self.cid, self.coef, self.V)

    def penalty_and_gradient(self, y) -> tuple[float, np.ndarray]:
        return _penalty_grad(np.asarray(y, dtype=float), self.n_eq, self.const,
                             self.cid, self.coef, self.V)

    @property
    def arrays(self):
        return self.n_eq, self.const, self.cid, self.coef, self.V


# -- jitted kernels ----------------------------------------------------------

@njit(cache=True)
def _residuals(y, const, cid, coef, V):
    nv = y.size
    g = const.copy()
    d = V.shape[1]
    for t in range(cid.size):
        p = coef[t]
        for q in range(d):
            v = V[t, q]
            if v < nv:
                p *= y[v]
        g[cid[t]] += p
    return g


@njit(cache=True)
def _penalty(y, n_eq, const, cid, coef, V):
    g = _residuals(y, const, cid, coef, V)
    s = 0.0
    for n in range(g.size):
        r = g[n]
        if n < n_eq or r > 0.0:
            s += r * r
    return 0.5 * s


@njit(cache=True)
def _penalty_grad(y, n_eq, const, cid, coef, V):
    nv = y.size
    g = _residuals(y, const, cid, coef, V)
    s = 0.0
    for n in range(g.size):
        if n >= n_eq and g[n] < 0.0:
            g[n] = 0.0
        s += g[n] * g[n]
    grad = np.zeros(nv)
    d = V.shape[1]
    for t in range(cid.size):
        r = g[cid[t]]
        if r == 0.0:
            continue
        for p in range(d):
            vp = V[t, p]
            if vp >= nv:
                continue
            other = coef[t]
            for q in range(d):
                if q != p:
                    v = V[t, q]
                    if v < nv:
                        other *= y[v]
            grad[vp] += r * other
    return 0.5 * s, grad
