"""Distributionally robust games: ambiguity sets, CVaR and the equilibrium system.

Each player minimises the worst-case CVaR of its loss (negated payoff) over
all distributions of the payoff vector supported on a polyhedron, with a given
mean and a bound on the mean absolute deviation from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .games import DimensionError, GameShape, PayoffTensor, as_profile, expected_payoff, unflatten
from .multilinear import MultilinearExpr, MultilinearSystem, dot
from .robust import Layout, NotApplicable, simplex_rows, y_matrix_exprs
from .uncertainty import (EmptySetError, Polyhedron, contains, equality_rows,
                          vertex_enumerate)

SINGLETON_TOL = 1e-8


class EmptyAmbiguityError(ValueError):
    pass


class InconsistentAmbiguityError(ValueError):
    pass


@dataclass(frozen=True)
class AmbiguitySet:
    shape: GameShape
    support: Polyhedron
    mean: np.ndarray
    dispersion: float

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).ravel()
        if mean.size != self.shape.dim or self.support.dim != self.shape.dim:
            raise DimensionError(
                f"mean ({mean.size}) and support ({self.support.dim}) must have "
                f"dimension {self.shape.dim}")
        if not self.dispersion >= 0:
            raise ValueError(f"dispersion must be >= 0, got {self.dispersion}")
        self.support.require_bounded()
        if not contains(self.support, mean):
            raise EmptyAmbiguityError("mean vector lies outside the support")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "dispersion", float(self.dispersion))

    def mean_tensor(self) -> PayoffTensor:
        return unflatten(self.mean, self.shape)


@dataclass(frozen=True)
class RiskProfile:
    epsilons: tuple[float, ...]

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps or any(not (0.0 < e <= 1.0) for e in eps):
            raise ValueError(f"risk levels must lie in (0, 1], got {eps}")
        object.__setattr__(self, "epsilons", eps)

    def __len__(self):
        return len(self.epsilons)


@dataclass(frozen=True)
class DiscreteLossDistribution:
    probs: np.ndarray
    losses: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        L = np.array(self.losses, dtype=float).ravel()
        if p.size != L.size or p.size == 0:
            raise ValueError("need matching, non-empty probabilities and losses")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "losses", L)

    @classmethod
    def from_atoms(cls, atoms: Sequence[tuple[float, float]]) -> "DiscreteLossDistribution":
        atoms = list(atoms)
        return cls([a[0] for a in atoms], [a[1] for a in atoms])

    def mean(self) -> float:
        return float(self.probs @ self.losses)


def cvar(dist: DiscreteLossDistribution, eps: float) -> float:
    """Average loss over the worst ``eps`` probability mass."""
    if not (0.0 < eps <= 1.0):
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if eps == 1.0:
        return dist.mean()
    order = np.argsort(-dist.losses, kind="stable")
    p, L = dist.probs[order], dist.losses[order]
    total, mass = 0.0, 0.0
    for pk, lk in zip(p, L):
        take = min(pk, eps - mass)
        if take <= 0:
            break
        total += take * lk
        mass += take
    return total / eps


def sigma(eps: float) -> float:
    if not (0.0 < eps <= 1.0):
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    return (1.0 - eps) / eps


def build_dro_system(shape: GameShape, amb: AmbiguitySet, risk: RiskProfile) -> MultilinearSystem:
    """Feasibility system whose strategy projection is the set of equilibria.

    For player ``i``, ``rho_i`` is the optimal value of the dual of the
    worst-case CVaR problem (``zeta, alpha, beta, gamma, lambda, kappa, xi,
    delta, nu, theta`` are its variables) and ``f, g, phi, tau`` certify that
    no pure deviation achieves a lower worst-case CVaR than ``rho_i``.
    """
    if amb.shape != shape:
        raise DimensionError("ambiguity set shape does not match the game")
    if len(risk) != shape.num_players:
        raise DimensionError(f"need {shape.num_players} risk levels, got {len(risk)}")
    W, h = amb.support.W, amb.support.h
    m, s = amb.mean, amb.dispersion
    R, D = W.shape
    lay = Layout()
    xs = [lay.add(f"x{i}", a, "strategy") for i, a in enumerate(shape.actions)]
    names = [("alpha", 1), ("zeta", 1), ("rho", 1), ("gamma", 1), ("beta", D), ("lambda", D),
             ("kappa", D), ("delta", D), ("nu", D), ("tau", D), ("f", D), ("phi", D),
             ("g", D), ("xi", R), ("theta", R)]
    blocks = [{n: lay.add(f"{n}{i}", k) for n, k in names} for i in range(shape.num_players)]

    def mat_vec(A, v):
        return [dot(row, v) for row in A]

    eqs: list[MultilinearExpr] = []
    ineqs: list[MultilinearExpr] = []
    for i, b in enumerate(blocks):
        eps = risk.epsilons[i]
        sig = sigma(eps)
        alpha, zeta, rho, gamma = b["alpha"][0], b["zeta"][0], b["rho"][0], b["gamma"][0]
        beta, lam, kap, dlt, nu = b["beta"], b["lambda"], b["kappa"], b["delta"], b["nu"]
        tau, f, phi, g, xi, th = b["tau"], b["f"], b["phi"], b["g"], b["xi"], b["theta"]
        Y = y_matrix_exprs(shape, xs, i)
        Yx = [dot([1.0] * len(xs[i]), [Y[r][j] * xs[i][j] for j in range(len(xs[i]))])
              for r in range(D)]
        Wt_xi = mat_vec(W.T, xi)
        Wt_th = mat_vec(W.T, th)

        eqs.append(zeta + (alpha + dot(m, beta) + gamma * s) * (1.0 / eps) - rho)
        s_row, x_nonneg = simplex_rows(xs[i])
        eqs.append(s_row)
        ineqs.append(-(alpha - dot(m, lam) + dot(m, kap) + dot(h, xi)))
        eqs += [-lam[r] + kap[r] + Wt_xi[r] - beta[r] for r in range(D)]
        ineqs += [lam[r] + kap[r] - gamma for r in range(D)]
        ineqs += [dlt[r] + nu[r] - gamma for r in range(D)]
        ineqs.append(-(alpha - dot(m, dlt) + dot(m, nu) + dot(h, th) + zeta))
        eqs += [-dlt[r] + nu[r] + Wt_th[r] - beta[r] - Yx[r] for r in range(D)]
        ineqs.append(-dot([1.0] * D, g) - dot([1.0] * D, phi) - s / eps)
        eqs += [-tau[r] - f[r] - m[r] / eps for r in range(D)]
        ineqs += [-tau[r] + phi[r] - sig * m[r] for r in range(D)]
        ineqs += [tau[r] + phi[r] + sig * m[r] for r in range(D)]
        W_tau = mat_vec(W, tau)
        W_f = mat_vec(W, f)
        ineqs += [-sig * h[k] - W_tau[k] for k in range(R)]
        ineqs += [-h[k] - W_f[k] for k in range(R)]
        ineqs += [-f[r] + g[r] - m[r] for r in range(D)]
        ineqs += [f[r] + g[r] + m[r] for r in range(D)]
        for j in range(shape.actions[i]):
            fY = MultilinearExpr()
            for r in range(D):
                if Y[r][j].terms or Y[r][j].constant:
                    fY = fY + f[r] * Y[r][j]
            ineqs.append(rho - fY)
        ineqs += [-v for v in lam + kap + dlt + nu]
        ineqs += x_nonneg
        ineqs += list(th) + list(xi) + list(phi) + list(g)
        ineqs.append(-gamma)
    return MultilinearSystem(lay.size, lay.blocks, eqs, ineqs, lay.kinds, {},
                             tuple(f"x{i}" for i in range(shape.num_players)),
                             {"kind": "dro", "shape": shape, "ambiguity": amb, "risk": risk})


def reduce_risk_neutral(amb: AmbiguitySet, risk: RiskProfile):
    """All players risk neutral: play the game with the mean payoffs."""
    if all(e == 1.0 for e in risk.epsilons):
        return amb.mean_tensor()
    return NotApplicable


def reduce_s_zero(amb: AmbiguitySet):
    """Zero dispersion pins the distribution to the mean."""
    if amb.dispersion <= 1e-12:
        return amb.mean_tensor()
    return NotApplicable


def support_point(poly: Polyhedron):
    """The single point of ``poly`` if it has exactly one, else ``None``."""
    W, h = poly.W, poly.h
    eq = equality_rows(poly)
    if eq.size and np.linalg.matrix_rank(W[eq]) == poly.dim:
        v = np.linalg.lstsq(W[eq], h[eq], rcond=None)[0]
        return v if contains(poly, v) else None
    if poly.dim > 12 or poly.num_rows > 64:
        return None
    try:
        pts = vertex_enumerate(poly).points
    except EmptySetError:
        return None
    if len(pts) == 1 or np.all(np.linalg.norm(pts - pts[0], axis=1) <= SINGLETON_TOL):
        return pts[0]
    return None


def reduce_singleton(amb: AmbiguitySet):
    """A one-point support leaves nothing uncertain."""
    v = support_point(amb.support)
    if v is None:
        return NotApplicable
    if np.linalg.norm(v - amb.mean) > SINGLETON_TOL:
        raise InconsistentAmbiguityError("single support point differs from the mean")
    return unflatten(v, amb.shape)


def reduce(amb: AmbiguitySet, risk: RiskProfile):
    """First applicable reduction in the order singleton, zero dispersion, risk neutral.

    Returns ``(name, tensor)`` or ``(None, NotApplicable)``.
    """
    for name, out in (("singleton", lambda: reduce_singleton(amb)),
                      ("s_zero", lambda: reduce_s_zero(amb)),
                      ("risk_neutral", lambda: reduce_risk_neutral(amb, risk))):
        t = out()
        if t is not NotApplicable:
            return name, t
    return None, NotApplicable


@dataclass(frozen=True)
class PlayerValue:
    mean_payoff: float
    worst_case_cvar: float | None
    verified: bool


def worst_case_cvar_report(amb: AmbiguitySet, risk: RiskProfile, profile,
                           system: MultilinearSystem | None = None, y=None,
                           residual: float | None = None, tol: float = 1e-6) -> list[PlayerValue]:
    """Mean payoff under ``m`` and the worst-case CVaR of loss per player.

    The CVaR is read from ``rho_i`` of a solved system.  It is flagged
    unverified when the point does not solve the system to ``tol``.  With no
    system, only the trivial single-point case is filled in.
    """
    P = amb.mean_tensor()
    xs = as_profile(profile, P.shape, 1e-6)
    out = []
    for i in range(P.shape.num_players):
        mean = expected_payoff(P, xs, i, tol=None)
        if system is not None and y is not None:
            r = system.compile().penalty(y) if residual is None else residual
            out.append(PlayerValue(mean, float(system.block(y, f"rho{i}")[0]), bool(r <= tol)))
        elif support_point(amb.support) is not None:
            # every distribution is the point mass at the mean
            pay = expected_payoff(P, xs, i, tol=None)
            loss = DiscreteLossDistribution([1.0], [-pay])
            out.append(PlayerValue(mean, cvar(loss, risk.epsilons[i]), True))
        else:
            out.append(PlayerValue(mean, None, False))
    return out
