"""Penalty minimisation with Armijo line search, multistart and deduplication."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numba import njit

from .games import random_simplex
from .multilinear import CompiledSystem, MultilinearSystem, _penalty, _penalty_grad

METHODS = ("bfgs", "steepest")
MAX_ARMIJO_EXP = 60
CURVATURE_EPS = 1e-12

# status codes shared by the Python and compiled loops
CONVERGED, STATIONARY, MAX_ITERS, LINE_SEARCH_FAILED, DIVERGED = range(5)
STATUS_NAMES = ("converged", "stationary", "max_iters", "line_search_failed", "diverged")


@dataclass(frozen=True)
class SolverConfig:
    method: str = "bfgs"
    armijo_s: float = 1.0
    armijo_beta: float = 0.5
    armijo_sigma: float = 1e-4
    penalty_tol: float = 1e-10
    grad_tol: float = 1e-8
    max_iters: int = 2000
    num_starts: int = 200
    seed: int = 42
    dedup_tol: float = 1e-3
    warmup_iters: int = 200

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not (0 < self.armijo_beta < 1 and 0 < self.armijo_sigma < 1):
            raise ValueError("armijo beta and sigma must lie in (0, 1)")
        for name in ("armijo_s", "penalty_tol", "grad_tol", "dedup_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 0 or self.num_starts < 0 or self.warmup_iters < 0:
            raise ValueError("iteration and start counts must be nonnegative")

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def penalty(sys: MultilinearSystem, y) -> float:
    """Half the squared equality residuals plus half the squared inequality violations."""
    y = np.asarray(y, dtype=float)
    if y.shape != (sys.num_vars,):
        raise ValueError(f"expected {sys.num_vars} variables, got {y.shape}")
    return sys.compile().penalty(y)


def penalty_gradient(sys: MultilinearSystem, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (sys.num_vars,):
        raise ValueError(f"expected {sys.num_vars} variables, got {y.shape}")
    return sys.compile().penalty_and_gradient(y)[1]


# -- generic optimisers -----------------------------------------------------

@dataclass(frozen=True)
class ArmijoResult:
    step: float | None
    exponent: int
    direction: np.ndarray
    f_new: float

    @property
    def ok(self) -> bool:
        return self.step is not None


def armijo_search(f: Callable, grad_f: Callable, x, d, cfg: SolverConfig,
                  fx: float | None = None, gx=None) -> ArmijoResult:
    """Step ``beta**m * s`` for the smallest ``m`` giving sufficient decrease.

    A direction that is not a descent direction is replaced by ``-grad``.
    ``step`` is ``None`` when no ``m <= 60`` works.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    fx = f(x) if fx is None else fx
    gx = np.asarray(grad_f(x) if gx is None else gx, dtype=float)
    slope = float(gx @ d)
    if not slope < 0:
        d = -gx
        slope = float(gx @ d)
        if not slope < 0:
            return ArmijoResult(None, -1, d, fx)
    step = cfg.armijo_s
    for m in range(MAX_ARMIJO_EXP + 1):
        fn = f(x + step * d)
        if np.isfinite(fn) and fx - fn >= -cfg.armijo_sigma * step * slope:
            return ArmijoResult(step, m, d, fn)
        step *= cfg.armijo_beta
    return ArmijoResult(None, MAX_ARMIJO_EXP, d, fx)


@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    fun: float
    iterations: int
    status: str


def bfgs_update(H: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Inverse-Hessian update from step ``p`` and gradient change ``q``."""
    pq = float(p @ q)
    Hq = H @ q
    return (H + (1.0 + float(q @ Hq) / pq) * np.outer(p, p) / pq
            - (np.outer(Hq, p) + np.outer(p, Hq)) / pq)


def _descent(f, grad_f, x0, cfg: SolverConfig, quasi_newton: bool,
             trace: list | None = None) -> MinimizeResult:
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        return MinimizeResult(x, float("nan"), 0, "diverged")
    fx = float(f(x))
    g = np.asarray(grad_f(x), dtype=float)
    H = np.eye(x.size)
    status = MAX_ITERS
    k = 0
    while True:
        if not (np.isfinite(fx) and np.all(np.isfinite(g))):
            status = DIVERGED
            break
        if fx <= cfg.penalty_tol:
            status = CONVERGED
            break
        if np.linalg.norm(g) <= cfg.grad_tol:
            status = STATIONARY
            break
        if k >= cfg.max_iters:
            status = MAX_ITERS
            break
        d = -(H @ g) if quasi_newton else -g
        if not float(g @ d) < 0:
            H = np.eye(x.size)
        ls = armijo_search(f, grad_f, x, d, cfg, fx, g)
        if not ls.ok:
            status = LINE_SEARCH_FAILED
            break
        x_new = x + ls.step * ls.direction
        g_new = np.asarray(grad_f(x_new), dtype=float)
        if ls.f_new > fx:
            raise AssertionError("Armijo step increased the objective")
        if quasi_newton:
            p, q = x_new - x, g_new - g
            H = bfgs_update(H, p, q) if float(p @ q) > CURVATURE_EPS else np.eye(x.size)
        x, fx, g = x_new, ls.f_new, g_new
        k += 1
        if trace is not None:
            trace.append(fx)
    return MinimizeResult(x, fx, k, STATUS_NAMES[status])


def bfgs_minimize(f, grad_f, x0, cfg: SolverConfig, trace: list | None = None) -> MinimizeResult:
    return _descent(f, grad_f, x0, cfg, True, trace)


def steepest_descent_minimize(f, grad_f, x0, cfg: SolverConfig,
                              trace: list | None = None) -> MinimizeResult:
    return _descent(f, grad_f, x0, cfg, False, trace)


# -- compiled loop over a system's term arrays -------------------------------

@njit(cache=True, nogil=True)
def _minimize_kernel(y0, n_eq, const, cid, coef, V, quasi_newton, s, beta, sigma,
                     ptol, gtol, max_iters, movable):
    n = y0.size
    x = y0.copy()
    fx, g = _penalty_grad(x, n_eq, const, cid, coef, V)
    g = g * movable
    H = np.eye(n)
    d = np.empty(n)
    Hq = np.empty(n)
    status = MAX_ITERS
    k = 0
    while True:
        if not np.isfinite(fx) or not np.all(np.isfinite(g)):
            status = DIVERGED
            break
        if fx <= ptol:
            status = CONVERGED
            break
        if np.sqrt(np.dot(g, g)) <= gtol:
            status = STATIONARY
            break
        if k >= max_iters:
            status = MAX_ITERS
            break
        if quasi_newton:
            for a in range(n):
                acc = 0.0
                for b in range(n):
                    acc -= H[a, b] * g[b]
                d[a] = acc
        else:
            for a in range(n):
                d[a] = -g[a]
        slope = np.dot(g, d)
        if not slope < 0:
            H[:, :] = 0.0
            for a in range(n):
                H[a, a] = 1.0
                d[a] = -g[a]
            slope = np.dot(g, d)
            if not slope < 0:
                status = LINE_SEARCH_FAILED
                break
        step = s
        found = False
        fn = fx
        for _ in range(MAX_ARMIJO_EXP + 1):
            fn = _penalty(x + step * d, n_eq, const, cid, coef, V)
            if np.isfinite(fn) and fx - fn >= -sigma * step * slope:
                found = True
                break
            step *= beta
        if not found:
            status = LINE_SEARCH_FAILED
            break
        x_new = x + step * d
        fn, g_new = _penalty_grad(x_new, n_eq, const, cid, coef, V)
        g_new = g_new * movable
        if quasi_newton:
            p = x_new - x
            q = g_new - g
            pq = np.dot(p, q)
            if pq > CURVATURE_EPS:
                for a in range(n):
                    acc = 0.0
                    for b in range(n):
                        acc += H[a, b] * q[b]
                    Hq[a] = acc
                c1 = (1.0 + np.dot(q, Hq) / pq) / pq
                for a in range(n):
                    for b in range(n):
                        H[a, b] += c1 * p[a] * p[b] - (Hq[a] * p[b] + p[a] * Hq[b]) / pq
            else:
                H[:, :] = 0.0
                for a in range(n):
                    H[a, a] = 1.0
        x = x_new
        fx = fn
        g = g_new
        k += 1
    return x, fx, k, status


def minimize_system(compiled: CompiledSystem, y0, cfg: SolverConfig,
                    frozen=None) -> MinimizeResult:
    """``cfg.method`` on the penalty of a compiled system.

    Variables flagged in the boolean mask ``frozen`` keep their start values.
    """
    n_eq, const, cid, coef, V = compiled.arrays
    movable = np.ones(compiled.num_vars)
    if frozen is not None:
        movable[np.asarray(frozen, dtype=bool)] = 0.0
    x, fx, k, status = _minimize_kernel(
        np.asarray(y0, dtype=float), n_eq, const, cid, coef, V, cfg.method == "bfgs",
        cfg.armijo_s, cfg.armijo_beta, cfg.armijo_sigma, cfg.penalty_tol, cfg.grad_tol,
        cfg.max_iters, movable)
    return MinimizeResult(x, float(fx), int(k), STATUS_NAMES[status])


# -- multistart ------------------------------------------------------------

@dataclass(frozen=True)
class EquilibriumReport:
    profile: tuple[np.ndarray, ...]
    penalty_residual: float
    per_player: tuple[tuple[float, float | None], ...]
    starts_converged: int
    solution: np.ndarray = field(repr=False, compare=False)
    regrets: np.ndarray | None = None

    def vector(self) -> np.ndarray:
        return np.concatenate(self.profile)


def initial_point(sys: MultilinearSystem, rng: np.random.Generator) -> np.ndarray:
    """Random simplex blocks, tightest-bound ``upper`` blocks, copies, zeros."""
    y = np.zeros(sys.num_vars)
    for name, (a, b) in sys.var_layout.items():
        if sys.block_kinds.get(name) in ("strategy", "simplex"):
            y[a:b] = random_simplex(rng, b - a)
    if sys.upper_bounds:
        g = sys.compile().residuals(y)
        ineq = g[len(sys.equalities):]
        for name, rows in sys.upper_bounds.items():
            a, b = sys.var_layout[name]
            # rows read var - bound <= 0 and the var is 0 here
            y[a:b] = np.min(-ineq[rows])
    for name, kind in sys.block_kinds.items():
        if kind.startswith("copy:"):
            a, b = sys.var_layout[name]
            sa, sb = sys.var_layout[kind[5:]]
            y[a:b] = y[sa:sb]
    return y


def project_simplex_clip(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, None)
    s = x.sum()
    return x / s if s > 0 else np.full(x.size, 1.0 / x.size)


def thread_count() -> int:
    cap = os.environ.get("DRGT_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def strategy_mask(sys: MultilinearSystem) -> np.ndarray:
    mask = np.zeros(sys.num_vars, dtype=bool)
    for name in sys.strategy_blocks:
        a, b = sys.var_layout[name]
        mask[a:b] = True
    return mask


def solve_from(sys: MultilinearSystem, y0, cfg: SolverConfig) -> MinimizeResult:
    """Local solve, first fitting zero-started blocks with the strategies held fixed.

    Blocks with no natural starting value begin at zero; the warm-up keeps
    the sampled strategies from being dragged toward the simplex centre
    before those blocks carry any information.
    """
    compiled = sys.compile()
    if cfg.warmup_iters and any(k == "zero" for k in sys.block_kinds.values()):
        warm = minimize_system(compiled, y0, cfg.with_(max_iters=cfg.warmup_iters),
                               frozen=strategy_mask(sys))
        y0 = warm.x
    return minimize_system(compiled, y0, cfg)


def run_starts(sys: MultilinearSystem, cfg: SolverConfig) -> list[MinimizeResult]:
    """One local solve per start; start ``j`` is seeded with ``seed + j``."""
    sys.compile()

    def one(j):
        rng = np.random.default_rng(cfg.seed + j)
        return solve_from(sys, initial_point(sys, rng), cfg)

    threads = thread_count()
    if threads <= 1 or cfg.num_starts <= 1:
        return [one(j) for j in range(cfg.num_starts)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(cfg.num_starts)))


def dedup(points, tol: float, residuals=None) -> list[int]:
    """Indices of cluster representatives.

    Candidates are visited by increasing residual (ties in input order) and
    kept when farther than ``tol`` from every representative kept so far.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    pts = [np.asarray(p, dtype=float) for p in points]
    order = list(range(len(pts)))
    if residuals is not None:
        order.sort(key=lambda k: residuals[k])
    kept: list[int] = []
    for k in order:
        if all(np.linalg.norm(pts[k] - pts[r]) > tol for r in kept):
            kept.append(k)
    return kept


def multistart_enumerate(sys: MultilinearSystem, cfg: SolverConfig,
                         summarize: Callable | None = None,
                         stats: dict | None = None) -> list[EquilibriumReport]:
    """Distinct equilibria found from ``cfg.num_starts`` random starts.

    ``summarize(profile, y)`` gives per-player ``(mean payoff, worst-case
    value)`` pairs and optionally regrets; reports come back sorted
    lexicographically by strategy vector.  ``stats``, when given, receives
    the start count, the converged count and the best penalty reached.
    """
    results = run_starts(sys, cfg)
    good = [r for r in results if r.fun <= cfg.penalty_tol]
    if stats is not None:
        stats.update(starts=len(results), converged=len(good),
                     best_penalty=min((r.fun for r in results), default=float("nan")))
    vecs = [np.concatenate(sys.strategies(r.x)) for r in good]
    keep = dedup(vecs, cfg.dedup_tol, [r.fun for r in good])
    reports = []
    for k in keep:
        r = good[k]
        members = sum(np.linalg.norm(vecs[j] - vecs[k]) <= cfg.dedup_tol for j in range(len(good)))
        profile = tuple(project_simplex_clip(x) for x in sys.strategies(r.x))
        per, reg = ((), None) if summarize is None else summarize(profile, r.x)
        reports.append(EquilibriumReport(profile, r.fun, tuple(per), int(members), r.x, reg))
    reports.sort(key=lambda rep: tuple(np.round(rep.vector(), 12)))
    return reports
