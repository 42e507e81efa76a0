"""Reference computations that share no code path with the library solvers."""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog


def tensor_payoff(array: np.ndarray, profile, i: int) -> float:
    """Expected payoff by summing over every pure profile."""
    total = 0.0
    for prof in itertools.product(*(range(len(x)) for x in profile)):
        w = 1.0
        for k, j in enumerate(prof):
            w *= profile[k][j]
        total += w * array[prof + (i,)]
    return total


def nash_2x2(array: np.ndarray, tol: float = 1e-12) -> list[np.ndarray]:
    """All equilibria ``(x1_0, x2_0)`` of a nondegenerate 2x2 game by support enumeration."""
    A, B = array[..., 0], array[..., 1]
    out = []
    for r, c in itertools.product(range(2), range(2)):
        if A[r, c] >= A[1 - r, c] - tol and B[r, c] >= B[r, 1 - c] - tol:
            out.append(np.array([1.0 - r, 1.0 - c]))
    # player 2 mixes q to make player 1 indifferent, and vice versa
    da = A[0, 0] - A[0, 1] - A[1, 0] + A[1, 1]
    db = B[0, 0] - B[0, 1] - B[1, 0] + B[1, 1]
    if abs(da) > tol and abs(db) > tol:
        q = (A[1, 1] - A[0, 1]) / da
        p = (B[1, 1] - B[1, 0]) / db
        if 0 < p < 1 and 0 < q < 1:
            out.append(np.array([p, q]))
    return out


def hausdorff(a, b) -> float:
    a = [np.asarray(v, float) for v in a]
    b = [np.asarray(v, float) for v in b]
    if not a and not b:
        return 0.0
    if not a or not b:
        return np.inf
    d1 = max(min(np.linalg.norm(x - y) for y in b) for x in a)
    d2 = max(min(np.linalg.norm(x - y) for x in a) for y in b)
    return max(d1, d2)


def cvar_grid(probs, losses, eps: float, n: int = 20001) -> float:
    """``min_z z + E[(L - z)^+] / eps`` over the atoms and a dense grid."""
    probs = np.asarray(probs, float)
    losses = np.asarray(losses, float)
    grid = np.concatenate([losses, np.linspace(losses.min(), losses.max(), n)])
    vals = grid + (probs[None, :] * np.maximum(losses[None, :] - grid[:, None], 0)).sum(1) / eps
    return float(vals.min())


# -- worst-case CVaR over a moment/support/dispersion family -----------------
#
# For a support box whose coordinates move in groups, every function in the
# problem is linear on each cell cut out by the planes v_d = m_d, so extremal
# distributions live on the grid {lo, m, hi} of each group.  With atoms v_k,
# probabilities p_k and a rescaled tail q_k <= p_k / eps:
#     max sum q_k L_k  s.t.  sum p = 1, sum p v = m, sum p |v - m|_1 <= s,
#                            sum q = 1, 0 <= q <= p / eps.

def box_atoms(lo, hi, m, groups=()) -> np.ndarray:
    lo, hi, m = (np.asarray(a, float) for a in (lo, hi, m))
    D = lo.size
    grouped = {d for g in groups for d in g}
    free = [list(g) for g in groups] + [[d] for d in range(D) if d not in grouped and lo[d] < hi[d]]
    choices = []
    for g in free:
        d = g[0]
        choices.append([(g, v) for v in sorted({lo[d], m[d], hi[d]})])
    atoms = []
    for combo in itertools.product(*choices):
        v = m.copy()
        for g, val in combo:
            v[g] = val
        atoms.append(v)
    return np.unique(np.array(atoms), axis=0)


def worst_case_cvar(atoms, m, s, eps, losses) -> float:
    atoms = np.asarray(atoms, float)
    K, D = atoms.shape
    L = np.asarray(losses, float)
    dist = np.abs(atoms - m).sum(1)
    c = np.concatenate([np.zeros(K), -L])
    A_eq = np.zeros((2 + D, 2 * K))
    A_eq[0, :K] = 1
    A_eq[1:1 + D, :K] = atoms.T
    A_eq[1 + D, K:] = 1
    b_eq = np.concatenate([[1.0], m, [1.0]])
    A_ub = np.zeros((1 + K, 2 * K))
    A_ub[0, :K] = dist
    A_ub[1:, :K] = -np.eye(K) / eps
    A_ub[1:, K:] = np.eye(K)
    b_ub = np.concatenate([[s], np.zeros(K)])
    res = linprog(c, A_ub, b_ub, A_eq, b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(res.message)
    return float(-res.fun)


def best_response_value(atoms, m, s, eps, C) -> tuple[float, np.ndarray]:
    """``min_u`` worst-case CVaR of ``-C u`` over the simplex, via the LP dual.

    ``C[k, j]`` is the payoff of pure action ``j`` at atom ``k``.  Variables:
    ``u (a), a0, b (D), c0 >= 0, e0, w (K) >= 0``; minimise
    ``a0 + b.m + c0 s + e0`` subject to
    ``a0 + b.v_k + c0 |v_k - m| - w_k / eps >= 0`` and ``e0 + w_k + C_k u >= 0``.
    """
    atoms = np.asarray(atoms, float)
    C = np.asarray(C, float)
    K, D = atoms.shape
    a = C.shape[1]
    dist = np.abs(atoms - m).sum(1)
    n = a + 1 + D + 1 + 1 + K
    iu, ia, ib, ic, ie, iw = 0, a, a + 1, a + 1 + D, a + 2 + D, a + 3 + D
    cost = np.zeros(n)
    cost[ia], cost[ib:ib + D], cost[ic], cost[ie] = 1.0, m, s, 1.0
    rows = []
    for k in range(K):
        r = np.zeros(n)
        r[ia], r[ib:ib + D], r[ic], r[iw + k] = -1.0, -atoms[k], -dist[k], 1.0 / eps
        rows.append(r)
    for k in range(K):
        r = np.zeros(n)
        r[ie], r[iw + k], r[iu:iu + a] = -1.0, -1.0, -C[k]
        rows.append(r)
    A_eq = np.zeros((1, n))
    A_eq[0, :a] = 1
    bounds = ([(0, None)] * a + [(None, None)] * (1 + D) + [(0, None)] + [(None, None)]
              + [(0, None)] * K)
    res = linprog(cost, np.array(rows), np.zeros(2 * K), A_eq, [1.0], bounds=bounds,
                  method="highs")
    if res.status != 0:
        raise RuntimeError(res.message)
    return float(res.fun), res.x[:a]


def y_matrix(shape_actions, profile, i) -> np.ndarray:
    """``Y^i`` built from nested loops (C-order profiles, player index fastest)."""
    N = len(shape_actions)
    D = N * int(np.prod(shape_actions))
    Y = np.zeros((D, shape_actions[i]))
    for flat, prof in enumerate(itertools.product(*(range(a) for a in shape_actions))):
        w = np.prod([profile[k][prof[k]] for k in range(N) if k != i])
        Y[flat * N + i, prof[i]] = w
    return Y


def dro_regrets(atoms, m, s, epsilons, shape_actions, profile) -> np.ndarray:
    """Per-player gap between the current and the best worst-case CVaR."""
    out = []
    for i, eps in enumerate(epsilons):
        C = np.asarray(atoms) @ y_matrix(shape_actions, profile, i)
        current = worst_case_cvar(atoms, m, s, eps, -C @ np.asarray(profile[i]))
        best, _ = best_response_value(atoms, m, s, eps, C)
        out.append(current - best)
    return np.array(out)


# -- feasibility of a multilinear system with the strategies held fixed -------

def aux_feasibility(system, strategies):
    """Fix every strategy block; the rest of the system is then linear, so an LP
    decides whether auxiliary values exist.  Returns the auxiliary-complete
    solution vector, or ``None`` when the LP is infeasible."""
    C = system.compile()
    n = system.num_vars
    fixed = {}
    for name, x in zip(system.strategy_blocks, strategies):
        a, b = system.var_layout[name]
        for k in range(a, b):
            fixed[k] = float(x[k - a])
    free = [k for k in range(n) if k not in fixed]
    pos = {k: j for j, k in enumerate(free)}
    cid, coef, V = C.cid, C.coef, C.V
    A = np.zeros((C.const.size, len(free)))
    c0 = C.const.astype(float).copy()
    for t in range(cid.size):
        c = coef[t]
        free_vars = []
        for v in V[t]:
            if v >= n:
                continue
            if v in fixed:
                c *= fixed[v]
            else:
                free_vars.append(v)
        if len(free_vars) > 1:
            raise ValueError("system is not linear once strategies are fixed")
        if free_vars:
            A[cid[t], pos[free_vars[0]]] += c
        else:
            c0[cid[t]] += c
    ne = C.n_eq
    res = linprog(np.zeros(len(free)), A_ub=A[ne:], b_ub=-c0[ne:], A_eq=A[:ne], b_eq=-c0[:ne],
                  bounds=(None, None), method="highs")
    if res.status != 0:
        return None
    y = np.zeros(n)
    for k, v in fixed.items():
        y[k] = v
    y[free] = res.x
    return y
