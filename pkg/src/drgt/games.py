"""Normal-form games: payoff tensors, expected payoffs and Nash checks.

Payoffs are stored as an array of shape ``(a_1, ..., a_N, N)`` so that
``array[j_1, ..., j_N, i]`` is the payoff of player ``i`` at the pure profile
``(j_1, ..., j_N)``.  The flat ("vec") layout is the C-order ravel of that
array: action profiles row-major with ``j_1`` slowest and, within a profile,
the players in order.  This is the layout of the published fixture vectors,
e.g. the Free Rider nominal vector ``(9/16, 9/16, 9/16, 1, 1, 9/16, 0, 0)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_ENTRIES = 10**7
SIMPLEX_TOL = 1e-9
SOLVER_SIMPLEX_TOL = 1e-6


class DimensionError(ValueError):
    """Raised when shapes of games, strategies or vectors disagree."""


@dataclass(frozen=True)
class GameShape:
    actions: tuple[int, ...]

    def __post_init__(self):
        acts = tuple(int(a) for a in self.actions)
        if len(acts) < 1:
            raise DimensionError("a game needs at least one player")
        if any(a < 1 for a in acts):
            raise DimensionError(f"every player needs an action, got {acts}")
        if len(acts) * int(np.prod(acts, dtype=object)) > MAX_ENTRIES:
            raise DimensionError(f"game {acts} is too large")
        object.__setattr__(self, "actions", acts)

    @property
    def num_players(self) -> int:
        return len(self.actions)

    @property
    def num_profiles(self) -> int:
        return int(np.prod(self.actions))

    @property
    def dim(self) -> int:
        """Length of the flat payoff vector, ``N * prod(a_i)``."""
        return self.num_players * self.num_profiles

    def profiles(self):
        """Pure action profiles in flat order."""
        return itertools.product(*(range(a) for a in self.actions))

    def vec_index(self, player: int, profile: Sequence[int]) -> int:
        flat = int(np.ravel_multi_index(tuple(profile), self.actions))
        return flat * self.num_players + player


class PayoffTensor:
    """Complete-information payoffs for every player and pure profile."""

    def __init__(self, array):
        array = np.array(array, dtype=float)
        if array.ndim < 2 or array.shape[-1] != array.ndim - 1:
            raise DimensionError(
                f"payoff array must have shape (a_1..a_N, N), got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise ValueError("payoff entries must be finite")
        self.shape = GameShape(array.shape[:-1])
        array.setflags(write=False)
        self.array = array

    @classmethod
    def from_vec(cls, vec, shape: GameShape) -> "PayoffTensor":
        return unflatten(vec, shape)

    @classmethod
    def from_bimatrix(cls, rows) -> "PayoffTensor":
        """Build a two-player game from a table of ``(p1, p2)`` cells."""
        return cls(np.array(rows, dtype=float))

    @classmethod
    def zeros(cls, shape: GameShape) -> "PayoffTensor":
        return cls(np.zeros(shape.actions + (shape.num_players,)))

    def player(self, i: int) -> np.ndarray:
        return self.array[..., i]

    def __eq__(self, other):
        if not isinstance(other, PayoffTensor):
            return NotImplemented
        return self.array.shape == other.array.shape and np.array_equal(
            self.array, other.array)

    def __hash__(self):
        return hash(self.array.tobytes())

    def __repr__(self):
        return f"PayoffTensor({self.array.tolist()!r})"


def flatten(P: PayoffTensor) -> np.ndarray:
    return P.array.ravel().copy()


def unflatten(vec, shape: GameShape) -> PayoffTensor:
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (shape.dim,):
        raise DimensionError(f"expected vector of length {shape.dim}, got {vec.shape}")
    return PayoffTensor(vec.reshape(shape.actions + (shape.num_players,)))


def as_profile(profile, shape: GameShape | None = None,
               tol: float | None = SIMPLEX_TOL) -> tuple[np.ndarray, ...]:
    """Convert to a tuple of float arrays, checking simplex membership.

    ``tol=None`` skips the simplex check (raw multilinear evaluation).
    """
    strategies = tuple(np.asarray(x, dtype=float).ravel() for x in profile)
    if shape is not None:
        if len(strategies) != shape.num_players:
            raise DimensionError(
                f"profile has {len(strategies)} strategies, game has "
                f"{shape.num_players} players")
        for k, (x, a) in enumerate(zip(strategies, shape.actions)):
            if x.shape != (a,):
                raise DimensionError(f"strategy {k} has length {x.size}, expected {a}")
    if tol is not None:
        for k, x in enumerate(strategies):
            if np.any(x < -tol) or abs(x.sum() - 1.0) > tol:
                raise ValueError(f"strategy {k} = {x} is not in the simplex")
    return strategies


def _contract(tensor: np.ndarray, strategies, skip: int | None = None) -> np.ndarray:
    # Contract the last axes first so earlier axis numbers stay valid.
    out = tensor
    for k in reversed(range(len(strategies))):
        if k == skip:
            continue
        out = np.tensordot(out, strategies[k], axes=([k], [0]))
    return out


def expected_payoff(P: PayoffTensor, profile, i: int, tol: float | None = SIMPLEX_TOL) -> float:
    """Expected payoff of player ``i`` when everybody plays ``profile``."""
    xs = as_profile(profile, P.shape, tol)
    return float(_contract(P.player(i), xs))


def pure_payoffs(P: PayoffTensor, profile, i: int, tol: float | None = SIMPLEX_TOL) -> np.ndarray:
    """Payoff of each pure action of player ``i`` against the others."""
    xs = as_profile(profile, P.shape, tol)
    return np.asarray(_contract(P.player(i), xs, skip=i), dtype=float)


def build_Y(profile, i: int, shape: GameShape) -> np.ndarray:
    """Matrix ``Y`` with ``flatten(P) @ Y @ x_i == expected_payoff(P, x, i)``.

    Only the opponents' strategies in ``profile`` are read; entry
    ``[vec_index(i, j), j_i]`` holds ``prod_{k != i} x^k_{j_k}``.
    """
    xs = as_profile(profile, shape, tol=None)
    N = shape.num_players
    Y = np.zeros((shape.dim, shape.actions[i]))
    for flat, prof in enumerate(shape.profiles()):
        w = 1.0
        for k in range(N):
            if k != i:
                w *= xs[k][prof[k]]
        Y[flat * N + i, prof[i]] = w
    return Y


@dataclass(frozen=True)
class NashCheck:
    is_equilibrium: bool
    regrets: np.ndarray
    payoffs: np.ndarray

    def __bool__(self):
        return self.is_equilibrium


def regrets(P: PayoffTensor, profile, tol: float | None = SOLVER_SIMPLEX_TOL) -> np.ndarray:
    xs = as_profile(profile, P.shape, tol)
    out = np.empty(P.shape.num_players)
    for i in range(P.shape.num_players):
        pure = pure_payoffs(P, xs, i, tol=None)
        out[i] = pure.max() - float(pure @ xs[i])
    return out


def is_nash(P: PayoffTensor, profile, tol: float = 1e-9) -> NashCheck:
    """Check the Nash condition via pure deviations; returns per-player regret."""
    xs = as_profile(profile, P.shape, SOLVER_SIMPLEX_TOL)
    reg = regrets(P, xs, tol=None)
    pay = np.array([expected_payoff(P, xs, i, tol=None) for i in range(P.shape.num_players)])
    return NashCheck(bool(np.all(reg <= tol)), reg, pay)


def bayesian_to_nash(distribution) -> PayoffTensor:
    """Entry-wise expectation of a finite ``[(weight, PayoffTensor), ...]`` list.

    With no private information the Bayesian game and the complete-information
    game with this expected tensor have the same equilibria.
    """
    distribution = list(distribution)
    if not distribution:
        raise ValueError("empty type distribution")
    weights = np.array([float(w) for w, _ in distribution])
    tensors = [P for _, P in distribution]
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must be nonnegative and sum to 1, got {weights}")
    shape = tensors[0].shape
    if any(P.shape != shape for P in tensors):
        raise DimensionError("all tensors in a distribution must share a shape")
    return PayoffTensor(sum(w * P.array for w, P in zip(weights, tensors)))


def random_simplex(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform draw from the ``n``-simplex (normalised exponentials)."""
    e = rng.exponential(size=n)
    return e / e.sum()
