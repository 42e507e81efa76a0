"""The Free Rider and Inspection games with their published uncertainty data."""

from __future__ import annotations

from fractions import Fraction as Fr

import numpy as np

from .games import GameShape, PayoffTensor
from .uncertainty import Interval, ParametricGame, Polyhedron, contains

SHAPE_2x2 = GameShape((2, 2))


def _rows(*pairs) -> np.ndarray:
    """``(+e_a - e_b, -e_a + e_b)`` row pairs; ``b=None`` gives ``(+e_a, -e_a)``."""
    out = []
    for a, b in pairs:
        r = np.zeros(8)
        r[a - 1] = 1.0
        if b is not None:
            r[b - 1] = -1.0
        out += [r, -r]
    return np.array(out)


# Free Rider: vec = (1-c, 1-c, 1-c, 1, 1, 1-c, 0, 0).
# As published the last pair repeats column 7 and leaves column 8 free.
FREE_RIDER_W_PUBLISHED = _rows((1, None), (1, 2), (1, 3), (1, 6), (4, None), (5, None),
                               (7, None), (7, None))
FREE_RIDER_W = _rows((1, None), (1, 2), (1, 3), (1, 6), (4, None), (5, None),
                     (7, None), (8, None))
FREE_RIDER_H = np.array([6 / 8, -3 / 8, 0, 0, 0, 0, 0, 0, 1, -1, 1, -1, 0, 0, 0, 0])
FREE_RIDER_H_SINGLETON = np.array([1 / 2, -1 / 2, 0, 0, 0, 0, 0, 0, 1, -1, 1, -1, 0, 0, 0, 0])
FREE_RIDER_M1 = np.array([9 / 16, 9 / 16, 9 / 16, 1, 1, 9 / 16, 0, 0])
FREE_RIDER_M2 = np.array([1 / 2, 1 / 2, 1 / 2, 1, 1, 1 / 2, 0, 0])

# Inspection: vec = (0, -h, w, -w, w-g, v-w-h, w-g, v-w), a plain box.
INSPECTION_W = _rows(*((k, None) for k in range(1, 9)))
INSPECTION_H = np.array([0, 0, -4, 6, 15, -15, -15, 15, 7, -3, 5, 5, 7, -3, 9, -1], dtype=float)
INSPECTION_H_SINGLETON = np.array([0, 0, -5, 5, 15, -15, -15, 15, 6, -6, -3, 3, 6, -6, 2, -2],
                                  dtype=float)
INSPECTION_M1 = np.array([0, -5, 15, -15, 5, 0, 5, 5], dtype=float)
INSPECTION_M2 = np.array([0, -5, 15, -15, 6, -3, 6, 2], dtype=float)

FREE_RIDER_C_MID = Fr(7, 16)
FREE_RIDER_C_HALFWIDTH = Fr(3, 16)


def free_rider_tensor(c: float) -> PayoffTensor:
    return PayoffTensor.from_bimatrix([[(1 - c, 1 - c), (1 - c, 1)],
                                       [(1, 1 - c), (0, 0)]])


def free_rider_parametric(lo: float = 1 / 4, hi: float = 5 / 8) -> ParametricGame:
    base = PayoffTensor.from_bimatrix([[(1, 1), (1, 1)], [(1, 1), (0, 0)]])
    coeff = PayoffTensor.from_bimatrix([[(-1, -1), (-1, 0)], [(0, -1), (0, 0)]])
    return ParametricGame(base, (coeff,), (Interval(lo, hi),), ("c",))


def inspection_tensor(g: float, v: float, h: float, w: float = 15.0) -> PayoffTensor:
    return PayoffTensor.from_bimatrix([[(0, -h), (w, -w)],
                                       [(w - g, v - w - h), (w - g, v - w)]])


def inspection_parametric(g=(8, 12), v=(16, 24), h=(4, 6), w: float = 15.0,
                          supports=None) -> ParametricGame:
    base = inspection_tensor(0, 0, 0, w)
    cg = PayoffTensor.from_bimatrix([[(0, 0), (0, 0)], [(-1, 0), (-1, 0)]])
    cv = PayoffTensor.from_bimatrix([[(0, 0), (0, 0)], [(0, 1), (0, 1)]])
    ch = PayoffTensor.from_bimatrix([[(0, -1), (0, 0)], [(0, -1), (0, 0)]])
    if supports is None:
        supports = (Interval(*g), Interval(*v), Interval(*h))
    return ParametricGame(base, (cg, cv, ch), supports, ("g", "v", "h"))


SUPPORTS = {
    "free_rider": Polyhedron(FREE_RIDER_W, FREE_RIDER_H),
    "free_rider_singleton": Polyhedron(FREE_RIDER_W, FREE_RIDER_H_SINGLETON),
    "inspection": Polyhedron(INSPECTION_W, INSPECTION_H),
    "inspection_singleton": Polyhedron(INSPECTION_W, INSPECTION_H_SINGLETON),
}

PUBLISHED_SUPPORTS = {
    "free_rider": Polyhedron(FREE_RIDER_W_PUBLISHED, FREE_RIDER_H),
    "free_rider_singleton": Polyhedron(FREE_RIDER_W_PUBLISHED, FREE_RIDER_H_SINGLETON),
    "inspection": SUPPORTS["inspection"],
    "inspection_singleton": SUPPORTS["inspection_singleton"],
}

MEANS = {
    "free_rider": {"m1": FREE_RIDER_M1, "m2": FREE_RIDER_M2},
    "inspection": {"m1": INSPECTION_M1, "m2": INSPECTION_M2},
}


def self_check():
    """Every mean must lie in its support, published and corrected alike."""
    for table in (SUPPORTS, PUBLISHED_SUPPORTS):
        for game, means in MEANS.items():
            for name, m in means.items():
                if not contains(table[game], m):
                    raise AssertionError(f"{game} mean {name} is outside its support")
    if not contains(SUPPORTS["free_rider_singleton"], FREE_RIDER_M2):
        raise AssertionError("free rider single point is not m2")
    if not contains(SUPPORTS["inspection_singleton"], INSPECTION_M2):
        raise AssertionError("inspection single point is not m2")


self_check()
