"""JSON game-spec files: parsing with field-level errors, and emission."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .dro import AmbiguitySet, EmptyAmbiguityError, RiskProfile
from .games import DimensionError, GameShape, PayoffTensor
from .solver import SolverConfig
from .uncertainty import (FiniteSet, Interval, ParametricGame, Polyhedron, UnionOfIntervals,
                          UnsupportedError)

REGIMES = ("nash", "bayesian", "robust", "dro")
PAYLOAD_KEYS = {"nash": "payoffs", "bayesian": "types", "dro": "ambiguity"}
ROBUST_PAYLOADS = ("parametric", "polyhedron")
ROBUST_METHODS = ("auto", "condition2", "condition3")
TOP_KEYS = {"regime", "name", "description", "actions", "payoffs", "types", "parametric",
            "polyhedron", "ambiguity", "risk", "method", "tie_shared", "solver"}
SOLVER_KEYS = set(SolverConfig.__dataclass_fields__)


class SpecError(ValueError):
    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass
class GameSpecFile:
    regime: str
    shape: GameShape
    payload: Any
    risk: RiskProfile | None = None
    solver: dict = field(default_factory=dict)
    name: str = ""
    description: str = ""
    method: str = "auto"
    tie_shared: bool = True

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"regime": self.regime}
        if self.name:
            d["name"] = self.name
        if self.description:
            d["description"] = self.description
        d["actions"] = list(self.shape.actions)
        if self.regime == "nash":
            d["payoffs"] = self.payload.array.tolist()
        elif self.regime == "bayesian":
            d["types"] = [{"weight": w, "payoffs": P.array.tolist()} for w, P in self.payload]
        elif self.regime == "robust":
            if isinstance(self.payload, ParametricGame):
                d["parametric"] = parametric_to_dict(self.payload)
            else:
                d["polyhedron"] = {"W": self.payload.W.tolist(), "h": self.payload.h.tolist()}
            d["method"] = self.method
            d["tie_shared"] = self.tie_shared
        else:
            amb = self.payload
            d["ambiguity"] = {"W": amb.support.W.tolist(), "h": amb.support.h.tolist(),
                              "m": amb.mean.tolist(), "s": amb.dispersion}
            d["risk"] = list(self.risk.epsilons)
        if self.solver:
            d["solver"] = dict(self.solver)
        return d

    def __eq__(self, other):
        if not isinstance(other, GameSpecFile):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def solver_config(self, **overrides) -> SolverConfig:
        return SolverConfig().with_(**self.solver).with_(**overrides)


def _support_to_dict(s) -> dict:
    if isinstance(s, Interval):
        return {"interval": [s.lo, s.hi]}
    if isinstance(s, FiniteSet):
        return {"values": list(s.values)}
    return {"union": [list(p) for p in s.pieces]}


def parametric_to_dict(g: ParametricGame) -> dict:
    return {"base": g.base.array.tolist(),
            "params": [{"name": n, "coeff": c.array.tolist(), "support": _support_to_dict(s)}
                       for n, c, s in zip(g.names, g.coeffs, g.supports)]}


def emit_spec(spec: GameSpecFile) -> str:
    return json.dumps(spec.to_dict(), indent=2) + "\n"


# -- parsing ---------------------------------------------------------------

def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SpecError(f"missing required field '{key}'", where)
    return obj[key]


def _array(value, where: str, ndim: int | None = None) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise SpecError("expected a (nested) list of numbers", where) from None
    if arr.dtype == object or (ndim is not None and arr.ndim != ndim):
        raise SpecError(f"expected a {ndim}-dimensional numeric array, got shape {arr.shape}",
                        where)
    if not np.all(np.isfinite(arr)):
        raise SpecError("entries must be finite", where)
    return arr


def _tensor(value, shape: GameShape, where: str) -> PayoffTensor:
    arr = _array(value, where)
    expected = shape.actions + (shape.num_players,)
    if arr.shape != expected:
        raise SpecError(f"payoff array has shape {arr.shape}, expected {expected}", where)
    return PayoffTensor(arr)


def _support(value, where: str):
    if not isinstance(value, dict) or len(value) != 1:
        raise SpecError("support must be one of {interval|values|union}", where)
    kind, data = next(iter(value.items()))
    try:
        if kind == "interval":
            lo, hi = (float(v) for v in data)
            return Interval(lo, hi)
        if kind == "values":
            return FiniteSet(tuple(float(v) for v in data))
        if kind == "union":
            return UnionOfIntervals(tuple((float(a), float(b)) for a, b in data))
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc), f"{where}.{kind}") from None
    raise SpecError(f"unknown support kind '{kind}'", where)


def _polyhedron(obj, where: str, dim: int) -> Polyhedron:
    if not isinstance(obj, dict):
        raise SpecError("expected an object with W and h", where)
    W = _array(_require(obj, "W", where), f"{where}.W", 2)
    h = _array(_require(obj, "h", where), f"{where}.h", 1)
    if W.size == 0:
        W = W.reshape(0, dim)
    if W.shape[1] != dim:
        raise SpecError(f"W has {W.shape[1]} columns, game dimension is {dim}", f"{where}.W")
    if W.shape[0] != h.size:
        raise SpecError(f"W has {W.shape[0]} rows but h has {h.size} entries", f"{where}.h")
    return Polyhedron(W, h)


def spec_from_dict(doc: dict) -> GameSpecFile:
    if not isinstance(doc, dict):
        raise SpecError("top level must be a JSON object")
    unknown = set(doc) - TOP_KEYS
    if unknown:
        raise SpecError(f"unknown field(s) {sorted(unknown)}")
    regime = _require(doc, "regime", "")
    if regime not in REGIMES:
        raise SpecError(f"regime must be one of {REGIMES}, got {regime!r}", "regime")
    acts = _require(doc, "actions", "")
    try:
        if not isinstance(acts, list) or not all(isinstance(a, int) for a in acts):
            raise DimensionError("actions must be a list of integers")
        shape = GameShape(tuple(acts))
    except DimensionError as exc:
        raise SpecError(str(exc), "actions") from None

    payload_keys = {"payoffs", "types", "parametric", "polyhedron", "ambiguity"} & set(doc)
    allowed = set(ROBUST_PAYLOADS) if regime == "robust" else {PAYLOAD_KEYS[regime]}
    extra = payload_keys - allowed
    if extra:
        raise SpecError(f"field(s) {sorted(extra)} do not belong to regime '{regime}'")
    if len(payload_keys) != 1:
        raise SpecError(f"regime '{regime}' needs exactly one of {sorted(allowed)}")
    if "risk" in doc and regime != "dro":
        raise SpecError("risk levels only apply to the dro regime", "risk")
    for key in ("method", "tie_shared"):
        if key in doc and regime != "robust":
            raise SpecError(f"'{key}' only applies to the robust regime", key)

    spec = GameSpecFile(regime, shape, None, name=str(doc.get("name", "")),
                        description=str(doc.get("description", "")))
    if regime == "nash":
        spec.payload = _tensor(doc["payoffs"], shape, "payoffs")
    elif regime == "bayesian":
        types = doc["types"]
        if not isinstance(types, list) or not types:
            raise SpecError("expected a non-empty list", "types")
        out = []
        for k, t in enumerate(types):
            where = f"types[{k}]"
            if not isinstance(t, dict):
                raise SpecError("expected an object with weight and payoffs", where)
            w = _require(t, "weight", where)
            if not isinstance(w, (int, float)) or w < 0:
                raise SpecError("weight must be a nonnegative number", f"{where}.weight")
            out.append((float(w), _tensor(_require(t, "payoffs", where), shape,
                                          f"{where}.payoffs")))
        total = sum(w for w, _ in out)
        if abs(total - 1.0) > 1e-9:
            raise SpecError(f"weights sum to {total}, not 1", "types")
        spec.payload = out
    elif regime == "robust":
        spec.method = doc.get("method", "auto")
        if spec.method not in ROBUST_METHODS:
            raise SpecError(f"method must be one of {ROBUST_METHODS}", "method")
        spec.tie_shared = bool(doc.get("tie_shared", True))
        if "parametric" in doc:
            p = doc["parametric"]
            if not isinstance(p, dict):
                raise SpecError("expected an object", "parametric")
            base = _tensor(_require(p, "base", "parametric"), shape, "parametric.base")
            params = _require(p, "params", "parametric")
            names, coeffs, supports = [], [], []
            for k, prm in enumerate(params):
                where = f"parametric.params[{k}]"
                names.append(str(prm.get("name", f"f{k + 1}")))
                coeffs.append(_tensor(_require(prm, "coeff", where), shape, f"{where}.coeff"))
                supports.append(_support(_require(prm, "support", where), f"{where}.support"))
            spec.payload = ParametricGame(base, tuple(coeffs), tuple(supports), tuple(names))
        else:
            poly = _polyhedron(doc["polyhedron"], "polyhedron", shape.dim)
            if not poly.is_bounded():
                raise SpecError("uncertainty set is unbounded", "polyhedron")
            spec.payload = poly
    else:
        amb = doc["ambiguity"]
        poly = _polyhedron(amb, "ambiguity", shape.dim)
        m = _array(_require(amb, "m", "ambiguity"), "ambiguity.m", 1)
        s = _require(amb, "s", "ambiguity")
        if not isinstance(s, (int, float)):
            raise SpecError("s must be a number", "ambiguity.s")
        if m.size != shape.dim:
            raise SpecError(f"m has {m.size} entries, game dimension is {shape.dim}",
                            "ambiguity.m")
        try:
            spec.payload = AmbiguitySet(shape, poly, m, float(s))
        except EmptyAmbiguityError as exc:
            raise SpecError(str(exc), "ambiguity.m") from None
        except UnsupportedError as exc:
            raise SpecError(str(exc), "ambiguity.W") from None
        except ValueError as exc:
            raise SpecError(str(exc), "ambiguity.s") from None
        risk = _require(doc, "risk", "")
        if not isinstance(risk, list) or len(risk) != shape.num_players:
            raise SpecError(f"expected {shape.num_players} risk levels", "risk")
        try:
            spec.risk = RiskProfile(tuple(float(e) for e in risk))
        except (TypeError, ValueError) as exc:
            raise SpecError(str(exc), "risk") from None

    solver = doc.get("solver", {})
    if not isinstance(solver, dict):
        raise SpecError("expected an object", "solver")
    bad = set(solver) - SOLVER_KEYS
    if bad:
        raise SpecError(f"unknown solver option(s) {sorted(bad)}", "solver")
    try:
        SolverConfig(**solver)
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc), "solver") from None
    spec.solver = dict(solver)
    return spec


def parse_spec_text(text: str) -> GameSpecFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return spec_from_dict(doc)


def parse_spec(path) -> GameSpecFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc}") from None
    return parse_spec_text(text)
