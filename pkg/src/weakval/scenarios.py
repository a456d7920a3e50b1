"""Weak-measurement scenarios: the optical polarization analog and JSON files.

Optical model: a beam polarized at ``alpha`` passes a birefringent plate that
displaces the x-polarized component by ``-a`` along the pointer axis ``y``,
then a polarizer at ``alpha_prime``.  As a two-level system this is
preselection ``(cos alpha, sin alpha)``, postselection
``(cos alpha', sin alpha')`` and observable ``diag(-a, 0)``.

Scenario JSON schema (complex numbers are a number or ``[re, im]``)::

    {
      "name": "ritchie",
      "beta": 0.01,
      # exactly one wavefunction source:
      "dim": 2, "pre": [...], "post": [...], "observable": [[...], ...],
      "optical": {"alpha": 0.785, "alpha_prime": 2.456, "a": 1.0},
      "expression": {"source": "...", "pointer_var": "y",
                     "width_var": "beta", "params": {"a": 1.0}},
      # optional:
      "grid": {"min": -66.0, "max": 66.0, "points": 2001},
      "ensemble_n": 100000, "seed": 20240601, "description": "..."
    }
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import OrthogonalSelection, ScenarioParseError, ValidationError, WeakvalError
from .expr import WaveExpr, parse
from .pointer import PostselectedWave, default_grid, synthesize_postselected, write_text_atomic
from .quantum import OVERLAP_FLOOR, Observable, QuantumState, check_overlap

__all__ = [
    "OPTICAL_SOURCE",
    "OpticalParams",
    "ExpressionSpec",
    "GridSpec",
    "Scenario",
    "optical_wavefunction",
    "optical_expression",
    "optical_weak_value_closed_form",
    "optical_equivalent_system",
    "load_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "preset_names",
    "load_preset",
]

OPTICAL_SOURCE = (
    "cos(alpha)*cos(alphap)*exp(-beta*(y+a)^2/2) + sin(alpha)*sin(alphap)*exp(-beta*y^2/2)"
)


@dataclass(frozen=True)
class OpticalParams:
    alpha: float
    alpha_prime: float
    a: float
    beta: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"separation a must be positive, got {self.a}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        overlap = math.cos(self.alpha - self.alpha_prime)
        if abs(overlap) < OVERLAP_FLOOR:
            raise OrthogonalSelection(
                f"polarizers are crossed: cos(alpha - alpha') = {overlap:.3g} "
                f"is below the overlap floor {OVERLAP_FLOOR:g}"
            )

    @classmethod
    def from_degrees(cls, alpha, alpha_prime, a, beta=1.0):
        return cls(math.radians(alpha), math.radians(alpha_prime), a, beta)


def optical_wavefunction(p: OpticalParams) -> PostselectedWave:
    """``cos a cos a' exp(-beta (y+a)^2/2) + sin a sin a' exp(-beta y^2/2)``."""
    coeffs = (
        math.cos(p.alpha) * math.cos(p.alpha_prime),
        math.sin(p.alpha) * math.sin(p.alpha_prime),
    )
    return PostselectedWave(coeffs, (-p.a, 0.0), p.beta)


def optical_expression(p: OpticalParams) -> tuple[WaveExpr, str, str, dict]:
    """The same wave as text: ``(expr, pointer_var, width_var, params)``."""
    params = {"alpha": p.alpha, "alphap": p.alpha_prime, "a": p.a}
    return parse(OPTICAL_SOURCE), "y", "beta", params


def optical_weak_value_closed_form(p: OpticalParams) -> complex:
    """``-a / (1 + tan(alpha) tan(alpha'))``."""
    if abs(math.cos(p.alpha)) < 1e-15 or abs(math.cos(p.alpha_prime)) < 1e-15:
        raise ValueError("closed form needs finite tangents")
    denom = 1 + math.tan(p.alpha) * math.tan(p.alpha_prime)
    if abs(denom) < OVERLAP_FLOOR:
        raise OrthogonalSelection("closed form has a pole: 1 + tan(alpha) tan(alpha') = 0")
    return complex(-p.a / denom)


def optical_equivalent_system(p: OpticalParams):
    pre = QuantumState([math.cos(p.alpha), math.sin(p.alpha)])
    post = QuantumState([math.cos(p.alpha_prime), math.sin(p.alpha_prime)])
    obs = Observable(np.diag([-p.a, 0.0]))
    return pre, post, obs


@dataclass(frozen=True)
class ExpressionSpec:
    source: str
    pointer_var: str = "Q"
    width_var: str = "beta"
    params: dict = field(default_factory=dict)

    def __hash__(self):
        return hash((self.source, self.pointer_var, self.width_var, tuple(sorted(self.params.items()))))

    def parsed(self) -> WaveExpr:
        return parse(self.source)

    def wave(self):
        return self.parsed().as_wave(self.pointer_var, self.width_var, self.params)


@dataclass(frozen=True)
class GridSpec:
    min: float
    max: float
    points: int = 2001

    def as_tuple(self):
        return (self.min, self.max, self.points)


@dataclass(frozen=True)
class Scenario:
    name: str
    beta: float
    pre: tuple | None = None
    post: tuple | None = None
    observable: tuple | None = None
    optical: OpticalParams | None = None
    expression: ExpressionSpec | None = None
    grid: GridSpec | None = None
    ensemble_n: int = 100_000
    seed: int = 0
    description: str = ""

    def __post_init__(self):
        _validate(self)

    @property
    def kind(self) -> str:
        if self.expression is not None:
            return "expression"
        if self.optical is not None:
            return "optical"
        return "matrix"

    @property
    def dim(self) -> int | None:
        if self.kind == "matrix":
            return len(self.pre)
        return 2 if self.kind == "optical" else None

    def system(self):
        """``(pre, post, observable)``, or ``None`` for expression scenarios."""
        if self.kind == "matrix":
            return QuantumState(self.pre), QuantumState(self.post), Observable(self.observable)
        if self.kind == "optical":
            return optical_equivalent_system(self.optical)
        return None

    def wave(self, beta=None):
        """Detector wavefunction; ``PostselectedWave`` unless expression-based."""
        beta = self.beta if beta is None else beta
        if self.kind == "expression":
            w = self.expression.wave()
            return lambda q, b=beta: w(q, b)
        pre, post, obs = self.system()
        return synthesize_postselected(pre, post, obs, beta)

    def max_shift(self) -> float | None:
        if self.kind == "expression":
            return None
        _, _, obs = self.system()
        return obs.spectral_radius

    def weakness(self, beta=None) -> float | None:
        beta = self.beta if beta is None else beta
        shift = self.max_shift()
        return None if shift is None else beta * shift ** 2

    def grid_tuple(self, beta=None):
        if self.grid is not None:
            return self.grid.as_tuple()
        beta = self.beta if beta is None else beta
        return default_grid(beta, self.max_shift() or 0.0)


def _validate(s: Scenario):
    if not isinstance(s.name, str) or not s.name:
        raise ValidationError("name must be a non-empty string")
    if not (isinstance(s.beta, (int, float)) and math.isfinite(s.beta) and s.beta > 0):
        raise ValidationError(f"beta must be a positive finite number, got {s.beta!r}")
    matrix = any(x is not None for x in (s.pre, s.post, s.observable))
    sources = [name for name, present in
               (("matrix", matrix), ("optical", s.optical is not None),
                ("expression", s.expression is not None)) if present]
    if len(sources) != 1:
        raise ValidationError(
            "exactly one wavefunction source (matrix, optical or expression) is required, "
            f"got {sources or 'none'}"
        )
    if matrix:
        if s.pre is None or s.post is None or s.observable is None:
            raise ValidationError("matrix scenarios need pre, post and observable")
        dim = len(s.pre)
        if len(s.post) != dim or len(s.observable) != dim or any(len(r) != dim for r in s.observable):
            raise ValidationError(f"pre, post and observable must all have dimension {dim}")
        try:
            pre, post = QuantumState(s.pre), QuantumState(s.post)
            Observable(s.observable)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        _check_selection(pre, post)
    if s.optical is not None:
        pre, post, _ = optical_equivalent_system(s.optical)
        _check_selection(pre, post)
    if s.expression is not None:
        try:
            expr = s.expression.parsed()
        except WeakvalError as exc:
            raise ValidationError(f"expression.source: {exc}") from None
        bound = {s.expression.pointer_var, s.expression.width_var} | set(s.expression.params)
        missing = expr.free_vars - bound
        if missing:
            raise ValidationError(f"expression has unbound variables {sorted(missing)}")
    if s.grid is not None and not (s.grid.min < s.grid.max and s.grid.points >= 2):
        raise ValidationError("grid needs min < max and at least 2 points")
    if s.ensemble_n < 1:
        raise ValidationError("ensemble_n must be positive")
    if s.seed < 0:
        raise ValidationError("seed must be non-negative")


def _check_selection(pre, post):
    try:
        check_overlap(pre, post)
    except OrthogonalSelection as exc:
        raise ValidationError(f"pre/post selection: {exc}") from None


# --- JSON -----------------------------------------------------------------

def _enc_complex(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _dec_complex(x, where: str) -> complex:
    if isinstance(x, bool):
        raise ScenarioParseError(f"field {where!r}: expected a number or [re, im], got {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    if (isinstance(x, list) and len(x) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
        return complex(x[0], x[1])
    raise ScenarioParseError(f"field {where!r}: expected a number or [re, im], got {x!r}")


def _dec_vector(x, where: str) -> tuple:
    if not isinstance(x, list) or not x:
        raise ScenarioParseError(f"field {where!r}: expected a non-empty list")
    return tuple(_dec_complex(v, f"{where}[{i}]") for i, v in enumerate(x))


def _number(d: dict, key: str, where: str, kind=float, default=None):
    if key not in d:
        if default is None:
            raise ScenarioParseError(f"field {where}{key!r}: missing")
        return default
    v = d[key]
    ok = isinstance(v, int) if kind is int else isinstance(v, (int, float))
    if isinstance(v, bool) or not ok:
        raise ScenarioParseError(f"field {where}{key!r}: expected {kind.__name__}, got {v!r}")
    return kind(v)


_KNOWN = {"name", "description", "beta", "dim", "pre", "post", "observable",
          "optical", "expression", "grid", "ensemble_n", "seed"}


def scenario_from_dict(d: dict) -> Scenario:
    if not isinstance(d, dict):
        raise ScenarioParseError("top level must be a JSON object")
    unknown = set(d) - _KNOWN
    if unknown:
        raise ScenarioParseError(f"unknown fields {sorted(unknown)}")
    name = d.get("name")
    if not isinstance(name, str):
        raise ScenarioParseError("field 'name': expected a string")
    beta = _number(d, "beta", "")
    pre = _dec_vector(d["pre"], "pre") if "pre" in d else None
    post = _dec_vector(d["post"], "post") if "post" in d else None
    observable = None
    if "observable" in d:
        rows = d["observable"]
        if not isinstance(rows, list) or not rows:
            raise ScenarioParseError("field 'observable': expected a list of rows")
        observable = tuple(_dec_vector(r, f"observable[{i}]") for i, r in enumerate(rows))
    if "dim" in d:
        dim = _number(d, "dim", "", int)
        for key, vec in (("pre", pre), ("post", post), ("observable", observable)):
            if vec is not None and len(vec) != dim:
                raise ValidationError(f"{key} has length {len(vec)} but dim is {dim}")
    optical = None
    if "optical" in d:
        o = d["optical"]
        if not isinstance(o, dict):
            raise ScenarioParseError("field 'optical': expected an object")
        angles = (_number(o, "alpha", "optical."), _number(o, "alpha_prime", "optical."),
                  _number(o, "a", "optical."))
        try:
            optical = OpticalParams(*angles, beta)
        except ValueError as exc:
            raise ValidationError(f"optical: {exc}") from None
    expression = None
    if "expression" in d:
        e = d["expression"]
        if not isinstance(e, dict) or not isinstance(e.get("source"), str):
            raise ScenarioParseError("field 'expression.source': expected a string")
        params = e.get("params", {})
        if not isinstance(params, dict):
            raise ScenarioParseError("field 'expression.params': expected an object")
        expression = ExpressionSpec(
            e["source"],
            e.get("pointer_var", "Q"),
            e.get("width_var", "beta"),
            {k: _dec_complex(v, f"expression.params.{k}") for k, v in params.items()},
        )
    grid = None
    if "grid" in d:
        g = d["grid"]
        if not isinstance(g, dict):
            raise ScenarioParseError("field 'grid': expected an object")
        grid = GridSpec(_number(g, "min", "grid."), _number(g, "max", "grid."),
                        _number(g, "points", "grid.", int, 2001))
    return Scenario(
        name=name,
        beta=beta,
        pre=pre,
        post=post,
        observable=observable,
        optical=optical,
        expression=expression,
        grid=grid,
        ensemble_n=_number(d, "ensemble_n", "", int, 100_000),
        seed=_number(d, "seed", "", int, 0),
        description=d.get("description", ""),
    )


def scenario_to_dict(s: Scenario) -> dict:
    d: dict = {"name": s.name}
    if s.description:
        d["description"] = s.description
    d["beta"] = s.beta
    if s.kind == "matrix":
        d["dim"] = len(s.pre)
        d["pre"] = [_enc_complex(z) for z in s.pre]
        d["post"] = [_enc_complex(z) for z in s.post]
        d["observable"] = [[_enc_complex(z) for z in row] for row in s.observable]
    elif s.kind == "optical":
        d["optical"] = {"alpha": s.optical.alpha, "alpha_prime": s.optical.alpha_prime,
                        "a": s.optical.a}
    else:
        e = s.expression
        d["expression"] = {"source": e.source, "pointer_var": e.pointer_var,
                           "width_var": e.width_var,
                           "params": {k: _enc_complex(v) for k, v in e.params.items()}}
    if s.grid is not None:
        d["grid"] = {"min": s.grid.min, "max": s.grid.max, "points": s.grid.points}
    d["ensemble_n"] = s.ensemble_n
    d["seed"] = s.seed
    return d


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioParseError(f"{path}: {exc.strerror or exc}") from None
    return _loads(text, str(path))


def _loads(text: str, origin: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{origin}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return scenario_from_dict(data)
    except (ScenarioParseError, ValidationError) as exc:
        raise type(exc)(f"{origin}: {exc}") from None


def save_scenario(s: Scenario, path) -> None:
    write_text_atomic(path, json.dumps(scenario_to_dict(s), indent=2) + "\n")


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("weakval.data").iterdir()
                  if p.name.endswith(".json"))


def load_preset(name: str) -> Scenario:
    res = resources.files("weakval.data").joinpath(f"{name}.json")
    if not res.is_file():
        raise ScenarioParseError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return _loads(res.read_text(encoding="utf-8"), f"preset:{name}")
