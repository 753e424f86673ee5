"""Scenario configs: a single JSON document describing a cocycle and the analysis settings."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np
from scipy.linalg import expm

from . import base_dynamics as bd
from .cocycle_engine import CircleMap, CocycleSystem, ConstantField, SymbolTable
from .conditions import CheckSettings, demo_alphabet
from .errors import ConfigError
from .morse_chain import Resolution

SCHEMA_VERSION = 1

_matrix = {"type": "array", "minItems": 2, "items": {"type": "array", "items": {"type": "number"}}}
_pos = {"type": "number", "exclusiveMinimum": 0}
_posint = {"type": "integer", "minimum": 1}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["base", "generators"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "variant": {"enum": ["gl", "sl"]},
        "base": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "weights"],
                    "properties": {"type": {"const": "full_shift"}, "weights": {"type": "array", "minItems": 1, "items": _pos}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "transition"],
                    "properties": {
                        "type": {"const": "subshift"},
                        "transition": {"type": "array", "items": {"type": "array", "items": {"enum": [0, 1]}}},
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "period"],
                    "properties": {"type": {"const": "periodic"}, "period": _posint},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "angle"],
                    "properties": {"type": {"const": "rotation"}, "angle": {"type": "number"}},
                },
            ]
        },
        "generators": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["symbols"],
                    "properties": {
                        "symbols": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["matrix"],
                                "properties": {"name": {"type": "string"}, "matrix": _matrix},
                            },
                        }
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["constant"],
                    "properties": {"constant": _matrix},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["shear"],
                    "properties": {
                        "shear": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["a", "frequency"],
                            "properties": {"a": {"type": "number"}, "frequency": {"type": "integer"}},
                        }
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["demo_alphabet"],
                    "properties": {
                        "demo_alphabet": {
                            "type": "object",
                            "additionalProperties": False,
                            "properties": {"seed": {"type": "integer", "minimum": 0}},
                        }
                    },
                },
            ]
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gap": _pos,
                "tau": _pos,
                "jordan": _pos,
                "eps": _pos,
                "delta": _pos,
            },
        },
        "resolution": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"cylinder": _posint, "circle": _posint, "fiber": _posint, "directions": _posint},
        },
        "horizons": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": _posint,
                "k": {"type": "integer", "minimum": 2},
                "m": {"type": "integer", "minimum": 2},
                "section_samples": _posint,
                "max_period": _posint,
                "base_radius": {"type": "integer", "minimum": 0},
            },
        },
        "perturbation": {
            "type": "object",
            "additionalProperties": False,
            "required": ["eps"],
            "properties": {
                "eps": {"type": "array", "minItems": 1, "items": _pos},
                "j": {"type": "array", "minItems": 1, "items": _posint},
                "ks": {"type": "array", "minItems": 1, "items": _posint},
                "generator": _matrix,
            },
        },
        "analyses": {"type": "array", "items": {"enum": ["spectrum", "morse", "check", "unique-ergodic", "iid-demo", "perturb"]}},
    },
}


@dataclass(frozen=True, eq=False)
class Perturbation:
    eps: tuple
    js: tuple
    ks: tuple
    generator: np.ndarray

    def sigma(self, e: float) -> ConstantField:
        return ConstantField(expm(e * self.generator))


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    system: CocycleSystem
    measure: object
    names: tuple | None
    settings: CheckSettings
    directions: int
    jordan_tol: float
    perturbation: Perturbation | None
    analyses: tuple
    config: dict = field(repr=False)


def _line_of(text: str, path) -> int:
    """Best-effort line number of the JSON element at ``path``."""
    pos, skip = 0, 0
    for part in path:
        if isinstance(part, int):
            # list items are objects of one shape: the i-th item holds the i-th next key
            skip = part
            continue
        key, start, hit = json.dumps(part), pos, -1
        for _ in range(skip + 1):
            hit = text.find(key, start)
            if hit < 0:
                break
            start = hit + 1
        if hit < 0:
            break
        pos, skip = hit, 0
    return text.count("\n", 0, pos) + 1


def _fail(text, path, msg):
    line = _line_of(text, path)
    where = "/".join(str(p) for p in path) or "<root>"
    raise ConfigError(f"{where}: {msg}", line)


def parse_config(text: str) -> dict:
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg}", e.lineno) from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        _fail(text, list(err.absolute_path), err.message)
    _check_semantics(text, cfg)
    return cfg


def _square(text, path, m, d=None):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        _fail(text, path, "matrix must be square")
    if d is not None and a.shape[0] != d:
        _fail(text, path, f"matrix must be {d}x{d}")
    if not np.all(np.isfinite(a)) or abs(np.linalg.det(a)) < 1e-300 or np.linalg.cond(a) > 1e14:
        _fail(text, path, "matrix must be invertible")
    return a


def _check_semantics(text, cfg):
    base, gens = cfg["base"], cfg["generators"]
    kind = base["type"]
    if kind == "subshift":
        t = np.asarray(base["transition"])
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            _fail(text, ["base", "transition"], "transition matrix must be square")
    if "symbols" in gens:
        mats = gens["symbols"]
        d = np.asarray(mats[0]["matrix"]).shape[0]
        for i, s in enumerate(mats):
            _square(text, ["generators", "symbols", i, "matrix"], s["matrix"], d)
        need = {
            "full_shift": lambda: len(base["weights"]),
            "subshift": lambda: len(base["transition"]),
            "periodic": lambda: base["period"],
        }.get(kind)
        if need is None:
            _fail(text, ["generators"], "symbol tables need a symbolic or periodic base")
        if len(mats) != need():
            _fail(text, ["generators", "symbols"], f"expected {need()} matrices, got {len(mats)}")
        if kind == "full_shift" and abs(sum(base["weights"]) - 1.0) > 1e-12:
            _fail(text, ["base", "weights"], "weights must sum to 1")
    elif "constant" in gens:
        _square(text, ["generators", "constant"], gens["constant"])
    elif "shear" in gens:
        if kind != "rotation":
            _fail(text, ["generators", "shear"], "shear generators need a rotation base")
    elif "demo_alphabet" in gens:
        if kind != "full_shift" or len(base["weights"]) != 2:
            _fail(text, ["generators", "demo_alphabet"], "demo alphabet needs a two-symbol full shift")
    pert = cfg.get("perturbation")
    if pert and "generator" in pert:
        _square(text, ["perturbation", "generator"], pert["generator"])


def _shear(a: float, frequency: int):
    s = np.diag([np.exp(a), np.exp(-a)])

    def fn(x):
        t = 2 * np.pi * frequency * x
        return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]) @ s

    return fn


def build(cfg: dict, seed: int | None = None) -> Scenario:
    seed = int(cfg.get("seed", 0) if seed is None else seed)
    b = cfg["base"]
    kind = b["type"]
    if kind == "full_shift":
        base = bd.FullShift(tuple(b["weights"]), seed=seed)
    elif kind == "subshift":
        base = bd.SubshiftFinite(tuple(tuple(r) for r in b["transition"]), seed=seed)
    elif kind == "periodic":
        base = bd.PeriodicOrbit(b["period"], seed=seed)
    else:
        base = bd.IrrationalRotation(float(b["angle"]), seed=seed)
    g = cfg["generators"]
    names = None
    if "symbols" in g:
        field_ = SymbolTable(np.array([s["matrix"] for s in g["symbols"]], dtype=float))
        if all("name" in s for s in g["symbols"]):
            names = tuple(s["name"] for s in g["symbols"])
    elif "constant" in g:
        field_ = ConstantField(np.array(g["constant"], dtype=float))
    elif "shear" in g:
        a, f = float(g["shear"]["a"]), int(g["shear"]["frequency"])
        field_ = CircleMap(_shear(a, f), 2, lipschitz=2 * np.pi * abs(f) * np.exp(abs(a)))
    else:
        mats, _, names = demo_alphabet(int(g["demo_alphabet"].get("seed", 0)))
        field_ = SymbolTable(mats)
    system = CocycleSystem(base, field_, cfg.get("variant", "gl"), name=cfg.get("name", ""))
    tol = cfg.get("tolerances", {})
    res = cfg.get("resolution", {})
    hor = cfg.get("horizons", {})
    resolution = Resolution(
        cylinder=res.get("cylinder", Resolution.cylinder),
        circle=res.get("circle", Resolution.circle),
        fiber=res.get("fiber"),
    )
    defaults = CheckSettings()
    settings = replace(
        defaults,
        n=hor.get("n", defaults.n),
        k=hor.get("k", defaults.k),
        m=hor.get("m"),
        section_samples=hor.get("section_samples", defaults.section_samples),
        max_period=hor.get("max_period", defaults.max_period),
        base_radius=hor.get("base_radius", defaults.base_radius),
        tau=tol.get("tau", defaults.tau),
        delta=tol.get("delta", defaults.delta),
        eps=tol.get("eps", defaults.eps),
        gap_tol=tol.get("gap"),
        resolution=resolution,
        seed=seed,
    )
    pert = None
    if "perturbation" in cfg:
        p = cfg["perturbation"]
        d = system.d
        if "generator" in p:
            gen = np.array(p["generator"], dtype=float)
        else:
            gen = np.zeros((d, d))
            gen[0, 1], gen[1, 0] = 1.0, -1.0
        pert = Perturbation(
            tuple(p["eps"]), tuple(p.get("j", range(1, d))), tuple(p.get("ks", (1, 2, 4, 8, 16))), gen
        )
    return Scenario(
        cfg.get("name", ""),
        system,
        bd.natural_measure(base),
        names,
        settings,
        res.get("directions", 16),
        tol.get("jordan", 1e-6),
        pert,
        tuple(cfg.get("analyses", ())),
        cfg,
    )


def load(path, seed: int | None = None) -> Scenario:
    text = Path(path).read_text()
    return build(parse_config(text), seed)
