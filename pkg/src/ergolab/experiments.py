"""Config-driven experiments: schema, validation and a deterministic runner.

A config is one YAML (or JSON) document describing one experiment. The
runner writes every output into a single directory through a temporary
file and rename, so a crash never leaves a half-written artifact. Result
files depend only on the config (and ``--seed``), never on the worker
count; ``manifest.json`` additionally records wall time and is the one
file that changes between runs.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np
import yaml

from . import _config, __version__
from ._io import atomic_write, csv_text, fmt, json_text
from .birkhoff import LOWER, UPPER, default_schedule, semi_uniform_threshold, uniform_sup_scan
from .double_avg import DoubleAverageSpec, default_points, pointwise_convergence_test
from .dynamics import (Rotation, SkewProductMap, StepRule, condition_H_visit_frequency,
                       independence_falsifier, product_rotation, step_skew)
from .exact import ExactScalar
from .measures import base_marginal, empirical_from_orbit, measure_report, weak_star_discrepancy
from .observables import TrigPolynomial, observable_from_dict
from .torus import haar_sample_array, lattice_grid_array

KINDS = ("birkhoff", "uniform-scan", "semi-uniform", "double-average", "measure-diagnostics",
         "independence-check")

_scalar = {"type": ["string", "integer"], "description": "exact scalar, e.g. \"1/2\" or \"sqrt(2)-1\""}
_scalars = {"type": "array", "items": _scalar, "minItems": 1}
_reals = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_complex = {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"},
                                          "minItems": 2, "maxItems": 2}]}
_ints = {"type": "array", "items": {"type": "integer"}, "minItems": 1}
_corner = {"type": "array", "items": {"type": ["number", "string"]}, "minItems": 1}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(KINDS)},
        "description": {"type": "string"},
        "map": {"$ref": "#/$defs/map"},
        "observable": {"$ref": "#/$defs/observable"},
        "f1": {"$ref": "#/$defs/observable"},
        "f2": {"$ref": "#/$defs/observable"},
        "target": {"oneOf": [{"const": "haar"}, _complex]},
        "start": _reals,
        "N": {"type": "integer", "minimum": 1},
        "schedule": {"oneOf": [
            {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
            {"type": "object", "additionalProperties": False,
             "properties": {"lo": {"type": "integer", "minimum": 0}, "hi": {"type": "integer", "minimum": 0},
                            "per_decade": {"type": "integer", "minimum": 1}}},
        ]},
        "grid": {"$ref": "#/$defs/grid"},
        "epsilons": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "directions": {"type": "array", "items": {"enum": [UPPER, LOWER]}, "minItems": 1},
        "alpha": _scalars,
        "height": {"type": "integer", "minimum": 1},
        "cutoff": {"type": "integer", "minimum": 1},
        "tests": {"type": "array", "items": {"$ref": "#/$defs/observable"}},
        "visit_radius": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
    },
    "$defs": {
        "map": {
            "type": "object",
            "required": ["kind", "alpha"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["rotation", "product-rotation", "step-skew", "skew-product"]},
                "name": {"type": "string"},
                "alpha": _scalars,
                "beta": _scalars,
                "gamma": _scalars,
                "threshold": _scalar,
                "steps": {"type": "array", "items": {
                    "type": "object", "required": ["lo", "hi", "shift"], "additionalProperties": False,
                    "properties": {"lo": _corner, "hi": _corner, "shift": _scalars}}},
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "maxProperties": 1,
            "properties": {
                "lattice": {"type": "integer", "minimum": 1},
                "random": {"type": "integer", "minimum": 1},
                "points": {"type": "array", "items": _reals, "minItems": 1},
                "default": {"const": True},
            },
        },
        "observable": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["constant", "character", "cos", "sin", "trig", "indicator", "step",
                                  "sum", "product"]},
                "name": {"type": "string"},
                "value": _complex,
                "k": _ints,
                "coef": _complex,
                "amplitude": {"type": "number"},
                "terms": {"type": "array", "items": {
                    "type": "object", "required": ["k", "c"], "additionalProperties": False,
                    "properties": {"k": _ints, "c": _complex}}},
                "real": {"type": "boolean"},
                "lo": _corner,
                "hi": _corner,
                "cells": {"type": "array", "items": {
                    "type": "object", "required": ["lo", "hi", "value"], "additionalProperties": False,
                    "properties": {"lo": _corner, "hi": _corner, "value": {"type": "number"}}}},
                "default": {"type": "number"},
                "of": {"type": "array", "items": {"$ref": "#/$defs/observable"}, "minItems": 1},
                "scale": _complex,
                "axes": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
            },
            "additionalProperties": False,
        },
    },
}

# fields each kind cannot run without
REQUIRED = {
    "birkhoff": ("map", "observable", "start", "N"),
    "uniform-scan": ("map", "observable", "grid", "schedule"),
    "semi-uniform": ("map", "observable", "grid", "schedule", "epsilons"),
    "double-average": ("map", "f1", "f2", "schedule"),
    "measure-diagnostics": ("map", "start", "N"),
    "independence-check": ("alpha", "height"),
}


class ConfigError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("\n".join(diagnostics))
        self.diagnostics = diagnostics


# -- loading -----------------------------------------------------------------

@dataclass
class LoadedConfig:
    data: dict
    text: str
    path: str | None = None
    node: Any = None

    @property
    def digest(self) -> str:
        canonical = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def line_of(self, path) -> int | None:
        """1-based source line of the field at ``path`` (its key, for mapping entries), when known."""
        node = self.node
        line = None if node is None else node.start_mark.line + 1
        for key in path:
            if isinstance(node, yaml.MappingNode):
                pair = next(((k, v) for k, v in node.value if k.value == str(key)), None)
                if pair is None:
                    break
                line, node = pair[0].start_mark.line + 1, pair[1]
            elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
                node = node.value[key]
                line = node.start_mark.line + 1
            else:
                break
        return line


def load_config(path: str | Path) -> LoadedConfig:
    text = Path(path).read_text(encoding="utf-8")
    return parse_config(text, str(path))


def parse_config(text: str, path: str | None = None) -> LoadedConfig:
    try:
        data = yaml.safe_load(text)
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"(document): not valid YAML: {exc}"]) from None
    if not isinstance(data, dict):
        raise ConfigError(["(document): a config must be a mapping"])
    return LoadedConfig(data, text, path, node)


# -- validation --------------------------------------------------------------

def _field(path) -> str:
    return ".".join(str(p) for p in path) or "(document)"


def _where(cfg: LoadedConfig, path) -> str:
    line = cfg.line_of(list(path))
    return f"{_field(path)} (line {line})" if line else _field(path)


def validate(cfg: LoadedConfig | dict) -> list[str]:
    """Diagnostics, each prefixed by the field path; empty when the config can run."""
    if isinstance(cfg, dict):
        cfg = LoadedConfig(cfg, "")
    data = cfg.data
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: (list(e.absolute_path), e.message))
    diags = [f"{_where(cfg, e.absolute_path)}: {e.message}" for e in errors]
    if diags:
        return diags
    kind = data["kind"]
    for name in REQUIRED[kind]:
        if name not in data:
            diags.append(f"{name}: required for kind {kind!r}")
    if diags:
        return diags
    try:
        build(data)
    except ConfigError as exc:
        diags.extend(exc.diagnostics)
    return diags


# -- building ----------------------------------------------------------------

def _parse_scalars(values, path: str, out: list[str]) -> list[ExactScalar]:
    parsed = []
    for i, v in enumerate(values):
        try:
            parsed.append(ExactScalar.coerce(v))
        except (ValueError, TypeError) as exc:
            out.append(f"{path}.{i}: {exc}")
    return parsed


def build_map(spec: dict, diags: list[str]):
    kind = spec["kind"]
    alpha = _parse_scalars(spec["alpha"], "map.alpha", diags)
    beta = _parse_scalars(spec.get("beta", []), "map.beta", diags)
    gamma = _parse_scalars(spec.get("gamma", []), "map.gamma", diags)
    if diags:
        return None
    name = spec.get("name")
    try:
        if kind == "rotation":
            return Rotation(alpha, name)
        if kind == "product-rotation":
            if not beta:
                diags.append("map.beta: required for a product rotation")
                return None
            return product_rotation(alpha, beta, name or "product-rotation")
        if kind == "step-skew":
            if not gamma:
                diags.append("map.gamma: required for a step skew")
                return None
            return step_skew(alpha, gamma, spec.get("threshold", "1/2"), beta or None, name or "step-skew")
        steps = [StepRule(tuple(s["lo"]), tuple(s["hi"]), tuple(s["shift"])) for s in spec.get("steps", [])]
        fiber = len(beta) or (len(steps[0].shift) if steps else 0)
        return SkewProductMap(Rotation(alpha), beta, steps, name or "skew-product", fiber or None)
    except (ValueError, TypeError) as exc:
        diags.append(f"map: {exc}")
        return None


def _build_obs(spec: dict, dim: int, path: str, diags: list[str]):
    try:
        return observable_from_dict(spec, dim)
    except (ValueError, TypeError, KeyError, _config.BudgetExceeded) as exc:
        diags.append(f"{path}: {exc}")
        return None


def _schedule(data: dict) -> tuple[int, ...]:
    s = data.get("schedule")
    if isinstance(s, dict):
        return default_schedule(s.get("lo", 2), s.get("hi", 6), s.get("per_decade", 2))
    return tuple(s)


def _grid(spec: dict, dim: int, seed: int) -> np.ndarray:
    if "lattice" in spec:
        return lattice_grid_array(dim, spec["lattice"])
    if "random" in spec:
        _config.check("grid_points", spec["random"], "a random seed grid")
        return haar_sample_array(dim, spec["random"], seed)
    if "points" in spec:
        pts = np.asarray(spec["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != dim:
            raise ValueError(f"grid points must have {dim} coordinates each")
        if np.any(pts < 0) or np.any(pts >= 1):
            raise ValueError("grid points must lie in [0, 1)")
        return pts
    return default_points(dim, seed)


@dataclass
class Experiment:
    kind: str
    data: dict
    map: Any = None
    observable: Any = None
    f1: Any = None
    f2: Any = None
    schedule: tuple[int, ...] = ()
    tests: tuple = ()


def build(data: dict, seed: int | None = None) -> Experiment:
    """Construct every object a config names, collecting all problems as diagnostics."""
    diags: list[str] = []
    kind = data["kind"]
    exp = Experiment(kind, data)
    seed = data.get("seed", 0) if seed is None else seed
    if kind == "independence-check":
        alpha = _parse_scalars(data["alpha"], "alpha", diags)
        if not diags:
            b = _config.budgets().falsifier_vectors
            need = (2 * data["height"] + 1) ** (len(alpha) + 1)
            if need > b:
                diags.append(f"height: relation search needs {need} vectors but the falsifier_vectors "
                             f"budget is {b}")
        if diags:
            raise ConfigError(diags)
        return exp
    exp.map = build_map(data["map"], diags)
    if exp.map is None:
        raise ConfigError(diags)
    dim = exp.map.dim
    if "schedule" in data:
        exp.schedule = _schedule(data)
        if any(b <= a for a, b in zip(exp.schedule, exp.schedule[1:])):
            diags.append("schedule: must be strictly increasing")
    if kind == "double-average":
        if not isinstance(exp.map, Rotation):
            diags.append("map.kind: double averages need a plain rotation")
        else:
            exp.f1 = _build_obs(data["f1"], dim, "f1", diags)
            exp.f2 = _build_obs(data["f2"], dim, "f2", diags)
            for name in ("f1", "f2"):
                f = getattr(exp, name)
                if f is not None and not isinstance(f, TrigPolynomial):
                    diags.append(f"{name}: must be a trigonometric polynomial")
    if "observable" in data:
        exp.observable = _build_obs(data["observable"], dim, "observable", diags)
    built = [_build_obs(t, dim, f"tests.{i}", diags) for i, t in enumerate(data.get("tests", []))]
    exp.tests = tuple(t for t in built if t is not None)
    if "start" in data:
        start = np.asarray(data["start"], dtype=float)
        if start.shape != (dim,) or np.any(start < 0) or np.any(start >= 1):
            diags.append(f"start: need {dim} coordinates in [0, 1)")
    seeds_count = 1
    if "grid" in data:
        try:
            seeds_count = _grid(data["grid"], dim, seed).shape[0]
        except (ValueError, _config.BudgetExceeded) as exc:
            diags.append(f"grid: {exc}")
    elif kind == "double-average":
        seeds_count = default_points(dim, seed).shape[0]
    steps = seeds_count * (exp.schedule[-1] if exp.schedule else data.get("N", 1))
    if kind == "double-average":
        steps *= 2
    if kind == "measure-diagnostics":
        steps = data["N"] * (2 + len(exp.tests))
    limit = _config.budgets().orbit_steps
    if steps > limit:
        diags.append(f"orbit_steps: the run needs {steps} orbit steps but the orbit_steps budget is {limit}")
    if "cutoff" in data:
        size = (2 * data["cutoff"] + 1) ** dim - 1
        if size > _config.budgets().dictionary:
            diags.append(f"cutoff: {size} characters exceed the dictionary budget "
                         f"{_config.budgets().dictionary}")
    if diags:
        raise ConfigError(diags)
    return exp


# -- running -----------------------------------------------------------------

def _target(data: dict, obs):
    t = data.get("target", "haar")
    if t == "haar":
        return obs.haar_integral()
    if isinstance(t, list):
        return complex(t[0], t[1])
    return float(t)


def _num(z):
    if isinstance(z, complex):
        return {"re": z.real, "im": z.imag}
    return z


def _run_birkhoff(exp: Experiment, out: Path, workers: int) -> list[Path]:
    start = np.asarray(exp.data["start"], dtype=float)
    obs = exp.observable
    curve = uniform_sup_scan(exp.map, obs, _target(exp.data, obs), start[None, :], [exp.data["N"]], workers)
    report = {"map": exp.map.name, "observable": obs.name, "start": start.tolist(), "N": exp.data["N"],
              "value": _num(complex(curve.averages[0, 0]) if not obs.is_real else float(curve.averages[0, 0])),
              "target": _num(curve.target), "abs_error": float(curve.errors[0, 0]),
              "sup_norm_bound": obs.sup_norm_bound}
    return [atomic_write(out / "birkhoff.csv", curve.curve_csv()),
            atomic_write(out / "report.json", json_text(report))]


def _seed_grid(exp: Experiment, seed: int) -> np.ndarray:
    return _grid(exp.data["grid"], exp.map.dim, seed)


def _run_scan(exp: Experiment, out: Path, workers: int, seed: int):
    obs = exp.observable
    curve = uniform_sup_scan(exp.map, obs, _target(exp.data, obs), _seed_grid(exp, seed), exp.schedule, workers)
    files = [atomic_write(out / "curve.csv", curve.curve_csv()),
             atomic_write(out / "summary.csv", curve.summary_csv())]
    return curve, files


def _run_semi_uniform(exp: Experiment, out: Path, workers: int, seed: int) -> list[Path]:
    curve, files = _run_scan(exp, out, workers, seed)
    rows = []
    for direction in exp.data.get("directions", [UPPER, LOWER]):
        for eps in exp.data["epsilons"]:
            n = semi_uniform_threshold(curve, curve.target, eps, direction)
            rows.append({"direction": direction, "eps": eps, "threshold": n,
                         "final_sup_error": float(curve.sup_error[-1])})
    report = {"map": exp.map.name, "observable": exp.observable.name, "target": _num(curve.target),
              "schedule": list(curve.schedule), "thresholds": rows}
    files.append(atomic_write(out / "thresholds.json", json_text(report)))
    return files


def _run_double(exp: Experiment, out: Path, workers: int, seed: int) -> list[Path]:
    dim = exp.map.dim
    points = _grid(exp.data["grid"], dim, seed) if "grid" in exp.data else default_points(dim, seed)
    spec = DoubleAverageSpec(exp.map, exp.f1, exp.f2, points, exp.schedule)
    report = pointwise_convergence_test(spec, exp.data.get("height", 20), workers)
    rows = []
    for i, n in enumerate(spec.schedule):
        for p in range(points.shape[0]):
            z = complex(report.averages[p, i])
            rows.append([n, p] + [fmt(c) for c in points[p]] + [fmt(z, True), fmt(report.errors[p, i])])
    header = ["N", "point_index"] + [f"x_{i + 1}" for i in range(dim)] + ["A_N", "error"]
    return [atomic_write(out / "errors.csv", csv_text(header, rows)),
            atomic_write(out / "report.json", json_text(report.as_dict()))]


def _run_measure(exp: Experiment, out: Path, workers: int) -> list[Path]:
    m = exp.map
    start = np.asarray(exp.data["start"], dtype=float)
    n = exp.data["N"]
    K = exp.data.get("cutoff", 8)
    mu = empirical_from_orbit(m, start, n)
    report = measure_report(mu, K, m, exp.tests)
    if isinstance(m, SkewProductMap):
        marginal = base_marginal(mu)
        report["base_marginal_discrepancy"] = weak_star_discrepancy(marginal, K)
        radius = exp.data.get("visit_radius", 0.01)
        report["visit_frequency"] = {
            "radius": radius,
            "value": condition_H_visit_frequency(m, start[:m.base_dim], n, radius),
            "certificate": m.base_certificate.justification,
        }
    return [atomic_write(out / "report.json", json_text(report))]


def _run_independence(exp: Experiment, out: Path) -> list[Path]:
    rel = independence_falsifier(exp.data["alpha"], exp.data["height"])
    report = {"alpha": [str(ExactScalar.coerce(a)) for a in exp.data["alpha"]],
              "height": exp.data["height"],
              "relation": list(rel.k) if rel else None,
              "residual": rel.residual if rel else None,
              "note": "no relation up to this height; this does not prove independence" if rel is None
              else "exact integer relation found"}
    return [atomic_write(out / "result.json", json_text(report))]


def run(cfg: LoadedConfig, out: str | Path, workers: int = 1, seed: int | None = None) -> list[Path]:
    """Validate and execute one experiment; returns the written files (manifest last)."""
    diags = validate(cfg)
    if diags:
        raise ConfigError(diags)
    data = cfg.data
    seed = data.get("seed", 0) if seed is None else seed
    exp = build(data, seed)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    kind = exp.kind
    if kind == "birkhoff":
        files = _run_birkhoff(exp, out, workers)
    elif kind == "uniform-scan":
        files = _run_scan(exp, out, workers, seed)[1]
    elif kind == "semi-uniform":
        files = _run_semi_uniform(exp, out, workers, seed)
    elif kind == "double-average":
        files = _run_double(exp, out, workers, seed)
    elif kind == "measure-diagnostics":
        files = _run_measure(exp, out, workers)
    else:
        files = _run_independence(exp, out)
    manifest = {
        "kind": kind,
        "config": cfg.path,
        "config_sha256": cfg.digest,
        "version": __version__,
        "seed": seed,
        "workers": workers,
        "wall_time_seconds": time.perf_counter() - t0,
        "outputs": [p.name for p in files],
    }
    files.append(atomic_write(out / "manifest.json", json_text(manifest)))
    return files
