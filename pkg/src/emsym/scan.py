"""Parameter-grid scans: config ingestion, parallel evaluation, CSV/JSON emission.

A scan walks a 1- or 2-axis grid, evaluates the selected model at every cell
and records entropy, phase, symmetry class, a boundary flag and the lowest
normal-mode gap.  Cells on phase boundaries or degenerate (Goldstone) lines
are flagged rather than errored.  Cell evaluations are pure, so results are
gathered into pre-indexed slots and the output is byte-identical for any
worker count.
"""

from __future__ import annotations

import json
import math
import multiprocessing
from dataclasses import dataclass, field

import numpy as np
import jsonschema

from .dicke import DickeParams, classify_lines, effective_hamiltonian
from .errors import ConfigError, OnBoundary, Unstable
from .landau import CouplingPair, SymmetryClass, classify_symmetry, minimize_mf
from .lattice import (
    LatticeGeometry,
    LatticeParams,
    critical_coupling,
    effective_lattice_hamiltonian,
    half_sites_partition,
)
from .lmg import LmgParams, mean_field as lmg_mean_field, two_block_form
from .quadratic import diagonalize, entanglement_entropy, ground_state_covariance

MODELS = ("landau", "dicke", "dicke_lattice", "lmg")

AXIS_NAMES = {
    "landau": ("g_plus", "g_minus"),
    "dicke": ("g_plus", "g_minus", "omega0", "omega_spin"),
    "dicke_lattice": ("g_plus", "g_minus"),
    "lmg": ("gamma_x", "gamma_y", "field_h"),
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["model", "axes"],
    "additionalProperties": False,
    "properties": {
        "model": {"enum": list(MODELS)},
        "params": {"type": "object"},
        "axes": {
            "type": "array",
            "minItems": 1,
            "maxItems": 2,
            "items": {
                "type": "object",
                "required": ["name", "min", "max", "steps"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "min": {"type": "number"},
                    "max": {"type": "number"},
                    "steps": {"type": "integer", "minimum": 2},
                },
            },
        },
        "partition": {"type": "array", "items": {"type": "integer"}},
        "geometry": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["chain", "torus", "hypercubic", "edges"]},
                "n_sites": {"type": "integer", "minimum": 2},
                "lx": {"type": "integer", "minimum": 3},
                "ly": {"type": "integer", "minimum": 3},
                "length": {"type": "integer", "minimum": 3},
                "dim": {"type": "integer", "minimum": 1, "maximum": 3},
                "edges": {"type": "array"},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "boundary": {"type": "number", "exclusiveMinimum": 0},
                "symmetry": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "workers": {"type": "integer", "minimum": 1},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "csv": {"type": "string"},
                "json": {"type": "string"},
                "svg": {"type": "string"},
            },
        },
    },
}

_REQUIRED_PARAMS = {
    "landau": (),
    "dicke": (),
    "dicke_lattice": ("hop_j",),
    "lmg": (),
}

_ALLOWED_PARAMS = {
    "landau": {"g_plus", "g_minus"},
    "dicke": {"omega0", "omega_spin", "g_plus", "g_minus"},
    "dicke_lattice": {"omega0", "omega_spin", "g_plus", "g_minus", "hop_j"},
    "lmg": {"field_h", "gamma_x", "gamma_y", "gamma_y_slope"},
}

_DEFAULT_PARAMS = {
    "landau": {"g_plus": 1.0, "g_minus": 0.0},
    "dicke": {"omega0": 1.0, "omega_spin": 1.0, "g_plus": 1.0, "g_minus": 0.0},
    "dicke_lattice": {"omega0": 1.0, "omega_spin": 1.0, "g_plus": 1.0, "g_minus": 0.0},
    "lmg": {"field_h": 1.0, "gamma_x": 1.0, "gamma_y": 0.0, "gamma_y_slope": None},
}


@dataclass(frozen=True)
class ScanAxis:
    name: str
    min: float
    max: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)


@dataclass(frozen=True)
class ScanConfig:
    model: str
    axes: tuple
    params: dict = field(default_factory=dict)
    partition: tuple | None = None
    geometry: dict | None = None
    boundary_tol: float = 1e-9
    symmetry_tol: float = 1e-9
    workers: int = 1
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "ScanConfig":
        try:
            jsonschema.validate(raw, CONFIG_SCHEMA)
        except jsonschema.ValidationError as err:
            raise ConfigError(err.message, path=tuple(err.absolute_path)) from None
        model = raw["model"]
        for key in raw.get("params", {}):
            if key not in _ALLOWED_PARAMS[model]:
                raise ConfigError(f"parameter {key!r} not valid for model {model!r}",
                                  path=("params", key))
        params = dict(_DEFAULT_PARAMS[model])
        params.update(raw.get("params", {}))
        for key in _REQUIRED_PARAMS[model]:
            if key not in params:
                raise ConfigError(f"model {model!r} requires parameter {key!r}",
                                  path=("params", key))
        axes = tuple(ScanAxis(a["name"], float(a["min"]), float(a["max"]), int(a["steps"]))
                     for a in raw["axes"])
        for i, axis in enumerate(axes):
            if axis.name not in AXIS_NAMES[model]:
                raise ConfigError(
                    f"axis {axis.name!r} not valid for model {model!r}; "
                    f"choose from {AXIS_NAMES[model]}", path=("axes", i, "name"))
            if not (math.isfinite(axis.min) and math.isfinite(axis.max)):
                raise ConfigError("axis range must be finite", path=("axes", i))
        if model == "dicke_lattice":
            if "geometry" not in raw:
                raise ConfigError("dicke_lattice requires a geometry", path=("geometry",))
            build_geometry(raw["geometry"])  # validates eagerly
        tol = raw.get("tolerances", {})
        return cls(
            model=model,
            axes=axes,
            params=params,
            partition=tuple(raw["partition"]) if "partition" in raw else None,
            geometry=raw.get("geometry"),
            boundary_tol=float(tol.get("boundary", 1e-9)),
            symmetry_tol=float(tol.get("symmetry", 1e-9)),
            workers=int(raw.get("workers", 1)),
            output=dict(raw.get("output", {})),
        )

    def to_dict(self) -> dict:
        out = {
            "model": self.model,
            "params": dict(self.params),
            "axes": [
                {"name": a.name, "min": a.min, "max": a.max, "steps": a.steps}
                for a in self.axes
            ],
            "tolerances": {"boundary": self.boundary_tol, "symmetry": self.symmetry_tol},
            "workers": self.workers,
        }
        if self.partition is not None:
            out["partition"] = list(self.partition)
        if self.geometry is not None:
            out["geometry"] = dict(self.geometry)
        if self.output:
            out["output"] = dict(self.output)
        return out


def load_config(path: str) -> ScanConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"not valid JSON: {err}") from None
    return ScanConfig.from_dict(raw)


def build_geometry(spec: dict) -> LatticeGeometry:
    kind = spec.get("kind")
    try:
        if kind == "chain":
            return LatticeGeometry.chain(int(spec["n_sites"]))
        if kind == "torus":
            return LatticeGeometry.torus(int(spec["lx"]), int(spec["ly"]))
        if kind == "hypercubic":
            return LatticeGeometry.hypercubic(int(spec["length"]), int(spec["dim"]))
        if kind == "edges":
            return LatticeGeometry.from_edges(int(spec["n_sites"]), spec["edges"])
    except KeyError as err:
        raise ConfigError(f"geometry kind {kind!r} is missing field {err.args[0]!r}",
                          path=("geometry",)) from None
    except ValueError as err:
        raise ConfigError(str(err), path=("geometry",)) from None
    raise ConfigError(f"unknown geometry kind {kind!r}", path=("geometry", "kind"))


@dataclass(frozen=True)
class CellRecord:
    entropy_bits: float | None
    phase: str
    symmetry: str
    boundary: bool
    gap: float | None


@dataclass(frozen=True)
class ScanDataset:
    config: ScanConfig
    axis1: np.ndarray
    axis2: np.ndarray | None
    records: tuple  # row-major, axis1 outer, axis2 inner

    @property
    def shape(self) -> tuple:
        if self.axis2 is None:
            return (len(self.axis1),)
        return (len(self.axis1), len(self.axis2))

    def entropy_grid(self) -> np.ndarray:
        values = [r.entropy_bits if r.entropy_bits is not None else np.nan
                  for r in self.records]
        return np.array(values).reshape(self.shape)

    def flag_grid(self) -> np.ndarray:
        return np.array([r.boundary for r in self.records]).reshape(self.shape)


# ------------------------------------------------------------ cell evaluation

def _cell_params(config_params: dict, assignments: dict) -> dict:
    params = dict(config_params)
    params.update(assignments)
    return params


def _eval_landau(params: dict, tols: dict) -> CellRecord:
    c = CouplingPair(params["g_plus"], params["g_minus"])
    sol = minimize_mf(c)
    boundary = abs(c.g_max - 1.0) < tols["boundary"]
    symmetry = SymmetryClass.NONE
    if not boundary and c.g_max > 1.0:
        symmetry = classify_symmetry(c, tols["symmetry"])
    gap = min(sol.curvature_x, sol.curvature_p)
    return CellRecord(None, sol.phase.value, symmetry.value, boundary, float(gap))


def _eval_dicke(params: dict, tols: dict, partition) -> CellRecord:
    dp = DickeParams.from_couplings(params["omega0"], params["omega_spin"],
                                    params["g_plus"], params["g_minus"])
    c = dp.couplings()
    sol = minimize_mf(c)
    phase = "normal" if c.g_max <= 1.0 else "superradiant"
    symmetry = classify_lines(dp, tols["symmetry"])
    if abs(c.g_max - 1.0) < tols["boundary"]:
        return CellRecord(None, phase, symmetry.value, True, None)
    if symmetry is SymmetryClass.GOLDSTONE_U1 and c.g_max > 1.0:
        # exact U(1) degeneracy: zero mode, no Gaussian ground state
        return CellRecord(None, phase, symmetry.value, True, None)
    part = partition if partition is not None else (0,)
    try:
        form = effective_hamiltonian(dp)
        spec = diagonalize(form)
        if not spec.stable:
            return CellRecord(None, phase, symmetry.value, True, None)
        gap = float(spec.mode_energies[0])
        ground = ground_state_covariance(form)
        entropy = entanglement_entropy(ground, part)
    except (OnBoundary, Unstable):
        return CellRecord(None, phase, symmetry.value, True, None)
    return CellRecord(float(entropy), phase, symmetry.value, False, gap)


def _eval_lattice(params: dict, tols: dict, partition, geometry_spec: dict) -> CellRecord:
    geometry = build_geometry(geometry_spec)
    dp = DickeParams.from_couplings(params["omega0"], params["omega_spin"],
                                    params["g_plus"], params["g_minus"])
    lp = LatticeParams(dp, params["hop_j"], geometry)
    gc = critical_coupling(lp)
    c = dp.couplings()
    phase = "normal" if c.g_max <= gc else "superradiant"
    scaled = CouplingPair(c.g_plus / gc, c.g_minus / gc)
    if scaled.g_max > 1.0:
        symmetry = classify_symmetry(scaled, tols["symmetry"])
    elif abs(c.g_plus - c.g_minus) < tols["symmetry"]:
        symmetry = SymmetryClass.EMERGENT_TC
    elif abs(c.g_plus + c.g_minus) < tols["symmetry"]:
        symmetry = SymmetryClass.EMERGENT_ANTI_TC
    else:
        symmetry = SymmetryClass.NONE
    if abs(c.g_max / gc - 1.0) < tols["boundary"]:
        return CellRecord(None, phase, symmetry.value, True, None)
    if symmetry is SymmetryClass.GOLDSTONE_U1 and c.g_max > gc:
        return CellRecord(None, phase, symmetry.value, True, None)
    part = list(partition) if partition is not None else half_sites_partition(geometry)
    try:
        form = effective_lattice_hamiltonian(lp)
        spec = diagonalize(form)
        if not spec.stable:
            return CellRecord(None, phase, symmetry.value, True, None)
        gap = float(spec.mode_energies[0])
        ground = ground_state_covariance(form)
        entropy = entanglement_entropy(ground, part)
    except (OnBoundary, Unstable):
        return CellRecord(None, phase, symmetry.value, True, None)
    return CellRecord(float(entropy), phase, symmetry.value, False, gap)


def _eval_lmg(params: dict, tols: dict) -> CellRecord:
    h = params["field_h"]
    gx = params["gamma_x"]
    slope = params.get("gamma_y_slope")
    gy = slope * gx if slope is not None else params["gamma_y"]
    lp = LmgParams(h, gx, gy)
    mf = lmg_mean_field(lp)
    if max(gx, gy) > h:
        if abs(gx * gy - h * h) < tols["symmetry"]:
            symmetry = SymmetryClass.EMERGENT_TC
        elif abs(gx - gy) < tols["symmetry"]:
            symmetry = SymmetryClass.GOLDSTONE_U1
        else:
            symmetry = SymmetryClass.NONE
    else:
        symmetry = (SymmetryClass.EMERGENT_TC if abs(gx - gy) < tols["symmetry"]
                    else SymmetryClass.NONE)
    if abs(max(gx, gy) / h - 1.0) < tols["boundary"]:
        return CellRecord(None, mf.phase.value, symmetry.value, True, None)
    try:
        form = two_block_form(lp)
        spec = diagonalize(form)
        if not spec.stable or spec.mode_energies[0] < tols["boundary"]:
            return CellRecord(None, mf.phase.value, symmetry.value, True, None)
        gap = float(spec.mode_energies[0])
        ground = ground_state_covariance(form)
        entropy = entanglement_entropy(ground, (0,))
    except (OnBoundary, Unstable):
        return CellRecord(None, mf.phase.value, symmetry.value, True, None)
    return CellRecord(float(entropy), mf.phase.value, symmetry.value, False, gap)


def _evaluate_cell(task) -> CellRecord:
    model, params, tols, partition, geometry = task
    if model == "landau":
        return _eval_landau(params, tols)
    if model == "dicke":
        return _eval_dicke(params, tols, partition)
    if model == "dicke_lattice":
        return _eval_lattice(params, tols, partition, geometry)
    if model == "lmg":
        return _eval_lmg(params, tols)
    raise ValueError(f"unknown model {model!r}")


def run_scan(config: ScanConfig) -> ScanDataset:
    """Evaluate the configured grid; deterministic for any worker count."""
    axis1 = config.axes[0].values()
    axis2 = config.axes[1].values() if len(config.axes) == 2 else None
    tols = {"boundary": config.boundary_tol, "symmetry": config.symmetry_tol}
    tasks = []
    for v1 in axis1:
        assignments = {config.axes[0].name: float(v1)}
        if axis2 is None:
            tasks.append((config.model, _cell_params(config.params, assignments),
                          tols, config.partition, config.geometry))
        else:
            for v2 in axis2:
                cell = dict(assignments)
                cell[config.axes[1].name] = float(v2)
                tasks.append((config.model, _cell_params(config.params, cell),
                              tols, config.partition, config.geometry))
    if config.workers > 1:
        chunk = max(1, len(tasks) // (config.workers * 8))
        with multiprocessing.Pool(config.workers) as pool:
            records = pool.map(_evaluate_cell, tasks, chunksize=chunk)
    else:
        records = [_evaluate_cell(t) for t in tasks]
    return ScanDataset(config, axis1, axis2, tuple(records))


# ------------------------------------------------------------------ emission

def _fmt(value) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


def emit_csv(dataset: ScanDataset) -> str:
    """Deterministic CSV (LF endings, round-trip float formatting).

    Header: axis1,axis2,entropy_bits,phase,symmetry,boundary,gap.  For 1-axis
    datasets the axis2 column is empty.  Row order: axis1 outer, axis2 inner.
    """
    lines = ["axis1,axis2,entropy_bits,phase,symmetry,boundary,gap"]
    idx = 0
    for v1 in dataset.axis1:
        inner = dataset.axis2 if dataset.axis2 is not None else [None]
        for v2 in inner:
            rec = dataset.records[idx]
            idx += 1
            lines.append(",".join([
                _fmt(v1),
                _fmt(v2),
                _fmt(rec.entropy_bits),
                rec.phase,
                rec.symmetry,
                "true" if rec.boundary else "false",
                _fmt(rec.gap),
            ]))
    return "\n".join(lines) + "\n"


def emit_json(dataset: ScanDataset) -> str:
    payload = {
        "config": dataset.config.to_dict(),
        "axis1": [float(v) for v in dataset.axis1],
        "axis2": None if dataset.axis2 is None else [float(v) for v in dataset.axis2],
        "cells": [
            {
                "entropy_bits": rec.entropy_bits,
                "phase": rec.phase,
                "symmetry": rec.symmetry,
                "boundary": rec.boundary,
                "gap": rec.gap,
            }
            for rec in dataset.records
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def load_dataset_json(path: str) -> ScanDataset:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    config = ScanConfig.from_dict(payload["config"])
    axis1 = np.array(payload["axis1"], dtype=float)
    axis2 = None if payload["axis2"] is None else np.array(payload["axis2"], dtype=float)
    records = tuple(
        CellRecord(c["entropy_bits"], c["phase"], c["symmetry"], c["boundary"], c["gap"])
        for c in payload["cells"]
    )
    return ScanDataset(config, axis1, axis2, records)
