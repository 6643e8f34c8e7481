"""TOML run configuration: system description, open set, and run defaults.

Parse errors name the offending key; tomllib/tomli decode errors carry the
line number.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .catalog import band_intervals
from .errors import ConfigError
from .geometry import OpenSet
from .maps import Affine1D, AffineND, Moebius2D, PiecewiseAffine1D, ScalarConformalND
from .model import ConstantField, GaussianWeight, IfsSystem, SmoothField


@dataclass
class RunConfig:
    system: Optional[IfsSystem] = None
    open_set: Optional[OpenSet] = None
    run: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def _need(table: dict, key: str, path: str):
    if key not in table:
        raise ConfigError(f"missing key '{path}.{key}'")
    return table[key]


def _build_map(entry: dict, path: str):
    family = _need(entry, "family", path)
    try:
        if family == "affine_1d":
            return Affine1D(_need(entry, "slope", path), _need(entry, "intercept", path))
        if family == "piecewise_affine_1d":
            return PiecewiseAffine1D(
                _need(entry, "breakpoints", path),
                _need(entry, "slopes", path),
                _need(entry, "intercepts", path),
                homeomorphic=bool(entry.get("homeomorphic", False)),
            )
        if family == "affine_nd":
            return AffineND(_need(entry, "matrix", path), _need(entry, "offset", path))
        if family == "moebius_2d":
            coeffs = [complex(*_need(entry, k, path)) if isinstance(entry.get(k), list)
                      else complex(_need(entry, k, path)) for k in ("a", "b", "c", "d")]
            return Moebius2D(*coeffs)
        if family == "scalar_conformal_nd":
            return ScalarConformalND(
                _need(entry, "scale", path),
                _need(entry, "rotation", path),
                _need(entry, "translation", path),
            )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad map parameters at '{path}': {exc}") from exc
    raise ConfigError(f"unknown map family {family!r} at '{path}.family'")


def _build_probs(table: dict, k: int):
    kind = _need(table, "kind", "system.probs")
    if kind == "constant":
        p = _need(table, "p", "system.probs")
        try:
            fieldobj = ConstantField(p)
        except Exception as exc:
            raise ConfigError(f"bad 'system.probs.p': {exc}") from exc
    elif kind == "smooth":
        entries = _need(table, "weight", "system.probs")
        weights = []
        for i, w in enumerate(entries):
            path = f"system.probs.weight[{i}]"
            try:
                weights.append(GaussianWeight(
                    base=w.get("base", 0.0),
                    amp=w.get("amp", 0.0),
                    center=w.get("center", 0.0),
                    width=w.get("width", 1.0),
                ))
            except Exception as exc:
                raise ConfigError(f"bad weight at '{path}': {exc}") from exc
        try:
            fieldobj = SmoothField(weights, p_min=_need(table, "p_min", "system.probs"))
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"bad 'system.probs': {exc}") from exc
    else:
        raise ConfigError(f"unknown probability kind {kind!r} at 'system.probs.kind'")
    if fieldobj.k != k:
        raise ConfigError(
            f"'system.probs' has {fieldobj.k} entries but 'system.map' lists {k} maps")
    return fieldobj


def _build_open_set(table: dict) -> OpenSet:
    kind = _need(table, "kind", "open_set")
    if kind == "intervals":
        iv = _need(table, "intervals", "open_set")
        try:
            return OpenSet.from_intervals(np.asarray(iv, dtype=float))
        except Exception as exc:
            raise ConfigError(f"bad 'open_set.intervals': {exc}") from exc
    if kind == "paper_bn":
        n_max = int(table.get("n_max", 6))
        return OpenSet.from_intervals(band_intervals(n_max))
    raise ConfigError(f"unknown open_set kind {kind!r} at 'open_set.kind'")


def parse_config(data: dict) -> RunConfig:
    cfg = RunConfig(raw=data)
    if "system" in data:
        stab = data["system"]
        d = int(_need(stab, "dimension", "system"))
        entries = _need(stab, "map", "system")
        if not isinstance(entries, list) or not entries:
            raise ConfigError("'system.map' must be a nonempty array of tables")
        maps = [_build_map(e, f"system.map[{i}]") for i, e in enumerate(entries)]
        probs = _build_probs(_need(stab, "probs", "system"), len(maps))
        try:
            cfg.system = IfsSystem(d, maps, probs)
        except Exception as exc:
            raise ConfigError(f"inconsistent 'system': {exc}") from exc
    if "open_set" in data:
        cfg.open_set = _build_open_set(data["open_set"])
        if cfg.system is not None:
            cfg.system = IfsSystem(cfg.system.d, cfg.system.maps, cfg.system.probs,
                                   domain=cfg.open_set)
    cfg.run = dict(data.get("run", {}))
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = _toml.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error in {path}: {exc}") from exc
    return parse_config(data)
