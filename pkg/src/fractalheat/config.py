"""JSON run-configuration loading and object construction.

A configuration document fixes the discretized space, the kernel, the
problem data and the time grid; subcommand-specific sections tune the
individual reports.  Validation is strict: every key at every nesting
level must be recognized, so typos fail loudly instead of silently
falling back to defaults.
"""
from __future__ import annotations

import json
from pathlib import Path

from .kernel import CauchyPoisson, GaussWeierstrass, NormalizedKernel, ProfileKernel
from .profiles import CauchyType, GaussType
from .semigroup import TimeGrid
from .space import (build_lattice_space, constant_field, gaussian_bump_field,
                    load_grid_csv, load_point_cloud, power_decay_field)

__all__ = ["ConfigError", "load_config", "build_space", "build_kernel",
           "build_field", "build_timegrid"]

CONFIG_VERSION = 1


class ConfigError(ValueError):
    """Raised for unknown keys, missing keys, or malformed values."""


# allowed keys per section; variant sections list keys per "kind"
_FIELD_KEYS = {
    "constant": {"kind", "value"},
    "gaussian-bump": {"kind", "amplitude", "width"},
    "power-decay": {"kind", "amplitude", "lam"},
}
_SPACE_KEYS = {
    "lattice": {"kind", "dim", "radius", "points_per_axis"},
    "grid-csv": {"kind", "path"},
    "point-cloud": {"kind", "points_path", "distances_path"},
}
_PROFILE_KEYS = {
    "gauss-type": {"kind", "C", "c", "gamma"},
    "cauchy-type": {"kind", "C", "gamma"},
}
_KERNEL_KEYS = {
    "gauss-weierstrass": {"kind", "n", "normalize"},
    "cauchy-poisson": {"kind", "n", "normalize"},
    "profile": {"kind", "alpha", "beta", "profile", "normalize"},
}
_SECTION_KEYS = {
    "problem": {"p", "phi", "f"},
    "time": {"t_max", "n_nodes"},
    "solve": {"tol", "max_iter", "blowup_cap"},
    "horizon": {"ode_step", "blowup_cap", "t_limit"},
    "witness": {"t_values", "a1", "a2"},
    "harnack": {"t_values", "a1", "a2"},
    "integrals": {"lambda1", "lambda2", "moment_lam", "t_values"},
    "holder": {"d_max", "theta1", "theta2"},
    "verify_kernel": {"t_values", "fit_holder"},
    "scan": {"p_values", "t_values"},
}
_TOP_KEYS = {"version", "space", "kernel"} | set(_SECTION_KEYS)


def _expect_mapping(obj, where: str):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    return obj


def _check_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}; allowed: {sorted(allowed)}")


def _variant(section: dict, table: dict, where: str) -> str:
    kind = section.get("kind")
    if kind not in table:
        raise ConfigError(f"{where}: 'kind' must be one of {sorted(table)}, got {kind!r}")
    _check_keys(section, table[kind], f"{where}({kind})")
    return kind


def _validate(doc: dict):
    _expect_mapping(doc, "config")
    _check_keys(doc, _TOP_KEYS, "config")
    if doc.get("version") != CONFIG_VERSION:
        raise ConfigError(f"config: 'version' must be {CONFIG_VERSION}")
    if "space" not in doc or "kernel" not in doc:
        raise ConfigError("config: 'space' and 'kernel' sections are required")
    _variant(_expect_mapping(doc["space"], "space"), _SPACE_KEYS, "space")
    kernel = _expect_mapping(doc["kernel"], "kernel")
    kind = _variant(kernel, _KERNEL_KEYS, "kernel")
    if kind == "profile":
        _variant(_expect_mapping(kernel.get("profile"), "kernel.profile"),
                 _PROFILE_KEYS, "kernel.profile")
    if "problem" in doc:
        prob = _expect_mapping(doc["problem"], "problem")
        _check_keys(prob, _SECTION_KEYS["problem"], "problem")
        for name in ("phi", "f"):
            if name in prob:
                _variant(_expect_mapping(prob[name], f"problem.{name}"),
                         _FIELD_KEYS, f"problem.{name}")
    for name, keys in _SECTION_KEYS.items():
        if name in ("problem",) or name not in doc:
            continue
        _check_keys(_expect_mapping(doc[name], name), keys, name)


def load_config(path) -> dict:
    """Read and validate a JSON configuration document."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})")
    _validate(doc)
    return doc


def build_space(section: dict):
    kind = section["kind"]
    try:
        if kind == "lattice":
            return build_lattice_space(dim=int(section["dim"]),
                                       radius=float(section["radius"]),
                                       points_per_axis=int(section["points_per_axis"]))
        if kind == "grid-csv":
            return load_grid_csv(section["path"])
        return load_point_cloud(section["points_path"], section["distances_path"])
    except KeyError as exc:
        raise ConfigError(f"space({kind}): missing key {exc}")
    except (TypeError, ValueError, OSError) as exc:
        raise ConfigError(f"space({kind}): {exc}")


def _build_profile(section: dict):
    if section["kind"] == "gauss-type":
        return GaussType(C=float(section["C"]), c=float(section["c"]),
                         gamma=float(section["gamma"]))
    return CauchyType(C=float(section["C"]), gamma=float(section["gamma"]))


def build_kernel(section: dict, space=None):
    kind = section["kind"]
    try:
        if kind == "gauss-weierstrass":
            base = GaussWeierstrass(n=int(section["n"]))
        elif kind == "cauchy-poisson":
            base = CauchyPoisson(n=int(section["n"]))
        else:
            base = ProfileKernel(alpha=float(section["alpha"]),
                                 beta=float(section["beta"]),
                                 profile=_build_profile(section["profile"]))
    except KeyError as exc:
        raise ConfigError(f"kernel({kind}): missing key {exc}")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"kernel({kind}): {exc}")
    if section.get("normalize", False):
        if space is None:
            raise ConfigError("kernel: 'normalize' requires a space")
        base = NormalizedKernel(base, space)
    return base


def build_field(section: dict, space):
    kind = section["kind"]
    try:
        if kind == "constant":
            return constant_field(space, float(section["value"]))
        if kind == "gaussian-bump":
            return gaussian_bump_field(space, float(section["amplitude"]),
                                       float(section["width"]))
        return power_decay_field(space, float(section["amplitude"]),
                                 float(section["lam"]))
    except KeyError as exc:
        raise ConfigError(f"field({kind}): missing key {exc}")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field({kind}): {exc}")


def build_timegrid(section: dict) -> TimeGrid:
    try:
        return TimeGrid.uniform(t_max=float(section["t_max"]),
                                n_nodes=int(section["n_nodes"]))
    except KeyError as exc:
        raise ConfigError(f"time: missing key {exc}")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"time: {exc}")
