"""Scenario configuration: a flat TOML schema with strict validation.

One file describes one scenario.  Sections and keys are whitelisted; unknown
keys are rejected so typos fail loudly.  All rates are in units of the loss
rate kappa, which must be given explicitly (kappa = 1 is the canonical
choice).
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..flow.models import CollectiveSpinModel, KerrLatticeModel, bose_hubbard_dimer, single_kerr
from ..unravel import UnravelingScheme

__all__ = ["ConfigError", "ScenarioConfig", "load_config"]

KINDS = ("flow", "steady", "sweep", "exact", "bench")
MODELS = ("kerr", "dimer", "spin")
SCHEMES = ("quantum_jump", "homodyne", "heterodyne")

_SCHEMA: dict[str, dict[str, type | tuple]] = {
    "scenario": {
        "kind": str,
        "model": str,
        "scheme": (str, list),
        "seed": int,
        "qj_zero_policy": str,
    },
    "model": {
        "kappa": float,
        "delta": float,
        "u_int": float,
        "drive": float,
        "coupling": float,
        "omega": float,
    },
    "init": {
        "theta": float,
        "phi": float,
        "u_re": float,
        "u_im": float,
        "v": float,
        "alpha_re": list,
        "alpha_im": list,
    },
    "integration": {
        "t_max": float,
        "dt_out": float,
        "rtol": float,
        "atol": float,
        "diffusive_dt": float,
    },
    "sweep": {
        "param": str,
        "start": float,
        "stop": float,
        "count": int,
        "average_window": list,
    },
    "ensemble": {
        "n_traj": int,
        "sizes": list,
        "cutoff": (int, list),
        "delta_g": bool,
        "delta_g_stride": int,
        "entropy": bool,
    },
    "output": {
        "prefix": str,
    },
}

_REQUIRED = {
    "flow": (("scenario", "kind"), ("scenario", "model"), ("model", "kappa"), ("integration", "t_max"), ("integration", "dt_out")),
    "steady": (("scenario", "kind"), ("scenario", "model"), ("model", "kappa")),
    "sweep": (("scenario", "kind"), ("scenario", "model"), ("model", "kappa"), ("sweep", "param"), ("sweep", "start"), ("sweep", "stop"), ("sweep", "count")),
    "exact": (("scenario", "kind"), ("scenario", "model"), ("model", "kappa"), ("integration", "t_max"), ("integration", "dt_out"), ("ensemble", "n_traj"), ("ensemble", "sizes")),
    "bench": (("scenario", "kind"), ("scenario", "model"), ("model", "kappa"), ("integration", "t_max"), ("integration", "dt_out"), ("ensemble", "n_traj"), ("ensemble", "sizes")),
}


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    kind: str
    model_name: str
    schemes: list[str]
    seed: int | None
    qj_zero_policy: str
    model_params: dict[str, float]
    init: dict
    integration: dict
    sweep: dict
    ensemble: dict
    output_prefix: str
    source: Path | None = None

    def build_model(self):
        p = self.model_params
        if self.model_name == "kerr":
            return single_kerr(
                delta=p.get("delta", 0.0),
                u_int=p.get("u_int", 0.0),
                drive=p.get("drive", 0.0),
                kappa=p["kappa"],
            )
        if self.model_name == "dimer":
            return bose_hubbard_dimer(
                delta=p.get("delta", 0.0),
                u_int=p.get("u_int", 0.0),
                drive=p.get("drive", 0.0),
                coupling=p.get("coupling", 0.0),
                kappa=p["kappa"],
            )
        if self.model_name == "spin":
            return CollectiveSpinModel(omega=p.get("omega", 0.0), kappa=p["kappa"])
        raise ConfigError(f"unknown model {self.model_name!r}")

    def build_schemes(self) -> list[UnravelingScheme]:
        return [
            UnravelingScheme.from_name(s, self.qj_zero_policy) for s in self.schemes
        ]

    def sweep_grid(self) -> np.ndarray:
        s = self.sweep
        grid = np.linspace(s["start"], s["stop"], int(s["count"]))
        if grid.size == 0:
            raise ConfigError("sweep grid is empty")
        return grid


def _check_section(name: str, table: dict) -> None:
    if name not in _SCHEMA:
        raise ConfigError(f"unknown config section [{name}]")
    allowed = _SCHEMA[name]
    for key, val in table.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in section [{name}]")
        want = allowed[key]
        if want is float:
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ConfigError(f"[{name}] {key} must be a number, got {val!r}")
        elif want is int:
            if not isinstance(val, int) or isinstance(val, bool):
                raise ConfigError(f"[{name}] {key} must be an integer, got {val!r}")
        elif want is bool:
            if not isinstance(val, bool):
                raise ConfigError(f"[{name}] {key} must be a boolean, got {val!r}")
        elif want is str:
            if not isinstance(val, str):
                raise ConfigError(f"[{name}] {key} must be a string, got {val!r}")
        elif want is list:
            if not isinstance(val, list):
                raise ConfigError(f"[{name}] {key} must be a list, got {val!r}")
        else:  # tuple of alternatives
            if not isinstance(val, want):
                raise ConfigError(f"[{name}] {key} has the wrong type: {val!r}")


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}")

    for section, table in raw.items():
        if not isinstance(table, dict):
            raise ConfigError(f"top-level key {section!r} must be a section")
        _check_section(section, table)

    scenario = raw.get("scenario", {})
    kind = scenario.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"[scenario] kind must be one of {KINDS}, got {kind!r}")
    model = scenario.get("model")
    if model not in MODELS:
        raise ConfigError(f"[scenario] model must be one of {MODELS}, got {model!r}")

    for sec, key in _REQUIRED[kind]:
        if key not in raw.get(sec, {}):
            raise ConfigError(f"missing required key {key!r} in section [{sec}] for kind {kind!r}")

    scheme_raw = scenario.get("scheme", "homodyne")
    schemes = [scheme_raw] if isinstance(scheme_raw, str) else list(scheme_raw)
    for s in schemes:
        if s not in SCHEMES:
            raise ConfigError(f"unknown scheme {s!r}; valid: {SCHEMES}")
    if kind in ("flow", "steady") and len(schemes) != 1:
        raise ConfigError(f"kind {kind!r} takes exactly one scheme")

    policy = scenario.get("qj_zero_policy", "error")
    if policy not in ("error", "heterodyne_fallback"):
        raise ConfigError(f"invalid qj_zero_policy {policy!r}")

    return ScenarioConfig(
        kind=kind,
        model_name=model,
        schemes=schemes,
        seed=scenario.get("seed"),
        qj_zero_policy=policy,
        model_params={k: float(v) for k, v in raw.get("model", {}).items()},
        init=dict(raw.get("init", {})),
        integration=dict(raw.get("integration", {})),
        sweep=dict(raw.get("sweep", {})),
        ensemble=dict(raw.get("ensemble", {})),
        output_prefix=raw.get("output", {}).get("prefix", "run"),
        source=path,
    )
