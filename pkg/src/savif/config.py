"""Run configuration: YAML (or JSON) text -> validated, defaulted :class:`RunConfig`.

Example::

    problem:
      alpha: 1.0
      beta: 1.0
      domain: [-32, -32, 64, 64]   # xL, yL, X, Y
      N: 128
      initial: example2
    time: {tau: 0.05, T: 5.0}
    scheme: {name: savif}
    experiment: {kind: energy}

Missing sections take the defaults below; ``preset`` names one of
:data:`PRESETS` as the starting point.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import yaml

from .errors import ConfigError

INITIAL_DATA = ("example1", "example2", "zero")
SOURCES = ("none", "manufactured", "manufactured_discrete")
SCHEME_NAMES = ("savif", "ifgrk4", "ifgrk6")
EXPERIMENTS = ("simulate", "temporal_sweep", "spatial_sweep", "energy")


@dataclass
class ProblemConfig:
    alpha: float = 1.0
    beta: float = 1.0
    C0: float = 1.0
    domain: list = field(default_factory=lambda: [-8.0, -8.0, 16.0, 16.0])
    N: int = 64
    initial: str = "example1"
    source: str = "none"


@dataclass
class SchemeConfig:
    name: str = "savif"
    tol: float = 1e-13
    max_iter: Optional[int] = None
    strict_paper: bool = False


@dataclass
class TimeConfig:
    tau: float = 0.01
    T: float = 1.0


@dataclass
class ExperimentConfig:
    kind: str = "simulate"
    tau_list: list = field(default_factory=list)
    N_list: list = field(default_factory=list)


@dataclass
class IOConfig:
    output_dir: str = "runs/out"
    checkpoint_every: int = 0
    seed: int = 0


@dataclass
class RunConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    io: IOConfig = field(default_factory=IOConfig)
    preset: Optional[str] = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_TEMPORAL_TAUS = [0.1 * 2.0**-k for k in range(5)]

PRESETS: dict[str, dict] = {
    "example1_beta_plus": {
        "problem": {"alpha": 1.0, "beta": 1.0, "domain": [-8.0, -8.0, 16.0, 16.0], "N": 64,
                    "initial": "example1", "source": "manufactured_discrete"},
        "time": {"tau": 0.01, "T": 1.0},
        "experiment": {"kind": "temporal_sweep", "tau_list": _TEMPORAL_TAUS,
                       "N_list": [16, 24, 32, 48, 64]},
    },
    "example1_beta_minus": {
        "problem": {"alpha": 1.0, "beta": -1.0, "domain": [-8.0, -8.0, 16.0, 16.0], "N": 64,
                    "initial": "example1", "source": "manufactured_discrete"},
        "time": {"tau": 0.01, "T": 1.0},
        "experiment": {"kind": "temporal_sweep", "tau_list": _TEMPORAL_TAUS,
                       "N_list": [16, 24, 32, 48, 64]},
    },
    "example2": {
        "problem": {"alpha": 1.0, "beta": 1.0, "domain": [-32.0, -32.0, 64.0, 64.0], "N": 128,
                    "initial": "example2", "source": "none"},
        "time": {"tau": 0.05, "T": 5.0},
        "experiment": {"kind": "energy"},
    },
}

_SECTIONS = {
    "problem": ProblemConfig,
    "scheme": SchemeConfig,
    "time": TimeConfig,
    "experiment": ExperimentConfig,
    "io": IOConfig,
}


def _deep_update(base: dict, upd: dict) -> dict:
    for k, v in upd.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _deep_update(base[k], v)
        else:
            base[k] = copy.deepcopy(v)
    return base


def apply_override(tree: dict, assignment: str) -> dict:
    """Apply ``"a.b.c=value"``; the value is parsed as YAML (numbers, lists, bools)."""
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like KEY=VALUE")
    key, raw = assignment.split("=", 1)
    path = key.strip().split(".")
    node = tree
    for part in path[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(key, "path does not name a section")
    node[path[-1]] = yaml.safe_load(raw)
    return tree


def _number(key, value, kind=float):
    if isinstance(value, str):
        # YAML 1.1 reads exponent forms without a dot (1e-13) as strings
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(key, f"expected a number, got {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite")
    return value


def _build_section(name: str, cls, data: Any):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(name, "expected a mapping")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown key")
    return cls(**{k: copy.deepcopy(v) for k, v in data.items()})


def from_dict(tree: dict) -> RunConfig:
    tree = copy.deepcopy(tree or {})
    if not isinstance(tree, dict):
        raise ConfigError("<root>", "configuration must be a mapping")
    preset = tree.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        tree = _deep_update(copy.deepcopy(PRESETS[preset]), tree)
    unknown = set(tree) - set(_SECTIONS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    cfg = RunConfig(**{name: _build_section(name, cls, tree.get(name)) for name, cls in _SECTIONS.items()},
                    preset=preset)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> RunConfig:
    p, s, t, e, io = cfg.problem, cfg.scheme, cfg.time, cfg.experiment, cfg.io
    p.alpha = _number("problem.alpha", p.alpha)
    if p.alpha == 0:
        raise ConfigError("problem.alpha", "alpha must be nonzero (alpha != 0)")
    p.beta = _number("problem.beta", p.beta)
    if p.beta == 0:
        raise ConfigError("problem.beta", "beta must be nonzero (beta != 0)")
    p.C0 = _number("problem.C0", p.C0)
    if not p.C0 > 0:
        raise ConfigError("problem.C0", "C0 must be positive")
    if not isinstance(p.domain, (list, tuple)) or len(p.domain) != 4:
        raise ConfigError("problem.domain", "expected [xL, yL, X, Y]")
    p.domain = [_number(f"problem.domain[{i}]", v) for i, v in enumerate(p.domain)]
    if not (p.domain[2] > 0 and p.domain[3] > 0):
        raise ConfigError("problem.domain", "extents X, Y must be positive")
    p.N = _number("problem.N", p.N, int)
    if p.N < 4 or p.N % 2:
        raise ConfigError("problem.N", "N must be an even integer >= 4")
    if p.initial not in INITIAL_DATA:
        raise ConfigError("problem.initial", f"expected one of {INITIAL_DATA}")
    if p.source not in SOURCES:
        raise ConfigError("problem.source", f"expected one of {SOURCES}")

    if s.name not in SCHEME_NAMES:
        raise ConfigError("scheme.name", f"expected one of {SCHEME_NAMES}")
    s.tol = _number("scheme.tol", s.tol)
    if not s.tol > 0:
        raise ConfigError("scheme.tol", "must be positive")
    if s.max_iter is not None:
        s.max_iter = _number("scheme.max_iter", s.max_iter, int)
        if s.max_iter < 1:
            raise ConfigError("scheme.max_iter", "must be >= 1")
    if not isinstance(s.strict_paper, bool):
        raise ConfigError("scheme.strict_paper", "expected true/false")

    t.tau = _number("time.tau", t.tau)
    t.T = _number("time.T", t.T)
    if not t.tau > 0:
        raise ConfigError("time.tau", "must be positive")
    if not t.T >= t.tau:
        raise ConfigError("time.T", "T must be >= tau")

    if e.kind not in EXPERIMENTS:
        raise ConfigError("experiment.kind", f"expected one of {EXPERIMENTS}")
    e.tau_list = [_number(f"experiment.tau_list[{i}]", v) for i, v in enumerate(e.tau_list or [])]
    e.N_list = [_number(f"experiment.N_list[{i}]", v, int) for i, v in enumerate(e.N_list or [])]
    if e.kind == "temporal_sweep" and not e.tau_list:
        raise ConfigError("experiment.tau_list", "temporal sweeps need a non-empty tau_list")
    if e.kind == "spatial_sweep" and not e.N_list:
        raise ConfigError("experiment.N_list", "spatial sweeps need a non-empty N_list")
    if any(x <= 0 for x in e.tau_list):
        raise ConfigError("experiment.tau_list", "step sizes must be positive")
    if any(n < 4 or n % 2 for n in e.N_list):
        raise ConfigError("experiment.N_list", "resolutions must be even integers >= 4")
    if e.kind in ("temporal_sweep", "spatial_sweep") and p.initial != "example1":
        raise ConfigError("problem.initial", "sweeps measure error against the example1 manufactured solution")
    if e.kind == "energy" and p.source != "none":
        raise ConfigError("problem.source", "energy runs need an unforced problem (source: none)")

    io.checkpoint_every = _number("io.checkpoint_every", io.checkpoint_every, int)
    if io.checkpoint_every < 0:
        raise ConfigError("io.checkpoint_every", "must be >= 0")
    io.seed = _number("io.seed", io.seed, int)
    io.output_dir = str(io.output_dir)
    return cfg


def parse_config(text: str, overrides=()) -> RunConfig:
    try:
        if not (text and text.strip()):
            tree = {}
        else:
            try:
                tree = json.loads(text)
            except ValueError:
                tree = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<text>", f"could not parse configuration: {exc}") from None
    if tree is None:
        tree = {}
    for ov in overrides:
        apply_override(tree, ov)
    return from_dict(tree)


def serialize_config(cfg: RunConfig) -> str:
    # JSON is valid YAML, so parse_config(serialize_config(c)) round trips
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)
