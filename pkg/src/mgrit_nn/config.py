"""Experiment configuration: flat ``key = value`` files plus overrides.

File format: one ``key = value`` per line, ``#`` starts a comment, blank
lines are ignored.  Keys are the field names of ``ExperimentConfig``; ``n0``
takes a comma separated list.  Values left unset fall back to the preset.
"""

import math
from dataclasses import asdict, dataclass, fields, replace

from . import mgrit
from .network import (BINADD_TOPOLOGY, INIT_SCHEMES, XOR_TOPOLOGY, Topology,
                      binary_addition_dataset, xor_dataset)
from .schedules import ConfigError, TrainingPolicy, get_preset

PROBLEMS = ("xor", "binadd")


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str = "naive"
    problem: str = "xor"
    n0: tuple = (100, 200, 400)
    cycle: str = "two-level"
    relax: str = "fcf"
    alpha_b: float = None
    alpha_max: float = None
    factor: float = None
    m: int = None
    policy: str = None
    seed: int = 1
    init: str = None
    max_coarse: int = 10
    tol_coefficient: float = 1e-9
    max_iters: int = 50
    workers: int = 1
    count: int = 500
    bits: int = 12

    def validate(self):
        preset = get_preset(self.preset)
        if self.problem not in PROBLEMS:
            raise ConfigError("problem: expected one of %s, got %r" % (PROBLEMS, self.problem))
        if self.cycle not in mgrit.CYCLES:
            raise ConfigError("cycle: expected one of %s, got %r" % (mgrit.CYCLES, self.cycle))
        if self.relax not in mgrit.RELAXATIONS:
            raise ConfigError("relax: expected one of %s, got %r"
                              % (mgrit.RELAXATIONS, self.relax))
        if self.init is not None and self.init not in INIT_SCHEMES:
            raise ConfigError("init: expected one of %s, got %r" % (INIT_SCHEMES, self.init))
        if not self.n0 or any(n < 1 for n in self.n0):
            raise ConfigError("n0: need at least one positive step count")
        for key in ("max_coarse", "max_iters", "workers", "count", "bits"):
            if getattr(self, key) < 1:
                raise ConfigError("%s: must be >= 1" % key)
        if self.tol_coefficient <= 0:
            raise ConfigError("tol_coefficient: must be positive")
        m = self.m if self.m is not None else preset.m
        for n in self.n0:
            if n < m:
                raise ConfigError("n0: %d is smaller than the coarsening factor %d" % (n, m))
        self.solver_preset()
        return self

    def solver_preset(self):
        """The named preset with this config's overrides applied."""
        p = get_preset(self.preset).with_alpha(self.alpha_b, self.alpha_max)
        if self.factor is not None:
            p = replace(p, schedule=replace(p.schedule, factor=float(self.factor)))
        if self.m is not None:
            p = replace(p, m=int(self.m))
        if self.policy is not None:
            p = replace(p, policy=self.policy)
        return p

    def topology(self):
        if self.problem == "xor":
            return XOR_TOPOLOGY
        if self.bits == 12:
            return BINADD_TOPOLOGY
        return Topology((2 * self.bits, 128, 64, self.bits))

    def dataset(self):
        if self.problem == "xor":
            return xor_dataset()
        return binary_addition_dataset(self.seed, self.count, self.bits)

    def init_scheme(self):
        if self.init is not None:
            return self.init
        return "uniform" if self.problem == "xor" else "normal"

    def resolved(self):
        """Every setting with preset defaults filled in, for output headers."""
        p = self.solver_preset()
        out = asdict(self)
        out.update(n0=",".join(str(n) for n in self.n0), alpha_b=p.schedule.base,
                   alpha_max=p.schedule.cap, factor=p.schedule.factor,
                   schedule=p.schedule.kind, m=p.m, policy=p.policy, init=self.init_scheme())
        return out

    def build(self, n0, dataset=None):
        """Hierarchy and solver parameters for one sweep entry."""
        p = self.solver_preset()
        data = dataset if dataset is not None else self.dataset()
        h = mgrit.build_hierarchy(self.topology(), TrainingPolicy(p.policy, data), n0, p.m,
                                  self.max_coarse, p.schedule, self.cycle, self.relax,
                                  workers=self.workers)
        params = mgrit.SolverParams(self.tol_coefficient, self.max_iters, self.seed,
                                    self.init_scheme())
        return h, params


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
CONFIG_KEYS = frozenset(_FIELD_TYPES)
_INTS = {"m", "seed", "max_coarse", "max_iters", "workers", "count", "bits"}
_FLOATS = {"alpha_b", "alpha_max", "factor", "tol_coefficient"}


def parse_n0(text):
    try:
        return tuple(int(v) for v in str(text).replace(" ", "").split(",") if v)
    except ValueError:
        raise ConfigError("n0: expected comma separated integers, got %r" % text) from None


def coerce(key, value):
    if key not in _FIELD_TYPES:
        raise ConfigError("unknown config key %r" % key)
    if value is None:
        return None
    try:
        if key == "n0":
            return parse_n0(value) if isinstance(value, str) else tuple(int(v) for v in value)
        if key in _INTS:
            return int(value)
        if key in _FLOATS:
            v = float(value)
            if math.isnan(v):
                raise ValueError
            return v
    except (TypeError, ValueError):
        raise ConfigError("%s: cannot parse %r" % (key, value)) from None
    return str(value).strip()


def read_config_file(path):
    values = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("%s:%d: expected 'key = value'" % (path, lineno))
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            values[key] = coerce(key, value)
    return values


def make_config(file_values=None, overrides=None):
    """Defaults, then file values, then non-None overrides."""
    merged = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is not None:
                merged[key] = coerce(key, value)
    return ExperimentConfig(**merged).validate()
