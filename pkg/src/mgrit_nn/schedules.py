"""Per-level learning rates, training-set policies and named solver presets."""

from dataclasses import dataclass, replace


class ConfigError(ValueError):
    """Bad solver or experiment configuration."""


@dataclass(frozen=True)
class AlphaSchedule:
    kind: str = "constant"      # "constant" | "geometric"
    base: float = 1.0
    cap: float = float("inf")
    factor: float = 2.0

    def __post_init__(self):
        if self.kind not in ("constant", "geometric"):
            raise ConfigError("alpha schedule kind must be constant or geometric, got %r"
                              % self.kind)
        if self.base < 0:
            raise ConfigError("alpha_b must be non-negative")
        if self.kind == "geometric" and self.factor < 1:
            raise ConfigError("geometric alpha factor must be >= 1")


def alpha_at(schedule, level):
    if level < 0:
        raise ValueError("level must be non-negative")
    if schedule.kind == "constant":
        return schedule.base
    return min(schedule.factor ** level * schedule.base, schedule.cap)


@dataclass(frozen=True)
class TrainingPolicy:
    kind: str           # "batch" | "serialized"
    dataset: object

    def __post_init__(self):
        if self.kind not in ("batch", "serialized"):
            raise ConfigError("training policy must be batch or serialized, got %r" % self.kind)

    @property
    def K(self):
        return self.dataset.K


def batch_at(policy, level, i):
    """Training batch for step ``i`` on ``level``.

    Serialized steps cycle through the instances by the level-local index,
    so the same ``i`` picks the same instance on every level.
    """
    if i < 0:
        raise ValueError("step index must be non-negative")
    if policy.kind == "batch":
        return policy.dataset.batch()
    return policy.dataset.instance(i % policy.dataset.K)


@dataclass(frozen=True)
class SolverPreset:
    name: str
    m: int
    schedule: AlphaSchedule
    policy: str
    tol_coefficient: float = 1e-9
    max_iters: int = 50

    def __post_init__(self):
        if self.m < 2:
            raise ConfigError("preset %s: coarsening factor must be >= 2" % self.name)
        if self.policy not in ("batch", "serialized"):
            raise ConfigError("preset %s: unknown policy %r" % (self.name, self.policy))

    def with_alpha(self, base=None, cap=None):
        sched = self.schedule
        if base is not None:
            sched = replace(sched, base=float(base))
        if cap is not None:
            sched = replace(sched, cap=float(cap))
        return replace(self, schedule=sched)


PRESETS = {
    "naive": SolverPreset("naive", 2, AlphaSchedule("constant", 1.0), "batch"),
    "solver1": SolverPreset("solver1", 2, AlphaSchedule("geometric", 1.0, 8.0, 2.0), "batch"),
    "solver2": SolverPreset("solver2", 2, AlphaSchedule("geometric", 1.0, 8.0, 2.0), "serialized"),
    "solver2-slow": SolverPreset("solver2-slow", 2,
                                 AlphaSchedule("geometric", 0.025, 0.2, 1.25), "serialized"),
    # "Solver 3" is never defined; this is solver2 at the alpha_b=0.1 F-cycle setting.
    "solver3-alias": SolverPreset("solver3-alias", 2,
                                  AlphaSchedule("geometric", 0.1, 30.0, 2.0), "serialized"),
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError("unknown preset %r (choose from %s)"
                          % (name, ", ".join(sorted(PRESETS)))) from None
