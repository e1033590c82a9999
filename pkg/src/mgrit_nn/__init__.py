"""Parallel-across-steps training of small sigmoid networks with MGRIT/FAS."""

from .mgrit import (ConvergenceReport, Hierarchy, SolverParams, build_hierarchy, conv_rate,
                    sequential_solve, solve)
from .network import (BINADD_TOPOLOGY, XOR_TOPOLOGY, Topology, binary_addition_dataset,
                      gradient_direction, init_weights, phi_step, xor_dataset)
from .schedules import PRESETS, AlphaSchedule, ConfigError, TrainingPolicy, get_preset

__version__ = "0.1.0"
