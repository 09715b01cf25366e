"""Numerics for a tempered fractional p-Laplacian on the unit ball.

Subpackages are imported lazily so that lightweight uses (config parsing,
kernel formulas) do not pay the JIT-compiler import cost of the operator
module, and so that thread-count environment knobs can be set before the
compiled kernels initialize.
"""

from . import core_types, kernel
from .core_types import (
    CheckRecord,
    DiagnosticsReport,
    GridField,
    InitialData,
    OperatorParams,
    RadialField,
    ReactionTerm,
    ReflectionSpec,
    SimulationConfig,
    SteadyProfile,
    TemperingFunction,
    classify_node,
)
from .kernel import KernelSpec, g_power, kernel_weight, tail_mass, tail_mass_numeric

__version__ = "0.1.0"

_LAZY = {"operator", "solver", "diagnostics", "cli", "svgplot"}


def __getattr__(name):
    if name in _LAZY:
        import importlib

        mod = importlib.import_module(f".{name}", __name__)
        globals()[name] = mod
        return mod
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
