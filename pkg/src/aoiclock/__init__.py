"""Exact age-of-information analysis for clocked sender/receiver pairs.

A source regenerates a value on one periodic schedule, a link forwards the
freshest copy on another, and a reader samples on a third, all sharing one
slotted clock.  This package computes the resulting age process in closed
form (distributions, exact and banded expectations, worst-case and
probabilistic bounds), simulates it slot-exactly for cross-checking, and
sweeps configuration grids to map the approximation error.
"""

__version__ = "0.1.0"

from .basic import (
    AoiDistribution,
    BandedValue,
    ConfigError,
    NullSequenceError,
    PeriodDecomposition,
    aoi_basic,
    c_basic,
    decompose,
    distribution_basic,
    expected_approx_basic,
    expected_exact_basic,
    max_bound_basic,
    progressions_basic,
    rel_error_bound_basic,
    sequence_basic,
)
from .extended import (
    DEFAULT_TOL,
    GeometricExpectation,
    SystemConfig,
    aoi_conditional,
    c_extended,
    distribution_conditional,
    expected_approx_extended,
    expected_exact_extended,
    freshness_offset_K,
    max_bound_prob,
    progressions_conditional,
    rel_error_bound_extended,
    sequence_conditional,
)
from .kernels import backend
from .modmath import (
    ArithmeticProgression,
    Multiset,
    ap_reduce_mod,
    ceil_div,
    comp_mod,
    floor_mod,
    pairing_classes,
    residue_orbit,
)
from .simulate import (
    RngSpec,
    Trace,
    empirical_distribution,
    empirical_mean,
    simulate_basic,
    simulate_extended,
    write_trace_csv,
)
from .sweep import (
    EmptyGridError,
    Histogram,
    SweepGrid,
    SweepResult,
    enumerate_configs,
    relative_error,
    run_sweep,
    write_outputs,
)

__all__ = [
    "__version__",
    "backend",
    # modmath
    "floor_mod", "comp_mod", "ceil_div", "ArithmeticProgression", "Multiset",
    "residue_orbit", "ap_reduce_mod", "pairing_classes",
    # basic model
    "ConfigError", "NullSequenceError", "PeriodDecomposition", "AoiDistribution",
    "BandedValue", "decompose", "aoi_basic", "sequence_basic", "c_basic",
    "progressions_basic", "distribution_basic", "expected_exact_basic",
    "expected_approx_basic", "rel_error_bound_basic", "max_bound_basic",
    # extended model
    "SystemConfig", "GeometricExpectation", "DEFAULT_TOL", "aoi_conditional",
    "sequence_conditional", "c_extended", "progressions_conditional",
    "distribution_conditional", "freshness_offset_K", "expected_approx_extended",
    "expected_exact_extended", "rel_error_bound_extended", "max_bound_prob",
    # simulation
    "RngSpec", "Trace", "simulate_basic", "simulate_extended",
    "empirical_distribution", "empirical_mean", "write_trace_csv",
    # sweep
    "EmptyGridError", "SweepGrid", "Histogram", "SweepResult",
    "enumerate_configs", "relative_error", "run_sweep", "write_outputs",
]
