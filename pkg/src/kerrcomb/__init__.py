"""Truncated-Fock-space simulator of engineered nonlinear dissipation in a
Kerr cavity: exact MZI-chain Kraus channel, perturbative update rule, and
master-equation model, plus state factories, metrics, and a scenario runner."""

__version__ = "0.1.0"

from .errors import (
    CutoffTooSmallError,
    DimensionMismatchError,
    LeakAbortError,
    ScenarioValidationError,
)
from .fock import (
    CavityParams,
    DensityMatrix,
    HilbertSpec,
    StateVector,
    default_cutoff,
    kerr_period,
    kerr_unitary,
    ladder_operators,
    partial_trace_b,
)
from .states import (
    CatSpec,
    SqueezeParam,
    cat,
    coherent,
    displaced_squeezed,
    i_cat,
    mixed_coherent_pair,
    phase_state,
    squeezed_vacuum,
)
from .channel import (
    KrausSet,
    MziParams,
    Trajectory,
    apply_channel,
    beamsplitter_unitary,
    evolve_exact,
    evolve_update_rule,
    kraus_from_mzi,
    update_rule_step,
)
from .master import (
    LossModel,
    StabilizationReport,
    integrate,
    loss_function_K1,
    loss_rate,
    rhs_eq2,
    stabilization_report,
    transition_frequency,
)
from .metrics import (
    comb_coherence_sum,
    comb_weight,
    coherence_sum,
    fidelity_pure,
    fidelity_rotation_optimized,
    parity_expectation,
    populations,
    rotate_frame,
    trace_distance,
    wigner_grid,
)
from .scenarios import (
    PRESETS,
    Scenario,
    TimeSeriesRecord,
    load_scenario,
    read_state_csv,
    read_timeseries,
    run_scenario,
    write_state_csv,
    write_timeseries,
)
