"""rotecho: alignment-echo simulation for thermal linear rigid rotors."""

__version__ = "0.1.0"

from .basis import (
    MBlockDensityMatrix,
    MoleculeSpec,
    RotorBasis,
    choose_jmax,
    cos2theta_element,
    revival_period,
    rotational_energy,
    thermal_state,
)
from .echo import (
    DecayFit,
    EchoCurve,
    EchoMeasurement,
    MasterCurveResult,
    SearchParams,
    Sin2Fit,
    dtau_grid,
    echo_window_halfwidth,
    extract_secho,
    find_optimal_p2,
    fit_decay,
    fit_sin2,
    master_curve_check,
    run_isolated_echo,
    scan_dtau,
    scan_p2,
)
from .config import (
    RunSettings,
    ScanSettings,
    available_presets,
    load_config,
    molecule_preset,
)
from .focal import (
    BeamGeometry,
    averaged_scan_p2,
    first_minimum_depth,
    intensity_quadrature,
)
from .pathways import (
    Pathway,
    RamanStep,
    coherence_phase,
    enumerate_pathways,
    pathway_phase_difference,
    pathway_table,
    pathway_weight,
    predict_constructive_delays,
)
from .errors import (
    BracketError,
    ConfigError,
    FitError,
    RotechoError,
    ToleranceError,
    TruncationError,
    WindowError,
)
from .propagate import (
    AlignmentTrace,
    ExperimentConfig,
    PulseSpec,
    SolverOptions,
    apply_pulse,
    expectation_cos2,
    free_evolve,
    impulsive_kick,
    run_pulse_sequence,
    run_two_pulse,
    two_pulse_config,
)

__all__ = [
    "MBlockDensityMatrix",
    "MoleculeSpec",
    "RotorBasis",
    "choose_jmax",
    "cos2theta_element",
    "revival_period",
    "rotational_energy",
    "thermal_state",
    "AlignmentTrace",
    "ExperimentConfig",
    "PulseSpec",
    "SolverOptions",
    "apply_pulse",
    "expectation_cos2",
    "free_evolve",
    "impulsive_kick",
    "run_pulse_sequence",
    "run_two_pulse",
    "two_pulse_config",
    "DecayFit",
    "EchoCurve",
    "EchoMeasurement",
    "MasterCurveResult",
    "SearchParams",
    "Sin2Fit",
    "dtau_grid",
    "echo_window_halfwidth",
    "extract_secho",
    "find_optimal_p2",
    "fit_decay",
    "fit_sin2",
    "master_curve_check",
    "run_isolated_echo",
    "scan_dtau",
    "scan_p2",
    "Pathway",
    "RamanStep",
    "coherence_phase",
    "enumerate_pathways",
    "pathway_phase_difference",
    "pathway_table",
    "pathway_weight",
    "predict_constructive_delays",
    "BeamGeometry",
    "averaged_scan_p2",
    "first_minimum_depth",
    "intensity_quadrature",
    "RunSettings",
    "ScanSettings",
    "available_presets",
    "load_config",
    "molecule_preset",
    "BracketError",
    "ConfigError",
    "FitError",
    "RotechoError",
    "ToleranceError",
    "TruncationError",
    "WindowError",
    "__version__",
]
