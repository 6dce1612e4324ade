"""Exact simulator and closed-form calculator for a three-spin W-state
concentration protocol built on photon-spin parity gates.

The simulation route (:mod:`ecpsim.protocol`) tracks amplitudes through the
gates and measurements; the analytic route (:mod:`ecpsim.analytics`)
evaluates the per-round and total success probabilities in closed form.
:mod:`ecpsim.oracle` holds the machinery that checks the two routes against
each other.
"""

from .analytics import (
    CurvePoint,
    SweepSpec,
    p1_round,
    p1_total,
    p2_round,
    p2_simplified,
    p2_total,
    practical_p1,
    practical_p2,
    practical_total,
    pt_one_round,
    sweep,
    write_sweep_csv,
)
from .cavity import (
    CavityParams,
    DenominatorConvention,
    DetectionEvent,
    DetectorLabel,
    LossyOperators,
    ScatterCoefficients,
    Station,
    apply_ebs_gate,
    detect,
    hwp45,
    ideal_interaction,
    lossy_operators,
    scatter_coefficients,
)
from .errors import (
    CircularBasisPhotonError,
    ConfigError,
    DegenerateCoefficientsError,
    DomainError,
    EcpError,
    InvalidCoefficientsError,
    LinearBasisPhotonError,
    ShapeMismatchError,
    SingularDenominatorError,
    UnknownDetectorError,
    ZeroStateError,
)
from .hilbert import (
    BasisKet,
    Direction,
    PhotonLabel,
    Polarization,
    SpinLabel,
    StateVector,
)
from .oracle import (
    BranchNode,
    ComparisonReport,
    compare_all,
    enumerate_tree,
    sample_paths,
    simplex_grid,
)
from .protocol import (
    BranchRecord,
    GateMode,
    OutcomeClass,
    ProtocolConfig,
    ProtocolTrace,
    RoundOutcome,
    WCoefficients,
    alice_photon,
    alice_round,
    charlie_photon,
    charlie_round,
    coefficient_update_alice,
    coefficient_update_charlie,
    phase_correction,
    prepare_w_state,
    run_protocol,
)

__all__ = [
    "BasisKet",
    "BranchNode",
    "BranchRecord",
    "CavityParams",
    "CircularBasisPhotonError",
    "ComparisonReport",
    "ConfigError",
    "CurvePoint",
    "DegenerateCoefficientsError",
    "DenominatorConvention",
    "DetectionEvent",
    "DetectorLabel",
    "Direction",
    "DomainError",
    "EcpError",
    "GateMode",
    "InvalidCoefficientsError",
    "LinearBasisPhotonError",
    "LossyOperators",
    "OutcomeClass",
    "PhotonLabel",
    "Polarization",
    "ProtocolConfig",
    "ProtocolTrace",
    "RoundOutcome",
    "ScatterCoefficients",
    "ShapeMismatchError",
    "SingularDenominatorError",
    "SpinLabel",
    "Station",
    "StateVector",
    "SweepSpec",
    "UnknownDetectorError",
    "WCoefficients",
    "ZeroStateError",
    "alice_photon",
    "alice_round",
    "apply_ebs_gate",
    "charlie_photon",
    "charlie_round",
    "coefficient_update_alice",
    "coefficient_update_charlie",
    "compare_all",
    "detect",
    "enumerate_tree",
    "hwp45",
    "ideal_interaction",
    "lossy_operators",
    "p1_round",
    "p1_total",
    "p2_round",
    "p2_simplified",
    "p2_total",
    "phase_correction",
    "practical_p1",
    "practical_p2",
    "practical_total",
    "prepare_w_state",
    "pt_one_round",
    "run_protocol",
    "sample_paths",
    "scatter_coefficients",
    "simplex_grid",
    "sweep",
    "write_sweep_csv",
]

__version__ = "0.1.0"
