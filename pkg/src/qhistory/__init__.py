"""Sequential projective measurements on qudit networks, predicted by
composing (anti)linear isometries and checked against explicit state vectors."""

from .calculus import BranchPrediction, CalculusError, apply_projector, initial_components, predict_branches
from .isometry import (
    CompositionError,
    Isometry,
    NotMaximallyEntangledError,
    ParityError,
    bell_family,
    bell_member,
    clock,
    compare_up_to_phase,
    compose,
    compose_chain,
    conjugation_transport,
    invert,
    iso_equal_up_to_phase,
    isometry_from_state,
    linear,
    shift,
    state_from_isometry,
    transported_conjugate,
    weyl,
)
from .measurement import (
    HistoryRecord,
    IncompleteMeasurementError,
    MeasurementSet,
    bell_basis,
    commutator_norm,
    commutes,
    computational_basis,
    joint_distribution,
    order_independence_witness,
    product_basis,
    run_history,
    sample_histories,
    sample_history,
)
from .scenarios import (
    ComparisonReport,
    Scenario,
    ScenarioError,
    TripleChains,
    build_double_teleportation,
    build_swapping,
    build_teleportation,
    build_triple_teleportation,
    oracle,
    predict,
    run_and_compare,
    triple_chains,
)
from .tensor_core import (
    FullContractionError,
    Ket,
    LabelCollisionError,
    LabelError,
    Operator,
    Projector,
    ShapeError,
    apply,
    fidelity_up_to_phase,
    inner,
    is_unitary,
    marginal_pure_state,
    partial_inner,
    project,
    random_unitary,
    reduced_density,
    schmidt_coefficients,
    schmidt_rank,
    tensor,
)

__version__ = "0.1.0"

__all__ = [
    "BranchPrediction",
    "CalculusError",
    "ComparisonReport",
    "CompositionError",
    "FullContractionError",
    "HistoryRecord",
    "IncompleteMeasurementError",
    "Isometry",
    "Ket",
    "LabelCollisionError",
    "LabelError",
    "MeasurementSet",
    "NotMaximallyEntangledError",
    "Operator",
    "ParityError",
    "Projector",
    "Scenario",
    "ScenarioError",
    "ShapeError",
    "TripleChains",
    "apply",
    "apply_projector",
    "bell_basis",
    "bell_family",
    "bell_member",
    "build_double_teleportation",
    "build_swapping",
    "build_teleportation",
    "build_triple_teleportation",
    "clock",
    "commutator_norm",
    "commutes",
    "compare_up_to_phase",
    "compose",
    "compose_chain",
    "computational_basis",
    "conjugation_transport",
    "fidelity_up_to_phase",
    "initial_components",
    "inner",
    "invert",
    "is_unitary",
    "iso_equal_up_to_phase",
    "isometry_from_state",
    "joint_distribution",
    "linear",
    "marginal_pure_state",
    "oracle",
    "order_independence_witness",
    "partial_inner",
    "predict",
    "predict_branches",
    "product_basis",
    "project",
    "random_unitary",
    "reduced_density",
    "run_and_compare",
    "run_history",
    "sample_histories",
    "sample_history",
    "schmidt_coefficients",
    "schmidt_rank",
    "shift",
    "state_from_isometry",
    "tensor",
    "transported_conjugate",
    "triple_chains",
    "weyl",
]
