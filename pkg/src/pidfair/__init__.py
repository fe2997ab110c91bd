"""Partial information decomposition of fairness gaps on discrete distributions."""

__version__ = "0.1.0"

from .audit import (  # noqa: E402
    FairnessAudit,
    FairnessGaps,
    TheoremVerdict,
    audit,
    check_dataset_relation,
    check_eo_zero_tradeoff,
    check_impossibility,
    check_pp_zero_regime,
    check_sp_zero_regime,
    compute_gaps,
)
from .dist import (  # noqa: E402
    Alphabet,
    EstimationError,
    JointDist,
    SampleRecord,
    conditional_mutual_information,
    entropy,
    from_samples,
    joint_mutual_information,
    marginal,
    mutual_information,
)
from .pid import BlackwellVerdict, PidDecomposition, blackwell_check, decompose  # noqa: E402
from .polytope import MarginalPolytope  # noqa: E402
from .scenarios import ScenarioError, ScenarioSpec, generate_scenario  # noqa: E402
from .solver import (  # noqa: E402
    SolverConfig,
    SolverResult,
    UnsupportedShapeError,
    brute_force_unique,
    construct_q0,
    unique_information,
)

__all__ = [
    "Alphabet",
    "BlackwellVerdict",
    "EstimationError",
    "FairnessAudit",
    "FairnessGaps",
    "JointDist",
    "MarginalPolytope",
    "PidDecomposition",
    "SampleRecord",
    "ScenarioError",
    "ScenarioSpec",
    "SolverConfig",
    "SolverResult",
    "TheoremVerdict",
    "UnsupportedShapeError",
    "audit",
    "blackwell_check",
    "brute_force_unique",
    "check_dataset_relation",
    "check_eo_zero_tradeoff",
    "check_impossibility",
    "check_pp_zero_regime",
    "check_sp_zero_regime",
    "compute_gaps",
    "conditional_mutual_information",
    "construct_q0",
    "decompose",
    "entropy",
    "from_samples",
    "generate_scenario",
    "joint_mutual_information",
    "marginal",
    "mutual_information",
    "unique_information",
]
