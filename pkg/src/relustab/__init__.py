"""Finite-gain l2 stability certification for discrete-time ReLU RNNs.

The package answers one question: given a recurrent network with a ReLU
state nonlinearity, can its finite l2 gain be certified by a semidefinite
feasibility condition, and with which multiplier class?  It provides the
model and simulation layer (:mod:`relustab.dynamics`), matrix cone tests
(:mod:`relustab.cones`), IQC multiplier families
(:mod:`relustab.multipliers`), the LMI assembly/solve/verify pipeline
(:mod:`relustab.certify`), and a parameter-sweep harness with a CLI
(:mod:`relustab.sweep`, :mod:`relustab.cli`).
"""

from ._cvx import SolverFailure
from .cones import (
    COPOSITIVE,
    NOT_COPOSITIVE,
    UNKNOWN,
    CopositivityVerdict,
    copositivity_verdict,
    horn_matrix,
    is_entrywise_nonneg,
    is_psd,
    psd_plus_nn_membership,
    symmetrize,
)
from .certify import (
    FEASIBLE,
    INFEASIBLE,
    SOLVER_FAILURE,
    Certificate,
    FeasibilityProblem,
    SolveOutcome,
    SolverOptions,
    TestId,
    TestResult,
    VerificationReport,
    assemble,
    certificate_from_dict,
    certificate_gain_bound,
    certificate_to_dict,
    family_for_test,
    load_certificate,
    run_test,
    save_certificate,
    solve,
    verify_certificate,
)
from .dynamics import (
    RnnModel,
    Trajectory,
    empirical_gain_lower_bound,
    example_rnn,
    hinf_norm,
    l2_norm,
    relu,
    relu_triple_satisfied,
    simulate,
)
from .multipliers import (
    AffineConstraint,
    MultiplierFamily,
    VarBlock,
    assignment_violations,
    cop0_family,
    copositive_family,
    diag_sector_family,
    family_sum,
    pointwise_iqc_value,
    polytopic_family,
    sample_assignment,
    zames_falb_family,
    zero_family,
)
from .sweep import (
    ConfigError,
    GridSpec,
    InclusionAudit,
    ModelSpec,
    OutputSpec,
    RegionMap,
    SweepConfig,
    SweepRecord,
    audit_inclusions,
    compare_regions,
    emit_outputs,
    load_config,
    run_sweep,
)

__version__ = "0.1.0"
