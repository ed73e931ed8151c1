"""Toolkit for exact restricted-isometry analysis of explicit sensing
matrices, l1-minimization recovery with certificates, and the
constructions showing where sparse recovery must fail."""

from .conditions import (
    DELTA_THRESHOLD,
    REFINED_BOUND_CONSTANT,
    AmplificationResult,
    ConditionReport,
    Surd,
    amplification_factor,
    amplification_factor_exact,
    check_delta_theta_condition,
    check_delta_threshold,
    dantzig_error_bound,
    general_signal_bound,
    t_factor,
    t_factor_exact,
)
from .counterexample import (
    CounterexampleInstance,
    build_instance,
    closed_form_delta,
    equicorrelation_gram,
    null_split,
    sensing_matrix_from_gram,
    verify_instance,
)
from .ensembles import EnsembleSpec, generate_matrix, generate_sparse_signal
from .errors import (
    BudgetExceededError,
    InfeasibleError,
    InvalidArityError,
    MissingProfileEntryError,
    NoConvergenceError,
    NonSymmetricError,
    OverlappingSupportsError,
    PreconditionError,
    RipkitError,
    SoundnessError,
    VerificationError,
)
from .experiments import (
    ExperimentConfig,
    ExperimentRecord,
    PhaseGrid,
    phase_diagram,
    run_experiment_to_dir,
    run_recovery_experiment,
)
from .linalg import (
    SymmetricEigenResult,
    cross_gram_spectral_norm,
    gram_submatrix,
    sym_eig,
    truncate_top_k,
)
from .matrices import SensingMatrix, read_matrix_csv, write_matrix_csv
from .norms import NormGapReport, corollary_bound, extremal_vector, norm_gap
from .rip import (
    AUDIT_TOL,
    DEFAULT_BUDGET,
    AuditEntry,
    InequalityAuditReport,
    RipProfile,
    audit_inequalities,
    delta_exact,
    theta_exact,
)
from .rng import CounterRng, derive_seed, mix64
from .solvers import (
    DantzigBoxConstraint,
    EqualityConstraint,
    L2BallConstraint,
    RecoveryProblem,
    RecoverySolution,
    basis_pursuit,
    bpdn,
    dantzig_selector,
    l0_oracle,
    l0_solutions,
    solve_problem,
)

__version__ = "0.1.0"
