"""
Two-good revenue lab: one-good pricing, optimal two-good revenue by LP,
revenue bound certificates and Prohorov continuity experiments.
"""

from .config import DEFAULT_SEED, OUTPUT_FOLDER

from .errors import (
    InputError,
    RevLabError,
    SolverError,
)

from .distributions import (
    Dist1D,
    EqualRevenue,
    Exponential,
    FiniteAtoms,
    MyersonSolution,
    PiecewiseUniform,
    Truncated,
    Uniform,
    discretize,
    is_weakly_regular,
    myerson_optimal,
    smooth,
    tau,
    truncate,
    virtual_value,
)

from .mechanisms import (
    GridAssignment,
    MenuMechanism,
    best_response,
    bundle_posted,
    discount,
    revenue,
    separate_posted,
    verify_ic_ir_npt,
)

from .optrev import (
    FiniteJoint,
    OptRevSolution,
    brev,
    monrev_lp,
    ratio_report,
    rev_lp,
    scan_worst_ratio,
    srev,
)

from .bounds import (
    GUARANTEE_GENERAL,
    GUARANTEE_REGULAR,
    BoundCertificate,
    GoodPair,
    certificates,
    decomposition_check,
    k_term_bound,
    sup_i,
    theorem_general_bound,
    theorem_regular_bound,
)

from .continuity import (
    DiscreteMeasureKD,
    ProhorovResult,
    continuity_experiment,
    convergence_trace,
    prohorov,
    revenue_continuity_bound,
)

__all__ = [
    # Config
    'DEFAULT_SEED',
    'OUTPUT_FOLDER',
    # Errors
    'RevLabError',
    'InputError',
    'SolverError',
    # Distributions
    'Dist1D',
    'FiniteAtoms',
    'PiecewiseUniform',
    'Uniform',
    'Exponential',
    'EqualRevenue',
    'Truncated',
    'MyersonSolution',
    'myerson_optimal',
    'virtual_value',
    'is_weakly_regular',
    'tau',
    'truncate',
    'smooth',
    'discretize',
    # Mechanisms
    'MenuMechanism',
    'GridAssignment',
    'best_response',
    'verify_ic_ir_npt',
    'revenue',
    'discount',
    'separate_posted',
    'bundle_posted',
    # Optimal revenue
    'FiniteJoint',
    'OptRevSolution',
    'rev_lp',
    'monrev_lp',
    'srev',
    'brev',
    'ratio_report',
    'scan_worst_ratio',
    # Bounds
    'GUARANTEE_GENERAL',
    'GUARANTEE_REGULAR',
    'GoodPair',
    'BoundCertificate',
    'sup_i',
    'k_term_bound',
    'theorem_general_bound',
    'theorem_regular_bound',
    'decomposition_check',
    'certificates',
    # Continuity
    'DiscreteMeasureKD',
    'ProhorovResult',
    'prohorov',
    'revenue_continuity_bound',
    'continuity_experiment',
    'convergence_trace',
]
