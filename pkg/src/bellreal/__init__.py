"""Decide local realism for two-party Bell squares.

A Bell square holds four single-measurement distributions (Q, R for Alice; S,
T for Bob) and the four joint tables QS, RS, RT, QT. The package checks the
square, searches for a hidden-variable model on Q×R×S×T, returns a Bell
inequality certificate when none exists, evaluates CHSH expressions, and
generates squares from two-qubit states with the Born rule.
"""

from .chsh import (
    ChshAssignment,
    DichotomicRV,
    chsh_value,
    is_violation,
    max_chsh,
    product_rv,
    term_expectations,
)
from .diagram import (
    CORNERS,
    PAIRS,
    BellSquare,
    CommutesReport,
    Diagram,
    Edge,
    bell_square_as_diagram,
    check_commutes,
    validate_bell_square,
    validate_diagram,
)
from .finprob import (
    EPS,
    FinSpace,
    JointSpace,
    MultiJoint,
    ProbMap,
    RandomVar,
    Violation,
    expectation,
    is_morphism,
    marginals,
    product,
    pullback,
    pushforward,
    validate_joint,
    validate_space,
)
from .localreal import (
    LP_TOL,
    GlobalJoint,
    InfeasibilityCertificate,
    RealizationResult,
    find_local_realization,
    locality_extension,
    realization_product,
    verify_certificate,
    verify_realization,
)
from .quantum import (
    born_joint,
    build_quantum_bell_square,
    epr_state,
    kron,
    partial_trace,
    pm_projectors,
    spin_observable,
)
from .simplex import NumericalFailure

__version__ = "0.1.0"
