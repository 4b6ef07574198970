"""Exact epsilon-subdifferentials of max-affine functions and Lipschitz
certification of their differences."""

from .certify import (
    CertReport,
    ChainCertificate,
    CheckResult,
    Condition,
    ConstancyResult,
    Outcome,
    certify_lipschitz,
    chain_certificate,
    check_condition,
    check_constancy,
    check_exact_subdiff,
    check_global_min,
    min_lipschitz,
)
from .errors import (
    CapacityError,
    DclipError,
    InputError,
    ModulusError,
    NumericalError,
    ParseError,
    UnsupportedConditionError,
)
from .funcrep import MaxAffine, PointSet, active_set, evaluate, parse_function, parse_points
from .geometry import DualBall, distance, hausdorff, included_in_sum, intersects
from .lp import LpProblem, LpSolution, Status, solve
from .oracle import Lcg64, cell_witnesses, lipschitz_exact, lipschitz_sampled, random_instance
from .subdiff import SubdiffPolytope, contains, eps_subdiff, exact_subdiff, support, vertices

__version__ = "0.1.0"
