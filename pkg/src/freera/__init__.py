"""Free real algebraic geometry for matrix variables.

Left modules and Groebner bases, L-real radicals of left modules, affine
hulls of thin spectrahedra, Positivstellensatz certificates with matching
refutations, and a complete positivity test for linear *-maps between
operator systems.
"""

from .certify import (
    Certificate,
    DefiningCertificate,
    VerificationReport,
    Witness,
    check_defining,
    check_positive,
    extract_witness,
    size_bound,
    vanishes_on,
    verify_certificate,
)
from .config import Tolerances
from .cpmap import (
    LinearStarMap,
    OperatorSystem,
    choi_matrix,
    is_completely_positive,
    symmetric_basis,
    trivial_positives,
)
from .errors import IndeterminateError, VerificationError
from .freepoly import (
    ChipSpace,
    LinearPencil,
    MatPoly,
    MatrixTuple,
    const,
    default_chip_space,
    degree_bounded_chips,
    evaluate,
    format_poly,
    x,
    xs,
)
from .leftmod import ChipBasis, LeftModule, chip_basis, reduced_groebner
from .radical import (
    decompose_pencil,
    is_feasible,
    lreal_radical,
    lreal_radical_zero,
    real_radical,
)

__all__ = [name for name in dir() if not name.startswith("_")]
