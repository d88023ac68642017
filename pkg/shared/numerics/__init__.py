"""
Numerical kernels shared by all services.
"""

from .linalg import (
    CholeskyFactor,
    CholeskySolution,
    JitterPolicy,
    SpectralDecomp,
    SymMatrix,
    chol_solve,
    cholesky,
    eig_extremes,
    solve_spd,
    sym,
    sym_eig,
)
from .spectra import (
    assemble_metric,
    assemble_upsilon,
    metric_eigs_closed,
    metric_pair,
    metric_positive,
    upsilon_eigs_closed,
    upsilon_pair,
)

__all__ = [
    "SymMatrix",
    "SpectralDecomp",
    "JitterPolicy",
    "CholeskyFactor",
    "CholeskySolution",
    "sym_eig",
    "eig_extremes",
    "cholesky",
    "chol_solve",
    "solve_spd",
    "sym",
    "metric_eigs_closed",
    "metric_pair",
    "metric_positive",
    "upsilon_eigs_closed",
    "upsilon_pair",
    "assemble_metric",
    "assemble_upsilon",
]
