"""Randomized partial SVD: simultaneous power iteration and block Krylov
iteration with gap-independent accuracy behavior, an exact desk-scale SVD
oracle, the three standard error measures, and a benchmark CLI.

Hot kernels run from a compiled extension when available, with a
numpy-backed fallback selected at import (see ``rsvdkit.backend``).
"""

from .backend import active_backend
from .chebyshev import (
    BoundReport,
    ShiftedChebyshev,
    cheb_coefficients,
    cheb_eval,
    shifted_poly_eval,
    verify_bounds,
)
from .errors import ConvergenceError, ParseError
from .experiment import (
    ExperimentSpec,
    OracleSpectrum,
    oracle_spectrum,
    rows_to_csv,
    run_experiment,
)
from .factor import (
    EigResult,
    SvdResult,
    dense_svd_reference,
    qr_orthonormalize,
    spectral_norm_est,
    symmetric_eig,
)
from .matrix import (
    DenseMatrix,
    MatrixOperator,
    SeededRng,
    SparseMatrixCSR,
    as_operator,
    frobenius_norm_sq,
    gaussian,
    load_dense_csv,
    load_matrix_market,
    matmul,
    spmm,
    write_dense_csv,
    write_matrix_market,
)
from .metrics import (
    AdditiveSpectralCheck,
    ErrorReport,
    additive_spectral_check,
    compute_error_report,
    error_function,
    frob_error_ratio,
    per_vector_errors,
    spectral_error_ratio,
)
from .rsvd import (
    PartialSvdResult,
    RsvdConfig,
    Variant,
    block_krylov,
    derive_q,
    derive_q_gap,
    factorize,
    post_process,
    simultaneous_iteration,
    sketch_and_solve,
)
from .synth import SyntheticSpec, synth_matrix
from .verify import verify_suite

__version__ = "0.1.0"

__all__ = [
    "active_backend",
    "BoundReport",
    "ShiftedChebyshev",
    "cheb_coefficients",
    "cheb_eval",
    "shifted_poly_eval",
    "verify_bounds",
    "ConvergenceError",
    "ParseError",
    "ExperimentSpec",
    "OracleSpectrum",
    "oracle_spectrum",
    "rows_to_csv",
    "run_experiment",
    "EigResult",
    "SvdResult",
    "dense_svd_reference",
    "qr_orthonormalize",
    "spectral_norm_est",
    "symmetric_eig",
    "DenseMatrix",
    "MatrixOperator",
    "SeededRng",
    "SparseMatrixCSR",
    "as_operator",
    "frobenius_norm_sq",
    "gaussian",
    "load_dense_csv",
    "load_matrix_market",
    "matmul",
    "spmm",
    "write_dense_csv",
    "write_matrix_market",
    "AdditiveSpectralCheck",
    "ErrorReport",
    "additive_spectral_check",
    "compute_error_report",
    "error_function",
    "frob_error_ratio",
    "per_vector_errors",
    "spectral_error_ratio",
    "PartialSvdResult",
    "RsvdConfig",
    "Variant",
    "block_krylov",
    "derive_q",
    "derive_q_gap",
    "factorize",
    "post_process",
    "simultaneous_iteration",
    "sketch_and_solve",
    "SyntheticSpec",
    "synth_matrix",
    "verify_suite",
]
