"""Error measures for a computed factorization against the exact oracle.

Three measures: the Frobenius low-rank ratio, the spectral low-rank ratio,
and per-vector captured-variance errors relative to the squared (k+1)-th
singular value. The Frobenius numerator uses the projection identity
||A - Z Z^T A||_F^2 = ||A||_F^2 - ||Z^T A||_F^2, exact for orthonormal Z and
cheap for sparse A. Degenerate cases (rank <= k) report ratio 1 with flags
instead of dividing by zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .factor import (
    dense_svd_reference,
    spectral_norm_max_restarts,
)
from .matrix import DenseMatrix, as_dense_array, as_operator

__all__ = [
    "ErrorReport",
    "AdditiveSpectralCheck",
    "frob_error_ratio",
    "spectral_error_ratio",
    "per_vector_errors",
    "error_function",
    "additive_spectral_check",
    "compute_error_report",
]

_SPECTRAL_TOL = 1e-9
_SPECTRAL_MAX_ITERS = 20000
_RESTART_SEEDS = (101, 202, 303)
_EXACT_RANK_RTOL = 1e-14
_Z_ORTHO_TOL = 1e-8


def _check_orthonormal(z):
    gram = backend.mm(np.ascontiguousarray(z.T), z)
    err = float(np.max(np.abs(gram - np.eye(z.shape[1]))))
    if err > _Z_ORTHO_TOL:
        raise ValueError(f"Z is not orthonormal (max deviation {err:.3e})")


def _sigma(oracle, i):
    sv = oracle.singular_values
    return float(sv[i]) if i < len(sv) else 0.0


def _tail_sq(oracle, k):
    sv = oracle.singular_values
    return float(np.sum(sv[k:] ** 2)) if k < len(sv) else 0.0


def _is_exact_rank(A, oracle, k):
    op = as_operator(A)
    return math.sqrt(_tail_sq(oracle, k)) < _EXACT_RANK_RTOL * math.sqrt(op.frobenius_sq())


class _DeflatedOperator:
    """x -> (I - Z Z^T) A x, the residual of projecting A onto span(Z)."""

    def __init__(self, op, z):
        self._op = op
        self._z = z
        self._zt = np.ascontiguousarray(z.T)
        self.shape = op.shape

    def _project_off(self, y):
        return y - backend.mm(self._z, backend.mm(self._zt, y))

    def apply(self, x):
        return self._project_off(self._op.apply(x))

    def apply_transpose(self, x):
        return self._op.apply_transpose(self._project_off(x))


def frob_error_ratio(A, Z, oracle):
    """||A - Z Z^T A||_F / ||A - A_k||_F with k = Z's width.

    Exact-rank inputs (zero denominator) report 1.0.
    """
    op = as_operator(A)
    z = as_dense_array(Z)
    _check_orthonormal(z)
    k = z.shape[1]
    fro_sq = op.frobenius_sq()
    captured = float(np.sum(op.apply_transpose(z) ** 2))
    num_sq = max(fro_sq - captured, 0.0)
    tail_sq = _tail_sq(oracle, k)
    if math.sqrt(tail_sq) < _EXACT_RANK_RTOL * math.sqrt(fro_sq):
        return 1.0
    return math.sqrt(num_sq / tail_sq)


def spectral_error_ratio(A, Z, oracle):
    """||A - Z Z^T A||_2 / sigma_{k+1}, numerator by restarted power estimate.

    The numerator runs three independent power-iteration starts (tol 1e-9)
    and takes the max; it is a lower-bound style estimate of the exact norm.
    Exact-rank inputs (sigma_{k+1} = 0) report 1.0.
    """
    op = as_operator(A)
    z = as_dense_array(Z)
    _check_orthonormal(z)
    k = z.shape[1]
    denom = _sigma(oracle, k)
    if denom == 0.0:
        return 1.0
    num = spectral_norm_max_restarts(
        _DeflatedOperator(op, z),
        tol=_SPECTRAL_TOL,
        max_iters=_SPECTRAL_MAX_ITERS,
        seeds=_RESTART_SEEDS,
    )
    return num / denom


def per_vector_errors(A, Z, oracle):
    """|sigma_i^2 - ||A^T z_i||^2| / sigma_{k+1}^2 for each column of Z.

    Uses the identities u_i^T A A^T u_i = sigma_i^2 and
    z_i^T A A^T z_i = ||A^T z_i||^2. When sigma_{k+1} = 0 the absolute
    errors are returned (callers see the flag via the error report).
    """
    op = as_operator(A)
    z = as_dense_array(Z)
    _check_orthonormal(z)
    k = z.shape[1]
    captured = np.sum(op.apply_transpose(z) ** 2, axis=0)
    true_sq = np.array([_sigma(oracle, i) ** 2 for i in range(k)])
    errs = np.abs(true_sq - captured)
    denom_sq = _sigma(oracle, k) ** 2
    if denom_sq == 0.0:
        return errs
    return errs / denom_sq


def error_function(A, Z, l, oracle):
    """Frobenius shortfall of the rank-l prefix of Z versus the optimal:
    sum_{i<=l} sigma_i^2 - ||Z_l^T A||_F^2."""
    op = as_operator(A)
    z = as_dense_array(Z)
    if l > z.shape[1]:
        raise ValueError("l exceeds the number of columns of Z")
    if l == 0:
        return 0.0
    zl = np.ascontiguousarray(z[:, :l])
    captured = float(np.sum(op.apply_transpose(zl) ** 2))
    top = float(np.sum(np.array([_sigma(oracle, i) ** 2 for i in range(l)])))
    return top - captured


@dataclass(frozen=True)
class AdditiveSpectralCheck:
    """Outcome of the additive Frobenius-to-spectral transfer property."""

    passed: bool
    eta: float
    spectral_sq: float
    bound: float
    slack: float


def additive_spectral_check(A, B, k, oracle):
    """Verify that Frobenius excess eta transfers additively to the squared
    spectral error: ||A - B||_2^2 <= sigma_{k+1}^2 + eta (+ tolerance).

    B must have numerical rank at most k (checked via the reference SVD; the
    threshold sits at 1e-7 relative, just above the Gram-route noise floor
    that makes exactly deficient inputs read as ~1e-8 relative). Both
    spectral norms are computed exactly by the dense oracle, so the check
    runs at desk scale only.
    """
    op = as_operator(A)
    b = as_dense_array(as_operator(B).densify())
    sv_b = dense_svd_reference(DenseMatrix(b)).singular_values
    if len(sv_b) > k and sv_b[0] > 0 and sv_b[k] >= 1e-7 * sv_b[0]:
        raise ValueError(f"B has numerical rank above {k}")
    a_dense = op.densify().data
    diff = a_dense - b
    diff_fro_sq = float(np.sum(diff**2))
    eta = diff_fro_sq - _tail_sq(oracle, k)
    diff_sv = dense_svd_reference(DenseMatrix(diff)).singular_values
    spectral_sq = float(diff_sv[0] ** 2) if len(diff_sv) else 0.0
    sigma1 = _sigma(oracle, 0)
    bound = _sigma(oracle, k) ** 2 + eta + 1e-8 * sigma1**2
    return AdditiveSpectralCheck(
        passed=spectral_sq <= bound,
        eta=eta,
        spectral_sq=spectral_sq,
        bound=bound,
        slack=bound - spectral_sq,
    )


@dataclass(frozen=True)
class ErrorReport:
    """All three error measures for one run, comparable across algorithms.

    ``exact_rank`` marks a degenerate k >= rank(A) input where the ratios
    are reported as 1; ``absolute_per_vector`` marks per-vector errors left
    unnormalized because sigma_{k+1} = 0.
    """

    frob_ratio: float
    spectral_ratio: float
    per_vector: np.ndarray
    per_vector_max: float
    exact_rank: bool
    absolute_per_vector: bool
    k: int
    q: int | None = None
    variant: str | None = None
    seed: int | None = None

    def __post_init__(self):
        pv = np.array(self.per_vector, dtype=np.float64, copy=True)
        pv.setflags(write=False)
        object.__setattr__(self, "per_vector", pv)
        expected = float(np.max(pv)) if pv.size else 0.0
        if not math.isclose(self.per_vector_max, expected, rel_tol=0, abs_tol=0):
            raise ValueError("per_vector_max must equal max(per_vector)")


def compute_error_report(A, Z, oracle, q=None, variant=None, seed=None):
    """Evaluate all three measures for Z against the oracle."""
    z = as_dense_array(Z)
    k = z.shape[1]
    pv = per_vector_errors(A, Z, oracle)
    if variant is not None:
        variant = getattr(variant, "value", str(variant))
    return ErrorReport(
        frob_ratio=frob_error_ratio(A, Z, oracle),
        spectral_ratio=spectral_error_ratio(A, Z, oracle),
        per_vector=pv,
        per_vector_max=float(np.max(pv)) if pv.size else 0.0,
        exact_rank=_is_exact_rank(A, oracle, k),
        absolute_per_vector=_sigma(oracle, k) == 0.0,
        k=k,
        q=q,
        variant=variant,
        seed=seed,
    )
