"""Orthonormalization, symmetric eigendecomposition, reference SVD, and
spectral-norm estimation.

The eigensolver is a cyclic Jacobi iteration: it is simple to make robust,
easy to test against brute force, and the matrices it sees here are small
compressions. The reference SVD forms the Gram matrix on the smaller side,
which trades squared-condition-number accuracy in the tiny singular values
for simplicity; it is guarded to desk scale and every consumer states its
tolerance explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ConvergenceError
from .matrix import DenseMatrix, SeededRng, as_dense_array, as_operator

__all__ = [
    "EigResult",
    "SvdResult",
    "qr_orthonormalize",
    "symmetric_eig",
    "dense_svd_reference",
    "spectral_norm_est",
    "DEFAULT_JACOBI_TOL",
    "JACOBI_MAX_SWEEPS",
    "ORACLE_DIM_LIMIT",
]

DEFAULT_JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 50
ORACLE_DIM_LIMIT = 2000

# Deficient QR columns are replaced from this dedicated fixed-seed stream so
# the caller's rng is never consumed by data-dependent replacement draws.
_QR_FILL_SEED = 0x5EED_F111_0C0F_FEE5
_DEFICIENCY_RTOL = 1e-12


@dataclass(frozen=True)
class EigResult:
    """Eigenvalues sorted descending; eigenvector column i pairs with value i."""

    eigenvalues: np.ndarray
    eigenvectors: DenseMatrix

    def __post_init__(self):
        vals = np.array(self.eigenvalues, dtype=np.float64, copy=True)
        if vals.ndim != 1 or np.any(np.diff(vals) > 0):
            raise ValueError("eigenvalues must be a descending 1-D array")
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD factors: U (n x r), singular values descending, V (d x r)."""

    U: DenseMatrix
    singular_values: np.ndarray
    V: DenseMatrix

    def __post_init__(self):
        sv = np.array(self.singular_values, dtype=np.float64, copy=True)
        if sv.ndim != 1 or np.any(sv < 0) or np.any(np.diff(sv) > 0):
            raise ValueError("singular values must be nonnegative and descending")
        sv.setflags(write=False)
        object.__setattr__(self, "singular_values", sv)

    @property
    def rank(self):
        return int(self.singular_values.shape[0])


def _mgs(arr, fill_rng=None):
    """Modified Gram-Schmidt with a second orthogonalization pass.

    Columns whose residual collapses below ``_DEFICIENCY_RTOL`` times their
    original norm are replaced by fresh Gaussian draws orthogonalized against
    the columns built so far, so the output always has the declared width.
    """
    n, m = arr.shape
    if n < m:
        raise ValueError("qr_orthonormalize requires rows >= cols")
    if fill_rng is None:
        fill_rng = SeededRng(_QR_FILL_SEED)
    q = np.empty((n, m), dtype=np.float64)

    def orthogonalize(v, j):
        for _ in range(2):
            if j:
                head = q[:, :j]
                v = v - head @ (head.T @ v)
        return v

    for j in range(m):
        col = np.array(arr[:, j], dtype=np.float64)
        ref = float(np.linalg.norm(col))
        v = orthogonalize(col, j)
        nv = float(np.linalg.norm(v))
        if nv <= _DEFICIENCY_RTOL * ref:
            for _ in range(100):
                g = fill_rng.normal_fill(n)
                gn = float(np.linalg.norm(g))
                v = orthogonalize(g, j)
                nv = float(np.linalg.norm(v))
                if nv > 1e-6 * gn:
                    break
            else:
                raise ConvergenceError(
                    "could not find an independent replacement column", residual=nv
                )
        q[:, j] = v / nv
    return q


def qr_orthonormalize(M):
    """Orthonormal basis with M's column count, spanning span(M).

    Numerically dependent columns are replaced by fresh seeded Gaussian
    directions (orthogonalized against the earlier columns), keeping the
    declared width; the result is a pure function of the input.
    """
    arr = as_dense_array(M)
    return DenseMatrix(_mgs(arr))


def symmetric_eig(M, tol=None, max_sweeps=None):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps run until the off-diagonal Frobenius mass drops below
    ``tol * ||M||_F`` (default 1e-14) or ``max_sweeps`` (default 50) sweeps,
    after which ConvergenceError reports the mass achieved. Eigenvalues are
    returned descending, ties keeping their prior column order.
    """
    arr = as_dense_array(M)
    n, m = arr.shape
    if n != m:
        raise ValueError("symmetric_eig requires a square matrix")
    scale = float(np.max(np.abs(arr))) if arr.size else 0.0
    asym = float(np.max(np.abs(arr - arr.T))) if arr.size else 0.0
    if asym > 1e-10 * max(1.0, scale):
        raise ValueError(
            "matrix is not symmetric to tolerance; symmetrize as (M + M^T)/2 first"
        )
    if tol is None:
        tol = DEFAULT_JACOBI_TOL
    if max_sweeps is None:
        max_sweeps = JACOBI_MAX_SWEEPS

    work = 0.5 * (arr + arr.T)
    vecs = np.eye(n, dtype=np.float64)
    off, _sweeps, converged = backend.jacobi_sweeps(work, vecs, float(tol), int(max_sweeps))
    if not converged:
        raise ConvergenceError(
            f"Jacobi did not converge in {max_sweeps} sweeps "
            f"(off-diagonal mass {off:.3e})",
            residual=off,
        )
    vals = np.diag(work).copy()
    order = np.argsort(-vals, kind="stable")
    return EigResult(vals[order], DenseMatrix(vecs[:, order]))


def dense_svd_reference(A, dim_limit=ORACLE_DIM_LIMIT):
    """Exact-arithmetic-style reference SVD via the smaller Gram matrix.

    Refuses matrices with min(n, d) above the desk-scale guard. Directions
    with singular value below 1e-12 of the largest are discarded. The Gram
    route squares the conditioning: singular values below ~sqrt(eps) of the
    largest carry absolute noise around 1e-8 * sigma_1, so exactly deficient
    but rotated inputs can surface ghost values at that scale.
    """
    op = as_operator(A)
    n, d = op.shape
    if min(n, d) > dim_limit:
        raise ValueError(
            f"reference SVD guard: min(n, d) = {min(n, d)} exceeds {dim_limit}; "
            "supply a cached oracle or reduce the problem size"
        )
    dense = op.densify().data
    if d <= n:
        gram = backend.mm(np.ascontiguousarray(dense.T), dense)
        eig = symmetric_eig(0.5 * (gram + gram.T))
        small = eig.eigenvectors.data  # d x d, right singular vectors
        via_transpose = False
    else:
        gram = backend.mm(dense, np.ascontiguousarray(dense.T))
        eig = symmetric_eig(0.5 * (gram + gram.T))
        small = eig.eigenvectors.data  # n x n, left singular vectors
        via_transpose = True

    sigma = np.sqrt(np.clip(eig.eigenvalues, 0.0, None))
    if sigma.size and sigma[0] > 0.0:
        keep = sigma >= 1e-12 * sigma[0]
    else:
        keep = np.zeros(sigma.shape, dtype=bool)
    sigma = sigma[keep]
    small_kept = np.ascontiguousarray(small[:, keep])
    if sigma.size:
        if via_transpose:
            u = small_kept
            v = backend.mm(np.ascontiguousarray(dense.T), u) / sigma[None, :]
        else:
            v = small_kept
            u = backend.mm(dense, v) / sigma[None, :]
    else:
        u = np.zeros((n, 0))
        v = np.zeros((d, 0))
    return SvdResult(DenseMatrix(u), sigma, DenseMatrix(v))


def spectral_norm_est(op, tol=1e-9, max_iters=10000, rng=None):
    """Power-iteration estimate of the largest singular value of ``op``.

    ``op`` needs ``shape``, ``apply`` and ``apply_transpose``. Iterates on
    B^T B from a Gaussian start and stops when successive estimates agree to
    ``tol`` relative or ``max_iters`` is hit; returns the largest Rayleigh
    estimate seen. This is a lower-bound style estimate: callers wanting
    certainty run several independent starts and take the max.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if rng is None:
        rng = SeededRng(0)
    n, d = op.shape
    v = rng.normal_fill(d).reshape(d, 1)
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return 0.0
    v /= nv
    best = 0.0
    prev = None
    for _ in range(int(max_iters)):
        w = op.apply(v)
        est = float(np.linalg.norm(w))
        if est > best:
            best = est
        if est == 0.0:
            return 0.0
        if prev is not None and abs(est - prev) <= tol * est:
            break
        prev = est
        v = op.apply_transpose(w / est)
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            break
        v /= nv
    return best


def spectral_norm_max_restarts(op, tol=1e-9, max_iters=10000, seeds=(101, 202, 303)):
    """Max of ``spectral_norm_est`` over independent seeded starts."""
    return max(
        spectral_norm_est(op, tol=tol, max_iters=max_iters, rng=SeededRng(s))
        for s in seeds
    )
