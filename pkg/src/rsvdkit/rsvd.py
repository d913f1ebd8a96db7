"""The three randomized partial-SVD algorithms and shared post-processing.

Simultaneous iteration powers a Gaussian block through (A A^T)^q with
periodic reorthonormalization; block Krylov iteration keeps every powered
block and orthonormalizes the concatenation; the sketch baseline stops after
the first product. All three share the same post-processing: compress
A A^T into the captured subspace, eigendecompose, and rotate the basis so
that every leading prefix of Z is the best Frobenius approximation of its
rank within the subspace. That rotation is what upgrades the low-rank
guarantees to per-vector ones.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass

import numpy as np

from . import backend
from .factor import _mgs, symmetric_eig
from .matrix import DenseMatrix, SeededRng, as_dense_array, as_operator, gaussian

__all__ = [
    "Variant",
    "RsvdConfig",
    "PartialSvdResult",
    "derive_q",
    "derive_q_gap",
    "post_process",
    "simultaneous_iteration",
    "block_krylov",
    "sketch_and_solve",
    "factorize",
]


class Variant(str, enum.Enum):
    SIMULTANEOUS_ITERATION = "si"
    BLOCK_KRYLOV = "bk"
    SKETCH = "sketch"


def _as_variant(v):
    if isinstance(v, Variant):
        return v
    return Variant(str(v).lower())


def _round_up_odd(q):
    return q if q % 2 == 1 else q + 1


def derive_q(variant, d, epsilon, C=4.0):
    """Iteration count from the target accuracy.

    Simultaneous iteration: ceil(C * ln(d) / eps). Block Krylov:
    ceil(C * ln(d) / sqrt(eps)), rounded up to odd so the accelerated
    odd-monomial polynomial lives in the constructed subspace. The sketch
    baseline iterates zero times.
    """
    variant = _as_variant(variant)
    if variant is Variant.SKETCH:
        return 0
    if d < 2:
        raise ValueError("d must be at least 2")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    if not C > 0:
        raise ValueError("C must be positive")
    if variant is Variant.SIMULTANEOUS_ITERATION:
        return math.ceil(C * math.log(d) / epsilon)
    return _round_up_odd(math.ceil(C * math.log(d) / math.sqrt(epsilon)))


def derive_q_gap(variant, d, epsilon, gap, C=4.0):
    """Gap-aware iteration count; the relative gap is clamped to 1.

    With g = min(1, gap): simultaneous iteration uses
    ceil(C * ln(d/eps) / g), block Krylov ceil(C * ln(d/eps) / sqrt(g))
    rounded up to odd.
    """
    variant = _as_variant(variant)
    if variant is Variant.SKETCH:
        return 0
    if d < 2:
        raise ValueError("d must be at least 2")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    if not gap > 0:
        raise ValueError("gap must be positive")
    if not C > 0:
        raise ValueError("C must be positive")
    g = min(1.0, float(gap))
    base = C * math.log(d / epsilon)
    if variant is Variant.SIMULTANEOUS_ITERATION:
        return math.ceil(base / g)
    return _round_up_odd(math.ceil(base / math.sqrt(g)))


@dataclass(frozen=True)
class RsvdConfig:
    """Factorization request.

    Exactly one of ``q`` (explicit) or ``epsilon`` must be given; supplying
    ``gap`` alongside ``epsilon`` switches to the gap-aware derivation.
    ``p`` is the random block width (defaults to k); ``reorthonormalize_every``
    controls how often the simultaneous-iteration block is reorthonormalized
    (1 = every iteration, 0 = only at the end).
    """

    k: int
    variant: Variant
    p: int | None = None
    q: int | None = None
    epsilon: float | None = None
    gap: float | None = None
    C: float = 4.0
    seed: int = 0
    reorthonormalize_every: int = 1

    def __post_init__(self):
        object.__setattr__(self, "variant", _as_variant(self.variant))
        if self.k < 1:
            raise ValueError("k must be at least 1")
        p = self.k if self.p is None else int(self.p)
        if p < self.k:
            raise ValueError("block width p must be at least k")
        object.__setattr__(self, "p", p)
        if self.variant is not Variant.SKETCH:
            if (self.q is None) == (self.epsilon is None):
                raise ValueError("give exactly one of q or epsilon")
        if self.q is not None and self.q < 0:
            raise ValueError("q must be nonnegative")
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise ValueError("epsilon must be in (0, 1)")
        if self.gap is not None:
            if self.epsilon is None:
                raise ValueError("gap requires epsilon")
            if not self.gap > 0:
                raise ValueError("gap must be positive")
        if not self.C > 0:
            raise ValueError("C must be positive")
        if not 0 <= int(self.seed) < (1 << 64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.reorthonormalize_every < 0:
            raise ValueError("reorthonormalize_every must be nonnegative")

    def resolve_q(self, d):
        """Effective iteration count for a matrix with d columns."""
        if self.variant is Variant.SKETCH:
            return 0
        if self.q is not None:
            q = int(self.q)
            if self.variant is Variant.BLOCK_KRYLOV and q >= 1:
                q = _round_up_odd(q)
            return q
        if self.gap is not None:
            return derive_q_gap(self.variant, d, self.epsilon, self.gap, self.C)
        return derive_q(self.variant, d, self.epsilon, self.C)


@dataclass(frozen=True)
class PartialSvdResult:
    """Orthonormal Z (n x k), its approximate singular values, diagnostics."""

    Z: DenseMatrix
    approx_singular_values: np.ndarray
    q_used: int
    wall_time_ms: float
    variant: Variant
    seed: int

    def __post_init__(self):
        sv = np.array(self.approx_singular_values, dtype=np.float64, copy=True)
        if sv.ndim != 1 or np.any(sv < 0) or np.any(np.diff(sv) > 0):
            raise ValueError("approximate singular values must be nonnegative descending")
        sv.setflags(write=False)
        object.__setattr__(self, "approx_singular_values", sv)
        z = self.Z.data
        gram = backend.mm(np.ascontiguousarray(z.T), z)
        if float(np.max(np.abs(gram - np.eye(z.shape[1])))) > 1e-10:
            raise ValueError("Z must have orthonormal columns")

    @property
    def k(self):
        return self.Z.cols


def _canonicalize_signs(z):
    for j in range(z.shape[1]):
        idx = int(np.argmax(np.abs(z[:, j])))
        if z[idx, j] < 0:
            z[:, j] = -z[:, j]
    return z


def post_process(A, Q, k):
    """Best rank-l bases inside span(Q) for every l <= k.

    Compresses M = Q^T (A A^T) Q, symmetrizes, eigendecomposes, and returns
    (Z = Q U_k, sqrt of the top-k eigenvalues). Column signs are
    canonicalized (largest-magnitude entry positive) so runs are comparable.
    """
    op = as_operator(A)
    qarr = as_dense_array(Q)
    if qarr.shape[1] < k:
        raise ValueError("Q must have at least k columns")
    qt = np.ascontiguousarray(qarr.T)
    gram = backend.mm(qt, qarr)
    if float(np.max(np.abs(gram - np.eye(qarr.shape[1])))) > 1e-8:
        raise ValueError("Q must have orthonormal columns")

    m = backend.mm(qt, op.apply(op.apply_transpose(qarr)))
    eig = symmetric_eig(0.5 * (m + m.T))
    top = np.ascontiguousarray(eig.eigenvectors.data[:, :k])
    z = _canonicalize_signs(backend.mm(qarr, top))
    sigma = np.sqrt(np.clip(eig.eigenvalues[:k], 0.0, None))
    return DenseMatrix(z), sigma


def _sketch_basis(op, p, rng):
    pi = gaussian(op.shape[1], p, rng).data
    return _mgs(op.apply(pi))


def _si_basis(op, p, q, every, rng):
    if q == 0:
        # shared with the sketch baseline so the q = 0 degeneracy is bitwise
        return _sketch_basis(op, p, rng)
    pi = gaussian(op.shape[1], p, rng).data
    b = op.apply(pi)
    for t in range(1, q + 1):
        b = op.apply(op.apply_transpose(b))
        orthonormal = False
        if every and t % every == 0:
            b = _mgs(b)
            orthonormal = True
    return b if orthonormal else _mgs(b)


def _bk_basis(op, p, q, rng):
    n, d = op.shape
    if p > n:
        raise ValueError("block width p exceeds n; no Krylov block fits")
    # Cap the block count at subspace saturation: beyond min(n, d) columns
    # the Krylov span cannot grow, so wider requests run with the capped
    # width and report it through q_used.
    cap_blocks = max(1, min(n, d) // p)
    n_blocks = min(q + 1, cap_blocks)
    b = _sketch_basis(op, p, rng)
    if n_blocks == 1:
        return b, 0
    blocks = [b]
    for _ in range(1, n_blocks):
        b = _mgs(op.apply(op.apply_transpose(b)))
        blocks.append(b)
    return _mgs(np.hstack(blocks)), n_blocks - 1


def _run(A, cfg, expected_variant):
    if cfg.variant is not expected_variant:
        raise ValueError(f"config variant is {cfg.variant.value}, not {expected_variant.value}")
    op = as_operator(A)
    n, d = op.shape
    if cfg.k > min(n, d):
        raise ValueError("k must not exceed min(n, d)")
    q = cfg.resolve_q(d)
    rng = SeededRng(cfg.seed)
    start = time.perf_counter()
    if cfg.variant is Variant.SIMULTANEOUS_ITERATION:
        basis = _si_basis(op, cfg.p, q, cfg.reorthonormalize_every, rng)
        q_used = q
    elif cfg.variant is Variant.BLOCK_KRYLOV:
        basis, q_used = _bk_basis(op, cfg.p, q, rng)
    else:
        basis = _sketch_basis(op, cfg.p, rng)
        q_used = 0
    z, sigma = post_process(op, DenseMatrix(basis), cfg.k)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    return PartialSvdResult(
        Z=z,
        approx_singular_values=sigma,
        q_used=q_used,
        wall_time_ms=elapsed_ms,
        variant=cfg.variant,
        seed=int(cfg.seed),
    )


def simultaneous_iteration(A, cfg):
    """Randomized simultaneous (power) iteration."""
    return _run(A, cfg, Variant.SIMULTANEOUS_ITERATION)


def block_krylov(A, cfg):
    """Randomized block Krylov iteration."""
    return _run(A, cfg, Variant.BLOCK_KRYLOV)


def sketch_and_solve(A, cfg):
    """Non-iterative sketch baseline: basis of A @ Pi, then post-processing."""
    return _run(A, cfg, Variant.SKETCH)


def factorize(A, cfg):
    """Dispatch on cfg.variant."""
    if cfg.variant is Variant.SIMULTANEOUS_ITERATION:
        return simultaneous_iteration(A, cfg)
    if cfg.variant is Variant.BLOCK_KRYLOV:
        return block_krylov(A, cfg)
    return sketch_and_solve(A, cfg)
