"""Synthetic test matrices with a prescribed singular spectrum.

A = U diag(spectrum) V^T with U, V drawn as orthonormalized seeded Gaussian
blocks. Every generated matrix is checked against the reference SVD, so a
bad construction fails loudly at the source instead of polluting sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .factor import _mgs, dense_svd_reference
from .matrix import DenseMatrix, SeededRng, gaussian

__all__ = ["SyntheticSpec", "synth_matrix"]


@dataclass(frozen=True)
class SyntheticSpec:
    """n x d matrix request with nonnegative descending singular values."""

    n: int
    d: int
    spectrum: np.ndarray
    seed: int = 0

    def __post_init__(self):
        spec = np.array(self.spectrum, dtype=np.float64, copy=True)
        if spec.ndim != 1 or spec.size == 0:
            raise ValueError("spectrum must be a nonempty 1-D array")
        if np.any(spec < 0) or np.any(np.diff(spec) > 0):
            raise ValueError("spectrum must be nonnegative and descending")
        if spec.size > min(self.n, self.d):
            raise ValueError("spectrum longer than min(n, d)")
        spec.setflags(write=False)
        object.__setattr__(self, "spectrum", spec)

    @classmethod
    def from_dict(cls, obj):
        return cls(
            n=int(obj["n"]),
            d=int(obj["d"]),
            spectrum=np.asarray(obj["spectrum"], dtype=np.float64),
            seed=int(obj.get("seed", 0)),
        )

    def to_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "spectrum": [float(s) for s in self.spectrum],
            "seed": self.seed,
        }


def synth_matrix(spec, check=True):
    """Build the matrix and verify its spectrum against the reference SVD.

    The check asserts agreement to 1e-10 relative to the top value on
    every prescribed value that stands clear of the reference SVD's own
    noise floor. The Gram route squares the conditioning, so values below
    ~1e-5 of the top (and prescribed zeros) can only be certified to the
    floor itself and get a 1e-7 relative allowance instead.
    """
    m = spec.spectrum.size
    rng = SeededRng(spec.seed)
    u = _mgs(gaussian(spec.n, m, rng).data)
    v = _mgs(gaussian(spec.d, m, rng).data)
    scaled = u * spec.spectrum[None, :]
    a = backend.mm(scaled, np.ascontiguousarray(v.T))
    out = DenseMatrix(a)
    if check:
        got = dense_svd_reference(out).singular_values
        full = np.zeros(m)
        take = min(m, got.size)
        full[:take] = got[:take]
        top = float(spec.spectrum[0])
        deviation = np.abs(full - spec.spectrum)
        tol = np.where(spec.spectrum >= 1e-5 * top, 1e-10 * top, 1e-7 * top)
        if np.any(deviation > tol):
            raise AssertionError(
                "synthetic spectrum check failed: worst deviation "
                f"{float(np.max(deviation)):.3e}"
            )
    return out
