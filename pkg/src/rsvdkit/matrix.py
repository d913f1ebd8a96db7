"""Matrix storage, products, seeded Gaussian sampling, and dataset ingestion.

Dense matrices are row-major float64. Sparse matrices use CSR with sorted,
in-bounds column indices and no explicit zeros. Both are immutable after
construction; ``MatrixOperator`` gives the iteration code a uniform
apply / apply-transpose view over either storage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ParseError

__all__ = [
    "DenseMatrix",
    "SparseMatrixCSR",
    "MatrixOperator",
    "SeededRng",
    "as_dense_array",
    "as_operator",
    "gaussian",
    "matmul",
    "spmm",
    "frobenius_norm_sq",
    "load_matrix_market",
    "load_dense_csv",
    "write_matrix_market",
    "write_dense_csv",
]

_MASK64 = (1 << 64) - 1


class SeededRng:
    """Deterministic Gaussian source: a SplitMix64 stream through Box-Muller.

    The state advances by the SplitMix64 increment per 64-bit output and each
    output is the standard finalizer of the state, so the stream is a pure
    function of (seed, number of values drawn). Uniform deviates are
    ``((x >> 11) + 1) * 2**-53`` in (0, 1], keeping the Box-Muller log finite.
    A fill of m normals consumes exactly ``2 * ceil(m / 2)`` uniforms; the
    unused half of a trailing pair is discarded, never cached, so interleaved
    fills of any shapes reproduce the one-shot stream.

    Equal seeds give bitwise-equal streams. The integer mixing is exact on
    every platform; the transcendental step uses the same libm from both the
    compiled and Python backends, so the two backends agree bitwise on any
    single platform.
    """

    def __init__(self, seed):
        seed = int(seed)
        if not 0 <= seed <= _MASK64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self.seed = seed
        self._state = seed

    def normal_fill(self, count):
        """Draw ``count`` i.i.d. standard normals as a float64 array."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        out, self._state = backend.gauss_fill(int(count), self._state)
        return out

    def normal(self):
        return float(self.normal_fill(1)[0])


@dataclass(frozen=True)
class DenseMatrix:
    """Row-major float64 matrix with all entries finite."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 2:
            raise ValueError("dense matrix data must be 2-D")
        if not np.all(np.isfinite(arr)):
            raise ValueError("dense matrix entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape


@dataclass(frozen=True)
class SparseMatrixCSR:
    """CSR storage: non-decreasing row pointer, strictly increasing columns
    within each row, finite nonzero values."""

    rows: int
    cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        rows = int(self.rows)
        cols = int(self.cols)
        if rows < 1 or cols < 1:
            raise ValueError("sparse matrix dimensions must be positive")
        rp = np.array(self.row_ptr, dtype=np.int64, order="C", copy=True)
        ci = np.array(self.col_idx, dtype=np.int64, order="C", copy=True)
        vv = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if rp.ndim != 1 or rp.shape[0] != rows + 1:
            raise ValueError("row_ptr must have length rows + 1")
        nnz = ci.shape[0]
        if vv.shape[0] != nnz:
            raise ValueError("col_idx and values must have equal length")
        if rp[0] != 0 or rp[-1] != nnz or np.any(np.diff(rp) < 0):
            raise ValueError("row_ptr must be non-decreasing from 0 to nnz")
        if nnz:
            if ci.min() < 0 or ci.max() >= cols:
                raise ValueError("column index out of bounds")
            if not np.all(np.isfinite(vv)) or np.any(vv == 0.0):
                raise ValueError("values must be finite and nonzero")
            if nnz > 1:
                # strict increase within rows: every adjacent pair must grow
                # unless it straddles a row boundary
                boundary = np.zeros(nnz - 1, dtype=bool)
                marks = rp[1:-1]
                marks = marks[(marks > 0) & (marks < nnz)]
                boundary[marks - 1] = True
                if not np.all((np.diff(ci) > 0) | boundary):
                    raise ValueError("column indices must strictly increase within a row")
        for arr in (rp, ci, vv):
            arr.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "row_ptr", rp)
        object.__setattr__(self, "col_idx", ci)
        object.__setattr__(self, "values", vv)

    @property
    def nnz(self):
        return int(self.values.shape[0])

    @property
    def shape(self):
        return (self.rows, self.cols)

    @classmethod
    def from_coo(cls, rows, cols, row_indices, col_indices, values):
        """Build CSR from coordinates; duplicates are summed, zeros dropped."""
        ri = np.asarray(row_indices, dtype=np.int64)
        ci = np.asarray(col_indices, dtype=np.int64)
        vv = np.asarray(values, dtype=np.float64)
        if ri.size:
            order = np.lexsort((ci, ri))
            ri, ci, vv = ri[order], ci[order], vv[order]
            keys = ri * int(cols) + ci
            uniq, inverse = np.unique(keys, return_inverse=True)
            summed = np.zeros(uniq.shape[0], dtype=np.float64)
            np.add.at(summed, inverse, vv)
            keep = summed != 0.0
            uniq, summed = uniq[keep], summed[keep]
            ri = uniq // int(cols)
            ci = uniq % int(cols)
            vv = summed
        row_ptr = np.zeros(rows + 1, dtype=np.int64)
        np.add.at(row_ptr, ri + 1, 1)
        row_ptr = np.cumsum(row_ptr)
        return cls(rows, cols, row_ptr, ci, vv)

    def toarray(self):
        out = np.zeros((self.rows, self.cols), dtype=np.float64)
        for i in range(self.rows):
            lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
            out[i, self.col_idx[lo:hi]] = self.values[lo:hi]
        return out


def as_dense_array(m):
    """Coerce a DenseMatrix or array-like to a validated float64 2-D array."""
    if isinstance(m, DenseMatrix):
        return m.data
    return DenseMatrix(np.asarray(m)).data


class MatrixOperator:
    """Uniform apply / apply-transpose access over dense or CSR storage."""

    def __init__(self, matrix):
        if isinstance(matrix, MatrixOperator):
            matrix = matrix.matrix
        if isinstance(matrix, (DenseMatrix, SparseMatrixCSR)):
            self.matrix = matrix
        else:
            self.matrix = DenseMatrix(np.asarray(matrix))
        self._dense_t = None

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def is_sparse(self):
        return isinstance(self.matrix, SparseMatrixCSR)

    @property
    def nnz(self):
        if self.is_sparse:
            return self.matrix.nnz
        return int(np.count_nonzero(self.matrix.data))

    def _block(self, block):
        b = np.ascontiguousarray(np.asarray(block, dtype=np.float64))
        if b.ndim == 1:
            b = b.reshape(-1, 1)
        return b

    def apply(self, block):
        """A @ block."""
        b = self._block(block)
        if b.shape[0] != self.shape[1]:
            raise ValueError("inner dimensions do not match")
        if self.is_sparse:
            A = self.matrix
            return backend.spmm_nt(A.rows, A.row_ptr, A.col_idx, A.values, b)
        return backend.mm(self.matrix.data, b)

    def apply_transpose(self, block):
        """A.T @ block."""
        b = self._block(block)
        if b.shape[0] != self.shape[0]:
            raise ValueError("inner dimensions do not match")
        if self.is_sparse:
            A = self.matrix
            return backend.spmm_t(A.rows, A.cols, A.row_ptr, A.col_idx, A.values, b)
        if self._dense_t is None:
            self._dense_t = np.ascontiguousarray(self.matrix.data.T)
        return backend.mm(self._dense_t, b)

    def densify(self):
        if self.is_sparse:
            return DenseMatrix(self.matrix.toarray())
        return self.matrix

    def frobenius_sq(self):
        if self.is_sparse:
            return float(np.sum(self.matrix.values**2))
        return float(np.sum(self.matrix.data**2))


def as_operator(A):
    if isinstance(A, MatrixOperator):
        return A
    return MatrixOperator(A)


def gaussian(rows, cols, rng):
    """rows x cols matrix of i.i.d. standard normals, filled row-major.

    Consumes the rng state deterministically (see ``SeededRng``).
    """
    rows = int(rows)
    cols = int(cols)
    if rows < 1 or cols < 1:
        raise ValueError("gaussian dimensions must be at least 1")
    flat = rng.normal_fill(rows * cols)
    return DenseMatrix(flat.reshape(rows, cols))


def matmul(A, B):
    """Dense product A @ B with a fixed per-entry summation order."""
    a = as_dense_array(A)
    b = as_dense_array(B)
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"matmul dimension mismatch: {a.shape} x {b.shape}"
        )
    return DenseMatrix(backend.mm(a, b))


def spmm(A, B, transpose_A=False):
    """Sparse-dense product A @ B, or A.T @ B when ``transpose_A``."""
    if not isinstance(A, SparseMatrixCSR):
        raise TypeError("spmm expects a SparseMatrixCSR left operand")
    b = as_dense_array(B)
    inner = A.rows if transpose_A else A.cols
    if b.shape[0] != inner:
        raise ValueError(
            f"spmm dimension mismatch: {A.shape}{'^T' if transpose_A else ''} x {b.shape}"
        )
    if transpose_A:
        out = backend.spmm_t(A.rows, A.cols, A.row_ptr, A.col_idx, A.values, b)
    else:
        out = backend.spmm_nt(A.rows, A.row_ptr, A.col_idx, A.values, b)
    return DenseMatrix(out)


def frobenius_norm_sq(A):
    """Sum of squared entries."""
    return as_operator(A).frobenius_sq()


# ---------------------------------------------------------------------------
# file formats


def load_matrix_market(path):
    """Read a Matrix Market coordinate file into a sparse MatrixOperator.

    Supports field real/integer/pattern and symmetry general/symmetric.
    Symmetric storage is expanded to full, pattern entries become 1.0, and
    duplicate coordinates are summed.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("%%MatrixMarket"):
            raise ParseError("missing %%MatrixMarket header", line=1)
        parts = header.strip().split()
        if len(parts) != 5:
            raise ParseError("header must have 5 tokens", line=1)
        _, object_, fmt, field, symmetry = (p.lower() for p in parts)
        if object_ != "matrix" or fmt != "coordinate":
            raise ParseError(
                f"unsupported object/format: {object_} {fmt}", line=1
            )
        if field not in ("real", "integer", "pattern"):
            raise ParseError(f"unsupported field: {field}", line=1)
        if symmetry not in ("general", "symmetric"):
            raise ParseError(f"unsupported symmetry: {symmetry}", line=1)

        lineno = 1
        dims = None
        for raw in fh:
            lineno += 1
            stripped = raw.strip()
            if not stripped or stripped.startswith("%"):
                continue
            dims = stripped.split()
            break
        if dims is None:
            raise ParseError("missing size line", line=lineno)
        try:
            rows, cols, nnz = (int(t) for t in dims)
        except ValueError:
            raise ParseError(f"bad size line: {' '.join(dims)}", line=lineno) from None
        if rows < 1 or cols < 1 or nnz < 0:
            raise ParseError("size line entries out of range", line=lineno)

        ri = []
        ci = []
        vv = []
        seen = 0
        want_value = field != "pattern"
        for raw in fh:
            lineno += 1
            stripped = raw.strip()
            if not stripped or stripped.startswith("%"):
                continue
            tok = stripped.split()
            if len(tok) != (3 if want_value else 2):
                raise ParseError(f"bad entry: {stripped}", line=lineno)
            try:
                i = int(tok[0])
                j = int(tok[1])
                v = float(tok[2]) if want_value else 1.0
            except ValueError:
                raise ParseError(f"bad entry: {stripped}", line=lineno) from None
            if not 1 <= i <= rows or not 1 <= j <= cols:
                raise ParseError(
                    f"entry ({i}, {j}) outside declared {rows} x {cols} bounds",
                    line=lineno,
                )
            if not np.isfinite(v):
                raise ParseError(f"non-finite value: {stripped}", line=lineno)
            seen += 1
            if seen > nnz:
                raise ParseError("more entries than declared", line=lineno)
            ri.append(i - 1)
            ci.append(j - 1)
            vv.append(v)
            if symmetry == "symmetric" and i != j:
                ri.append(j - 1)
                ci.append(i - 1)
                vv.append(v)
        if seen != nnz:
            raise ParseError(f"declared {nnz} entries, found {seen}", line=lineno)

    sp = SparseMatrixCSR.from_coo(rows, cols, ri, ci, vv)
    return MatrixOperator(sp)


def load_dense_csv(path, skip_header=False):
    """Read a rectangular numeric CSV (no header by default)."""
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if skip_header and lineno == 1:
                continue
            stripped = raw.strip()
            if not stripped:
                continue
            cells = stripped.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ParseError(
                    f"ragged row: expected {width} cells, found {len(cells)}",
                    line=lineno,
                )
            parsed = []
            for colno, cell in enumerate(cells, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"non-numeric cell at ({lineno}, {colno}): {cell!r}",
                        line=lineno,
                    ) from None
            rows.append(parsed)
    if not rows:
        raise ParseError("empty CSV file", line=1)
    return DenseMatrix(np.asarray(rows, dtype=np.float64))


def write_matrix_market(A, path):
    """Write as Matrix Market coordinate real general (1-based indices)."""
    op = as_operator(A)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        if op.is_sparse:
            sp = op.matrix
            fh.write(f"{sp.rows} {sp.cols} {sp.nnz}\n")
            for i in range(sp.rows):
                lo, hi = sp.row_ptr[i], sp.row_ptr[i + 1]
                for ptr in range(lo, hi):
                    fh.write(f"{i + 1} {sp.col_idx[ptr] + 1} {sp.values[ptr]:.17g}\n")
        else:
            arr = op.matrix.data
            nz = np.nonzero(arr)
            fh.write(f"{arr.shape[0]} {arr.shape[1]} {len(nz[0])}\n")
            for i, j in zip(*nz):
                fh.write(f"{i + 1} {j + 1} {arr[i, j]:.17g}\n")


def write_dense_csv(A, path):
    arr = as_dense_array(as_operator(A).densify())
    with open(path, "w", encoding="utf-8") as fh:
        for row in arr:
            fh.write(",".join(f"{x:.17g}" for x in row))
            fh.write("\n")
