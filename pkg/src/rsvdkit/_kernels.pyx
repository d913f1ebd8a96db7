# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Same contracts as ``rsvdkit._kernels_py``: dense product with a fixed
per-entry summation order, CSR products in storage order, cyclic Jacobi
sweeps, and the SplitMix64 + Box-Muller Gaussian fill. The Gaussian fill is
bitwise-identical to the Python fallback; the linear algebra kernels agree
to rounding.
"""

import numpy as np

from libc.math cimport cos, fabs, log, sin, sqrt

ctypedef unsigned long long u64

cdef u64 _GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double _TWO_NEG53 = 1.0 / 9007199254740992.0
cdef double _TWO_PI = 6.283185307179586


cdef inline u64 _mix(u64 z) nogil:
    z ^= z >> 30
    z *= 0xBF58476D1CE4E5B9ULL
    z ^= z >> 27
    z *= 0x94D049BB133111EBULL
    z ^= z >> 31
    return z


def gauss_fill(Py_ssize_t count, state):
    """Fill ``count`` standard normals, returning (array, new_state)."""
    out = np.empty(count, dtype=np.float64)
    cdef double[::1] o = out
    cdef u64 s = <u64> state
    cdef u64 x1, x2
    cdef double u1, u2, r, t
    cdef Py_ssize_t i = 0
    while i < count:
        s += _GOLDEN
        x1 = _mix(s)
        s += _GOLDEN
        x2 = _mix(s)
        u1 = <double> ((x1 >> 11) + 1) * _TWO_NEG53
        u2 = <double> ((x2 >> 11) + 1) * _TWO_NEG53
        r = sqrt(-2.0 * log(u1))
        t = _TWO_PI * u2
        o[i] = r * cos(t)
        i += 1
        if i < count:
            o[i] = r * sin(t)
            i += 1
    return out, int(s)


def mm(const double[:, ::1] a, const double[:, ::1] b):
    """Dense product a @ b; every output entry is a sequential dot product."""
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t kk = a.shape[1]
    cdef Py_ssize_t n = b.shape[1]
    out = np.zeros((m, n), dtype=np.float64)
    cdef double[:, ::1] c = out
    cdef Py_ssize_t i, l, j
    cdef double aval
    with nogil:
        for i in range(m):
            for l in range(kk):
                aval = a[i, l]
                for j in range(n):
                    c[i, j] += aval * b[l, j]
    return out


def spmm_nt(Py_ssize_t nrows, const long long[::1] indptr, const long long[::1] col,
            const double[::1] val, const double[:, ::1] b):
    """CSR A (nrows x *) times dense b, accumulated in storage order."""
    cdef Py_ssize_t m = b.shape[1]
    out = np.zeros((nrows, m), dtype=np.float64)
    cdef double[:, ::1] c = out
    cdef Py_ssize_t i, ptr, j
    cdef Py_ssize_t lo, hi, cc
    cdef double v
    with nogil:
        for i in range(nrows):
            lo = indptr[i]
            hi = indptr[i + 1]
            for ptr in range(lo, hi):
                v = val[ptr]
                cc = col[ptr]
                for j in range(m):
                    c[i, j] += v * b[cc, j]
    return out


def spmm_t(Py_ssize_t nrows, Py_ssize_t ncols, const long long[::1] indptr,
           const long long[::1] col, const double[::1] val, const double[:, ::1] b):
    """CSR A (nrows x ncols) transposed times dense b (nrows x m)."""
    cdef Py_ssize_t m = b.shape[1]
    out = np.zeros((ncols, m), dtype=np.float64)
    cdef double[:, ::1] c = out
    cdef Py_ssize_t i, ptr, j
    cdef Py_ssize_t lo, hi, cc
    cdef double v
    with nogil:
        for i in range(nrows):
            lo = indptr[i]
            hi = indptr[i + 1]
            for ptr in range(lo, hi):
                v = val[ptr]
                cc = col[ptr]
                for j in range(m):
                    c[cc, j] += v * b[i, j]
    return out


cdef double _offdiag_norm(double[:, ::1] m_) nogil:
    cdef Py_ssize_t n = m_.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += m_[i, j] * m_[i, j]
    return sqrt(acc)


def jacobi_sweeps(double[:, ::1] m_, double[:, ::1] v_, double tol,
                  int max_sweeps):
    """Cyclic-by-row Jacobi on symmetric m_ (in place).

    Rotations accumulate into v_ (pre-initialized to identity) so that on
    convergence m_original = v_ diag(m_) v_^T. Returns
    (offdiag_norm, sweeps, converged) where the stop rule is
    offdiag_norm <= tol * frobenius_norm(m_).
    """
    cdef Py_ssize_t n = m_.shape[0]
    cdef Py_ssize_t p, q, r
    cdef double fro = 0.0
    cdef double off, threshold, skip_eps
    cdef double apq, app, aqq, tau, t, c, s, x, y
    cdef int sweeps = 0

    for p in range(n):
        for q in range(n):
            fro += m_[p, q] * m_[p, q]
    fro = sqrt(fro)
    threshold = tol * fro
    off = _offdiag_norm(m_)
    if n < 2 or off <= threshold:
        return float(off), 0, True
    skip_eps = threshold * 1e-3 / n

    while sweeps < max_sweeps:
        with nogil:
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = m_[p, q]
                    if fabs(apq) <= skip_eps:
                        continue
                    app = m_[p, p]
                    aqq = m_[q, q]
                    tau = (aqq - app) / (2.0 * apq)
                    if tau >= 0.0:
                        t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    for r in range(n):
                        x = m_[r, p]
                        y = m_[r, q]
                        m_[r, p] = c * x - s * y
                        m_[r, q] = s * x + c * y
                    for r in range(n):
                        x = m_[p, r]
                        y = m_[q, r]
                        m_[p, r] = c * x - s * y
                        m_[q, r] = s * x + c * y
                    m_[p, q] = 0.0
                    m_[q, p] = 0.0
                    m_[p, p] = app - t * apq
                    m_[q, q] = aqq + t * apq
                    for r in range(n):
                        x = v_[r, p]
                        y = v_[r, q]
                        v_[r, p] = c * x - s * y
                        v_[r, q] = s * x + c * y
        sweeps += 1
        off = _offdiag_norm(m_)
        if off <= threshold:
            return float(off), sweeps, True
    return float(off), sweeps, False
