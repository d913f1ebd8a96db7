"""Pure-Python (numpy-backed) fallback kernels.

Mirrors the compiled module ``rsvdkit._kernels``. The Gaussian fill produces
a bitwise-identical stream (exact integer mixing plus the same libm calls);
the product and Jacobi kernels agree with the compiled ones to rounding.
"""

import math

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1
_TWO_NEG53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi


def _mix(z):
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def gauss_fill(count, state):
    out = np.empty(count, dtype=np.float64)
    s = state
    i = 0
    while i < count:
        s = (s + _GOLDEN) & _MASK64
        x1 = _mix(s)
        s = (s + _GOLDEN) & _MASK64
        x2 = _mix(s)
        u1 = ((x1 >> 11) + 1) * _TWO_NEG53
        u2 = ((x2 >> 11) + 1) * _TWO_NEG53
        r = math.sqrt(-2.0 * math.log(u1))
        t = _TWO_PI * u2
        out[i] = r * math.cos(t)
        i += 1
        if i < count:
            out[i] = r * math.sin(t)
            i += 1
    return out, s


def mm(a, b):
    return a @ b


def spmm_nt(nrows, indptr, col, val, b):
    out = np.zeros((nrows, b.shape[1]), dtype=np.float64)
    for i in range(nrows):
        lo, hi = indptr[i], indptr[i + 1]
        if lo != hi:
            out[i, :] = val[lo:hi] @ b[col[lo:hi], :]
    return out


def spmm_t(nrows, ncols, indptr, col, val, b):
    out = np.zeros((ncols, b.shape[1]), dtype=np.float64)
    for i in range(nrows):
        lo, hi = indptr[i], indptr[i + 1]
        if lo != hi:
            # column indices are strictly increasing within a row, so the
            # fancy-indexed in-place add has no duplicate targets
            out[col[lo:hi], :] += val[lo:hi, None] * b[i, :]
    return out


def jacobi_sweeps(m_, v_, tol, max_sweeps):
    n = m_.shape[0]
    fro = math.sqrt(float(np.sum(m_ * m_)))
    threshold = tol * fro

    def offdiag():
        # sum only the off-diagonal squares; subtracting the diagonal mass
        # from the total would cancel catastrophically near convergence
        off = m_.copy()
        np.fill_diagonal(off, 0.0)
        return math.sqrt(float(np.sum(off * off)))

    off = offdiag()
    if n < 2 or off <= threshold:
        return off, 0, True
    skip_eps = threshold * 1e-3 / n

    sweeps = 0
    while sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m_[p, q]
                if abs(apq) <= skip_eps:
                    continue
                app = m_[p, p]
                aqq = m_[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                colp = m_[:, p].copy()
                colq = m_[:, q].copy()
                m_[:, p] = c * colp - s * colq
                m_[:, q] = s * colp + c * colq
                rowp = m_[p, :].copy()
                rowq = m_[q, :].copy()
                m_[p, :] = c * rowp - s * rowq
                m_[q, :] = s * rowp + c * rowq
                m_[p, q] = 0.0
                m_[q, p] = 0.0
                m_[p, p] = app - t * apq
                m_[q, q] = aqq + t * apq
                vp = v_[:, p].copy()
                vq = v_[:, q].copy()
                v_[:, p] = c * vp - s * vq
                v_[:, q] = s * vp + c * vq
        sweeps += 1
        off = offdiag()
        if off <= threshold:
            return off, sweeps, True
    return off, sweeps, False
