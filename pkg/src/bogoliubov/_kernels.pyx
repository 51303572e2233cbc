# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Fock-space assembly kernels.

States are ranked with the combinatorial number system instead of a lookup
table: ``rank = #states with fewer quanta + lexicographic position``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef cnp.int64_t i64


cdef i64[:, ::1] _binomials(int nmax, int kmax):
    cdef i64[:, ::1] c = np.zeros((nmax + 1, kmax + 1), dtype=np.int64)
    cdef int n, k
    for n in range(nmax + 1):
        c[n, 0] = 1
        for k in range(1, min(n, kmax) + 1):
            c[n, k] = c[n - 1, k - 1] + (c[n - 1, k] if k <= n - 1 else 0)
    return c


cdef inline i64 _rank(const i64* s, int m, i64[:, ::1] c) nogil:
    cdef i64 total = 0, rem, pos = 0
    cdef int k, p
    for k in range(m):
        total += s[k]
    if total > 0:
        pos = c[total - 1 + m, m]
    rem = total
    for k in range(m - 1):
        p = m - k - 1
        if s[k] > 0:
            pos += c[rem + p, p] - c[rem - s[k] + p, p]
        rem -= s[k]
    return pos


def enumerate_states(int m, int cutoff):
    cdef i64[:, ::1] c = _binomials(cutoff + m, m)
    cdef i64 size = c[cutoff + m, m]
    out_arr = np.zeros((size, m), dtype=np.int64)
    cdef i64[:, ::1] out = out_arr
    cdef i64[::1] s = np.zeros(m, dtype=np.int64)
    cdef i64 row = 0, t, tail
    cdef int k, j
    for t in range(cutoff + 1):
        # first composition of t in ascending lex order: (0, ..., 0, t)
        for k in range(m):
            s[k] = 0
        s[m - 1] = t
        while True:
            for k in range(m):
                out[row, k] = s[k]
            row += 1
            # next composition: find rightmost k < m-1 with a nonzero tail after it
            j = m - 2
            while j >= 0:
                tail = 0
                for k in range(j + 1, m):
                    tail += s[k]
                if tail > 0:
                    break
                j -= 1
            if j < 0:
                break
            s[j] += 1
            for k in range(j + 1, m):
                s[k] = 0
            s[m - 1] = tail - 1
    return out_arr


def rank_states(const i64[:, ::1] states, int cutoff):
    cdef int m = states.shape[1]
    cdef i64 n = states.shape[0], r
    cdef i64[:, ::1] c = _binomials(cutoff + m, m)
    out_arr = np.empty(n, dtype=np.int64)
    cdef i64[::1] out = out_arr
    for r in range(n):
        out[r] = _rank(&states[r, 0], m, c)
    return out_arr


def ladder_coo(const i64[:, ::1] states, int cutoff, int mode, bint create):
    cdef int m = states.shape[1]
    cdef i64 n = states.shape[0], col, nnz = 0, total, occ
    cdef int k
    cdef i64[:, ::1] c = _binomials(cutoff + m, m)
    rows_arr = np.empty(n, dtype=np.int64)
    cols_arr = np.empty(n, dtype=np.int64)
    vals_arr = np.empty(n, dtype=np.float64)
    cdef i64[::1] rows = rows_arr
    cdef i64[::1] cols = cols_arr
    cdef double[::1] vals = vals_arr
    cdef i64[::1] s = np.empty(m, dtype=np.int64)
    for col in range(n):
        total = 0
        for k in range(m):
            s[k] = states[col, k]
            total += s[k]
        occ = s[mode]
        if create:
            if total >= cutoff:
                continue
            s[mode] = occ + 1
            vals[nnz] = sqrt(<double>(occ + 1))
        else:
            if occ == 0:
                continue
            s[mode] = occ - 1
            vals[nnz] = sqrt(<double>occ)
        rows[nnz] = _rank(&s[0], m, c)
        cols[nnz] = col
        nnz += 1
    return rows_arr[:nnz].copy(), cols_arr[:nnz].copy(), vals_arr[:nnz].copy()


def quadratic_coo(const i64[:, ::1] states, int cutoff, h, g):
    """Entries of ``Σ h_ij a_i* a_j + ½ Σ g_ij a_i* a_j* + ½ Σ ḡ_ij a_i a_j``."""
    cdef int m = states.shape[1]
    cdef i64 n = states.shape[0], col, nnz = 0, total
    cdef int i, j, k
    cdef double amp
    cdef const double complex[:, ::1] hv = np.ascontiguousarray(h, dtype=np.complex128)
    cdef const double complex[:, ::1] gv = np.ascontiguousarray(g, dtype=np.complex128)
    cdef i64[:, ::1] c = _binomials(cutoff + m, m)
    cdef i64 cap = n * 3 * m * m
    rows_arr = np.empty(cap, dtype=np.int64)
    cols_arr = np.empty(cap, dtype=np.int64)
    vals_arr = np.empty(cap, dtype=np.complex128)
    cdef i64[::1] rows = rows_arr
    cdef i64[::1] cols = cols_arr
    cdef double complex[::1] vals = vals_arr
    cdef i64[::1] s = np.empty(m, dtype=np.int64)
    cdef i64[::1] s0 = np.empty(m, dtype=np.int64)
    for col in range(n):
        total = 0
        for k in range(m):
            s0[k] = states[col, k]
            total += s0[k]
        for i in range(m):
            for j in range(m):
                if hv[i, j] != 0 and s0[j] > 0:
                    for k in range(m):
                        s[k] = s0[k]
                    amp = sqrt(<double>s[j])
                    s[j] -= 1
                    amp *= sqrt(<double>(s[i] + 1))
                    s[i] += 1
                    rows[nnz] = _rank(&s[0], m, c)
                    cols[nnz] = col
                    vals[nnz] = hv[i, j] * amp
                    nnz += 1
                if gv[i, j] != 0 and total + 2 <= cutoff:
                    for k in range(m):
                        s[k] = s0[k]
                    amp = sqrt(<double>(s[j] + 1))
                    s[j] += 1
                    amp *= sqrt(<double>(s[i] + 1))
                    s[i] += 1
                    rows[nnz] = _rank(&s[0], m, c)
                    cols[nnz] = col
                    vals[nnz] = 0.5 * gv[i, j] * amp
                    nnz += 1
                if gv[i, j] != 0 and s0[j] > 0 and s0[i] - (i == j) > 0:
                    for k in range(m):
                        s[k] = s0[k]
                    amp = sqrt(<double>s[j])
                    s[j] -= 1
                    amp *= sqrt(<double>s[i])
                    s[i] -= 1
                    rows[nnz] = _rank(&s[0], m, c)
                    cols[nnz] = col
                    vals[nnz] = 0.5 * gv[i, j].conjugate() * amp
                    nnz += 1
    return rows_arr[:nnz].copy(), cols_arr[:nnz].copy(), vals_arr[:nnz].copy()
