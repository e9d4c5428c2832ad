# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _next(uint64_t* s) nogil:
    cdef uint64_t result = _rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


def xoshiro_raw(cnp.uint64_t[::1] state, Py_ssize_t count):
    cdef uint64_t s[4]
    cdef Py_ssize_t i
    out = np.empty(count, dtype=np.uint64)
    cdef cnp.uint64_t[::1] o = out
    for i in range(4):
        s[i] = state[i]
    with nogil:
        for i in range(count):
            o[i] = _next(s)
    for i in range(4):
        state[i] = s[i]
    return out


def xoshiro_uniforms(cnp.uint64_t[::1] state, Py_ssize_t count):
    cdef uint64_t s[4]
    cdef Py_ssize_t i
    cdef double scale = 1.0 / 9007199254740992.0
    out = np.empty(count, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(4):
        s[i] = state[i]
    with nogil:
        for i in range(count):
            o[i] = <double>(_next(s) >> 11) * scale
    for i in range(4):
        state[i] = s[i]
    return out


def spgemm(const int64_t[::1] a_ptr, const int64_t[::1] a_col, const int64_t[::1] a_val,
           const int64_t[::1] b_ptr, const int64_t[::1] b_col, const int64_t[::1] b_val,
           Py_ssize_t m, int64_t q):
    cdef Py_ssize_t k = a_ptr.shape[0] - 1
    cdef Py_ssize_t i, p, t, j, c, nnz_row, cap, nnz = 0
    cdef int64_t av
    acc_arr = np.zeros(m, dtype=np.int64)
    mark_arr = np.full(m, -1, dtype=np.int64)
    touched_arr = np.empty(m, dtype=np.int64)
    cdef int64_t[::1] acc = acc_arr
    cdef int64_t[::1] mark = mark_arr
    cdef int64_t[::1] touched = touched_arr

    cap = 0
    for i in range(k):
        for p in range(a_ptr[i], a_ptr[i + 1]):
            j = a_col[p]
            cap += b_ptr[j + 1] - b_ptr[j]
    if cap > k * m:
        cap = k * m

    ptr_arr = np.empty(k + 1, dtype=np.int64)
    col_arr = np.empty(cap, dtype=np.int64)
    val_arr = np.empty(cap, dtype=np.int64)
    cdef int64_t[::1] ptr = ptr_arr
    cdef int64_t[::1] col = col_arr
    cdef int64_t[::1] val = val_arr

    with nogil:
        ptr[0] = 0
        for i in range(k):
            nnz_row = 0
            for p in range(a_ptr[i], a_ptr[i + 1]):
                j = a_col[p]
                av = a_val[p]
                for t in range(b_ptr[j], b_ptr[j + 1]):
                    c = b_col[t]
                    if mark[c] != i:
                        mark[c] = i
                        acc[c] = 0
                        touched[nnz_row] = c
                        nnz_row += 1
                    acc[c] = (acc[c] + av * b_val[t]) % q
            _isort(touched, nnz_row)
            for t in range(nnz_row):
                c = touched[t]
                if acc[c] != 0:
                    col[nnz] = c
                    val[nnz] = acc[c]
                    nnz += 1
            ptr[i + 1] = nnz
    return ptr_arr, col_arr[:nnz].copy(), val_arr[:nnz].copy()


cdef void _isort(int64_t[::1] x, Py_ssize_t n) nogil:
    # shell sort; rows are short
    cdef Py_ssize_t gap = n // 2, i, j
    cdef int64_t tmp
    while gap > 0:
        for i in range(gap, n):
            tmp = x[i]
            j = i
            while j >= gap and x[j - gap] > tmp:
                x[j] = x[j - gap]
                j -= gap
            x[j] = tmp
        gap //= 2


def padding_draw(a, u, neg_inv_alpha, int64_t q, double p1, double p_star):
    cdef const int64_t[::1] av = np.ascontiguousarray(a, dtype=np.int64).ravel()
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64).ravel()
    cdef const int64_t[::1] c = np.ascontiguousarray(neg_inv_alpha, dtype=np.int64)
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t size = av.shape[0]
    cdef double p1_inv = (1.0 - p1) / (q - 1)
    cdef double ps_inv = (1.0 - n * p_star) / (q - n)
    cdef double top = n * p_star
    cdef Py_ssize_t e, j, h
    cdef int64_t x, k, tmp
    cdef double w
    out = np.empty(size, dtype=np.int64)
    cdef int64_t[::1] r = out
    spec_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] spec = spec_arr

    with nogil:
        for e in range(size):
            x = av[e]
            w = uv[e]
            if x == 0:
                if w < p1 or p1_inv <= 0:
                    r[e] = 0
                else:
                    k = <int64_t>floor((w - p1) / p1_inv)
                    if k > q - 2:
                        k = q - 2
                    r[e] = k + 1
            elif w < top and p_star > 0:
                j = <Py_ssize_t>floor(w / p_star)
                if j > n - 1:
                    j = n - 1
                r[e] = x * c[j] % q
            else:
                if ps_inv > 0:
                    k = <int64_t>floor((w - top) / ps_inv)
                    if k > q - n - 1:
                        k = q - n - 1
                else:
                    k = 0
                for j in range(n):
                    tmp = x * c[j] % q
                    h = j
                    while h > 0 and spec[h - 1] > tmp:
                        spec[h] = spec[h - 1]
                        h -= 1
                    spec[h] = tmp
                for j in range(n):
                    if spec[j] <= k:
                        k += 1
                r[e] = k
    return out.reshape(np.shape(a))
