# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled bit kernels; mirrors `_pure` exactly (same convention, same
entry ordering), just with C loops instead of Python ones."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline Py_ssize_t _find(const unsigned long long* arr, Py_ssize_t n,
                             unsigned long long key) nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


def occupations(const cnp.uint64_t[::1] masks, int num_modes):
    """Per-state mode occupations as a (dim, num_modes) float array."""
    cdef Py_ssize_t dim = masks.shape[0]
    occ_arr = np.zeros((dim, num_modes))
    cdef double[:, ::1] occ = occ_arr
    cdef Py_ssize_t i
    cdef int p
    cdef unsigned long long m
    with nogil:
        for i in range(dim):
            m = masks[i]
            for p in range(num_modes):
                if m & ((<unsigned long long>1) << p):
                    occ[i, p] = 1.0
    return occ_arr


def hopping_entries(const cnp.uint64_t[::1] masks, int p, int q):
    """Nonzero elements <row| a+_p a_q |col> = sign on a sorted sector basis."""
    if p == q:
        raise ValueError("hopping_entries requires p != q; the diagonal is occupations")
    cdef Py_ssize_t dim = masks.shape[0]
    cdef unsigned long long pbit = (<unsigned long long>1) << p
    cdef unsigned long long qbit = (<unsigned long long>1) << q
    cdef unsigned long long below_p = pbit - 1
    cdef unsigned long long below_q = qbit - 1
    rows_arr = np.empty(dim, dtype=np.int64)
    cols_arr = np.empty(dim, dtype=np.int64)
    signs_arr = np.empty(dim, dtype=np.float64)
    cdef cnp.int64_t[::1] rows = rows_arr
    cdef cnp.int64_t[::1] cols = cols_arr
    cdef double[::1] signs = signs_arr
    cdef Py_ssize_t col, count = 0
    cdef unsigned long long mask, interm, target
    cdef int parity
    with nogil:
        for col in range(dim):
            mask = masks[col]
            if not (mask & qbit):
                continue
            interm = mask ^ qbit
            if interm & pbit:
                continue
            parity = __builtin_popcountll(mask & below_q) \
                + __builtin_popcountll(interm & below_p)
            target = interm | pbit
            rows[count] = _find(&masks[0], dim, target)
            cols[count] = col
            signs[count] = -1.0 if parity & 1 else 1.0
            count += 1
    return rows_arr[:count].copy(), cols_arr[:count].copy(), signs_arr[:count].copy()
