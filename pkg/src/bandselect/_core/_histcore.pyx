# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: initializedcheck=False
# cython: cdivision=True
"""Compiled counting and entropy kernels for coded integer samples.

Mirror of ``bandselect._core._hist_py`` (the NumPy fallback); the two
backends agree to ~1e-12. Entropy accumulates over ascending-sorted
nonzero counts so the value depends only on the count multiset and not
on how the variables were paired.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log2
from libc.stdlib cimport calloc, free, malloc

cnp.import_array()

DENSE_CELL_CAP = 1 << 22


cdef double _entropy_from_ptr(const cnp.int64_t* counts, Py_ssize_t m,
                              Py_ssize_t n) except? -1.0:
    """Entropy in bits from m dense cell counts summing to n.

    The sum runs over the nonzero counts in ascending order (via a
    counting sort of the count values), reproducing the sorted-array
    accumulation of the NumPy fallback term by term.
    """
    if m == 0:
        return log2(<double> n)
    cdef cnp.int64_t maxc = 0
    cdef Py_ssize_t i
    with nogil:
        for i in range(m):
            if counts[i] > maxc:
                maxc = counts[i]
    if maxc <= 0:
        return log2(<double> n)
    cdef cnp.int64_t* freq = <cnp.int64_t*> calloc(maxc + 1,
                                                   sizeof(cnp.int64_t))
    if freq == NULL:
        raise MemoryError()
    cdef double s = 0.0
    cdef double term
    cdef cnp.int64_t v, r
    with nogil:
        for i in range(m):
            if counts[i] > 0:
                freq[counts[i]] += 1
        for v in range(1, maxc + 1):
            r = freq[v]
            if r > 0:
                term = <double> v * log2(<double> v)
                while r > 0:  # repeated adds match the sorted-sum exactly
                    s += term
                    r -= 1
    free(freq)
    return log2(<double> n) - s / <double> n


def dense_counts(codes, dims):
    """Dense joint count array of shape ``dims`` (1 to 3 variables)."""
    if not 1 <= len(codes) <= 3 or len(codes) != len(dims):
        raise ValueError("dense_counts supports 1 to 3 variables")
    cdef Py_ssize_t n = codes[0].shape[0]
    cdef Py_ssize_t ncells = 1
    for k in dims:
        ncells *= <Py_ssize_t> k
    out = np.zeros(ncells, dtype=np.int64)
    cdef cnp.int64_t[::1] buf = out
    cdef const cnp.int32_t[::1] a
    cdef const cnp.int32_t[::1] b
    cdef const cnp.int32_t[::1] c
    cdef Py_ssize_t i, kb, kc
    cdef int nvars = len(codes)
    if nvars == 1:
        a = codes[0]
        for i in range(n):
            buf[a[i]] += 1
    elif nvars == 2:
        a = codes[0]
        b = codes[1]
        kb = <Py_ssize_t> dims[1]
        for i in range(n):
            buf[a[i] * kb + b[i]] += 1
    else:
        a = codes[0]
        b = codes[1]
        c = codes[2]
        kb = <Py_ssize_t> dims[1]
        kc = <Py_ssize_t> dims[2]
        for i in range(n):
            buf[(a[i] * kb + b[i]) * kc + c[i]] += 1
    return out.reshape(tuple(dims))


def _key_counts(codes, dims):
    """Nonzero joint counts via sort + run-length (sparse level space)."""
    key = codes[0].astype(np.int64)
    for arr, k in zip(codes[1:], dims[1:]):
        key = key * k + arr
    key = np.sort(key)
    cdef Py_ssize_t total = key.shape[0]
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    change = np.flatnonzero(key[1:] != key[:total - 1])
    bounds = np.concatenate(([0], change + 1, [total]))
    return np.diff(bounds).astype(np.int64)


def joint_entropy_bits(codes, dims):
    """Plug-in joint entropy in bits of 1 to 3 coded variables."""
    cdef Py_ssize_t n = codes[0].shape[0]
    cdef Py_ssize_t ncells = 1
    for k in dims:
        ncells *= <Py_ssize_t> k
    cdef cnp.int64_t[::1] counts
    if ncells <= DENSE_CELL_CAP:
        counts = dense_counts(codes, dims).ravel()
    else:
        counts = _key_counts(codes, dims)
    if counts.shape[0] == 0:
        return _entropy_from_ptr(NULL, 0, n)
    return _entropy_from_ptr(&counts[0], counts.shape[0], n)


def entropy_terms2(a_arr, b_arr, Py_ssize_t ka, Py_ssize_t kb):
    """(H(a), H(b), H(a,b)) from a single counting pass."""
    cdef Py_ssize_t n = a_arr.shape[0]
    if ka * kb > DENSE_CELL_CAP:
        return (joint_entropy_bits((a_arr,), (ka,)),
                joint_entropy_bits((b_arr,), (kb,)),
                joint_entropy_bits((a_arr, b_arr), (ka, kb)))
    cdef Py_ssize_t total = ka + kb + ka * kb
    cdef cnp.int64_t* buf = <cnp.int64_t*> calloc(total, sizeof(cnp.int64_t))
    if buf == NULL:
        raise MemoryError()
    cdef cnp.int64_t* ca = buf
    cdef cnp.int64_t* cb = buf + ka
    cdef cnp.int64_t* cab = buf + ka + kb
    cdef const cnp.int32_t[::1] a = a_arr
    cdef const cnp.int32_t[::1] b = b_arr
    cdef Py_ssize_t i, ia, ib
    with nogil:
        for i in range(n):
            ia = a[i]
            ib = b[i]
            ca[ia] += 1
            cb[ib] += 1
            cab[ia * kb + ib] += 1
    try:
        return (_entropy_from_ptr(ca, ka, n),
                _entropy_from_ptr(cb, kb, n),
                _entropy_from_ptr(cab, ka * kb, n))
    finally:
        free(buf)


def sq_distances(test_block, train_t, out=None):
    """Squared Euclidean distances, feature-order accumulation.

    ``test_block`` is (nt, nb) row-major, ``train_t`` is the transposed
    training matrix (nb, ns) row-major. Each output element accumulates
    (test - train)^2 feature by feature in index order, bit-identical to
    the NumPy fallback.
    """
    cdef Py_ssize_t nt = test_block.shape[0]
    cdef Py_ssize_t nb = test_block.shape[1]
    cdef Py_ssize_t ns = train_t.shape[1]
    if out is None:
        out = np.empty((nt, ns), dtype=np.float64)
    cdef double[:, ::1] d2 = out
    cdef const double[:, ::1] te = test_block
    cdef const double[:, ::1] tr = train_t
    cdef Py_ssize_t t0, s0, t1, s1, t, s, b
    cdef double tv, diff
    with nogil:
        for t0 in range(0, nt, 8):
            t1 = t0 + 8
            if t1 > nt:
                t1 = nt
            for s0 in range(0, ns, 512):
                s1 = s0 + 512
                if s1 > ns:
                    s1 = ns
                for t in range(t0, t1):
                    for s in range(s0, s1):
                        d2[t, s] = 0.0
                for b in range(nb):
                    for t in range(t0, t1):
                        tv = te[t, b]
                        for s in range(s0, s1):
                            diff = tv - tr[b, s]
                            d2[t, s] += diff * diff
    return out


cdef inline bint _pair_greater(double da, cnp.int64_t ia,
                               double db, cnp.int64_t ib) noexcept nogil:
    return da > db or (da == db and ia > ib)


cdef void _sift_down(double* hd, cnp.int64_t* hi, Py_ssize_t k,
                     Py_ssize_t root) noexcept nogil:
    cdef Py_ssize_t child
    cdef double d
    cdef cnp.int64_t i
    while True:
        child = 2 * root + 1
        if child >= k:
            return
        if child + 1 < k and _pair_greater(hd[child + 1], hi[child + 1],
                                           hd[child], hi[child]):
            child += 1
        if not _pair_greater(hd[child], hi[child], hd[root], hi[root]):
            return
        d = hd[root]
        i = hi[root]
        hd[root] = hd[child]
        hi[root] = hi[child]
        hd[child] = d
        hi[child] = i
        root = child


def nearest_k(d2_arr, Py_ssize_t k):
    """Indices of the k smallest entries per row, ordered ascending by
    (distance, index) — the same ordering a stable argsort produces."""
    cdef const double[:, ::1] d2 = d2_arr
    cdef Py_ssize_t nrows = d2.shape[0]
    cdef Py_ssize_t ns = d2.shape[1]
    if k > ns:
        raise ValueError("k exceeds the number of candidates")
    out = np.empty((nrows, k), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] sel = out
    cdef double* hd = <double*> malloc(k * sizeof(double))
    cdef cnp.int64_t* hi = <cnp.int64_t*> malloc(k * sizeof(cnp.int64_t))
    if hd == NULL or hi == NULL:
        free(hd)
        free(hi)
        raise MemoryError()
    cdef Py_ssize_t r, s, i, j
    cdef double d
    cdef cnp.int64_t idx
    with nogil:
        for r in range(nrows):
            for i in range(k):
                hd[i] = d2[r, i]
                hi[i] = i
            for i in range(k // 2 - 1, -1, -1):  # heapify (max at root)
                _sift_down(hd, hi, k, i)
            for s in range(k, ns):
                d = d2[r, s]
                if _pair_greater(hd[0], hi[0], d, s):
                    hd[0] = d
                    hi[0] = s
                    _sift_down(hd, hi, k, 0)
            # insertion sort the k survivors ascending by (distance, index)
            for i in range(1, k):
                d = hd[i]
                idx = hi[i]
                j = i
                while j > 0 and _pair_greater(hd[j - 1], hi[j - 1], d, idx):
                    hd[j] = hd[j - 1]
                    hi[j] = hi[j - 1]
                    j -= 1
                hd[j] = d
                hi[j] = idx
            for i in range(k):
                sel[r, i] = hi[i]
    free(hd)
    free(hi)
    return out


def entropy_terms3(a_arr, b_arr, c_arr,
                   Py_ssize_t ka, Py_ssize_t kb, Py_ssize_t kc):
    """All seven entropies of (a, b, c): singles, pairs and the triple."""
    cdef Py_ssize_t n = a_arr.shape[0]
    if ka * kb * kc > DENSE_CELL_CAP:
        return (joint_entropy_bits((a_arr,), (ka,)),
                joint_entropy_bits((b_arr,), (kb,)),
                joint_entropy_bits((c_arr,), (kc,)),
                joint_entropy_bits((a_arr, b_arr), (ka, kb)),
                joint_entropy_bits((a_arr, c_arr), (ka, kc)),
                joint_entropy_bits((b_arr, c_arr), (kb, kc)),
                joint_entropy_bits((a_arr, b_arr, c_arr), (ka, kb, kc)))
    cdef Py_ssize_t total = (ka + kb + kc + ka * kb + ka * kc + kb * kc
                             + ka * kb * kc)
    cdef cnp.int64_t* buf = <cnp.int64_t*> calloc(total, sizeof(cnp.int64_t))
    if buf == NULL:
        raise MemoryError()
    cdef cnp.int64_t* ca = buf
    cdef cnp.int64_t* cb = ca + ka
    cdef cnp.int64_t* cc = cb + kb
    cdef cnp.int64_t* cab = cc + kc
    cdef cnp.int64_t* cac = cab + ka * kb
    cdef cnp.int64_t* cbc = cac + ka * kc
    cdef cnp.int64_t* cabc = cbc + kb * kc
    cdef const cnp.int32_t[::1] a = a_arr
    cdef const cnp.int32_t[::1] b = b_arr
    cdef const cnp.int32_t[::1] c = c_arr
    cdef Py_ssize_t i, ia, ib, ic
    with nogil:
        for i in range(n):
            ia = a[i]
            ib = b[i]
            ic = c[i]
            ca[ia] += 1
            cb[ib] += 1
            cc[ic] += 1
            cab[ia * kb + ib] += 1
            cac[ia * kc + ic] += 1
            cbc[ib * kc + ic] += 1
            cabc[(ia * kb + ib) * kc + ic] += 1
    try:
        return (_entropy_from_ptr(ca, ka, n),
                _entropy_from_ptr(cb, kb, n),
                _entropy_from_ptr(cc, kc, n),
                _entropy_from_ptr(cab, ka * kb, n),
                _entropy_from_ptr(cac, ka * kc, n),
                _entropy_from_ptr(cbc, kb * kc, n),
                _entropy_from_ptr(cabc, ka * kb * kc, n))
    finally:
        free(buf)
