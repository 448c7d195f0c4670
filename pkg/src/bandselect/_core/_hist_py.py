"""NumPy implementations of the counting and entropy kernels.

Fallback used when the compiled extension (``_histcore``) is not built.
Both backends implement the same contract:

* counts are exact int64 cell counts over the joint level space;
* entropy is the plug-in estimate H = log2(n) - sum(c * log2 c) / n over
  the *ascending-sorted* nonzero counts, so the value depends only on the
  count multiset and not on how the variables were paired.
"""

import math

import numpy as np

# Above this many joint cells, count by key sorting instead of a dense array.
DENSE_CELL_CAP = 1 << 22


def _fused_keys(codes, dims):
    key = codes[0].astype(np.int64)
    for arr, k in zip(codes[1:], dims[1:]):
        key = key * k + arr
    return key


def _key_counts(codes, dims):
    """Nonzero joint counts via sort + run-length (sparse level space)."""
    keys = np.sort(_fused_keys(codes, dims))
    if keys.size == 0:
        return np.zeros(0, dtype=np.int64)
    change = np.flatnonzero(keys[1:] != keys[:-1])
    bounds = np.concatenate(([0], change + 1, [keys.size]))
    return np.diff(bounds).astype(np.int64)


def _entropy_bits(counts, n):
    nz = np.sort(counts[counts > 0]).astype(np.float64)
    s = float(np.sum(nz * np.log2(nz)))
    return math.log2(n) - s / n


def dense_counts(codes, dims):
    """Dense joint count array of shape ``dims`` (1 to 3 variables)."""
    if not 1 <= len(codes) <= 3 or len(codes) != len(dims):
        raise ValueError("dense_counts supports 1 to 3 variables")
    ncells = math.prod(dims)
    counts = np.bincount(_fused_keys(codes, dims), minlength=ncells)
    return counts.astype(np.int64, copy=False).reshape(dims)


def joint_entropy_bits(codes, dims):
    """Plug-in joint entropy in bits of 1 to 3 coded variables."""
    n = codes[0].shape[0]
    if math.prod(dims) <= DENSE_CELL_CAP:
        counts = dense_counts(codes, dims).ravel()
    else:
        counts = _key_counts(codes, dims)
    return _entropy_bits(counts, n)


def entropy_terms2(a, b, ka, kb):
    """(H(a), H(b), H(a,b)) from a single counting pass."""
    n = a.shape[0]
    if ka * kb > DENSE_CELL_CAP:
        return (joint_entropy_bits((a,), (ka,)),
                joint_entropy_bits((b,), (kb,)),
                joint_entropy_bits((a, b), (ka, kb)))
    cab = dense_counts((a, b), (ka, kb))
    ca = cab.sum(axis=1)
    cb = cab.sum(axis=0)
    return (_entropy_bits(ca, n), _entropy_bits(cb, n),
            _entropy_bits(cab.ravel(), n))


def sq_distances(test_block, train_t, out=None):
    """Squared Euclidean distances, feature-order accumulation.

    ``train_t`` is the transposed training matrix (nb, ns). Features
    accumulate in index order so results are reproducible and match the
    compiled kernel bit for bit.
    """
    nt = test_block.shape[0]
    nb = test_block.shape[1]
    ns = train_t.shape[1]
    if out is None:
        out = np.empty((nt, ns), dtype=np.float64)
    out[:] = 0.0
    work = np.empty((nt, ns), dtype=np.float64)
    for b in range(nb):
        np.subtract(test_block[:, b, None], train_t[b][None, :], out=work)
        work *= work
        out += work
    return out


def nearest_k(d2, k):
    """Indices of the k smallest entries per row, ordered ascending by
    (distance, index); the stable sort keeps ascending index on ties."""
    if k > d2.shape[1]:
        raise ValueError("k exceeds the number of candidates")
    return np.argsort(d2, axis=1, kind="stable")[:, :k].astype(np.int64)


def entropy_terms3(a, b, c, ka, kb, kc):
    """All seven entropies of (a, b, c): singles, pairs and the triple."""
    n = a.shape[0]
    if ka * kb * kc > DENSE_CELL_CAP:
        return (joint_entropy_bits((a,), (ka,)),
                joint_entropy_bits((b,), (kb,)),
                joint_entropy_bits((c,), (kc,)),
                joint_entropy_bits((a, b), (ka, kb)),
                joint_entropy_bits((a, c), (ka, kc)),
                joint_entropy_bits((b, c), (kb, kc)),
                joint_entropy_bits((a, b, c), (ka, kb, kc)))
    cabc = dense_counts((a, b, c), (ka, kb, kc))
    cab = cabc.sum(axis=2)
    cac = cabc.sum(axis=1)
    cbc = cabc.sum(axis=0)
    ca = cab.sum(axis=1)
    cb = cab.sum(axis=0)
    cc = cbc.sum(axis=0)
    return (_entropy_bits(ca, n), _entropy_bits(cb, n), _entropy_bits(cc, n),
            _entropy_bits(cab.ravel(), n), _entropy_bits(cac.ravel(), n),
            _entropy_bits(cbc.ravel(), n), _entropy_bits(cabc.ravel(), n))
