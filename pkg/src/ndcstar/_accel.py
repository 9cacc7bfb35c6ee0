"""Hot kernels on packed algebra elements.

An element of ``A = M_{d_1} + ... + M_{d_m}`` is packed as the concatenation of
its row-major blocks, so a batch of elements is a complex ``(N, P)`` array with
``P = sum(d_k**2)``.  Each kernel has a numba version and a pure-numpy version;
set ``NDCSTAR_DISABLE_NUMBA=1`` to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("NDCSTAR_DISABLE_NUMBA", "0").strip().lower()
NUMBA_DISABLED = _flag not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and not NUMBA_DISABLED


# numpy reference implementations


def conjugate_permute_numpy(xs, perms, unitaries, dims, offsets):
    n = xs.shape[0]
    out = np.zeros_like(xs)
    for k in range(len(dims)):
        d = dims[k]
        lo, hi = offsets[k], offsets[k] + d * d
        x = xs[:, lo:hi].reshape(n, d, d)
        u = unitaries[:, lo:hi].reshape(n, d, d)
        y = (u @ x @ u.conj().transpose(0, 2, 1)).reshape(n, d * d)
        targets = perms[:, k]
        for t in np.unique(targets):
            mask = targets == t
            out[mask, offsets[t]:offsets[t] + d * d] = y[mask]
    return out


def block_matmul_numpy(xs, ys, dims, offsets):
    n = xs.shape[0]
    out = np.empty_like(xs)
    for k in range(len(dims)):
        d = dims[k]
        lo, hi = offsets[k], offsets[k] + d * d
        out[:, lo:hi] = (xs[:, lo:hi].reshape(n, d, d) @ ys[:, lo:hi].reshape(n, d, d)).reshape(n, d * d)
    return out


# numba implementations

if numba is not None:

    @numba.njit(cache=False)
    def conjugate_permute_numba(xs, perms, unitaries, dims, offsets):
        n = xs.shape[0]
        m = dims.shape[0]
        out = np.zeros_like(xs)
        tmp = np.empty(dims.max() ** 2, dtype=xs.dtype)
        for r in range(n):
            for k in range(m):
                d = dims[k]
                src = offsets[k]
                dst = offsets[perms[r, k]]
                # tmp = U x, then out = tmp U^*
                for i in range(d):
                    for q in range(d):
                        acc = 0j
                        for p in range(d):
                            acc += unitaries[r, src + i * d + p] * xs[r, src + p * d + q]
                        tmp[i * d + q] = acc
                for i in range(d):
                    for j in range(d):
                        acc = 0j
                        for q in range(d):
                            acc += tmp[i * d + q] * np.conj(unitaries[r, src + j * d + q])
                        out[r, dst + i * d + j] = acc
        return out

    @numba.njit(cache=False)
    def block_matmul_numba(xs, ys, dims, offsets):
        n = xs.shape[0]
        m = dims.shape[0]
        out = np.empty_like(xs)
        for r in range(n):
            for k in range(m):
                d = dims[k]
                o = offsets[k]
                for i in range(d):
                    for j in range(d):
                        acc = 0j
                        for p in range(d):
                            acc += xs[r, o + i * d + p] * ys[r, o + p * d + j]
                        out[r, o + i * d + j] = acc
        return out

else:  # pragma: no cover
    conjugate_permute_numba = None
    block_matmul_numba = None


def _prep(arr):
    return np.ascontiguousarray(arr, dtype=np.complex128)


def conjugate_permute(xs, perms, unitaries, dims, offsets):
    """Apply ``x_k -> U_k x_k U_k^*`` moved to block ``perms[r, k]``, row by row."""
    xs = _prep(xs)
    unitaries = _prep(unitaries)
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    dims = np.asarray(dims, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64)
    if xs.shape[0] == 0:
        return xs.copy()
    if USE_NUMBA:
        return conjugate_permute_numba(xs, perms, unitaries, dims, offsets)
    return conjugate_permute_numpy(xs, perms, unitaries, dims, offsets)


def block_matmul(xs, ys, dims, offsets):
    """Row-wise algebra product of two packed batches of equal length."""
    xs = _prep(xs)
    ys = _prep(ys)
    dims = np.asarray(dims, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64)
    if xs.shape[0] == 0:
        return xs.copy()
    if USE_NUMBA:
        return block_matmul_numba(xs, ys, dims, offsets)
    return block_matmul_numpy(xs, ys, dims, offsets)
