"""Hot loops, compiled with numba when available.

Two kernels carry the batched work of the package:

* ``bilinear_batch`` evaluates a sparse bilinear map given as COO entries
  ``out[o] += c * a[p] * b[q]`` for every row of a batch;
* ``factor_batch`` runs the generic triangular factorization (primal or dual
  ordering is encoded in the step tables) with optional pivot thresholding.

Setting the environment variable ``RIESZCONE_DISABLE_NUMBA=1`` (or not having
numba installed) selects the pure-numpy implementations, which vectorize over
the batch axis instead of looping over it. Both paths return identical
results up to floating-point summation order.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import sparse

try:  # pragma: no cover - depends on the environment
    if os.environ.get("RIESZCONE_DISABLE_NUMBA", "0") not in ("", "0", "false", "False"):
        raise ImportError("numba disabled by environment")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f


# status codes returned by the factorization
OK = 0
BAD_PIVOT = 1
NOT_CLOSURE = 2


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------
@njit(cache=True, nogil=True)
def _bilinear_nb(A, B, oi, ai, bi, c, dim_out):
    n = A.shape[0]
    out = np.zeros((n, dim_out))
    for s in range(n):
        for e in range(oi.shape[0]):
            out[s, oi[e]] += c[e] * A[s, ai[e]] * B[s, bi[e]]
    return out


@njit(cache=True, nogil=True)
def _factor_nb(X, piv, col_ptr, col_idx, upd_ptr, upd_o, upd_p, upd_q, upd_c,
               slot_row, threshold, tol):
    n, dim = X.shape
    nsteps = piv.shape[0]
    T = np.zeros((n, dim))
    psi = np.ones((n, nsteps), dtype=np.int8)
    status = np.zeros(n, dtype=np.int64)
    R = np.empty(dim)
    for s in range(n):
        for k in range(dim):
            R[k] = X[s, k]
        for st in range(nsteps):
            d = piv[st]
            p = R[d]
            if threshold:
                if p < -tol[s]:
                    status[s] = NOT_CLOSURE
                    break
                if p <= tol[s]:
                    psi[s, st] = 0
                    T[s, d] = 1.0
                    for k in range(col_ptr[st], col_ptr[st + 1]):
                        slot = col_idx[k]
                        rr = R[slot_row[slot]]
                        bound = 4.0 * tol[s] * max(abs(rr), 1.0)
                        if R[slot] * R[slot] > bound:
                            status[s] = NOT_CLOSURE
                    if status[s] != OK:
                        break
                    continue
            elif p <= 0.0:
                status[s] = BAD_PIVOT
                break
            t = np.sqrt(p)
            T[s, d] = t
            for k in range(col_ptr[st], col_ptr[st + 1]):
                slot = col_idx[k]
                T[s, slot] = R[slot] / t
            for e in range(upd_ptr[st], upd_ptr[st + 1]):
                R[upd_o[e]] -= upd_c[e] * T[s, upd_p[e]] * T[s, upd_q[e]]
    return T, psi, status


# --------------------------------------------------------------------------
# numpy implementations (vectorized over the batch)
# --------------------------------------------------------------------------
def _bilinear_np(A, B, oi, ai, bi, c, dim_out):
    W = A[:, ai] * B[:, bi] * c
    scatter = sparse.csr_matrix(
        (np.ones(oi.shape[0]), (np.arange(oi.shape[0]), oi)), shape=(oi.shape[0], dim_out)
    )
    return np.asarray(W @ scatter)


def _factor_np(X, piv, col_ptr, col_idx, upd_ptr, upd_o, upd_p, upd_q, upd_c,
               slot_row, threshold, tol):
    n, dim = X.shape
    nsteps = piv.shape[0]
    R = np.array(X, dtype=float, copy=True)
    T = np.zeros((n, dim))
    psi = np.ones((n, nsteps), dtype=np.int8)
    status = np.zeros(n, dtype=np.int64)
    for st in range(nsteps):
        d = piv[st]
        cols = col_idx[col_ptr[st]:col_ptr[st + 1]]
        live = status == OK
        p = R[:, d]
        if threshold:
            status[live & (p < -tol)] = NOT_CLOSURE
            dead = live & (p >= -tol) & (p <= tol)
            if cols.size:
                rr = np.abs(R[:, slot_row[cols]])
                bad = (R[:, cols] ** 2 > 4.0 * tol[:, None] * np.maximum(rr, 1.0)).any(axis=1)
                status[dead & bad] = NOT_CLOSURE
            psi[dead, st] = 0
            T[dead, d] = 1.0
            go = (status == OK) & ~dead
        else:
            status[live & (p <= 0.0)] = BAD_PIVOT
            go = status == OK
        t = np.sqrt(np.where(go, p, 1.0))
        T[go, d] = t[go]
        if cols.size:
            T[np.ix_(go, cols)] = R[np.ix_(go, cols)] / t[go, None]
        lo, hi = upd_ptr[st], upd_ptr[st + 1]
        if hi > lo:
            o, pp, qq, cc = upd_o[lo:hi], upd_p[lo:hi], upd_q[lo:hi], upd_c[lo:hi]
            W = T[go][:, pp] * T[go][:, qq] * cc
            delta = np.zeros((W.shape[0], dim))
            np.add.at(delta.T, o, W.T)
            R[go] -= delta
    return T, psi, status


def bilinear_batch(A, B, oi, ai, bi, c, dim_out):
    """Batched sparse bilinear map; ``A`` and ``B`` have shape ``(n, d)``."""
    A = np.ascontiguousarray(A, dtype=float)
    B = np.ascontiguousarray(B, dtype=float)
    if HAVE_NUMBA:
        return _bilinear_nb(A, B, oi, ai, bi, c, dim_out)
    return _bilinear_np(A, B, oi, ai, bi, c, dim_out)


def factor_batch(X, table, threshold=False, tol=None):
    """Run a factorization described by ``table`` on each row of ``X``.

    Returns
    -------
    T : ndarray, shape (n, dim)
    psi : ndarray of int8, shape (n, steps)
        Surviving pivots (all ones unless ``threshold``).
    status : ndarray of int
        ``OK``, ``BAD_PIVOT`` or ``NOT_CLOSURE`` per row.
    """
    X = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
    n = X.shape[0]
    if tol is None:
        tol = np.zeros(n)
    tol = np.ascontiguousarray(np.broadcast_to(np.asarray(tol, dtype=float), (n,)))
    args = (
        X, table.piv, table.col_ptr, table.col_idx, table.upd_ptr,
        table.upd_o, table.upd_p, table.upd_q, table.upd_c, table.slot_row,
        bool(threshold), tol,
    )
    if HAVE_NUMBA:
        return _factor_nb(*args)
    return _factor_np(*args)
