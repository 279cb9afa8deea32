"""Hot numeric kernels with twin implementations.

Two inner loops dominate runtime: column-pivoted Householder QR (sensor
ranking) and the greedy smallest-singular-value row scan (principled
oversampling). Each has a numba ``@njit`` version and a vectorized
pure-numpy fallback. The active path is fixed at import time from the
``SPARSESENSE_BACKEND`` environment variable:

* ``auto`` (default): numba when importable, numpy otherwise
* ``numba``: require numba, fail loudly if missing
* ``numpy``: force the fallback

``benchmarks/bench_kernels.py`` times the two paths against each other.
Both paths use the same pivot rule (largest residual norm, ties broken by
the lowest index) and the same norm-downdating scheme, so they select
identical pivots except in pathological near-tie cases at machine
precision.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        return wrap


_BACKEND = os.environ.get("SPARSESENSE_BACKEND", "auto").strip().lower()
if _BACKEND not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"SPARSESENSE_BACKEND must be 'auto', 'numba' or 'numpy', got {_BACKEND!r}"
    )
if _BACKEND == "numba" and not NUMBA_AVAILABLE:
    raise RuntimeError("SPARSESENSE_BACKEND=numba but numba is not importable")

# Residual column norms are downdated after each reflection; once an estimate
# has lost this fraction of its last exactly-computed value, cancellation may
# dominate and the norm is recomputed from scratch.
_NORM_GUARD = 1e-10


def using_numba() -> bool:
    """True when the njit kernel path is active."""
    return NUMBA_AVAILABLE and _BACKEND != "numpy"


def backend_name() -> str:
    return "numba" if using_numba() else "numpy"


# ---------------------------------------------------------------------------
# Column-pivoted Householder QR
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _cpqr_numba(W, k, Q, accumulate_q):
    """In-place Householder CPQR on W (r x n); returns (perm, r_diag).

    Each step picks the remaining column with the largest residual norm
    (strict > scan, so exact ties go to the lowest index), swaps it into
    place and deflates with a Householder reflection. Q is accumulated only
    when requested to keep the placement hot path lean.
    """
    r, n = W.shape
    perm = np.arange(n)
    r_diag = np.zeros(k)
    # W is C-ordered, so all hot sweeps run row-contiguously over j.
    norms2 = np.zeros(n)
    for i in range(r):
        for j in range(n):
            norms2[j] += W[i, j] * W[i, j]
    orig2 = norms2.copy()
    v = np.zeros(r)
    dots = np.zeros(n)

    for step in range(k):
        best = step
        bestv = norms2[step]
        for j in range(step + 1, n):
            if norms2[j] > bestv:
                best = j
                bestv = norms2[j]
        if best != step:
            for i in range(r):
                t = W[i, step]
                W[i, step] = W[i, best]
                W[i, best] = t
            perm[step], perm[best] = perm[best], perm[step]
            norms2[step], norms2[best] = norms2[best], norms2[step]
            orig2[step], orig2[best] = orig2[best], orig2[step]

        alpha2 = 0.0
        for i in range(step, r):
            alpha2 += W[i, step] * W[i, step]
        alpha = np.sqrt(alpha2)
        r_diag[step] = alpha
        if alpha == 0.0:
            # Residual block is numerically zero; remaining pivots fall
            # through in lowest-index order with zero diagonals.
            continue

        sign = 1.0 if W[step, step] >= 0.0 else -1.0
        v[step] = W[step, step] + sign * alpha
        for i in range(step + 1, r):
            v[i] = W[i, step]
        vnorm2 = 0.0
        for i in range(step, r):
            vnorm2 += v[i] * v[i]
        beta = 2.0 / vnorm2

        W[step, step] = -sign * alpha
        for i in range(step + 1, r):
            W[i, step] = 0.0
        for j in range(step + 1, n):
            dots[j] = 0.0
        for i in range(step, r):
            vi = v[i]
            for j in range(step + 1, n):
                dots[j] += vi * W[i, j]
        for i in range(step, r):
            c = beta * v[i]
            for j in range(step + 1, n):
                W[i, j] -= c * dots[j]

        if accumulate_q:
            for i in range(r):
                dot = 0.0
                for jj in range(step, r):
                    dot += Q[i, jj] * v[jj]
                c = beta * dot
                for jj in range(step, r):
                    Q[i, jj] -= c * v[jj]

        for j in range(step + 1, n):
            t = W[step, j]
            est = norms2[j] - t * t
            if est < _NORM_GUARD * orig2[j] or est < 0.0:
                s = 0.0
                for i in range(step + 1, r):
                    s += W[i, j] * W[i, j]
                est = s
                orig2[j] = s
            norms2[j] = est

    return perm, r_diag


def _cpqr_numpy(W, k, Q, accumulate_q):
    """Vectorized twin of :func:`_cpqr_numba`; same pivot and downdate rules."""
    r, n = W.shape
    perm = np.arange(n)
    r_diag = np.zeros(k)
    norms2 = np.einsum("ij,ij->j", W, W)
    orig2 = norms2.copy()

    for step in range(k):
        best = step + int(np.argmax(norms2[step:]))
        if best != step:
            W[:, [step, best]] = W[:, [best, step]]
            perm[[step, best]] = perm[[best, step]]
            norms2[[step, best]] = norms2[[best, step]]
            orig2[[step, best]] = orig2[[best, step]]

        x = W[step:, step]
        alpha = float(np.sqrt(np.dot(x, x)))
        r_diag[step] = alpha
        if alpha == 0.0:
            continue

        sign = 1.0 if x[0] >= 0.0 else -1.0
        v = x.copy()
        v[0] += sign * alpha
        beta = 2.0 / float(np.dot(v, v))

        W[step, step] = -sign * alpha
        W[step + 1 :, step] = 0.0
        if step + 1 < n:
            block = W[step:, step + 1 :]
            block -= np.outer(beta * v, v @ block)

        if accumulate_q:
            qb = Q[:, step:]
            qb -= np.outer(qb @ v, beta * v)

        if step + 1 < n:
            t = W[step, step + 1 :]
            est = norms2[step + 1 :] - t * t
            stale = (est < _NORM_GUARD * orig2[step + 1 :]) | (est < 0.0)
            if np.any(stale):
                cols = step + 1 + np.nonzero(stale)[0]
                fresh = np.einsum("ij,ij->j", W[step + 1 :, cols], W[step + 1 :, cols])
                est[np.nonzero(stale)[0]] = fresh
                orig2[cols] = fresh
            norms2[step + 1 :] = est

    return perm, r_diag


def cpqr_select(V: np.ndarray, k: int, want_q: bool = False):
    """Run k steps of CPQR on a copy of V.

    Returns ``(perm, r_diag, R, Q)`` where ``perm`` is the full column
    permutation (its first k entries are the pivots in selection order),
    ``r_diag`` the |R_ii| magnitudes, ``R`` the transformed matrix (upper
    triangular in its first k columns) and ``Q`` the accumulated orthogonal
    factor, or None unless ``want_q``. The input is never mutated.
    """
    W = np.array(V, dtype=np.float64, order="C", copy=True)
    r = W.shape[0]
    Q = np.eye(r) if want_q else np.eye(1)
    if using_numba():
        perm, r_diag = _cpqr_numba(W, k, Q, want_q)
    else:
        perm, r_diag = _cpqr_numpy(W, k, Q, want_q)
    return perm, r_diag, W, (Q if want_q else None)


# ---------------------------------------------------------------------------
# Greedy smallest-singular-value oversampling scan
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _sigma_min_tail_numba(psi, selected, M, count):
    """Append `count` row indices, each maximizing lambda_min of the grown
    Gram matrix M + psi[i] psi[i]^T (equivalently sigma_min of the grown
    measurement matrix). Ties go to the lowest row index."""
    n, r = psi.shape
    out = np.empty(count, dtype=np.int64)
    T = np.empty((r, r))
    for t in range(count):
        best = -1
        bestval = -np.inf
        for i in range(n):
            if selected[i]:
                continue
            for a in range(r):
                for b in range(r):
                    T[a, b] = M[a, b] + psi[i, a] * psi[i, b]
            w = np.linalg.eigvalsh(T)
            if w[0] > bestval:
                best = i
                bestval = w[0]
        out[t] = best
        selected[best] = True
        for a in range(r):
            for b in range(r):
                M[a, b] += psi[best, a] * psi[best, b]
    return out


def _sigma_min_tail_numpy(psi, selected, M, count):
    """Vectorized twin of :func:`_sigma_min_tail_numba` (stacked eigvalsh)."""
    n, r = psi.shape
    out = np.empty(count, dtype=np.int64)
    for t in range(count):
        cand = np.nonzero(~selected)[0]
        rows = psi[cand]
        stack = M[None, :, :] + rows[:, :, None] * rows[:, None, :]
        lam = np.linalg.eigvalsh(stack)[:, 0]
        best = int(cand[int(np.argmax(lam))])
        out[t] = best
        selected[best] = True
        M += np.outer(psi[best], psi[best])
    return out


def sigma_min_tail(psi: np.ndarray, prefix: np.ndarray, count: int) -> np.ndarray:
    """Indices of `count` greedy sigma_min-maximizing rows appended to prefix."""
    psi = np.ascontiguousarray(psi, dtype=np.float64)
    n = psi.shape[0]
    selected = np.zeros(n, dtype=np.bool_)
    selected[prefix] = True
    base = psi[prefix]
    M = np.ascontiguousarray(base.T @ base)
    if using_numba():
        return _sigma_min_tail_numba(psi, selected, M, count)
    return _sigma_min_tail_numpy(psi, selected, M, count)


def warmup() -> None:
    """Force JIT compilation of the njit kernels (no-op on the numpy path).

    Call before timing anything that goes through the kernels, so compile
    time is not attributed to the first measured run.
    """
    if not using_numba():
        return
    w = np.eye(3)
    _cpqr_numba(w.copy(), 2, np.eye(3), True)
    _cpqr_numba(w.copy(), 2, np.eye(1), False)
    psi = np.arange(1.0, 5.0).reshape(4, 1)
    sel = np.zeros(4, dtype=np.bool_)
    sel[0] = True
    M = np.ascontiguousarray(psi[:1].T @ psi[:1])
    _sigma_min_tail_numba(psi, sel, M, 2)
