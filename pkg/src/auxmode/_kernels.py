"""Hot loop of the Monte Carlo engine: SRSWOR draws reduced to naive modes.

Two implementations share one contract and produce bit-identical output:

* ``naive_modes_numba``: ``@njit(parallel=True)``, one replication per
  ``prange`` iteration.
* ``naive_modes_numpy``: vectorized over blocks of replications.

``naive_modes`` dispatches to the compiled path unless numba is missing or
the environment variable ``AUXMODE_DISABLE_NUMBA`` is set to a non-empty
value other than ``0``.  The choice never changes results, only speed.

Bit-identity rests on three choices made in both paths: the same SplitMix64
outputs and float-to-index scaling for the partial Fisher-Yates shuffle,
sample indices sorted before gathering, and strictly left-to-right
summation for the sample means.  Medians are order statistics, so the
compiled path may find them by selection instead of a full sort.
"""

from __future__ import annotations

import os

import numpy as np

from .rng import DOUBLE_UNIT, GOLDEN_GAMMA, uniform_at_array

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

_flag = os.environ.get("AUXMODE_DISABLE_NUMBA", "")
USE_NUMBA = HAVE_NUMBA and _flag in ("", "0")

# rows per block in the numpy path; bounds the (block, N) index matrix
BLOCK = 256
# work units handed to numba threads; fixed so scheduling never depends on the machine
CHUNKS = 64


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def naive_modes_numpy(y, x, n, keys):
    """Naive modes ``3 median - 2 mean`` of y and x for each stream key.

    Parameters
    ----------
    y, x : ndarray of float64, shape (N,)
    n : int
        Sample size, ``1 <= n <= N``.
    keys : ndarray of uint64, shape (M,)

    Returns
    -------
    ndarray of float64, shape (M, 2)
        Columns are the naive modes of y and of x.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    keys = np.asarray(keys, dtype=np.uint64)
    N = y.shape[0]
    M = keys.shape[0]
    out = np.empty((M, 2), dtype=np.float64)
    half = n // 2
    for start in range(0, M, BLOCK):
        kb = keys[start:start + BLOCK]
        rows = np.arange(kb.shape[0])
        perm = np.tile(np.arange(N, dtype=np.int64), (kb.shape[0], 1))
        for j in range(n):
            u = uniform_at_array(kb, j)
            r = j + (u * (N - j)).astype(np.int64)
            a = perm[rows, j].copy()
            perm[rows, j] = perm[rows, r]
            perm[rows, r] = a
        idx = np.sort(perm[:, :n], axis=1)
        for col, v in enumerate((y, x)):
            vs = v[idx]
            # cumsum is strictly sequential, matching the compiled loop
            mean = np.cumsum(vs, axis=1)[:, -1] / n
            vs.sort(axis=1)
            if n % 2:
                med = vs[:, half]
            else:
                med = 0.5 * (vs[:, half - 1] + vs[:, half])
            out[start:start + BLOCK, col] = 3.0 * med - 2.0 * mean
    return out


if HAVE_NUMBA:
    _G = np.uint64(GOLDEN_GAMMA)
    _M1 = np.uint64(0xBF58476D1CE4E5B9)
    _M2 = np.uint64(0x94D049BB133111EB)
    _S30 = np.uint64(30)
    _S27 = np.uint64(27)
    _S31 = np.uint64(31)
    _S11 = np.uint64(11)

    @njit(cache=True)
    def _uniform(key, j):
        z = key + np.uint64(j + 1) * _G
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        z = z ^ (z >> _S31)
        return np.float64(z >> _S11) * DOUBLE_UNIT

    @njit(cache=True)
    def _select(vs, k):
        # Hoare quickselect: afterwards vs[k] is the k-th smallest and
        # everything left of it is no larger
        lo, hi = 0, vs.shape[0] - 1
        while lo < hi:
            pivot = vs[(lo + hi) // 2]
            i, j = lo, hi
            while i <= j:
                while vs[i] < pivot:
                    i += 1
                while vs[j] > pivot:
                    j -= 1
                if i <= j:
                    t = vs[i]
                    vs[i] = vs[j]
                    vs[j] = t
                    i += 1
                    j -= 1
            if k <= j:
                hi = j
            elif k >= i:
                lo = i
            else:
                break
        return vs[k]

    @njit(cache=True)
    def _naive_mode(vs, n):
        s = 0.0
        for i in range(n):
            s += vs[i]
        mean = s / n
        half = n // 2
        upper = _select(vs, half)
        if n % 2:
            med = upper
        else:
            lower = vs[0]
            for i in range(1, half):
                if vs[i] > lower:
                    lower = vs[i]
            med = 0.5 * (lower + upper)
        return 3.0 * med - 2.0 * mean

    @njit(parallel=True, cache=True)
    def _naive_modes_kernel(y, x, n, keys, out, chunks):
        N = y.shape[0]
        M = keys.shape[0]
        for c in prange(chunks):
            # one identity permutation per chunk; each draw's swaps are
            # undone afterwards, so a draw costs O(n) rather than O(N)
            perm = np.arange(N)
            swaps = np.empty(n, dtype=np.int64)
            ys = np.empty(n)
            xs = np.empty(n)
            for k in range(c * M // chunks, (c + 1) * M // chunks):
                key = keys[k]
                for j in range(n):
                    u = _uniform(key, j)
                    r = j + np.int64(u * (N - j))
                    swaps[j] = r
                    t = perm[j]
                    perm[j] = perm[r]
                    perm[r] = t
                idx = np.sort(perm[:n])
                for j in range(n - 1, -1, -1):
                    r = swaps[j]
                    t = perm[j]
                    perm[j] = perm[r]
                    perm[r] = t
                for i in range(n):
                    ys[i] = y[idx[i]]
                    xs[i] = x[idx[i]]
                out[k, 0] = _naive_mode(ys, n)
                out[k, 1] = _naive_mode(xs, n)

    def naive_modes_numba(y, x, n, keys):
        """Compiled twin of :func:`naive_modes_numpy`."""
        y = np.ascontiguousarray(y, dtype=np.float64)
        x = np.ascontiguousarray(x, dtype=np.float64)
        keys = np.ascontiguousarray(keys, dtype=np.uint64)
        out = np.empty((keys.shape[0], 2), dtype=np.float64)
        chunks = max(1, min(keys.shape[0], CHUNKS))
        _naive_modes_kernel(y, x, int(n), keys, out, chunks)
        return out

else:  # pragma: no cover
    naive_modes_numba = None


def naive_modes(y, x, n, keys, threads=None):
    """Dispatch to the selected backend.

    ``threads`` caps numba's worker count for this call; it has no effect on
    the result.
    """
    if not USE_NUMBA:
        return naive_modes_numpy(y, x, n, keys)
    if threads is None:
        return naive_modes_numba(y, x, n, keys)
    prev = numba.get_num_threads()
    numba.set_num_threads(min(int(threads), numba.config.NUMBA_NUM_THREADS))
    try:
        return naive_modes_numba(y, x, n, keys)
    finally:
        numba.set_num_threads(prev)

