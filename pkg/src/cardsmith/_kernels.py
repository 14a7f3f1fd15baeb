"""Hot numeric kernels for bootstrap resampling.

The only compute-heavy loop in the pipeline is the bootstrap: B replicates,
each resampling n prediction records and re-deriving every metric. Two
implementations live here:

* a numba ``@njit`` kernel (default when numba imports cleanly);
* a vectorized pure-numpy fallback, selected by ``CARDSMITH_NO_NUMBA=1``
  or picked automatically when numba is unavailable.

Both produce bit-identical output. Reproducibility rests on a fixed,
documented generator: draw j of replicate r is the splitmix64 finalizer
applied to ``state0(seed, r) + j * PHI`` (counter-based, so results do not
depend on execution order or parallelism), with

    state0(seed, r) = mix64(seed ^ mix64(r))
    mix64(x)        = splitmix64 finalizer of (x + PHI)

and indices taken modulo n (bias < n / 2**64, irrelevant here). The stat
matrix layout is column 0 accuracy, 1-3 macro P/R/F1, then per-class
P/R/F1 triples in label order (matching metrics.metric_names).

``benchmarks/bench_bootstrap.py`` compares the two paths.
"""

from __future__ import annotations

import os

import numpy as np

_PHI = np.uint64(0x9E3779B97F4A7C15)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)

_U64_MASK = (1 << 64) - 1


def _mix64(z):
    """splitmix64 finalizer of (z + PHI); elementwise on uint64 arrays or scalars."""
    z = z + _PHI
    z = (z ^ (z >> _S30)) * _C1
    z = (z ^ (z >> _S27)) * _C2
    return z ^ (z >> _S31)


def seed_to_u64(seed: int) -> np.uint64:
    return np.uint64(int(seed) & _U64_MASK)


def resample_indices_numpy(n: int, replicates: int, seed: int) -> np.ndarray:
    """(replicates, n) int64 matrix of bootstrap indices into [0, n)."""
    seed_u = seed_to_u64(seed)
    r = np.arange(replicates, dtype=np.uint64)
    state0 = _mix64(seed_u ^ _mix64(r))  # (B,)
    steps = np.arange(n, dtype=np.uint64) * _PHI  # wraps, intentional
    z = _mix64(state0[:, None] + steps[None, :])  # (B, n)
    return (z % np.uint64(n)).astype(np.int64)


def _stats_from_counts(cms: np.ndarray, n: int, k: int) -> np.ndarray:
    """Per-replicate metric rows from a (B, K, K) stack of count matrices."""
    b = cms.shape[0]
    diag = cms[:, np.arange(k), np.arange(k)].astype(np.float64)
    rowsum = cms.sum(axis=2).astype(np.float64)
    colsum = cms.sum(axis=1).astype(np.float64)
    tp = diag
    p_den = colsum
    r_den = rowsum
    prec = np.divide(tp, p_den, out=np.zeros_like(tp), where=p_den > 0)
    rec = np.divide(tp, r_den, out=np.zeros_like(tp), where=r_den > 0)
    f_den = prec + rec
    f1 = np.divide(2.0 * prec * rec, f_den, out=np.zeros_like(tp), where=f_den > 0)

    out = np.empty((b, 4 + 3 * k), dtype=np.float64)
    out[:, 0] = diag.sum(axis=1) / n
    out[:, 1] = prec.sum(axis=1) / k
    out[:, 2] = rec.sum(axis=1) / k
    out[:, 3] = f1.sum(axis=1) / k
    out[:, 4::3] = prec
    out[:, 5::3] = rec
    out[:, 6::3] = f1
    return out


def bootstrap_stats_numpy(
    y_true: np.ndarray, y_pred: np.ndarray, k: int, replicates: int, seed: int
) -> np.ndarray:
    """Vectorized fallback path; see module docstring for the layout."""
    n = y_true.shape[0]
    idx = resample_indices_numpy(n, replicates, seed)
    t_s = y_true[idx]
    p_s = y_pred[idx]
    offsets = np.arange(replicates, dtype=np.int64)[:, None] * (k * k)
    flat = (offsets + t_s * k + p_s).ravel()
    cms = np.bincount(flat, minlength=replicates * k * k).reshape(replicates, k, k)
    return _stats_from_counts(cms, n, k)


def _bootstrap_stats_loops(y_true, y_pred, k, replicates, seed_u):  # pragma: no cover
    # njit-compiled below; the numpy path is the interpreter fallback.
    n = y_true.shape[0]
    n_u = np.uint64(n)
    out = np.zeros((replicates, 4 + 3 * k), dtype=np.float64)
    cm = np.zeros((k, k), dtype=np.int64)
    for r in range(replicates):
        for i in range(k):
            for j in range(k):
                cm[i, j] = 0
        state0 = _mix64(seed_u ^ _mix64(np.uint64(r)))
        for j in range(n):
            z = _mix64(state0 + np.uint64(j) * _PHI)
            idx = np.int64(z % n_u)
            cm[y_true[idx], y_pred[idx]] += 1
        correct = 0
        for i in range(k):
            correct += cm[i, i]
        out[r, 0] = correct / n
        mp = 0.0
        mr = 0.0
        mf = 0.0
        for i in range(k):
            tp = cm[i, i]
            colsum = 0
            rowsum = 0
            for j in range(k):
                colsum += cm[j, i]
                rowsum += cm[i, j]
            prec = tp / colsum if colsum > 0 else 0.0
            rec = tp / rowsum if rowsum > 0 else 0.0
            f1 = 2.0 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
            out[r, 4 + 3 * i] = prec
            out[r, 4 + 3 * i + 1] = rec
            out[r, 4 + 3 * i + 2] = f1
            mp += prec
            mr += rec
            mf += f1
        out[r, 1] = mp / k
        out[r, 2] = mr / k
        out[r, 3] = mf / k
    return out


def _want_numba() -> bool:
    return os.environ.get("CARDSMITH_NO_NUMBA", "").strip() not in ("1", "true", "yes")


_NUMBA_KERNEL = None
if _want_numba():
    try:
        import numba

        _mix64_jit = numba.njit(cache=True)(_mix64)

        @numba.njit(cache=True)
        def _kernel(y_true, y_pred, k, replicates, seed_u):
            n = y_true.shape[0]
            n_u = np.uint64(n)
            out = np.zeros((replicates, 4 + 3 * k), dtype=np.float64)
            cm = np.zeros((k, k), dtype=np.int64)
            for r in range(replicates):
                for i in range(k):
                    for j in range(k):
                        cm[i, j] = 0
                state0 = _mix64_jit(seed_u ^ _mix64_jit(np.uint64(r)))
                for j in range(n):
                    z = _mix64_jit(state0 + np.uint64(j) * _PHI)
                    idx = np.int64(z % n_u)
                    cm[y_true[idx], y_pred[idx]] += 1
                correct = 0
                for i in range(k):
                    correct += cm[i, i]
                out[r, 0] = correct / n
                mp = 0.0
                mr = 0.0
                mf = 0.0
                for i in range(k):
                    tp = cm[i, i]
                    colsum = 0
                    rowsum = 0
                    for j in range(k):
                        colsum += cm[j, i]
                        rowsum += cm[i, j]
                    prec = tp / colsum if colsum > 0 else 0.0
                    rec = tp / rowsum if rowsum > 0 else 0.0
                    f1 = 2.0 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
                    out[r, 4 + 3 * i] = prec
                    out[r, 4 + 3 * i + 1] = rec
                    out[r, 4 + 3 * i + 2] = f1
                    mp += prec
                    mr += rec
                    mf += f1
                out[r, 1] = mp / k
                out[r, 2] = mr / k
                out[r, 3] = mf / k
            return out

        _NUMBA_KERNEL = _kernel
    except ImportError:  # pragma: no cover
        _NUMBA_KERNEL = None


def bootstrap_stats_numba(
    y_true: np.ndarray, y_pred: np.ndarray, k: int, replicates: int, seed: int
) -> np.ndarray:
    if _NUMBA_KERNEL is None:
        raise RuntimeError("numba backend unavailable (not installed or disabled)")
    return _NUMBA_KERNEL(
        np.ascontiguousarray(y_true, dtype=np.int64),
        np.ascontiguousarray(y_pred, dtype=np.int64),
        np.int64(k),
        np.int64(replicates),
        seed_to_u64(seed),
    )


def active_backend() -> str:
    return "numba" if _NUMBA_KERNEL is not None else "numpy"


def bootstrap_stats(
    y_true: np.ndarray, y_pred: np.ndarray, k: int, replicates: int, seed: int
) -> np.ndarray:
    """(replicates, 4 + 3K) stat matrix on the active backend."""
    if _NUMBA_KERNEL is not None:
        return bootstrap_stats_numba(y_true, y_pred, k, replicates, seed)
    return bootstrap_stats_numpy(y_true, y_pred, k, replicates, seed)
