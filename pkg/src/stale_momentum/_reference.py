"""Pure-numpy implementations of the hot kernels.

These are the fallback used when the compiled extension is unavailable
(or disabled via STALE_MOMENTUM_PURE_PYTHON).  They must produce results
bit-identical to ``_kernels``: both consume the same pre-drawn arrays and
perform floating-point operations in the same order, and the test suite
asserts parity whenever the extension is importable.
"""

from __future__ import annotations

import numpy as np

DIVERGENCE_THRESHOLD = 1e12


def queue_race(work: np.ndarray, offsets: np.ndarray, total: int):
    """Merge M workers' write sequences into a global staleness trace.

    ``work[offsets[j]:offsets[j+1]]`` holds worker j's successive work
    durations; its writes happen at the prefix sums of those durations
    (all workers start at t=0).  The global order is by (write_time,
    worker_id).  The staleness of a write is the number of writes strictly
    between the same worker's previous write (its read point) and this
    one; a worker's first write has staleness equal to its global index.

    Returns ``(worker_ids, staleness, write_times, exhausted)`` where
    ``exhausted`` is the id of the chronologically first worker that ran
    out of pre-drawn durations before ``total`` writes completed, or -1.
    When ``exhausted >= 0`` the other outputs are invalid and the caller
    must extend that worker's draws and re-run.
    """
    workers = offsets.size - 1
    times_parts = []
    ids_parts = []
    for j in range(workers):
        seg = work[offsets[j] : offsets[j + 1]]
        times_parts.append(np.cumsum(seg))
        ids_parts.append(np.full(seg.size, j, dtype=np.int32))
    times_pool = np.concatenate(times_parts)
    ids_pool = np.concatenate(ids_parts)

    take = min(total, times_pool.size)
    order = np.lexsort((ids_pool, times_pool))[:take]
    ids = ids_pool[order]
    times = times_pool[order]

    counts = np.bincount(ids, minlength=workers)
    avail = np.diff(offsets)
    positions = np.arange(take, dtype=np.int64)
    last_pos = np.full(workers, -1, dtype=np.int64)
    np.maximum.at(last_pos, ids, positions)
    # A worker whose draws all land inside the first `total` events might
    # have written again before the final event: its next time is unknown.
    # The chronologically first such worker is reported, matching the
    # event-loop kernel.
    dry = (counts == avail) & (last_pos < total - 1)
    if dry.any():
        return None, None, None, int(np.flatnonzero(dry)[np.argmin(last_pos[dry])])

    staleness = np.empty(total, dtype=np.int64)
    for j in range(workers):
        pos_j = positions[ids == j]
        staleness[pos_j] = np.diff(pos_j, prepend=-1) - 1
    return ids, staleness, times, -1


def async_runs(
    lam: np.ndarray | None,
    hessian: np.ndarray | None,
    w_star: np.ndarray,
    w0: np.ndarray,
    alpha: float,
    mu_l: float,
    read_idx: np.ndarray,
    noise: np.ndarray,
    out: np.ndarray,
):
    """Roll ``n`` asynchronous heavy-ball runs forward for T steps.

    ``out`` has shape (T+1, n, d) and is filled in place; ``read_idx``
    (T, n) gives the already-clamped history index each run reads at each
    step, and ``noise`` (T, n, d) is the pre-scaled additive gradient
    noise (zeros when noise-free).  The update is

        w_{t+1} = w_t + mu_l (w_t - w_{t-1}) - alpha (grad f(w_read) + noise_t)

    with w_{-1} = w_0.  Exactly one of ``lam`` (diagonal hessian) and
    ``hessian`` must be given.  Returns (t, run) of the first divergent
    iterate, or None.
    """
    steps, n = read_idx.shape
    out[0] = w0
    rows = np.arange(n)
    w_prev = out[0]
    for t in range(steps):
        w_t = out[t]
        w_read = out[read_idx[t], rows]
        if lam is not None:
            g = lam * (w_read - w_star) + noise[t]
        else:
            g = (w_read - w_star) @ hessian + noise[t]
        w_next = w_t + mu_l * (w_t - w_prev) - alpha * g
        out[t + 1] = w_next
        bad = ~(np.abs(w_next) <= DIVERGENCE_THRESHOLD)
        if bad.any():
            return t + 1, int(np.argmax(bad.any(axis=1)))
        w_prev = w_t
    return None
