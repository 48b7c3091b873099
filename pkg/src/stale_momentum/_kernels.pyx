# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: the queue event race and async-SGD stepping.

Semantics match ``_reference`` exactly; both consume pre-drawn arrays and
keep the same floating-point operation order, so outputs are bit-identical
(the extension is compiled with -ffp-contract=off to rule out FMA
contraction).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double DIVERGENCE_THRESHOLD = 1e12


def queue_race(const double[::1] work, const long long[::1] offsets, long long total):
    """Event-loop counterpart of ``_reference.queue_race``.

    Runs a priority queue (binary min-heap keyed by (next_write_time,
    worker_id)) over the M workers' pre-drawn work durations.
    """
    cdef Py_ssize_t workers = offsets.shape[0] - 1
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ids_arr = np.empty(total, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stal_arr = np.empty(total, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] times_arr = np.empty(total, dtype=np.float64)
    cdef cnp.int32_t[::1] ids = ids_arr
    cdef cnp.int64_t[::1] stal = stal_arr
    cdef double[::1] times = times_arr

    # heap of (time, worker); ptr[j] = next unread draw for worker j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ht_arr = np.empty(workers, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hid_arr = np.empty(workers, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ptr_arr = np.empty(workers, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] last_arr = np.full(workers, -1, dtype=np.int64)
    cdef double[::1] ht = ht_arr
    cdef cnp.int64_t[::1] hid = hid_arr
    cdef cnp.int64_t[::1] ptr = ptr_arr
    cdef cnp.int64_t[::1] last_idx = last_arr

    cdef Py_ssize_t size = 0
    cdef Py_ssize_t j, i, child, parent
    cdef long long k
    cdef double t, tnew
    cdef long long w

    for j in range(workers):
        ptr[j] = offsets[j]
        _heap_push(ht, hid, &size, work[offsets[j]], j)

    k = 0
    while k < total:
        t = ht[0]
        w = hid[0]
        _heap_pop(ht, hid, &size)
        times[k] = t
        ids[k] = <cnp.int32_t> w
        stal[k] = k - last_idx[w] - 1
        last_idx[w] = k
        ptr[w] += 1
        if ptr[w] < offsets[w + 1]:
            tnew = t + work[ptr[w]]
            _heap_push(ht, hid, &size, tnew, w)
        elif k + 1 < total:
            return None, None, None, int(w)
        k += 1

    return ids_arr, stal_arr, times_arr, -1


cdef inline bint _heap_less(double ta, long long ia, double tb, long long ib) nogil:
    return ta < tb or (ta == tb and ia < ib)


cdef void _heap_push(double[::1] ht, cnp.int64_t[::1] hid, Py_ssize_t* size,
                     double t, long long w) nogil:
    cdef Py_ssize_t i = size[0]
    cdef Py_ssize_t parent
    ht[i] = t
    hid[i] = w
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _heap_less(ht[i], hid[i], ht[parent], hid[parent]):
            ht[i], ht[parent] = ht[parent], ht[i]
            hid[i], hid[parent] = hid[parent], hid[i]
            i = parent
        else:
            break


cdef void _heap_pop(double[::1] ht, cnp.int64_t[::1] hid, Py_ssize_t* size) nogil:
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t child
    size[0] -= 1
    ht[0] = ht[size[0]]
    hid[0] = hid[size[0]]
    while True:
        child = 2 * i + 1
        if child >= size[0]:
            break
        if child + 1 < size[0] and _heap_less(ht[child + 1], hid[child + 1],
                                              ht[child], hid[child]):
            child += 1
        if _heap_less(ht[child], hid[child], ht[i], hid[i]):
            ht[i], ht[child] = ht[child], ht[i]
            hid[i], hid[child] = hid[child], hid[i]
            i = child
        else:
            break


def async_runs(const double[::1] lam, const double[::1] w_star, const double[::1] w0,
               double alpha, double mu_l,
               const long long[:, ::1] read_idx, const double[:, :, ::1] noise,
               double[:, :, ::1] out):
    """Compiled counterpart of ``_reference.async_runs`` (diagonal hessian).

    Iterates t-major / run-ascending so the first divergent (t, run) pair
    matches the reference implementation.
    """
    cdef Py_ssize_t steps = read_idx.shape[0]
    cdef Py_ssize_t n = read_idx.shape[1]
    cdef Py_ssize_t d = lam.shape[0]
    cdef Py_ssize_t t, r, i
    cdef long long rd
    cdef double wt, wp, g, wn
    cdef bint bad

    for r in range(n):
        for i in range(d):
            out[0, r, i] = w0[i]

    with nogil:
        for t in range(steps):
            for r in range(n):
                rd = read_idx[t, r]
                bad = 0
                for i in range(d):
                    wt = out[t, r, i]
                    wp = out[t - 1, r, i] if t > 0 else out[0, r, i]
                    g = lam[i] * (out[rd, r, i] - w_star[i]) + noise[t, r, i]
                    wn = wt + mu_l * (wt - wp) - alpha * g
                    out[t + 1, r, i] = wn
                    if not (wn <= DIVERGENCE_THRESHOLD and wn >= -DIVERGENCE_THRESHOLD):
                        bad = 1
                if bad:
                    with gil:
                        return int(t + 1), int(r)
    return None
