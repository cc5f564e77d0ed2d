# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the hot inference loops.

Mirror of ``dpnilm._kernels_py``: same functions, same operation order, so
results are bit-identical across backends. Keep the two files in sync.
"""

import numpy as np

BACKEND_NAME = "cython"


cdef int _fill(const double[::1] powers, const long long[::1] order,
               double k, double delta, bint saturate,
               double[::1] out, double* obj) noexcept nogil:
    cdef Py_ssize_t n = powers.shape[0]
    cdef Py_ssize_t i, pos
    cdef long long j
    cdef double target, total, resid, p, f
    for i in range(n):
        out[i] = 0.0
    obj[0] = 0.0
    if k <= delta:
        return 0
    target = k - delta
    total = 0.0
    for i in range(n):
        total += powers[i]
    if target > total:
        if not saturate:
            obj[0] = -1.0
            return 3
        for i in range(n):
            out[i] = 1.0
        obj[0] = <double> n
        return 2
    resid = target
    for pos in range(n):
        j = order[pos]
        if resid <= 0.0:
            break
        p = powers[j]
        if resid >= p:
            out[j] = 1.0
            obj[0] += 1.0
            resid -= p
        else:
            f = resid / p
            out[j] = f
            obj[0] += f
            resid = 0.0
            break
    return 1


def solve_fractions(const double[::1] powers, const long long[::1] order,
                    double k, double delta, bint saturate, double[::1] out):
    """Cheapest switch fractions explaining a meter jump of magnitude ``k``."""
    cdef double obj = 0.0
    cdef int status
    status = _fill(powers, order, k, delta, saturate, out, &obj)
    return obj, status


def multi_shot_run(const double[::1] powers, const long long[::1] order_desc,
                   const long long[::1] order_asc, const double[::1] x0,
                   const double[::1] readings, double delta, double tol,
                   const double[:, ::1] uniforms, double[:, ::1] probs_out,
                   double[:, ::1] states_out, long long[::1] corrections_out):
    """Chained inference over a horizon with rounding and error correction."""
    cdef Py_ssize_t horizon = uniforms.shape[0]
    cdef Py_ssize_t n = powers.shape[0]
    cdef Py_ssize_t t, i
    cdef long long j, rank, flips
    cdef double k, d, xi, dot, s, y, obj
    cdef double[::1] x = np.empty(n, dtype=np.float64)
    with nogil:
        for i in range(n):
            x[i] = x0[i]
        for t in range(horizon):
            k = readings[t + 1] - readings[t]
            if k < 0.0:
                k = -k
            _fill(powers, order_desc, k, delta, True, probs_out[t], &obj)
            for i in range(n):
                d = probs_out[t, i]
                xi = x[i]
                x[i] = xi * (1.0 - d) + (1.0 - xi) * d
                states_out[t, i] = x[i]
        for t in range(horizon):
            dot = 0.0
            for i in range(n):
                s = 1.0 if uniforms[t, i] < states_out[t, i] else 0.0
                states_out[t, i] = s
                dot += s * powers[i]
            y = readings[t + 1]
            flips = 0
            if dot > y + tol:
                rank = 0
                while dot > y + tol and rank < n:
                    j = order_desc[rank]
                    if states_out[t, j] == 1.0:
                        states_out[t, j] = 0.0
                        dot -= powers[j]
                        flips += 1
                    rank += 1
            elif dot < y - tol:
                rank = 0
                while dot < y - tol and rank < n:
                    j = order_asc[rank]
                    if states_out[t, j] == 0.0:
                        states_out[t, j] = 1.0
                        dot += powers[j]
                        flips += 1
                    rank += 1
            corrections_out[t] = flips


def one_shot_trial(const double[::1] powers, const long long[::1] order_desc,
                   const double[::1] readings, const double[:, ::1] truth_deltas,
                   double delta, const double[:, ::1] uniforms, double[::1] work):
    """Mean single-step accuracy over a horizon, given true switch vectors."""
    cdef Py_ssize_t horizon = uniforms.shape[0]
    cdef Py_ssize_t n = powers.shape[0]
    cdef Py_ssize_t t, i
    cdef double k, errs, rounded, diff, obj
    cdef double acc_sum = 0.0
    with nogil:
        for t in range(horizon):
            k = readings[t + 1] - readings[t]
            if k < 0.0:
                k = -k
            _fill(powers, order_desc, k, delta, True, work, &obj)
            errs = 0.0
            for i in range(n):
                rounded = 1.0 if uniforms[t, i] < work[i] else 0.0
                diff = rounded - truth_deltas[t, i]
                if diff < 0.0:
                    diff = -diff
                errs += diff
            acc_sum += 1.0 - errs / n
    if horizon == 0:
        return 1.0
    return acc_sum / horizon
