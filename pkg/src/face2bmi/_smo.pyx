# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled SMO inner loop over a dense kernel matrix.

Mirror of smo_python.solve for the dense-Gram case; the two must implement
the identical update rules and tie-breaking (lowest index, plain
multipliers before starred ones).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF TAU = 1e-12


def solve_dense(
    double[:, ::1] K,
    double[::1] y,
    double c,
    double epsilon,
    double tol,
    long max_iter,
):
    """Returns (alpha, alpha_star, bias, iterations, kkt_gap, converged)."""
    cdef Py_ssize_t n = y.shape[0]
    alpha_arr = np.zeros(n, dtype=np.float64)
    star_arr = np.zeros(n, dtype=np.float64)
    o_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] star = star_arr
    cdef double[::1] o = o_arr

    cdef long iterations = 0
    cdef Py_ssize_t t, bi, bj
    cdef int zi, zj
    cdef double vp, vm, m, big_m, gap, bias
    cdef double quad, best_gain, gain, diff, vj, qj
    cdef double delta_unc, head_i, head_j, delta
    cdef double neg_inf = -np.inf
    cdef double pos_inf = np.inf

    while True:
        # Maximal violator over the up-movable set; plain block first so a
        # tie lands on the lower combined index.
        m = neg_inf
        bi = 0
        zi = 1
        for t in range(n):
            if alpha[t] < c:
                vp = (y[t] - o[t]) - epsilon
                if vp > m:
                    m = vp
                    bi = t
                    zi = 1
        for t in range(n):
            if star[t] > 0.0:
                vm = (y[t] - o[t]) + epsilon
                if vm > m:
                    m = vm
                    bi = t
                    zi = -1

        big_m = pos_inf
        for t in range(n):
            if star[t] < c:
                vm = (y[t] - o[t]) + epsilon
                if vm < big_m:
                    big_m = vm
        for t in range(n):
            if alpha[t] > 0.0:
                vp = (y[t] - o[t]) - epsilon
                if vp < big_m:
                    big_m = vp

        gap = m - big_m
        bias = 0.5 * (m + big_m)
        if gap <= tol:
            return alpha_arr, star_arr, bias, iterations, gap, True
        if iterations >= max_iter:
            return alpha_arr, star_arr, bias, iterations, gap, False

        # Partner with the largest second-order gain among down-movable
        # multipliers strictly below m.
        best_gain = neg_inf
        bj = 0
        zj = 1
        vj = 0.0
        for t in range(n):
            if alpha[t] > 0.0:
                vp = (y[t] - o[t]) - epsilon
                if vp < m:
                    quad = K[bi, bi] + K[t, t] - 2.0 * K[bi, t]
                    if quad <= 0.0:
                        quad = TAU
                    diff = m - vp
                    gain = diff * diff / quad
                    if gain > best_gain:
                        best_gain = gain
                        bj = t
                        zj = 1
                        vj = vp
        for t in range(n):
            if star[t] < c:
                vm = (y[t] - o[t]) + epsilon
                if vm < m:
                    quad = K[bi, bi] + K[t, t] - 2.0 * K[bi, t]
                    if quad <= 0.0:
                        quad = TAU
                    diff = m - vm
                    gain = diff * diff / quad
                    if gain > best_gain:
                        best_gain = gain
                        bj = t
                        zj = -1
                        vj = vm

        qj = K[bi, bi] + K[bj, bj] - 2.0 * K[bi, bj]
        if qj <= 0.0:
            qj = TAU
        delta_unc = (m - vj) / qj
        head_i = (c - alpha[bi]) if zi > 0 else star[bi]
        head_j = alpha[bj] if zj > 0 else (c - star[bj])
        delta = delta_unc
        if head_i < delta:
            delta = head_i
        if head_j < delta:
            delta = head_j

        if zi > 0:
            alpha[bi] = c if delta >= head_i else alpha[bi] + delta
        else:
            star[bi] = 0.0 if delta >= head_i else star[bi] - delta
        if zj > 0:
            alpha[bj] = 0.0 if delta >= head_j else alpha[bj] - delta
        else:
            star[bj] = c if delta >= head_j else star[bj] + delta

        for t in range(n):
            o[t] = o[t] + delta * (K[bi, t] - K[bj, t])
        iterations += 1
