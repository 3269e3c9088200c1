"""Brute-force reference solver for the epsilon-SVR dual QP (tests only).

Independent of the SMO implementation under test: accelerated projected
gradient on the 2n-variable box QP with the single equality constraint,
then an active-set refinement that solves the KKT system on the
identified free set and verifies optimality to ~1e-10. Only suitable for
small instances.
"""

from __future__ import annotations

import numpy as np


def _project(v: np.ndarray, c: float, z: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {a in [0,c]^m : z.a = 0}, z entries +-1.

    Bisection on the constraint multiplier: a(t) = clip(v - t*z, 0, c) has
    nonincreasing z.a(t).
    """
    span = float(np.abs(v).max(initial=0.0)) + c + 1.0
    lo, hi = -span, span
    for _ in range(128):
        mid = 0.5 * (lo + hi)
        g = float(z @ np.clip(v - mid * z, 0.0, c))
        if g > 0.0:
            lo = mid
        else:
            hi = mid
    return np.clip(v - 0.5 * (lo + hi) * z, 0.0, c)


def _verify_and_polish(Q, p, z, c, a, rel):
    """Solve the KKT system on the free set of `a`; return the refined point
    if all optimality conditions verify, else None."""
    m = len(a)
    theta = rel * c
    free = (a > theta) & (a < c - theta)
    at_c = a >= c - theta
    a_ref = np.where(at_c, c, 0.0)

    if free.any():
        nf = int(free.sum())
        kkt = np.zeros((nf + 1, nf + 1))
        kkt[:nf, :nf] = Q[np.ix_(free, free)]
        kkt[:nf, nf] = z[free]
        kkt[nf, :nf] = z[free]
        rhs = np.zeros(nf + 1)
        rhs[:nf] = -p[free] - Q[np.ix_(free, at_c)] @ a_ref[at_c]
        rhs[nf] = -float(z[at_c] @ a_ref[at_c])
        sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        a_ref[free] = sol[:nf]
        nu = -float(sol[nf])
    else:
        nu = None

    scale = max(1.0, float(np.abs(p).max()), c)
    tol = 1e-9 * scale
    if free.any() and not (
        (a_ref[free] > -tol).all() and (a_ref[free] < c + tol).all()
    ):
        return None
    a_ref = np.clip(a_ref, 0.0, c)
    if abs(float(z @ a_ref)) > tol:
        return None

    g = Q @ a_ref + p
    zg = z * g
    lo_mask = ((a_ref <= theta) & (z < 0)) | ((a_ref >= c - theta) & (z > 0))
    hi_mask = ((a_ref <= theta) & (z > 0)) | ((a_ref >= c - theta) & (z < 0))
    lo = float(zg[lo_mask].max(initial=-np.inf))
    hi = float(zg[hi_mask].min(initial=np.inf))
    if nu is None:
        if lo > hi + tol:
            return None
        nu = 0.5 * (max(lo, -scale) + min(hi, scale))
    else:
        if nu < lo - tol or nu > hi + tol:
            return None
        stat = np.abs(g[free] - nu * z[free]).max(initial=0.0)
        if stat > tol:
            return None
    return a_ref, nu


def solve_svr_dual(K, y, c, epsilon, fista_rounds=60, iters_per_round=500):
    """Returns dict with alpha, alpha_star, beta, bias, objective, polished."""
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    Q = np.block([[K, -K], [-K, K]])
    Q = 0.5 * (Q + Q.T)
    p = np.concatenate([epsilon - y, epsilon + y])
    z = np.concatenate([np.ones(n), -np.ones(n)])
    L = float(np.linalg.eigvalsh(Q)[-1]) + 1e-9

    def obj(a):
        return 0.5 * float(a @ (Q @ a)) + float(p @ a)

    a = _project(np.zeros(2 * n), c, z)
    best = a.copy()
    best_obj = obj(a)
    polished = None
    for _ in range(fista_rounds):
        v = a.copy()
        t = 1.0
        prev = a.copy()
        for _ in range(iters_per_round):
            grad = Q @ v + p
            a_new = _project(v - grad / L, c, z)
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            v = a_new + ((t - 1.0) / t_new) * (a_new - prev)
            if obj(a_new) > obj(prev):  # monotone restart
                v = a_new
                t_new = 1.0
            prev, t = a_new, t_new
        a = prev
        if obj(a) < best_obj:
            best, best_obj = a.copy(), obj(a)
        slack = 1e-9 * (1.0 + abs(best_obj))
        for rel in (1e-7, 1e-6, 1e-5):
            result = _verify_and_polish(Q, p, z, c, best, rel)
            if result is not None and obj(result[0]) <= best_obj + slack:
                polished = result
                break
        if polished is not None:
            break

    if polished is not None:
        a_final, nu = polished
    else:
        a_final = best
        g = Q @ a_final + p
        zg = z * g
        theta = 1e-7 * c
        lo_mask = ((a_final <= theta) & (z < 0)) | ((a_final >= c - theta) & (z > 0))
        hi_mask = ((a_final <= theta) & (z > 0)) | ((a_final >= c - theta) & (z < 0))
        interior = ~(lo_mask | hi_mask)
        lo = float(np.concatenate([zg[lo_mask], zg[interior]]).max(initial=-np.inf))
        hi = float(np.concatenate([zg[hi_mask], zg[interior]]).min(initial=np.inf))
        nu = 0.5 * (lo + hi)

    alpha = a_final[:n]
    alpha_star = a_final[n:]
    beta = alpha - alpha_star
    objective_max = float(
        -0.5 * beta @ (K @ beta) - epsilon * np.sum(alpha + alpha_star) + y @ beta
    )
    return {
        "alpha": alpha,
        "alpha_star": alpha_star,
        "beta": beta,
        "bias": -nu,
        "objective": objective_max,
        "polished": polished is not None,
    }
