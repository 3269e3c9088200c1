"""Pure-NumPy SMO solver for the epsilon-insensitive regression dual.

This is the fallback for the compiled core in `_smo`; both implement the
same algorithm and must stay in lockstep.

Problem, in the paired-multiplier form: given kernel matrix K, targets y,
box constraint c and tube half-width epsilon, maximize over
alpha, alpha_star in [0, c]^n

    -1/2 (a - a*)^T K (a - a*) - epsilon * sum(a + a*) + y . (a - a*)

subject to sum(a - a*) = 0. The solver tracks o = K (a - a*) and the two
per-point optimality values

    vp = (y - o) - epsilon      (plain multipliers)
    vm = (y - o) + epsilon      (starred multipliers)

A multiplier may move up if it has headroom (a < c, or a* > 0) and down
symmetrically. Optimality holds when the largest up-value m no longer
exceeds the smallest down-value M by more than the tolerance; the bias is
the midpoint (m + M) / 2. Working pairs are the maximal violator i joined
with the partner j of largest second-order gain (m - v_j)^2 / quad_ij, ties
broken toward the lowest index with plain multipliers before starred ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# Guard for non-positive curvature of a working pair (duplicate points).
TAU = 1e-12

Rows = Callable[[int], np.ndarray]


@dataclass
class SmoResult:
    alpha: np.ndarray
    alpha_star: np.ndarray
    bias: float
    iterations: int
    kkt_gap: float
    converged: bool

    @property
    def beta(self) -> np.ndarray:
        return self.alpha - self.alpha_star


def solve(
    rows: Rows,
    diag: np.ndarray,
    y: np.ndarray,
    c: float,
    epsilon: float,
    tol: float,
    max_iter: int,
) -> SmoResult:
    """Run SMO to the requested KKT tolerance; never raises on exhaustion."""
    n = y.shape[0]
    alpha = np.zeros(n, dtype=np.float64)
    alpha_star = np.zeros(n, dtype=np.float64)
    o = np.zeros(n, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    iterations = 0
    while True:
        r = y - o
        vp = r - epsilon
        vm = r + epsilon

        up_plain = np.where(alpha < c, vp, -np.inf)
        up_star = np.where(alpha_star > 0.0, vm, -np.inf)
        ia = int(np.argmax(up_plain))
        is_ = int(np.argmax(up_star))
        if up_plain[ia] >= up_star[is_]:
            bi, zi, m = ia, 1, float(up_plain[ia])
        else:
            bi, zi, m = is_, -1, float(up_star[is_])

        low_star = np.where(alpha_star < c, vm, np.inf)
        low_plain = np.where(alpha > 0.0, vp, np.inf)
        big_m = min(float(low_star.min()), float(low_plain.min()))

        gap = m - big_m
        bias = 0.5 * (m + big_m)
        if gap <= tol:
            return SmoResult(alpha, alpha_star, bias, iterations, gap, True)
        if iterations >= max_iter:
            return SmoResult(alpha, alpha_star, bias, iterations, gap, False)

        ki = rows(bi)
        quad = diag[bi] + diag - 2.0 * ki
        quad[quad <= 0.0] = TAU

        gain_plain = np.where((alpha > 0.0) & (vp < m), (m - vp) ** 2 / quad, -np.inf)
        gain_star = np.where(
            (alpha_star < c) & (vm < m), (m - vm) ** 2 / quad, -np.inf
        )
        ja = int(np.argmax(gain_plain))
        js = int(np.argmax(gain_star))
        if gain_plain[ja] >= gain_star[js]:
            bj, zj, vj = ja, 1, float(vp[ja])
        else:
            bj, zj, vj = js, -1, float(vm[js])

        delta_unc = (m - vj) / float(quad[bj])
        head_i = (c - alpha[bi]) if zi > 0 else alpha_star[bi]
        head_j = alpha[bj] if zj > 0 else (c - alpha_star[bj])
        delta = min(delta_unc, head_i, head_j)

        # Snap to the box exactly when a bound binds, so the invariant
        # 0 <= multiplier <= c never drifts by rounding.
        if zi > 0:
            alpha[bi] = c if delta >= head_i else alpha[bi] + delta
        else:
            alpha_star[bi] = 0.0 if delta >= head_i else alpha_star[bi] - delta
        if zj > 0:
            alpha[bj] = 0.0 if delta >= head_j else alpha[bj] - delta
        else:
            alpha_star[bj] = c if delta >= head_j else alpha_star[bj] + delta

        kj = rows(bj)
        o += delta * (ki - kj)
        iterations += 1


def dual_objective(
    K: np.ndarray,
    y: np.ndarray,
    epsilon: float,
    alpha: np.ndarray,
    alpha_star: np.ndarray,
) -> float:
    """Maximization-form dual objective, recomputed from scratch."""
    beta = alpha - alpha_star
    return float(
        -0.5 * beta @ (K @ beta) - epsilon * np.sum(alpha + alpha_star) + y @ beta
    )
