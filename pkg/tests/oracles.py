"""Independent reference solvers used by the test suite."""
from itertools import product

import numpy as np


def objective(a, K, y):
    ay = a * y
    return float(a.sum() - 0.5 * ay @ K @ ay)


def dual_face_oracle(K, y, C):
    """Exact optimum of the SVM dual by enumerating faces of the box.

    Every multiplier is fixed at 0, fixed at C, or free.  On each face the
    free multipliers and the equality constraint form a linear stationarity
    system; consistent, feasible solutions are candidate optima, and the best
    candidate is the global maximum of the concave dual.
    """
    m = len(y)
    Q = np.outer(y, y) * K
    best, best_a = -np.inf, None
    for state in product((0, 1, 2), repeat=m):
        state = np.array(state)
        a = np.where(state == 1, C, 0.0)
        F = np.flatnonzero(state == 2)
        B = np.flatnonzero(state != 2)
        if F.size:
            k = F.size
            A = np.zeros((k + 1, k + 1))
            A[:k, :k] = Q[np.ix_(F, F)]
            A[:k, k] = y[F]
            A[k, :k] = y[F]
            rhs = np.empty(k + 1)
            rhs[:k] = 1.0 - Q[np.ix_(F, B)] @ a[B]
            rhs[k] = -y[B] @ a[B]
            sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
            if np.linalg.norm(A @ sol - rhs) > 1e-9:
                continue
            a[F] = sol[:k]
        if np.any(a < -1e-12) or np.any(a > C + 1e-12) or abs(a @ y) > 1e-9:
            continue
        a = np.clip(a, 0.0, C)
        val = objective(a, K, y)
        if val > best:
            best, best_a = val, a
    return best, best_a


def dual_grid_oracle(K, y, C, resolution=1e-3):
    """Brute-force grid over the feasible box for two multipliers.

    With two points the equality constraint fixes the second multiplier
    (``a2 = a1`` for opposite labels, ``a2 = t - a1`` otherwise with the
    best ``t`` searched too), so the search is over a 1-D or 2-D lattice.
    """
    assert len(y) == 2
    g = np.arange(0.0, C + resolution * C / 2, resolution * C)
    if y[0] != y[1]:
        cands = np.stack([g, g], axis=1)
    else:
        # same labels: a1 + a2 = 0 forces both to zero
        cands = np.zeros((1, 2))
    ay = cands * y
    vals = cands.sum(1) - 0.5 * np.einsum("ki,ij,kj->k", ay, K, ay)
    k = int(np.argmax(vals))
    return float(vals[k]), cands[k]
