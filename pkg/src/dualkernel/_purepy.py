"""NumPy implementations of the hot kernels (fallback for ``_core``)."""
import numpy as np

TAU = 1e-12


def overlap_tile(A, B):
    """``|prod_b <B[j, b] | A[i, b]>|**2`` for every row pair, shape ``(len(A), len(B))``."""
    inner = np.einsum("ibs,jbs->ijb", A, B.conj())
    return np.abs(np.prod(inner, axis=2)) ** 2


def smo(K, y, C, tol, max_iter):
    """Solve the SVM dual with maximal-violating-pair SMO.

    Returns ``(alpha, grad, n_iter, converged)`` where ``grad`` is the
    gradient of ``0.5 a'Qa - sum(a)`` with ``Q = yy' * K``.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m = y.shape[0]
    alpha = np.zeros(m)
    grad = -np.ones(m)
    diag = np.diag(K).copy()
    pos = y > 0
    n_iter = 0
    while n_iter < max_iter:
        score = -y * grad
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        if not up.any() or not low.any():
            return alpha, grad, n_iter, True
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        if score[i] - score[j] < tol:
            return alpha, grad, n_iter, True
        n_iter += 1
        yi, yj = y[i], y[j]
        ai, aj = alpha[i], alpha[j]
        quad = diag[i] + diag[j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = TAU
        if yi != yj:
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        alpha[i], alpha[j] = ni, nj
        dai, daj = ni - ai, nj - aj
        grad += y * (yi * dai * K[i] + yj * daj * K[j])
    return alpha, grad, n_iter, False
