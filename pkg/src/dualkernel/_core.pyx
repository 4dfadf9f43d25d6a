# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same contracts as ``_purepy``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double TAU = 1e-12


def overlap_tile(A, B):
    cdef double complex[:, :, ::1] a = np.ascontiguousarray(A, dtype=np.complex128)
    cdef double complex[:, :, ::1] b = np.ascontiguousarray(B, dtype=np.complex128)
    cdef Py_ssize_t p = a.shape[0], q = b.shape[0], nb = a.shape[1], ns = a.shape[2]
    out = np.empty((p, q), dtype=np.float64)
    cdef double[:, ::1] res = out
    cdef Py_ssize_t i, j, k, s
    cdef double pr, pi, sr, si, ar, ai, br, bi, tr
    with nogil:
        for i in range(p):
            for j in range(q):
                pr = 1.0
                pi = 0.0
                for k in range(nb):
                    sr = 0.0
                    si = 0.0
                    for s in range(ns):
                        ar = a[i, k, s].real
                        ai = a[i, k, s].imag
                        br = b[j, k, s].real
                        bi = b[j, k, s].imag
                        # conj(b) * a
                        sr = sr + (br * ar + bi * ai)
                        si = si + (br * ai - bi * ar)
                    tr = pr * sr - pi * si
                    pi = pr * si + pi * sr
                    pr = tr
                res[i, j] = pr * pr + pi * pi
    return out


def smo(K, y, double C, double tol, Py_ssize_t max_iter):
    cdef double[:, ::1] k = np.ascontiguousarray(K, dtype=np.float64)
    cdef double[::1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t m = yy.shape[0]
    alpha_arr = np.zeros(m)
    grad_arr = -np.ones(m)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] grad = grad_arr
    cdef Py_ssize_t t, i, j, n_iter = 0
    cdef double gmax, gmin, score, yi, yj, ai, aj, ni, nj, quad, delta, diff, total, dai, daj
    cdef bint converged = False
    with nogil:
        while n_iter < max_iter:
            i = -1
            j = -1
            gmax = 0.0
            gmin = 0.0
            for t in range(m):
                score = -yy[t] * grad[t]
                if (yy[t] > 0 and alpha[t] < C) or (yy[t] <= 0 and alpha[t] > 0):
                    if i < 0 or score > gmax:
                        gmax = score
                        i = t
                if (yy[t] > 0 and alpha[t] > 0) or (yy[t] <= 0 and alpha[t] < C):
                    if j < 0 or score < gmin:
                        gmin = score
                        j = t
            if i < 0 or j < 0 or gmax - gmin < tol:
                converged = True
                break
            n_iter += 1
            yi = yy[i]
            yj = yy[j]
            ai = alpha[i]
            aj = alpha[j]
            quad = k[i, i] + k[j, j] - 2.0 * k[i, j]
            if quad <= 0:
                quad = TAU
            if yi != yj:
                delta = (-grad[i] - grad[j]) / quad
                diff = ai - aj
                ni = ai + delta
                nj = aj + delta
                if diff > 0:
                    if nj < 0:
                        nj = 0.0
                        ni = diff
                elif ni < 0:
                    ni = 0.0
                    nj = -diff
                if diff > 0:
                    if ni > C:
                        ni = C
                        nj = C - diff
                elif nj > C:
                    nj = C
                    ni = C + diff
            else:
                delta = (grad[i] - grad[j]) / quad
                total = ai + aj
                ni = ai - delta
                nj = aj + delta
                if total > C:
                    if ni > C:
                        ni = C
                        nj = total - C
                elif nj < 0:
                    nj = 0.0
                    ni = total
                if total > C:
                    if nj > C:
                        nj = C
                        ni = total - C
                elif ni < 0:
                    ni = 0.0
                    nj = total
            alpha[i] = ni
            alpha[j] = nj
            dai = ni - ai
            daj = nj - aj
            for t in range(m):
                grad[t] += yy[t] * (yi * dai * k[i, t] + yj * daj * k[j, t])
    return alpha_arr, grad_arr, n_iter, bool(converged)
