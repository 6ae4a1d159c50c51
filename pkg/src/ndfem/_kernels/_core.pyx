# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the assembly kernels (see _numpy_impl for shapes)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def basis_tab(exps, X, Y, inv, bint want_hess=True):
    cdef const cnp.int64_t[:, ::1] E = np.ascontiguousarray(exps, dtype=np.int64)
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] Yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef const double[::1] invv = np.ascontiguousarray(inv, dtype=np.float64)
    cdef Py_ssize_t ne = Xv.shape[0], nq = Xv.shape[1], nb = E.shape[0]
    cdef Py_ssize_t e, q, i, k, kmax = 0
    for i in range(nb):
        if E[i, 0] + E[i, 1] > kmax:
            kmax = E[i, 0] + E[i, 1]

    vals_arr = np.empty((ne, nq, nb, 2))
    cdef double[:, :, :, ::1] vals = vals_arr
    hess_arr = None
    cdef double[:, :, :, ::1] hess = vals  # placeholder; reset below
    if want_hess:
        hess_arr = np.empty((ne, nq, nb, 3))
        hess = hess_arr

    cdef double[::1] px = np.empty(kmax + 1)
    cdef double[::1] py = np.empty(kmax + 1)
    cdef double s, s2, x, y
    cdef cnp.int64_t a, b
    px[0] = 1.0
    py[0] = 1.0
    for e in range(ne):
        s = invv[e]
        s2 = s * s
        for q in range(nq):
            x = Xv[e, q]
            y = Yv[e, q]
            for k in range(1, kmax + 1):
                px[k] = px[k - 1] * x
                py[k] = py[k - 1] * y
            for i in range(nb):
                a = E[i, 0]
                b = E[i, 1]
                vals[e, q, i, 0] = s * a * px[a - 1 if a > 0 else 0] * py[b]
                vals[e, q, i, 1] = s * b * px[a] * py[b - 1 if b > 0 else 0]
                if want_hess:
                    hess[e, q, i, 0] = s2 * a * (a - 1) * px[a - 2 if a > 1 else 0] * py[b]
                    hess[e, q, i, 1] = s2 * a * b * px[a - 1 if a > 0 else 0] * py[b - 1 if b > 0 else 0]
                    hess[e, q, i, 2] = s2 * b * (b - 1) * px[a] * py[b - 2 if b > 1 else 0]
    return vals_arr, hess_arr


def weighted_gram(F, G, w):
    cdef const double[:, :, :, ::1] Fv = np.ascontiguousarray(F, dtype=np.float64)
    cdef const double[:, :, :, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef const double[:, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t ne = Fv.shape[0], nq = Fv.shape[1]
    cdef Py_ssize_t ni = Fv.shape[2], nj = Gv.shape[2], nc = Fv.shape[3]
    out_arr = np.zeros((ne, ni, nj))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t e, q, i, j, c
    cdef double wq, acc
    for e in range(ne):
        for q in range(nq):
            wq = wv[e, q]
            for i in range(ni):
                for j in range(nj):
                    acc = 0.0
                    for c in range(nc):
                        acc += Fv[e, q, i, c] * Gv[e, q, j, c]
                    out[e, i, j] += wq * acc
    return out_arr


def weighted_vec(F, s, w):
    cdef const double[:, :, :, ::1] Fv = np.ascontiguousarray(F, dtype=np.float64)
    cdef const double[:, :, ::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef const double[:, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t ne = Fv.shape[0], nq = Fv.shape[1]
    cdef Py_ssize_t ni = Fv.shape[2], nc = Fv.shape[3]
    out_arr = np.zeros((ne, ni))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t e, q, i, c
    cdef double wq, acc
    for e in range(ne):
        for q in range(nq):
            wq = wv[e, q]
            for i in range(ni):
                acc = 0.0
                for c in range(nc):
                    acc += Fv[e, q, i, c] * sv[e, q, c]
                out[e, i] += wq * acc
    return out_arr
