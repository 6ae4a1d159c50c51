"""Pure-numpy implementations of the hot assembly kernels.

Shapes use ne = elements (or edges), nq = quadrature points, nb/ni/nj =
local basis size, nc = vector components.
"""

import numpy as np


def basis_tab(exps, X, Y, inv, want_hess=True):
    """Scaled-monomial gradient basis values and potential Hessians.

    exps: (nb, 2) integer exponents of the potentials.
    X, Y: (ne, nq) scaled coordinates; inv: (ne,) = 1/sqrt(area).
    Returns vals (ne, nq, nb, 2) and hess (ne, nq, nb, 3) or None.
    """
    a = exps[:, 0]
    b = exps[:, 1]
    kmax = int(exps.sum(axis=1).max())
    # power tables P[..., k] = X**k, built multiplicatively
    PX = np.empty(X.shape + (kmax + 1,))
    PY = np.empty(Y.shape + (kmax + 1,))
    PX[..., 0] = 1.0
    PY[..., 0] = 1.0
    for k in range(1, kmax + 1):
        PX[..., k] = PX[..., k - 1] * X
        PY[..., k] = PY[..., k - 1] * Y

    am1 = np.maximum(a - 1, 0)
    bm1 = np.maximum(b - 1, 0)
    ne, nq = X.shape
    nb = len(a)
    vals = np.empty((ne, nq, nb, 2))
    vals[..., 0] = a * PX[..., am1] * PY[..., b]
    vals[..., 1] = b * PX[..., a] * PY[..., bm1]
    vals *= inv[:, None, None, None]

    hess = None
    if want_hess:
        am2 = np.maximum(a - 2, 0)
        bm2 = np.maximum(b - 2, 0)
        hess = np.empty((ne, nq, nb, 3))
        hess[..., 0] = (a * (a - 1)) * PX[..., am2] * PY[..., b]
        hess[..., 1] = (a * b) * PX[..., am1] * PY[..., bm1]
        hess[..., 2] = (b * (b - 1)) * PX[..., a] * PY[..., bm2]
        hess *= (inv * inv)[:, None, None, None]
    return vals, hess


def weighted_gram(F, G, w):
    """sum_q sum_c w[e,q] F[e,q,i,c] G[e,q,j,c] -> (ne, ni, nj)."""
    return np.einsum("eqic,eqjc,eq->eij", F, G, w, optimize=True)


def weighted_vec(F, s, w):
    """sum_q sum_c w[e,q] F[e,q,i,c] s[e,q,c] -> (ne, ni)."""
    return np.einsum("eqic,eqc,eq->ei", F, s, w, optimize=True)
