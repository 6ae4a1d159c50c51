"""Preconditioned conjugate gradients for the assembled SPD systems.

Serial and deterministic: identical inputs give identical iterates.  The
stage-1 system uses a block-Jacobi preconditioner with the element block
size; the stage-2 system uses plain Jacobi.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import NonConvergenceError


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    residual: float  # final relative residual ||b - Mx|| / ||b||
    converged: bool


def _check_symmetric(matrix, rng_seed=1234):
    # cheap randomized probe: |u^T M v - v^T M u| must vanish
    rng = np.random.default_rng(rng_seed)
    n = matrix.shape[0]
    for _ in range(2):
        u = rng.standard_normal(n)
        v = rng.standard_normal(n)
        mu_, mv = matrix @ u, matrix @ v
        scale = np.linalg.norm(mv) * np.linalg.norm(u) + np.linalg.norm(mu_) * np.linalg.norm(v)
        if abs(u @ mv - v @ mu_) > 1e-10 * max(scale, 1e-300):
            raise ValueError("cg_solve requires a symmetric matrix")


def _diag_blocks(matrix, k):
    """Extract the (n/k) diagonal k x k blocks of a sparse matrix."""
    bsr = matrix if (sp.issparse(matrix) and matrix.format == "bsr" and matrix.blocksize == (k, k)) else sp.bsr_matrix(matrix, blocksize=(k, k))
    nbr = bsr.shape[0] // k
    rows = np.repeat(np.arange(nbr), np.diff(bsr.indptr))
    hit = bsr.indices == rows
    blocks = np.zeros((nbr, k, k))
    blocks[rows[hit]] = bsr.data[hit]
    return blocks


def make_preconditioner(system, kind, block_size=None):
    """Return an operator z = P(r) approximating the inverse of the matrix."""
    if kind == "none":
        return lambda r: r
    if kind == "diagonal":
        d = system.matrix.diagonal()
        if np.any(d <= 0):
            raise ValueError("non-positive diagonal entry; matrix is not SPD")
        dinv = 1.0 / d
        return lambda r: dinv * r
    if kind == "block_jacobi":
        k = block_size or system.block_size
        if system.dim % k:
            raise ValueError(f"dimension {system.dim} not divisible by block size {k}")
        if k == 1:
            return make_preconditioner(system, "diagonal")
        inv = np.linalg.inv(_diag_blocks(system.matrix, k))
        nb = system.dim // k

        def apply(r):
            return np.einsum("eij,ej->ei", inv, r.reshape(nb, k)).ravel()

        return apply
    raise ValueError(f"unknown preconditioner {kind!r}")


def cg_solve(system, tol: float = 1e-10, max_iter=None, preconditioner="none", block_size=None):
    """Solve the SPD system to a relative residual of `tol`.

    Returns (x, SolveStats).  Raises NonConvergenceError (carrying the
    stats) if max_iter is hit, and ValueError for a non-symmetric matrix.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = system.matrix
    b = system.rhs
    _check_symmetric(M)
    if max_iter is None:
        max_iter = 20 * system.dim

    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), SolveStats(iterations=0, residual=0.0, converged=True)

    apply_pc = make_preconditioner(system, preconditioner, block_size)
    x = np.zeros_like(b)
    r = b.copy()
    it = 0
    while True:
        z = apply_pc(r)
        rz = r @ z
        p = z
        for _ in range(max_iter - it):
            q = M @ p
            alpha = rz / (p @ q)
            x += alpha * p
            r -= alpha * q
            it += 1
            if np.linalg.norm(r) <= tol * bnorm:
                break
            z = apply_pc(r)
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
        # recompute the true residual; restart if rounding drift left it high
        r = b - M @ x
        res = np.linalg.norm(r) / bnorm
        if res <= tol:
            return x, SolveStats(iterations=it, residual=float(res), converged=True)
        if it >= max_iter:
            raise NonConvergenceError(
                f"CG did not reach tol={tol:g} in {it} iterations (residual {res:.3e})",
                SolveStats(iterations=it, residual=float(res), converged=False),
            )
