import numpy as np
import pytest
import scipy.sparse as sp

from ndfem.assembly import SparseSpdSystem
from ndfem.errors import NonConvergenceError
from ndfem.linsolve import cg_solve


def system_from_dense(M, b, block_size=1):
    return SparseSpdSystem(
        dim=len(b), matrix=sp.csr_matrix(M), rhs=np.asarray(b, float), block_size=block_size
    )


def test_identity_one_iteration():
    rng = np.random.default_rng(0)
    b = rng.standard_normal(17)
    x, stats = cg_solve(system_from_dense(np.eye(17), b))
    assert stats.iterations == 1
    assert stats.converged
    assert np.allclose(x, b, atol=1e-14)


def test_two_by_two_oracle():
    # direct solve: M = [[4,1],[1,3]], b = (1,2) -> x = (1/11, 7/11)
    x, stats = cg_solve(system_from_dense([[4.0, 1.0], [1.0, 3.0]], [1.0, 2.0]), tol=1e-14)
    assert np.allclose(x, [1.0 / 11.0, 7.0 / 11.0], rtol=1e-12)
    assert stats.converged and stats.residual <= 1e-14


def test_exact_diagonal_preconditioner_one_iteration():
    x, stats = cg_solve(
        system_from_dense(np.diag([2.0, 5.0]), [2.0, 10.0]), preconditioner="diagonal"
    )
    assert stats.iterations == 1
    assert np.allclose(x, [1.0, 2.0], atol=1e-14)


def test_zero_rhs():
    x, stats = cg_solve(system_from_dense(np.eye(3), np.zeros(3)))
    assert stats.iterations == 0 and stats.converged
    assert np.all(x == 0.0)


def test_random_spd_against_dense_oracle():
    rng = np.random.default_rng(1234)
    for _ in range(100):
        n = int(rng.integers(2, 51))
        L = np.tril(rng.standard_normal((n, n)))
        M = L @ L.T + 2.0 * np.eye(n)
        b = rng.standard_normal(n)
        expected = np.linalg.solve(M, b)
        kind = ("none", "diagonal")[int(rng.integers(0, 2))]
        x, stats = cg_solve(system_from_dense(M, b), tol=1e-11, preconditioner=kind)
        assert stats.converged
        assert np.linalg.norm(x - expected) <= 1e-8 * max(1.0, np.linalg.norm(expected))


def test_block_jacobi_matches_oracle():
    rng = np.random.default_rng(7)
    k, nblocks = 4, 6
    n = k * nblocks
    L = np.tril(rng.standard_normal((n, n)))
    M = L @ L.T + n * np.eye(n)
    b = rng.standard_normal(n)
    x, stats = cg_solve(
        system_from_dense(M, b, block_size=k), tol=1e-12, preconditioner="block_jacobi"
    )
    assert stats.converged
    assert np.allclose(x, np.linalg.solve(M, b), atol=1e-8)


def test_non_symmetric_rejected():
    M = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        cg_solve(system_from_dense(M, [1.0, 1.0]))


def test_bad_tol_and_preconditioner():
    sysm = system_from_dense(np.eye(2), [1.0, 1.0])
    with pytest.raises(ValueError):
        cg_solve(sysm, tol=0.0)
    with pytest.raises(ValueError):
        cg_solve(sysm, preconditioner="ilu")


def test_max_iter_exceeded_carries_stats():
    rng = np.random.default_rng(5)
    L = np.tril(rng.standard_normal((40, 40)))
    M = L @ L.T + 1e-6 * np.eye(40)
    b = rng.standard_normal(40)
    with pytest.raises(NonConvergenceError) as exc:
        cg_solve(system_from_dense(M, b), tol=1e-14, max_iter=3)
    stats = exc.value.stats
    assert stats.iterations == 3
    assert not stats.converged
    assert stats.residual > 1e-14


def test_deterministic():
    rng = np.random.default_rng(11)
    L = np.tril(rng.standard_normal((30, 30)))
    M = L @ L.T + np.eye(30)
    b = rng.standard_normal(30)
    x1, s1 = cg_solve(system_from_dense(M, b), tol=1e-11, preconditioner="diagonal")
    x2, s2 = cg_solve(system_from_dense(M, b), tol=1e-11, preconditioner="diagonal")
    assert np.array_equal(x1, x2)
    assert s1 == s2
