import numpy as np
import pytest

from ndfem.errors import NotEllipticError
from ndfem.problems import CASE_NAMES, case, cordes_check


def interior_samples(pc, n, seed=0):
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = pc.domain
    pad = 0.05
    x = xmin + (pad + (1 - 2 * pad) * rng.random(n)) * (xmax - xmin)
    y = ymin + (pad + (1 - 2 * pad) * rng.random(n)) * (ymax - ymin)
    return x, y


def test_unknown_case():
    with pytest.raises(ValueError):
        case("ex9")


def test_ex1_solution_values():
    pc = case("ex1")
    assert pc.u(0.5, 0.5) == pytest.approx(0.0, abs=1e-14)
    # u(0.25, 0.25) = 0.0625 sin(pi/2) sin(3 pi / 4)
    assert pc.u(0.25, 0.25) == pytest.approx(0.0625 * np.sin(0.75 * np.pi), rel=1e-14)


def test_ex2_offdiagonal_signs():
    pc = case("ex2")
    _, a12, _ = pc.coef_sym(np.array(0.3), np.array(0.7))
    assert a12 == 1.0
    _, a12m, _ = pc.coef_sym(np.array(-0.3), np.array(0.7))
    assert a12m == -1.0
    _, a0, _ = pc.coef_sym(np.array(0.0), np.array(0.7))
    assert a0 == 0.0  # undefined locus resolved to 0 to avoid NaN


def test_patch_linear_source_is_zero():
    pc = case("patch_linear")
    x, y = interior_samples(pc, 20)
    assert np.abs(pc.f(x, y)).max() == 0.0


def test_manufactured_consistency_f_equals_a_dot_hess():
    for name in CASE_NAMES:
        pc = case(name)
        x, y = interior_samples(pc, 30, seed=1)
        a11, a12, a22 = pc.coef_sym(x, y)
        h = pc.hess_u(x, y)
        expected = a11 * h[..., 0] + 2 * a12 * h[..., 1] + a22 * h[..., 2]
        assert np.allclose(pc.f(x, y), expected, rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize("name", CASE_NAMES)
def test_hessian_matches_finite_differences(name):
    pc = case(name)
    x, y = interior_samples(pc, 50, seed=2)
    step = 1e-4
    uxx = (pc.u(x + step, y) - 2 * pc.u(x, y) + pc.u(x - step, y)) / step**2
    uyy = (pc.u(x, y + step) - 2 * pc.u(x, y) + pc.u(x, y - step)) / step**2
    uxy = (
        pc.u(x + step, y + step)
        - pc.u(x + step, y - step)
        - pc.u(x - step, y + step)
        + pc.u(x - step, y - step)
    ) / (4 * step**2)
    h = pc.hess_u(x, y)
    scale = np.abs(h).max() + 1.0
    assert np.allclose(h[..., 0], uxx, atol=1e-5 * scale)
    assert np.allclose(h[..., 1], uxy, atol=1e-5 * scale)
    assert np.allclose(h[..., 2], uyy, atol=1e-5 * scale)


@pytest.mark.parametrize("name", CASE_NAMES)
def test_gradient_matches_finite_differences_and_is_curl_free(name):
    pc = case(name)
    x, y = interior_samples(pc, 50, seed=3)
    step = 1e-6
    gx = (pc.u(x + step, y) - pc.u(x - step, y)) / (2 * step)
    gy = (pc.u(x, y + step) - pc.u(x, y - step)) / (2 * step)
    g = pc.grad_u(x, y)
    scale = np.abs(g).max() + 1.0
    assert np.allclose(g[..., 0], gx, atol=1e-7 * scale)
    assert np.allclose(g[..., 1], gy, atol=1e-7 * scale)
    # cross-derivative of the gradient components vanishes
    step = 1e-5
    dpy_dx = (pc.grad_u(x + step, y)[..., 1] - pc.grad_u(x - step, y)[..., 1]) / (2 * step)
    dpx_dy = (pc.grad_u(x, y + step)[..., 0] - pc.grad_u(x, y - step)[..., 0]) / (2 * step)
    hscale = np.abs(pc.hess_u(x, y)).max() + 1.0
    assert np.allclose(dpy_dx, dpx_dy, atol=1e-4 * hscale)


def test_ex4_alpha_parameter():
    pc = case("ex4", alpha=1.5)
    assert pc.params["alpha"] == 1.5
    assert pc.u(3.0, 4.0) == pytest.approx(5.0**1.5, rel=1e-14)
    with pytest.raises(ValueError):
        case("ex4", alpha=-1.0)


def test_cordes_identity_coefficient():
    pc = case("patch_linear")
    rep = cordes_check(pc.coef_sym, pc.domain, samples=10)
    assert rep.max_ratio == pytest.approx(0.5, abs=1e-15)
    assert rep.epsilon == pytest.approx(1.0, abs=1e-15)
    # gamma = tr/|A|^2 = 1, and gamma A : B = tr B exactly: zero slack
    assert rep.gamma_min == pytest.approx(1.0)
    assert rep.gamma_max == pytest.approx(1.0)
    assert rep.lemma_max_slack <= 1e-14


def test_cordes_ex2():
    pc = case("ex2")
    rep = cordes_check(pc.coef_sym, pc.domain, samples=100, defined=pc.a_defined)
    # |A|^2 = 10, (tr A)^2 = 16 off the axes
    assert rep.max_ratio == pytest.approx(0.625, abs=1e-12)
    assert rep.epsilon == pytest.approx(0.6, abs=1e-12)
    assert rep.lemma_max_slack <= 1e-12


@pytest.mark.parametrize("name", CASE_NAMES)
def test_cordes_epsilon_positive_for_all_cases(name):
    pc = case(name)
    rep = cordes_check(pc.coef_sym, pc.domain, samples=60, defined=pc.a_defined)
    assert 0.0 < rep.epsilon <= 1.0
    assert rep.lemma_max_slack <= 1e-12


def test_cordes_rejects_non_elliptic():
    def bad(x, y):
        one = np.ones(np.shape(x))
        return -one, 0.0 * one, -one

    with pytest.raises(NotEllipticError):
        cordes_check(bad, (0, 0, 1, 1), samples=5)

    def degenerate(x, y):
        # det A = 0: ratio = 1, Cordes fails
        one = np.ones(np.shape(x))
        return one, one, one

    with pytest.raises(NotEllipticError):
        cordes_check(degenerate, (0, 0, 1, 1), samples=5)


def test_cordes_invalid_samples():
    pc = case("ex1")
    with pytest.raises(ValueError):
        cordes_check(pc.coef_sym, pc.domain, samples=0)
