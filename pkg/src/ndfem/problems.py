"""Problem catalog: coefficients, exact solutions, manufactured data.

Every case carries an analytic solution u, its gradient and Hessian, and a
symmetric coefficient field; the source f = A : D2u and the boundary data
g = u are derived from those, so manufactured consistency holds by
construction.  Coefficient evaluators are vectorized over point arrays and
return the components (a11, a12, a22).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NotEllipticError

_SIGN_TOL = 1e-14


@dataclass(frozen=True)
class ProblemCase:
    """Elliptic problem in non-divergence form with known exact solution."""

    name: str
    domain: tuple  # (xmin, ymin, xmax, ymax)
    coef_sym: Callable  # (x, y) -> (a11, a12, a22)
    u: Callable  # (x, y) -> values
    grad_u: Callable  # (x, y) -> (..., 2)
    hess_u: Callable  # (x, y) -> (..., 3) as (hxx, hxy, hyy)
    a_defined: Optional[Callable] = None  # (x, y) -> bool mask, None = everywhere
    params: dict = field(default_factory=dict)

    def f(self, x, y):
        """Source term A : D2u."""
        a11, a12, a22 = self.coef_sym(x, y)
        h = self.hess_u(x, y)
        return a11 * h[..., 0] + 2.0 * a12 * h[..., 1] + a22 * h[..., 2]

    def g(self, x, y):
        """Dirichlet boundary data (trace of the exact solution)."""
        return self.u(x, y)

    def coef(self, x, y):
        """Coefficient as a full (..., 2, 2) symmetric matrix."""
        a11, a12, a22 = self.coef_sym(x, y)
        out = np.empty(np.shape(a11) + (2, 2))
        out[..., 0, 0] = a11
        out[..., 0, 1] = a12
        out[..., 1, 0] = a12
        out[..., 1, 1] = a22
        return out


def _sign(v):
    # v / |v| with the undefined locus mapped to 0
    return np.where(np.abs(v) < _SIGN_TOL, 0.0, np.sign(v))


def _case_ex1():
    def coef(x, y):
        a11 = np.abs(np.sin(4.0 * np.pi * x)) ** 0.2 + 1.0
        a22 = np.abs(np.sin(4.0 * np.pi * y)) ** 0.2 + 1.0
        a12 = np.cos(2.0 * np.pi * x * y)
        return a11, a12, a22

    return ProblemCase(
        name="ex1",
        domain=(-1.0, -1.0, 1.0, 1.0),
        coef_sym=coef,
        u=_osc_u,
        grad_u=_osc_grad,
        hess_u=_osc_hess,
    )


def _case_ex2():
    def coef(x, y):
        s = _sign(x * y)
        two = np.full(np.shape(s), 2.0)
        return two, s, two

    def defined(x, y):
        return np.abs(x * y) >= _SIGN_TOL

    return ProblemCase(
        name="ex2",
        domain=(-1.0, -1.0, 1.0, 1.0),
        coef_sym=coef,
        u=_osc_u,
        grad_u=_osc_grad,
        hess_u=_osc_hess,
        a_defined=defined,
    )


# oscillatory exact solution shared by ex1/ex2: u = x y sin(2 pi x) sin(3 pi y)
def _phi(x):
    return x * np.sin(2.0 * np.pi * x)


def _phi1(x):
    return np.sin(2.0 * np.pi * x) + 2.0 * np.pi * x * np.cos(2.0 * np.pi * x)


def _phi2(x):
    return 4.0 * np.pi * np.cos(2.0 * np.pi * x) - 4.0 * np.pi**2 * x * np.sin(2.0 * np.pi * x)


def _psi(y):
    return y * np.sin(3.0 * np.pi * y)


def _psi1(y):
    return np.sin(3.0 * np.pi * y) + 3.0 * np.pi * y * np.cos(3.0 * np.pi * y)


def _psi2(y):
    return 6.0 * np.pi * np.cos(3.0 * np.pi * y) - 9.0 * np.pi**2 * y * np.sin(3.0 * np.pi * y)


def _osc_u(x, y):
    return _phi(x) * _psi(y)


def _osc_grad(x, y):
    return np.stack([_phi1(x) * _psi(y), _phi(x) * _psi1(y)], axis=-1)


def _osc_hess(x, y):
    return np.stack(
        [_phi2(x) * _psi(y), _phi1(x) * _psi1(y), _phi(x) * _psi2(y)], axis=-1
    )


def _case_ex4(alpha):
    # u = r^alpha with a corner singularity at the origin; gradient and
    # Hessian are only sampled at strictly interior quadrature points
    def u(x, y):
        return np.hypot(x, y) ** alpha

    def grad(x, y):
        r = np.hypot(x, y)
        safe = np.where(r < _SIGN_TOL, 1.0, r)
        fac = np.where(r < _SIGN_TOL, 0.0, alpha * safe ** (alpha - 2.0))
        return np.stack([fac * x, fac * y], axis=-1)

    def hess(x, y):
        r = np.hypot(x, y)
        safe = np.where(r < _SIGN_TOL, 1.0, r)
        f1 = np.where(r < _SIGN_TOL, 0.0, alpha * safe ** (alpha - 2.0))
        f2 = np.where(r < _SIGN_TOL, 0.0, alpha * (alpha - 2.0) * safe ** (alpha - 4.0))
        return np.stack(
            [f1 + f2 * x * x, f2 * x * y, f1 + f2 * y * y], axis=-1
        )

    def coef(x, y):
        return 1.0 + x * x, x * y, 1.0 + y * y

    return ProblemCase(
        name="ex4",
        domain=(0.0, 0.0, 1.0, 1.0),
        coef_sym=coef,
        u=u,
        grad_u=grad,
        hess_u=hess,
        params={"alpha": alpha},
    )


def _identity_coef(x, y):
    one = np.ones(np.shape(np.asarray(x)))
    return one, np.zeros_like(one), one


def _case_patch_linear():
    return ProblemCase(
        name="patch_linear",
        domain=(0.0, 0.0, 1.0, 1.0),
        coef_sym=_identity_coef,
        u=lambda x, y: 1.0 + x + 2.0 * y,
        grad_u=lambda x, y: np.stack([np.ones(np.shape(x)), np.full(np.shape(x), 2.0)], axis=-1),
        hess_u=lambda x, y: np.zeros(np.shape(x) + (3,)),
    )


def _case_patch_quadratic():
    return ProblemCase(
        name="patch_quadratic",
        domain=(0.0, 0.0, 1.0, 1.0),
        coef_sym=_identity_coef,
        u=lambda x, y: x * x + x * y - y,
        grad_u=lambda x, y: np.stack([2.0 * x + y, x - np.ones(np.shape(x))], axis=-1),
        hess_u=lambda x, y: np.broadcast_to(
            np.array([2.0, 1.0, 0.0]), np.shape(x) + (3,)
        ).copy(),
    )


CASE_NAMES = ("ex1", "ex2", "ex4", "patch_linear", "patch_quadratic")


def case(name: str, alpha: float = 1.2) -> ProblemCase:
    """Look up a problem case by name; `alpha` only affects ex4."""
    if name == "ex1":
        return _case_ex1()
    if name == "ex2":
        return _case_ex2()
    if name == "ex4":
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        return _case_ex4(alpha)
    if name == "patch_linear":
        return _case_patch_linear()
    if name == "patch_quadratic":
        return _case_patch_quadratic()
    raise ValueError(f"unknown case {name!r}; available: {', '.join(CASE_NAMES)}")


@dataclass(frozen=True)
class CordesReport:
    """Sampled ellipticity / Cordes diagnostics for a coefficient field."""

    max_ratio: float  # max of |A|^2 / (tr A)^2 over defined samples
    epsilon: float  # largest eps with ratio <= 1/(1 + eps), capped at 1
    gamma_min: float  # range of gamma = tr A / |A|^2
    gamma_max: float
    lemma_max_slack: float  # max of |gamma A:B - tr B| - sqrt(1-eps)|B|, <= 0
    n_samples: int


def cordes_check(coef_sym, domain, samples: int = 100, defined=None, seed: int = 0) -> CordesReport:
    """Verify ellipticity and the Cordes bound on a sample grid.

    Samples the cell centers of a `samples` x `samples` grid over the
    domain, skipping points where the coefficient is undefined, and also
    spot-checks the gamma-inequality |gamma A:B - tr B| <= sqrt(1-eps)|B|
    on random (point, matrix) pairs.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    xmin, ymin, xmax, ymax = domain
    xs = xmin + (np.arange(samples) + 0.5) * (xmax - xmin) / samples
    ys = ymin + (np.arange(samples) + 0.5) * (ymax - ymin) / samples
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    x, y = X.ravel(), Y.ravel()
    if defined is not None:
        mask = np.asarray(defined(x, y), dtype=bool)
        x, y = x[mask], y[mask]
    if x.size == 0:
        raise ValueError("no defined sample points in the domain")

    a11, a12, a22 = (np.broadcast_to(c, x.shape) for c in coef_sym(x, y))
    tr = a11 + a22
    if np.any(tr <= 0.0):
        raise NotEllipticError("non-positive trace at a sample point")
    frob2 = a11 * a11 + 2.0 * a12 * a12 + a22 * a22
    ratio = frob2 / (tr * tr)
    max_ratio = float(ratio.max())
    eps = min(1.0 / max_ratio - 1.0, 1.0)
    if eps <= 0.0:
        raise NotEllipticError(
            f"Cordes condition fails: max |A|^2/(tr A)^2 = {max_ratio:.6g} >= 1"
        )
    gamma = tr / frob2

    rng = np.random.default_rng(seed)
    npts = min(100, x.size)
    idx = rng.choice(x.size, size=npts, replace=False)
    B = rng.standard_normal((100, 2, 2))
    normB = np.linalg.norm(B.reshape(100, 4), axis=1)
    # lhs[s, k] = |gamma_s (A_s : B_k) - tr B_k|
    AdotB = (
        np.outer(a11[idx], B[:, 0, 0])
        + np.outer(a12[idx], B[:, 0, 1] + B[:, 1, 0])
        + np.outer(a22[idx], B[:, 1, 1])
    )
    lhs = np.abs(gamma[idx, None] * AdotB - (B[:, 0, 0] + B[:, 1, 1])[None, :])
    slack = lhs - np.sqrt(1.0 - eps) * normB[None, :]
    return CordesReport(
        max_ratio=max_ratio,
        epsilon=float(eps),
        gamma_min=float(gamma.min()),
        gamma_max=float(gamma.max()),
        lemma_max_slack=float(slack.max()),
        n_samples=int(x.size),
    )
