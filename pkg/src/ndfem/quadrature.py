"""Quadrature rules on the reference triangle and the unit edge.

Triangle rules are fully symmetric (invariant under the six affine maps of
the reference triangle onto itself), have strictly positive weights and
strictly interior points, and are exact to the requested polynomial degree.
Degrees 1 and 2 use the classical centroid / three-point rules; higher
degrees symmetrize a Gauss-Legendre x Gauss-Jacobi product rule obtained
from the collapsed-square map, which is exact by construction for any
degree.  Edge rules are Gauss-Legendre on [0, 1].
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

MAX_DEGREE = 12


@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights on a reference entity.

    points has shape (n, 2) for the reference triangle
    {(xi, eta): xi, eta >= 0, xi + eta <= 1} and shape (n,) for the unit
    edge [0, 1].  Weights sum to the reference measure (1/2 resp. 1).
    """

    points: np.ndarray
    weights: np.ndarray
    exact_degree: int


def _check_degree(degree):
    if not 1 <= degree <= MAX_DEGREE:
        raise ValueError(f"quadrature degree must be in [1, {MAX_DEGREE}], got {degree}")


def _gauss01(n):
    # Gauss-Legendre mapped from [-1, 1] to [0, 1]
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _collapsed_rule(degree):
    # Duffy map (u, v) -> (u, v(1-u)) sends [0,1]^2 to the triangle with
    # Jacobian (1-u); the u-direction uses a Gauss-Jacobi rule that absorbs
    # that factor, so n points per direction are exact to degree 2n-1.
    n = (degree + 2) // 2
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    u = 0.5 * (xj + 1.0)
    wu = 0.25 * wj
    v, wv = _gauss01(n)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ww = np.outer(wu, wv)
    xi = uu.ravel()
    eta = (vv * (1.0 - uu)).ravel()
    return np.column_stack([xi, eta]), ww.ravel()


def _symmetrize(points, weights):
    # Average over the six vertex permutations of the reference triangle,
    # expressed through the barycentric coordinates (l0, l1, l2).
    l1, l2 = points[:, 0], points[:, 1]
    l0 = 1.0 - l1 - l2
    bary = (l0, l1, l2)
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    pts = np.concatenate(
        [np.column_stack([bary[p[1]], bary[p[2]]]) for p in perms]
    )
    wts = np.concatenate([weights / 6.0] * 6)
    return pts, wts


def triangle_rule(degree: int) -> QuadratureRule:
    """Symmetric positive rule on the reference triangle, exact to `degree`."""
    _check_degree(degree)
    if degree == 1:
        points = np.array([[1.0 / 3.0, 1.0 / 3.0]])
        weights = np.array([0.5])
    elif degree == 2:
        points = np.array(
            [[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]]
        )
        weights = np.full(3, 1.0 / 6.0)
    else:
        points, weights = _symmetrize(*_collapsed_rule(degree))
    return QuadratureRule(points=points, weights=weights, exact_degree=degree)


def edge_rule(degree: int) -> QuadratureRule:
    """Gauss rule on [0, 1], exact to `degree`; endpoints are excluded."""
    _check_degree(degree)
    n = (degree + 2) // 2
    t, w = _gauss01(n)
    return QuadratureRule(points=t, weights=w, exact_degree=degree)


def map_to_triangle(rule: QuadratureRule, p0, p1, p2):
    """Map a reference-triangle rule to the physical triangle (p0, p1, p2).

    Returns (points (n, 2), weights (n,)); weights include the Jacobian, so
    they sum to the triangle area.
    """
    xi, eta = rule.points[:, 0], rule.points[:, 1]
    pts = (
        np.asarray(p0)
        + np.outer(xi, np.asarray(p1) - np.asarray(p0))
        + np.outer(eta, np.asarray(p2) - np.asarray(p0))
    )
    det = abs(
        (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])
    )
    return pts, rule.weights * det
