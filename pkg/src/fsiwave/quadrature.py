"""Fixed quadrature rules on reference simplices.

Rules are expressed in reference coordinates of the unit tetrahedron
(vertices 0, e1, e2, e3) and unit triangle (vertices 0, e1, e2), with
weights normalized to sum to 1.  Integrals over a physical cell are the
weighted sum of integrand values times the cell measure.
"""

import numpy as np

# 4-point rule, exact for polynomials of degree <= 2.
_TA = 0.5854101966249685
_TB = 0.1381966011250105
TET_DEGREE2_POINTS = np.array(
    [
        [_TA, _TB, _TB],
        [_TB, _TA, _TB],
        [_TB, _TB, _TA],
        [_TB, _TB, _TB],
    ]
)
TET_DEGREE2_WEIGHTS = np.full(4, 0.25)

# Keast 11-point rule, exact for polynomials of degree <= 4.  The centroid
# weight is negative; that is harmless for the smooth integrands used here.
def _keast11():
    from itertools import permutations

    pts = [[0.25, 0.25, 0.25]]
    wts = [-0.0789333333333333]
    a, b = 0.0714285714285714, 1.0 - 3.0 * 0.0714285714285714
    for bary in sorted(set(permutations((a, a, a, b)))):
        pts.append(list(bary[1:]))
        wts.append(0.0457333333333333)
    a, b = 0.399403576166799, 0.100596423833201
    for bary in sorted(set(permutations((a, a, b, b)))):
        pts.append(list(bary[1:]))
        wts.append(0.1493333333333333)
    return np.array(pts), np.array(wts)


TET_DEGREE4_POINTS, TET_DEGREE4_WEIGHTS = _keast11()

# Edge-midpoint rule, exact for polynomials of degree <= 2.
TRI_DEGREE2_POINTS = np.array([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]])
TRI_DEGREE2_WEIGHTS = np.full(3, 1.0 / 3.0)


def tet_rule(degree: int):
    """Return (points, weights) for a tetrahedron rule of the given degree."""
    if degree <= 2:
        return TET_DEGREE2_POINTS, TET_DEGREE2_WEIGHTS
    if degree <= 4:
        return TET_DEGREE4_POINTS, TET_DEGREE4_WEIGHTS
    raise ValueError(f"no tetrahedron rule of degree {degree}")


def tri_rule(degree: int):
    """Return (points, weights) for a triangle rule of the given degree."""
    if degree <= 2:
        return TRI_DEGREE2_POINTS, TRI_DEGREE2_WEIGHTS
    raise ValueError(f"no triangle rule of degree {degree}")


def tet_points(vertices: np.ndarray, tets: np.ndarray, ref_points: np.ndarray) -> np.ndarray:
    """Map reference points into every tetrahedron.

    Returns an array of shape (ntets, npoints, 3).
    """
    v = vertices[tets]  # (nt, 4, 3)
    origin = v[:, 0, :]
    edges = v[:, 1:, :] - origin[:, None, :]  # (nt, 3, 3)
    return origin[:, None, :] + np.einsum("qr,trx->tqx", ref_points, edges)


def tri_points(corners: np.ndarray, ref_points: np.ndarray) -> np.ndarray:
    """Map reference triangle points into faces given by corner coordinates.

    ``corners`` has shape (nfaces, 3, 3); the result (nfaces, npoints, 3).
    """
    origin = corners[:, 0, :]
    edges = corners[:, 1:, :] - origin[:, None, :]
    return origin[:, None, :] + np.einsum("qr,trx->tqx", ref_points, edges)


def p1_basis_at(ref_points: np.ndarray) -> np.ndarray:
    """Values of the four P1 tet basis functions at reference points, (npoints, 4)."""
    lam0 = 1.0 - ref_points.sum(axis=1)
    return np.column_stack([lam0, ref_points])


def p1_tri_basis_at(ref_points: np.ndarray) -> np.ndarray:
    """Values of the three P1 triangle basis functions at reference points."""
    lam0 = 1.0 - ref_points.sum(axis=1)
    return np.column_stack([lam0, ref_points])
