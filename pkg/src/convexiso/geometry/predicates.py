"""Exact-sign orientation predicate.

A floating-point determinant is trusted when it clears a forward error bound;
otherwise the determinant is recomputed in rational arithmetic from the exact
binary values of the inputs.
"""
from fractions import Fraction

import numpy as np

_EPS = np.finfo(float).eps


def _fraction_det(rows):
    m = [[Fraction(x) for x in row] for row in rows]
    size = len(m)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        p = m[col][col]
        det *= p
        for r in range(col + 1, size):
            f = m[r][col] / p
            if f:
                for c in range(col, size):
                    m[r][c] -= f * m[col][c]
    return det


def orientation(simplex_points, query):
    """Sign of det[p_1 - q, ..., p_n - q] for n points spanning a hyperplane.

    Returns +1, -1 or 0. The sign is exact for the given double inputs.
    """
    pts = np.asarray(simplex_points, dtype=float)
    q = np.asarray(query, dtype=float)
    n = q.shape[0]
    if pts.shape != (n, n):
        raise ValueError("need n points in R^n")
    diff = pts - q
    det = np.linalg.det(diff)
    # Hadamard bound on |det| scaled by a generous LU error factor.
    bound = np.prod(np.linalg.norm(diff, axis=1)) * (4 * n ** 3) * _EPS
    if abs(det) > bound:
        return 1 if det > 0 else -1
    # Exact route: subtract in rationals so the differences are exact too.
    rows = [[Fraction(a) - Fraction(b) for a, b in zip(p, q)] for p in pts.tolist()]
    exact = _fraction_det(rows)
    return (exact > 0) - (exact < 0)


def side_of_hyperplane(facet_points, interior_point, query):
    """+1 if ``query`` is strictly beyond the facet hyperplane (away from
    ``interior_point``), -1 if strictly on the interior side, 0 if on it."""
    inside = orientation(facet_points, interior_point)
    if inside == 0:
        raise ValueError("reference point lies on the facet hyperplane")
    return -inside * orientation(facet_points, query)
