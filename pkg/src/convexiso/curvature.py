"""Local boundary probes: quadratic height fits, strict convexity, normal alignment.

Around a boundary point X0 with outer normal ν, write nearby boundary points
as ``X0 + Y - y·ν`` with ``Y ⟂ ν``.  A point has positive generalized
curvature when ``(1-ε) q(Y) <= y <= (1+ε) q(Y)`` for a positive definite form
q and ε -> 0 at small scales.  The probe fits q at one finite scale only and
reports the scale with the estimate.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConeLike, FlatPoint, NonUniqueNormal, NotOnBoundary
from .geometry import Ball, CapModel, Ellipsoid, VPolytope, body_moments, boundary_distance
from .geometry import line_intersection, outer_normals

BOUNDARY_TOL = 1e-9
FLAT_TOL = 1e-8
CONE_EPS = 0.5


@dataclass
class CurvatureEstimate:
    """Quadratic-form fit of the boundary height at one scale."""

    point: np.ndarray
    normal: np.ndarray          # outer unit normal
    tangent_basis: np.ndarray   # (n, n-1), orthonormal basis of the tangent space
    q: np.ndarray               # (n-1, n-1), in tangent_basis coordinates
    eps_hat: float
    radius: float
    samples: int

    @property
    def q_ambient(self):
        """The form as an n×n matrix acting on the tangent space (basis free)."""
        B = self.tangent_basis
        return B @ self.q @ B.T

    @property
    def principal_curvatures(self):
        return 2.0 * np.linalg.eigvalsh(self.q)

    def to_dict(self, verdict="curved"):
        return {"normal": self.normal.tolist(), "q": self.q.tolist(),
                "eps_hat": float(self.eps_hat) if np.isfinite(self.eps_hat) else None,
                "verdict": verdict,
                "radius": float(self.radius)}


def _require_boundary(K, X0):
    d = boundary_distance(K, X0)
    if abs(d) > BOUNDARY_TOL * K.diameter:
        raise NotOnBoundary(f"point is {d:.3g} away from the boundary")


def _unit(v):
    return v / np.linalg.norm(v)


def averaged_normal(K, X0):
    """Outer normal at X0: area-weighted mean of incident facet normals for
    polytopes, the gradient direction for smooth bodies."""
    normals, weights = outer_normals(K, X0)
    if not normals:
        raise NotOnBoundary("no supporting facet through the point")
    return _unit(np.average(np.asarray(normals), axis=0, weights=weights))


def tangent_basis(nu):
    """Deterministic orthonormal basis of ``nu``'s orthogonal complement.

    Standard basis vectors are projected and orthonormalized in order of
    decreasing projected length, so ``nu = ±e_n`` gives ``e_1..e_{n-1}``.
    """
    n = nu.shape[0]
    P = np.eye(n) - np.outer(nu, nu)
    order = np.argsort(-np.linalg.norm(P, axis=0), kind="stable")
    picks = []
    for k in order:
        v = P[:, k].copy()
        for p in picks:
            v -= (p @ v) * p
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            picks.append(v / nv)
        if len(picks) == n - 1:
            break
    picks.sort(key=lambda v: int(np.argmax(np.abs(v))))
    return np.column_stack(picks)


def _tangent_directions(m):
    if m == 1:
        return np.array([[1.0], [-1.0]])
    if m == 2:
        ang = np.linspace(0, 2 * np.pi, 32, endpoint=False)
        return np.c_[np.cos(ang), np.sin(ang)]
    eye = np.eye(m)
    rng = np.random.default_rng(0)
    g = rng.normal(size=(32 * m, m))
    dirs = np.vstack([eye, -eye, g])
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def _quadratic_design(Y):
    m = Y.shape[1]
    idx = [(i, j) for i in range(m) for j in range(i, m)]
    cols = [Y[:, i] * Y[:, j] for i, j in idx]
    return np.column_stack(cols), idx


def estimate_quadratic_form(K, X0, radius, rings=8, basis=None):
    """Least-squares fit of the boundary height ``y ≈ q(Y)`` near X0.

    Boundary points are found by shooting rays along the inner normal from
    ``X0 + Y`` for tangential offsets on ``rings`` circles of radius up to
    ``radius``.  Only quadratic monomials enter the fit.

    Raises
    ------
    FlatPoint
        if the smallest eigenvalue of the fit is below ``1e-8 / radius``.
    ConeLike
        if the fitted sandwich ratio ``eps_hat`` exceeds 1/2.
    """
    X0 = np.asarray(X0, dtype=float)
    _require_boundary(K, X0)
    if not 0 < radius < K.diameter / 4:
        raise ValueError("radius must lie in (0, diam/4)")
    nu = averaged_normal(K, X0)
    B = tangent_basis(nu) if basis is None else np.asarray(basis, dtype=float)
    n = X0.shape[0]
    dirs = _tangent_directions(n - 1)
    Ys, hs = [], []
    for k in range(1, rings + 1):
        for d in dirs:
            Y = radius * k / rings * d
            li = line_intersection(K, X0 + B @ Y, -nu)
            if li is None:
                continue
            Ys.append(Y)
            hs.append(max(li[0], 0.0))
    Ys, hs = np.asarray(Ys), np.asarray(hs)
    D, idx = _quadratic_design(Ys)
    coef = np.linalg.lstsq(D, hs, rcond=None)[0]
    q = np.zeros((n - 1, n - 1))
    for c, (i, j) in zip(coef, idx):
        if i == j:
            q[i, i] = c
        else:
            q[i, j] = q[j, i] = c / 2
    qY = np.einsum("ki,ij,kj->k", Ys, q, Ys)
    lam_min = np.linalg.eigvalsh(q)[0]
    if lam_min < FLAT_TOL / radius:
        eps_hat = float("inf")
    else:
        eps_hat = float(np.max(np.abs(hs / qY - 1.0)))
    est = CurvatureEstimate(X0, nu, B, q, eps_hat, float(radius), len(hs))
    if lam_min < FLAT_TOL / radius:
        raise FlatPoint(est, f"no positive curvature (smallest eigenvalue {lam_min:.3g})")
    if eps_hat > CONE_EPS:
        raise ConeLike(est, f"height is not quadratic at this scale (eps_hat {eps_hat:.3g})")
    return est


def radius_schedule(K, X0, radii, **kw):
    """Estimates over a list of sample radii (e.g. dyadic)."""
    return [estimate_quadratic_form(K, X0, r, **kw) for r in radii]


def probe(K, X0, radius):
    """JSON-ready report ``{normal, q, eps_hat, verdict, radius}``."""
    try:
        return estimate_quadratic_form(K, X0, radius).to_dict("curved")
    except (FlatPoint, ConeLike) as exc:
        return exc.estimate.to_dict(exc.verdict)


def strict_convexity_test(K, X0, tol=1e-9, allow_endpoint=False):
    """Is X0 a point of local strict convexity of ∂K?

    By default no non-degenerate boundary segment may contain X0, not even
    as an end-point, so no point of a polytope qualifies.  With
    ``allow_endpoint`` X0 only has to avoid the relative interior of
    boundary segments; for polytopes that means X0 is a vertex.
    """
    X0 = np.asarray(X0, dtype=float)
    _require_boundary(K, X0)
    scale = K.diameter
    if isinstance(K, (Ball, Ellipsoid)):
        return True
    if isinstance(K, CapModel):
        # The top disc is flat; its rim is an end-point of segments in it.
        return bool(X0[-1] < K.a - tol * scale)
    if isinstance(K, VPolytope):
        if not allow_endpoint:
            return False
        d = np.linalg.norm(K.vertices - X0, axis=1)
        return bool(d.min() <= tol * scale)
    raise TypeError(f"unsupported body {type(K).__name__}")


def normal_alignment(K, X0):
    """Angle in radians between the outer normal at X0 and the vector X0."""
    X0 = np.asarray(X0, dtype=float)
    m = body_moments(K)
    if np.linalg.norm(m.centroid) > BOUNDARY_TOL * K.diameter:
        raise ValueError("body centroid must be at the origin")
    _require_boundary(K, X0)
    normals, _ = outer_normals(K, X0)
    if len(normals) != 1:
        raise NonUniqueNormal(f"{len(normals)} supporting facets meet at the point")
    nx = np.linalg.norm(X0)
    if nx == 0:
        raise ValueError("X0 must be nonzero")
    c = np.clip(normals[0] @ X0 / nx, -1.0, 1.0)
    return float(np.arccos(c))
