"""Convex bodies and the exact operations on them.

Four body types are supported: vertex polytopes, balls, ellipsoids and the
paraboloid cap model.  Polytope hulls are computed with Qhull and then
cleaned so that every stored vertex is an extreme point.
"""
from dataclasses import dataclass
from functools import cached_property
from math import factorial, pi, sqrt

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq, minimize_scalar
from scipy.spatial import ConvexHull, QhullError

from ..errors import DegenerateInput, EmptyIntersection, QuadratureFailure
from .moments import MomentData, Simplex, simplices_moments
from .predicates import side_of_hyperplane

MIN_DIM, MAX_DIM = 2, 6
# Metric comparisons are relative to the body scale.
REL_TOL = 1e-9


def unit_ball_volume(k):
    """Volume of the Euclidean unit ball in R^k (v_0 = 1, v_1 = 2)."""
    if k < 0:
        raise ValueError("dimension must be nonnegative")
    v = [1.0, 2.0]
    for j in range(2, k + 1):
        v.append(v[j - 2] * 2.0 * pi / j)
    return v[k]


def _check_dim(n):
    if not MIN_DIM <= n <= MAX_DIM:
        raise ValueError(f"ambient dimension must be in [{MIN_DIM}, {MAX_DIM}], got {n}")


def _unit(u):
    u = np.asarray(u, dtype=float)
    nrm = np.linalg.norm(u)
    if nrm == 0:
        raise ValueError("zero direction")
    return u / nrm


@dataclass(frozen=True)
class Halfspace:
    """The set ``{x : <x, normal> <= offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        u = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise ValueError("halfspace normal must be a unit vector")
        object.__setattr__(self, "normal", u)
        object.__setattr__(self, "offset", float(self.offset))

    def complement(self):
        return Halfspace(-self.normal, -self.offset)

    def contains(self, x, tol=0.0):
        return np.asarray(x) @ self.normal <= self.offset + tol


@dataclass(frozen=True)
class Facet:
    normal: np.ndarray          # outer unit normal
    offset: float               # <x, normal> = offset on the facet
    simplices: np.ndarray       # (k, n) vertex indices triangulating the facet
    vertices: tuple             # sorted vertex indices on the facet
    area: float


def _hull(points, options="Qt"):
    try:
        return ConvexHull(points, qhull_options=options)
    except QhullError as exc:
        raise DegenerateInput(f"qhull failed: {str(exc).splitlines()[0]}") from exc


def _check_full_dim(points):
    n = points.shape[1]
    if points.shape[0] < n + 1:
        raise DegenerateInput(f"need at least {n + 1} points in R^{n}")
    centered = points - points.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[0] == 0 or sv[-1] <= 1e-12 * sv[0]:
        raise DegenerateInput("points are not full-dimensional")


def _merge_facets(points, hull):
    """Group Qhull's simplicial facets into geometric facets."""
    eq = hull.equations
    scale = np.max(np.abs(points)) + np.ptp(points)
    groups = []
    for i in range(len(eq)):
        for g in groups:
            ref = eq[g[0]]
            if (np.abs(eq[i, :-1] - ref[:-1]).max() < REL_TOL * 10
                    and abs(eq[i, -1] - ref[-1]) < REL_TOL * 10 * scale):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


class VPolytope:
    """Convex polytope given by its extreme points.

    The constructor validates that ``vertices`` are full-dimensional and that
    every one of them is an extreme point; use :func:`convex_hull` to build a
    polytope from an arbitrary point cloud.
    """

    def __init__(self, vertices, *, _hull_data=None):
        pts = np.array(vertices, dtype=float)
        if pts.ndim != 2:
            raise ValueError("vertices must be a 2-d array")
        _check_dim(pts.shape[1])
        _check_full_dim(pts)
        hull = _hull_data if _hull_data is not None else _hull(pts)
        if len(hull.vertices) != len(pts) or not _all_extreme(pts, hull):
            raise ValueError("vertex list contains non-extreme points; use convex_hull")
        pts.setflags(write=False)
        self.vertices = pts
        self._qhull = hull

    def __repr__(self):
        return f"VPolytope(n={self.dim}, vertices={len(self.vertices)})"

    @property
    def dim(self):
        return self.vertices.shape[1]

    @cached_property
    def facets(self):
        pts, hull = self.vertices, self._qhull
        groups = _merge_facets(pts, hull)
        n = self.dim
        out = []
        for g in groups:
            simp = hull.simplices[g]
            normal = hull.equations[g, :-1].mean(axis=0)
            normal /= np.linalg.norm(normal)
            offset = float(np.mean(pts[simp.ravel()] @ normal))
            area = 0.0
            for s in simp:
                E = pts[s[1:]] - pts[s[0]]
                G = E @ E.T
                area += sqrt(max(np.linalg.det(G), 0.0)) / factorial(n - 1)
            out.append(Facet(normal, offset, simp, tuple(sorted(set(simp.ravel().tolist()))), area))
        return out

    @cached_property
    def facet_simplices(self):
        """(k, n) vertex-index array triangulating the boundary."""
        return np.asarray(self._qhull.simplices)

    @cached_property
    def halfspaces(self):
        N = np.array([f.normal for f in self.facets])
        c = np.array([f.offset for f in self.facets])
        return N, c

    @cached_property
    def diameter(self):
        v = self.vertices
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d ** 2).sum(-1)).max())

    @cached_property
    def vertex_centroid(self):
        return self.vertices.mean(axis=0)


def _all_extreme(points, hull):
    n = points.shape[1]
    incident = [[] for _ in range(len(points))]
    for k, s in enumerate(hull.simplices):
        for i in s:
            incident[i].append(k)
    for i in hull.vertices:
        normals = hull.equations[incident[i], :-1]
        if len(normals) < n or np.linalg.matrix_rank(normals, tol=1e-9) < n:
            return False
    return True


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        _check_dim(c.shape[0])
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def diameter(self):
        return 2.0 * self.radius


@dataclass(frozen=True)
class Ellipsoid:
    """``{x : (x - c)ᵀ shape⁻¹ (x - c) <= 1}``; shape = r² I is a ball of radius r."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        Q = np.asarray(self.shape, dtype=float)
        _check_dim(c.shape[0])
        if Q.shape != (c.shape[0], c.shape[0]):
            raise ValueError("shape matrix has wrong size")
        if not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * np.abs(Q).max()):
            raise ValueError("shape matrix must be symmetric")
        Q = 0.5 * (Q + Q.T)
        if np.linalg.eigvalsh(Q).min() <= 0:
            raise ValueError("shape matrix must be positive definite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", Q)

    @property
    def dim(self):
        return self.center.shape[0]

    @cached_property
    def root(self):
        """Symmetric square root L with ellipsoid = c + L·(unit ball)."""
        w, V = np.linalg.eigh(self.shape)
        return (V * np.sqrt(w)) @ V.T

    @property
    def diameter(self):
        return 2.0 * sqrt(np.linalg.eigvalsh(self.shape).max())


@dataclass(frozen=True)
class CapModel:
    """Paraboloid cap ``{(Y, y) : f(|Y|) <= y <= a}`` in R^n, apex at the origin.

    ``f(r) = r²/(2R) · (1 + (eps/R) · r/√(2Ra))``.  With ``eps = 0`` this is the
    exact paraboloid of curvature radius ``R``; for ``eps > 0`` the local
    radius stays inside ``[R²/(R+eps), R]`` while the boundary stays convex.
    The inner normal at the apex is ``e_n``.
    """

    n: int
    R: float
    a: float
    eps: float = 0.0

    def __post_init__(self):
        _check_dim(self.n)
        if not (self.R > 0 and self.a > 0):
            raise ValueError("R and a must be positive")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    @property
    def dim(self):
        return self.n

    @property
    def rho0(self):
        return sqrt(2.0 * self.R * self.a)

    def height(self, r):
        r = np.asarray(r, dtype=float)
        return r ** 2 / (2 * self.R) * (1.0 + (self.eps / self.R) * r / self.rho0)

    def height_slope(self, r):
        k = (self.eps / self.R) / self.rho0
        return r / self.R + 3.0 * k * r ** 2 / (2 * self.R)

    @cached_property
    def rim_radius(self):
        if self.eps == 0:
            return self.rho0
        return brentq(lambda r: float(self.height(r)) - self.a, 0.0, self.rho0, xtol=1e-16 * self.rho0, rtol=1e-15)

    @property
    def diameter(self):
        return max(2 * self.rim_radius, sqrt(self.rim_radius ** 2 + self.a ** 2))


ConvexBody = (VPolytope, Ball, Ellipsoid, CapModel)


# ---------------------------------------------------------------------------
# hull, clipping, triangulation
# ---------------------------------------------------------------------------

def convex_hull(points):
    """Minimal vertex representation of ``conv(points)``.

    Vertices keep the relative order they had in ``points``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-d array")
    _check_dim(pts.shape[1])
    _check_full_dim(pts)
    hull = _hull(pts)
    idx = np.sort(hull.vertices)
    keep = _extreme_subset(pts, hull, idx)
    sub = pts[keep]
    sub_hull = _hull(sub)
    # A second pass catches points Qhull kept on merged facets.
    if len(sub_hull.vertices) != len(sub) or not _all_extreme(sub, sub_hull):
        idx2 = np.sort(sub_hull.vertices)
        keep2 = _extreme_subset(sub, sub_hull, idx2)
        sub = sub[keep2]
        sub_hull = _hull(sub)
    return VPolytope(sub, _hull_data=sub_hull)


def _extreme_subset(pts, hull, idx):
    n = pts.shape[1]
    incident = {i: [] for i in idx}
    for k, s in enumerate(hull.simplices):
        for i in s:
            if i in incident:
                incident[i].append(k)
    keep = []
    for i in idx:
        normals = hull.equations[incident[i], :-1]
        if len(normals) >= n and np.linalg.matrix_rank(normals, tol=1e-9) == n:
            keep.append(i)
    return np.array(keep, dtype=int)


def clip_halfspace(P, h):
    """Vertex representation of ``P ∩ h``."""
    V = P.vertices
    scale = P.diameter
    s = V @ h.normal - h.offset
    tol = 1e-12 * scale
    inside = s <= tol
    if inside.all():
        return P
    if not inside.any() or (s < -REL_TOL * scale).sum() == 0:
        raise EmptyIntersection("halfspace misses the interior of the polytope")
    pts = [V[inside]]
    vin, vout = V[s < -tol], V[s > tol]
    sin, sout = s[s < -tol], s[s > tol]
    if len(vin) and len(vout):
        # Every pair (inside, outside) crosses the hyperplane inside P; the
        # hull of these crossings contains every edge crossing.
        lam = sin[:, None] / (sin[:, None] - sout[None, :])
        cross = vin[:, None, :] + lam[..., None] * (vout[None, :, :] - vin[:, None, :])
        pts.append(cross.reshape(-1, V.shape[1]))
    allpts = np.vstack(pts)
    try:
        return convex_hull(allpts)
    except DegenerateInput as exc:
        raise EmptyIntersection("intersection has empty interior") from exc


def triangulate(P):
    """Cone from the vertex centroid over the triangulated boundary."""
    V = P.vertices
    n = P.dim
    if len(V) == n + 1:
        return [Simplex(V.copy())]
    anchor = P.vertex_centroid
    out = []
    for s in P.facet_simplices:
        pts = np.vstack([anchor, V[s]])
        if abs(np.linalg.det(pts[1:] - pts[0])) > 0:
            out.append(Simplex(pts))
    return out


def _polytope_simplex_stack(P):
    V = P.vertices
    n = P.dim
    if len(V) == n + 1:
        return V[None]
    anchor = np.broadcast_to(P.vertex_centroid, (len(P.facet_simplices), 1, n))
    return np.concatenate([anchor, V[P.facet_simplices]], axis=1)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

def ball_moments(center, radius):
    c = np.asarray(center, dtype=float)
    n = c.shape[0]
    vol = unit_ball_volume(n) * radius ** n
    C = unit_ball_volume(n) * radius ** (n + 2) / (n + 2) * np.eye(n)
    return MomentData(vol, vol * c, C + vol * np.outer(c, c))


def _cap_moments(body, nodes):
    n, a = body.n, body.a
    rho = body.rim_radius
    x, w = leggauss(nodes)
    r = 0.5 * rho * (x + 1.0)
    w = 0.5 * rho * w
    f = body.height(r)
    sphere = (n - 1) * unit_ball_volume(n - 1)
    base = w * r ** (n - 2)
    vol = sphere * np.sum(base * (a - f))
    fy = sphere * np.sum(base * (a ** 2 - f ** 2) / 2.0)
    syy = sphere * np.sum(base * (a ** 3 - f ** 3) / 3.0)
    sYY = sphere / (n - 1) * np.sum(w * r ** n * (a - f))
    first = np.zeros(n)
    first[-1] = fy
    second = np.diag(np.r_[np.full(n - 1, sYY), syy])
    return MomentData(float(vol), first, second)


def cap_model_moments(body, tol=1e-14, max_nodes=1024):
    """Gauss–Legendre in the radial variable, exact inner height integral.

    Exact for ``eps = 0`` (polynomial integrand); otherwise the node count is
    doubled until successive estimates agree within ``tol`` relative.
    """
    nodes = 64
    prev = _cap_moments(body, nodes)
    if body.eps == 0:
        return prev
    while nodes < max_nodes:
        nodes *= 2
        cur = _cap_moments(body, nodes)
        scale = np.abs(cur.second_moment).max()
        if (abs(cur.volume - prev.volume) <= tol * cur.volume
                and np.abs(cur.second_moment - prev.second_moment).max() <= tol * scale):
            return cur
        prev = cur
    raise QuadratureFailure("cap model moments did not converge")


def body_moments(K):
    if isinstance(K, VPolytope):
        return simplices_moments(_polytope_simplex_stack(K))
    if isinstance(K, Ball):
        return ball_moments(K.center, K.radius)
    if isinstance(K, Ellipsoid):
        return ball_moments(np.zeros(K.dim), 1.0).transformed(K.root, K.center)
    if isinstance(K, CapModel):
        return cap_model_moments(K)
    raise TypeError(f"unsupported body {type(K).__name__}")


# ---------------------------------------------------------------------------
# support, membership, rays
# ---------------------------------------------------------------------------

def support(K, u):
    """``(h_K(u), maximizing point)`` for a unit vector ``u``."""
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise ValueError("support direction must be a unit vector")
    if isinstance(K, VPolytope):
        vals = K.vertices @ u
        i = int(np.argmax(vals))
        return float(vals[i]), K.vertices[i].copy()
    if isinstance(K, Ball):
        return float(K.center @ u + K.radius), K.center + K.radius * u
    if isinstance(K, Ellipsoid):
        Qu = K.shape @ u
        s = sqrt(float(u @ Qu))
        return float(K.center @ u + s), K.center + Qu / s
    if isinstance(K, CapModel):
        return _cap_support(K, u)
    raise TypeError(f"unsupported body {type(K).__name__}")


def _cap_support(K, u):
    uY, uy = u[:-1], u[-1]
    m = np.linalg.norm(uY)
    dirY = uY / m if m > 0 else np.eye(K.n - 1)[0]
    rho = K.rim_radius
    if uy >= 0:
        r, y = rho, K.a
    elif K.eps == 0:
        r = min(K.R * m / -uy, rho)
        y = float(K.height(r))
    else:
        res = minimize_scalar(lambda r: -(r * m + uy * K.height(r)), bounds=(0.0, rho),
                              method="bounded", options={"xatol": 1e-14 * rho})
        r = float(res.x)
        y = float(K.height(r))
    point = np.r_[r * dirY, y]
    return float(point @ u), point


def contains(K, X, tol=0.0):
    """Vectorized membership; ``tol`` is an absolute slack."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if isinstance(K, VPolytope):
        N, c = K.halfspaces
        return np.all(X @ N.T <= c + tol, axis=1)
    if isinstance(K, Ball):
        return np.linalg.norm(X - K.center, axis=1) <= K.radius + tol
    if isinstance(K, Ellipsoid):
        Z = np.linalg.solve(K.root, (X - K.center).T).T
        return np.linalg.norm(Z, axis=1) <= 1.0 + tol / sqrt(np.linalg.eigvalsh(K.shape).min())
    if isinstance(K, CapModel):
        r = np.linalg.norm(X[:, :-1], axis=1)
        y = X[:, -1]
        return (y <= K.a + tol) & (r <= K.rim_radius + tol) & (
            K.height(np.minimum(r, K.rim_radius)) <= y + tol)
    raise TypeError(f"unsupported body {type(K).__name__}")


def bounding_box(K):
    if isinstance(K, VPolytope):
        return K.vertices.min(axis=0), K.vertices.max(axis=0)
    if isinstance(K, Ball):
        return K.center - K.radius, K.center + K.radius
    if isinstance(K, Ellipsoid):
        h = np.sqrt(np.diag(K.shape))
        return K.center - h, K.center + h
    if isinstance(K, CapModel):
        rho = K.rim_radius
        return np.r_[np.full(K.n - 1, -rho), 0.0], np.r_[np.full(K.n - 1, rho), K.a]
    raise TypeError(f"unsupported body {type(K).__name__}")


def line_intersection(K, origin, direction):
    """Parameter interval ``[s0, s1]`` of ``origin + s·direction`` inside K,
    or ``None`` when the line misses K."""
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    if isinstance(K, VPolytope):
        N, c = K.halfspaces
        nd = N @ d
        slack = c - N @ o
        lo, hi = -np.inf, np.inf
        par = np.abs(nd) < 1e-15
        if np.any(slack[par] < 0):
            return None
        pos, neg = nd > 1e-15, nd < -1e-15
        if pos.any():
            hi = np.min(slack[pos] / nd[pos])
        if neg.any():
            lo = np.max(slack[neg] / nd[neg])
        return (float(lo), float(hi)) if lo <= hi else None
    if isinstance(K, (Ball, Ellipsoid)):
        if isinstance(K, Ball):
            p, q = (o - K.center) / K.radius, d / K.radius
        else:
            p = np.linalg.solve(K.root, o - K.center)
            q = np.linalg.solve(K.root, d)
        A, B, C = q @ q, 2 * p @ q, p @ p - 1.0
        disc = B * B - 4 * A * C
        if disc < 0:
            return None
        sq = sqrt(disc)
        # Stable quadratic roots.
        t = -0.5 * (B + np.copysign(sq, B))
        r1 = t / A
        r2 = C / t if t != 0 else -r1
        return (float(min(r1, r2)), float(max(r1, r2)))
    if isinstance(K, CapModel):
        return _cap_line(K, o, d)
    raise TypeError(f"unsupported body {type(K).__name__}")


def _cap_line(K, o, d):
    def g(s):
        X = o + s * d
        r = np.linalg.norm(X[:-1])
        if r > K.rim_radius:
            return np.inf
        return float(K.height(r)) - X[-1]

    span = 4 * K.diameter + np.linalg.norm(o)
    span /= max(np.linalg.norm(d), 1e-300)
    res = minimize_scalar(lambda s: min(g(s), 1e3), bounds=(-span, span), method="bounded",
                          options={"xatol": 1e-15 * span})
    sm = float(res.x)
    if g(sm) > 0:
        return None
    lo = brentq(g, -span, sm, xtol=1e-16 * span) if g(-span) > 0 else -span
    hi = brentq(g, sm, span, xtol=1e-16 * span) if g(span) > 0 else span
    # Top face y <= a.
    if d[-1] > 0:
        hi = min(hi, (K.a - o[-1]) / d[-1])
    elif d[-1] < 0:
        lo = max(lo, (K.a - o[-1]) / d[-1])
    return (lo, hi) if lo <= hi else None


def boundary_distance(K, X):
    """Signed distance-like defect of X from ∂K (0 on the boundary, <0 inside).

    Exact Euclidean distance for polytopes (inside) and balls; a first-order
    estimate for ellipsoids and the cap model.
    """
    X = np.asarray(X, dtype=float)
    if isinstance(K, VPolytope):
        N, c = K.halfspaces
        return float(np.max(N @ X - c))
    if isinstance(K, Ball):
        return float(np.linalg.norm(X - K.center) - K.radius)
    if isinstance(K, Ellipsoid):
        z = np.linalg.solve(K.root, X - K.center)
        nz = np.linalg.norm(z)
        if nz == 0:
            return -sqrt(np.linalg.eigvalsh(K.shape).min())
        grad = np.linalg.solve(K.root, z / nz)
        return float((nz - 1.0) / np.linalg.norm(grad))
    if isinstance(K, CapModel):
        r = np.linalg.norm(X[:-1])
        top = X[-1] - K.a
        if r > K.rim_radius:
            side = r - K.rim_radius
        else:
            slope = K.height_slope(r)
            side = (float(K.height(r)) - X[-1]) / sqrt(1 + slope ** 2)
        return float(max(top, side))
    raise TypeError(f"unsupported body {type(K).__name__}")


def outer_normals(K, X, tol=None):
    """Outer unit normals of K at the boundary point X.

    For polytopes one normal per facet containing X (within ``tol``).
    """
    X = np.asarray(X, dtype=float)
    if isinstance(K, VPolytope):
        tol = REL_TOL * K.diameter if tol is None else tol
        out = [f for f in K.facets if abs(f.normal @ X - f.offset) <= tol]
        return [f.normal.copy() for f in out], [f.area for f in out]
    if isinstance(K, Ball):
        return [_unit(X - K.center)], [1.0]
    if isinstance(K, Ellipsoid):
        return [_unit(np.linalg.solve(K.shape, X - K.center))], [1.0]
    if isinstance(K, CapModel):
        tol = REL_TOL * K.diameter if tol is None else tol
        r = np.linalg.norm(X[:-1])
        normals = []
        if abs(X[-1] - K.a) <= tol:
            normals.append(np.eye(K.n)[-1])
        if abs(float(K.height(min(r, K.rim_radius))) - X[-1]) <= tol:
            if r == 0:
                normals.append(-np.eye(K.n)[-1])
            else:
                g = np.r_[K.height_slope(r) * X[:-1] / r, -1.0]
                normals.append(_unit(g))
        return normals, [1.0] * len(normals)
    raise TypeError(f"unsupported body {type(K).__name__}")


def transform_body(K, A, t=None):
    """Image of K under ``x -> A x + t`` (A invertible)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    t = np.zeros(n) if t is None else np.asarray(t, dtype=float)
    if abs(np.linalg.det(A)) == 0:
        raise DegenerateInput("singular affine map")
    if isinstance(K, VPolytope):
        return VPolytope(K.vertices @ A.T + t)
    if isinstance(K, Ball):
        Q = K.radius ** 2 * (A @ A.T)
        if np.allclose(Q, Q[0, 0] * np.eye(n), rtol=0, atol=1e-14 * Q[0, 0]):
            return Ball(A @ K.center + t, sqrt(Q[0, 0]))
        return Ellipsoid(A @ K.center + t, Q)
    if isinstance(K, Ellipsoid):
        return Ellipsoid(A @ K.center + t, A @ K.shape @ A.T)
    raise TypeError(f"{type(K).__name__} is not closed under affine maps")


def diameter(K):
    return K.diameter


def beyond_facet(P, facet, point):
    """Exact-sign test: is ``point`` strictly outside the hyperplane of ``facet``?"""
    simplex = P.vertices[facet.simplices[0]]
    return side_of_hyperplane(simplex, P.vertex_centroid, point) > 0


# ---------------------------------------------------------------------------
# JSON body format
# ---------------------------------------------------------------------------

def body_from_dict(d):
    kind = d.get("type")
    if kind == "vpolytope":
        return convex_hull(np.asarray(d["vertices"], dtype=float))
    if kind == "ball":
        return Ball(np.asarray(d["center"], dtype=float), float(d["radius"]))
    if kind == "ellipsoid":
        return Ellipsoid(np.asarray(d["center"], dtype=float), np.asarray(d["shape"], dtype=float))
    if kind == "capmodel":
        return CapModel(int(d["n"]), float(d["R"]), float(d["a"]), float(d.get("eps", 0.0)))
    raise ValueError(f"unknown body type {kind!r}")


def body_to_dict(K):
    if isinstance(K, VPolytope):
        return {"type": "vpolytope", "vertices": K.vertices.tolist()}
    if isinstance(K, Ball):
        return {"type": "ball", "center": K.center.tolist(), "radius": K.radius}
    if isinstance(K, Ellipsoid):
        return {"type": "ellipsoid", "center": K.center.tolist(), "shape": K.shape.tolist()}
    if isinstance(K, CapModel):
        return {"type": "capmodel", "n": K.n, "R": K.R, "a": K.a, "eps": K.eps}
    raise TypeError(f"unsupported body {type(K).__name__}")


# Convenience constructors used across tests and the CLI.

def cube(n, side=1.0):
    from itertools import product
    h = side / 2.0
    return VPolytope(np.array(list(product((-h, h), repeat=n))))


def regular_polygon(m, radius=1.0, phase=0.0):
    ang = phase + 2 * pi * np.arange(m) / m
    return VPolytope(radius * np.c_[np.cos(ang), np.sin(ang)])
