"""Local modifications of a body and the first-order expansion of L_K.

A *spike* adds ``conv(K ∪ {X0 + t·u}) minus K``; a *slab* removes
``{X in K : <X, u> >= h_K(u) - depth}``.  For an isotropic body the ratio
``L_{K'}^{2n} / L_K^{2n}`` equals

    1 ± (∫_region |X|² / M_K²  -  (n+2) |region| / |K|)  +  O(|region|²)

with ``+`` for added and ``-`` for removed regions.  The helpers here build
the regions with exact moments and measure the remainder.
"""
from dataclasses import dataclass, field
from math import acos, factorial, sqrt

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    EmptyIntersection,
    InsufficientSchedule,
    NotIsotropic,
    NotOnBoundary,
    NotSymmetric,
    PointInside,
)
from .geometry import (
    Ball,
    Ellipsoid,
    Halfspace,
    MomentData,
    VPolytope,
    body_moments,
    boundary_distance,
    clip_halfspace,
    convex_hull,
    outer_normals,
    simplices_moments,
    support,
    unit_ball_volume,
)
from .geometry.bodies import beyond_facet
from .isotropy import check_isotropic

ISOTROPY_TOL = 1e-6
BOUNDARY_TOL = 1e-9
_NODES = 96


@dataclass
class PerturbationResult:
    """A modified body together with the exact moments of the changed region."""

    original: object
    body: object                # perturbed body, or None if not representable
    moments: MomentData         # moments of the perturbed body
    region: MomentData          # moments of the added/removed region
    sign: int                   # +1 added, -1 removed
    kind: str
    params: dict = field(default_factory=dict)
    symmetric: bool = False
    region_diameter: float = float("nan")

    @property
    def delta_volume(self):
        return self.region.volume

    @property
    def delta_second(self):
        return self.region.second_moment_trace

    @property
    def region_centroid(self):
        return self.region.centroid

    @property
    def original_moments(self):
        return body_moments(self.original)


# ---------------------------------------------------------------------------
# unit-ball regions (axis e, centered at 0)
# ---------------------------------------------------------------------------

def _slice_moments(e, x, w, rho_out, rho_in):
    """Assemble moments from axial slices that are (n-1)-annuli."""
    n = e.shape[0]
    v = unit_ball_volume(n - 1)
    area = v * (rho_out ** (n - 1) - rho_in ** (n - 1))
    radial = (n - 1) * v / (n + 1) * (rho_out ** (n + 1) - rho_in ** (n + 1))
    vol = np.sum(w * area)
    ax1 = np.sum(w * x * area)
    ax2 = np.sum(w * x * x * area)
    tr = np.sum(w * radial)
    E = np.outer(e, e)
    second = ax2 * E + tr / (n - 1) * (np.eye(n) - E)
    return MomentData(float(vol), ax1 * e, second)


def _gl(a, b, nodes=_NODES):
    x, w = leggauss(nodes)
    return 0.5 * (b - a) * (x + 1) + a, 0.5 * (b - a) * w


def unit_ball_cap(e, delta, nodes=_NODES):
    """Moments of ``{|z| <= 1, <z, e> >= 1 - delta}``."""
    theta_max = acos(1.0 - delta)
    th, w = _gl(0.0, theta_max, nodes)
    x = np.cos(th)
    w = w * np.sin(th)
    return _slice_moments(e, x, w, np.sin(th), np.zeros_like(th))


def unit_ball_spike(e, d, nodes=_NODES):
    """Moments of ``conv(B, d·e) minus B`` for the unit ball B and d > 1."""
    xT = 1.0 / d
    rhoT = sqrt(1.0 - xT * xT)

    def cone(x):
        return rhoT * (d - x) / (d - xT)

    # x = cos θ on the part still overlapping the ball.
    th, w1 = _gl(0.0, acos(xT), nodes)
    x1 = np.cos(th)
    w1 = w1 * np.sin(th)
    part1 = _slice_moments(e, x1, w1, cone(x1), np.sin(th))
    x2, w2 = _gl(1.0, d, nodes)
    part2 = _slice_moments(e, x2, w2, cone(x2), np.zeros_like(x2))
    return part1 + part2


def _ball_frame(K):
    """(L, c) with K = c + L·(unit ball)."""
    if isinstance(K, Ball):
        return K.radius * np.eye(K.dim), K.center
    return K.root, K.center


def _tangent_circle_points(e, xT, rhoT, count=256):
    n = e.shape[0]
    basis = np.linalg.svd(np.eye(n) - np.outer(e, e))[0][:, : n - 1]
    rng = np.random.default_rng(0)
    dirs = rng.normal(size=(count, n - 1))
    if n == 2:
        dirs = np.array([[1.0], [-1.0]])
    elif n == 3:
        ang = np.linspace(0, 2 * np.pi, count, endpoint=False)
        dirs = np.c_[np.cos(ang), np.sin(ang)]
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return xT * e + rhoT * dirs @ basis.T


def _point_diameter(P):
    d = P[:, None, :] - P[None, :, :]
    return float(np.sqrt((d ** 2).sum(-1)).max())


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def _require_boundary(K, X0):
    d = boundary_distance(K, X0)
    if abs(d) > BOUNDARY_TOL * K.diameter:
        raise NotOnBoundary(f"point is {d:.3g} away from the boundary")


def add_spike(K, X0, u, t):
    """``conv(K ∪ {X0 + t·u})`` and the exact moments of the added region.

    Supported for polytopes (cones over the facets visible from the new
    vertex), balls and ellipsoids (rotationally symmetric region, axial
    quadrature).
    """
    X0 = np.asarray(X0, dtype=float)
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    if not t > 0:
        raise ValueError("t must be positive")
    _require_boundary(K, X0)
    normals, _ = outer_normals(K, X0)
    if not any(nv @ u > 0 for nv in normals):
        raise ValueError("u does not point outward at X0")
    p = X0 + t * u
    base = body_moments(K)
    params = {"X0": X0, "u": u, "t": float(t)}
    if isinstance(K, VPolytope):
        region, apexes_faces = _polytope_spike_region(K, p)
        body = convex_hull(np.vstack([K.vertices, p]))
        diam = _point_diameter(np.vstack([p, K.vertices[sorted(apexes_faces)]]))
        return PerturbationResult(K, body, base + region, region, +1, "spike", params,
                                  region_diameter=diam)
    if isinstance(K, (Ball, Ellipsoid)):
        L, c = _ball_frame(K)
        z = np.linalg.solve(L, p - c)
        d = np.linalg.norm(z)
        if d <= 1.0:
            raise PointInside("spike apex lies inside the body")
        e = z / d
        region = unit_ball_spike(e, d).transformed(L, c)
        circle = _tangent_circle_points(e, 1.0 / d, sqrt(1 - 1 / d ** 2))
        pts = np.vstack([p, circle @ L.T + c])
        return PerturbationResult(K, None, base + region, region, +1, "spike", params,
                                  region_diameter=_point_diameter(pts))
    raise TypeError(f"spikes are not supported on {type(K).__name__}")


def _polytope_spike_region(K, p):
    V = K.vertices
    stacks = []
    verts = set()
    for f in K.facets:
        if beyond_facet(K, f, p):
            simp = V[f.simplices]
            apex = np.broadcast_to(p, (len(simp), 1, K.dim))
            stacks.append(np.concatenate([apex, simp], axis=1))
            verts.update(f.vertices)
    if not stacks:
        raise PointInside("spike apex lies inside the body")
    return simplices_moments(np.concatenate(stacks)), verts


def cut_slab(K, u, depth):
    """Remove ``{X in K : <X, u> >= h_K(u) - depth}``."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    h, _ = support(K, u)
    width = h + support(K, -u)[0]
    if not 0 < depth < width:
        raise EmptyIntersection(f"depth must lie in (0, {width:.6g})")
    base = body_moments(K)
    level = h - depth
    params = {"u": u, "depth": float(depth)}
    if isinstance(K, VPolytope):
        body = clip_halfspace(K, Halfspace(u, level))
        cap = clip_halfspace(K, Halfspace(-u, -level))
        region = body_moments(cap)
        return PerturbationResult(K, body, base - region, region, -1, "slab", params,
                                  region_diameter=cap.diameter)
    if isinstance(K, (Ball, Ellipsoid)):
        L, c = _ball_frame(K)
        w = L @ u
        nw = np.linalg.norm(w)
        e = w / nw
        delta = depth / nw
        region = unit_ball_cap(e, delta).transformed(L, c)
        rim = _tangent_circle_points(e, 1 - delta, sqrt(max(0.0, 1 - (1 - delta) ** 2)))
        pts = np.vstack([L @ e + c, rim @ L.T + c])
        return PerturbationResult(K, None, base - region, region, -1, "slab", params,
                                  region_diameter=_point_diameter(pts))
    raise TypeError(f"slabs are not supported on {type(K).__name__}")


def _is_symmetric(K, tol=1e-9):
    if isinstance(K, VPolytope):
        V = K.vertices
        scale = K.diameter
        d = np.linalg.norm(V[:, None, :] + V[None, :, :], axis=-1)
        return bool(np.all(d.min(axis=1) <= tol * scale))
    if isinstance(K, (Ball, Ellipsoid)):
        return bool(np.linalg.norm(K.center) <= tol * K.diameter)
    return False


def symmetrize(r):
    """Apply the point-reflected modification as well (centrally symmetric K)."""
    K = r.original
    if not _is_symmetric(K):
        raise NotSymmetric("original body is not centrally symmetric about 0")
    if r.symmetric:
        return r
    region = r.region + (-r.region)
    base = body_moments(K)
    moments = base + region if r.sign > 0 else base - region
    body = None
    if isinstance(K, VPolytope):
        if r.kind == "spike":
            p = r.params["X0"] + r.params["t"] * r.params["u"]
            body = convex_hull(np.vstack([K.vertices, p, -p]))
        else:
            u = r.params["u"]
            level = support(K, u)[0] - r.params["depth"]
            body = clip_halfspace(clip_halfspace(K, Halfspace(u, level)), Halfspace(-u, level))
    return PerturbationResult(K, body, moments, region, r.sign, r.kind, dict(r.params),
                              symmetric=True, region_diameter=r.region_diameter)


# ---------------------------------------------------------------------------
# expansions
# ---------------------------------------------------------------------------

def _require_isotropic(K_or_moments):
    rep = check_isotropic(K_or_moments, ISOTROPY_TOL)
    if not rep.passed:
        raise NotIsotropic(f"body is not isotropic (first {rep.first_moment_resid:.2g}, "
                           f"second {rep.isotropy_resid:.2g})")
    return rep


def _logdet(S):
    sign, ld = np.linalg.slogdet(S)
    return ld


def exact_ratio(r):
    """``L_{perturbed}^{2n} / L_K^{2n}`` from exact moments."""
    m0, m1 = r.original_moments, r.moments
    n = m0.dim
    d0 = _logdet(m0.centered_second_moment) - (n + 2) * np.log(m0.volume)
    d1 = _logdet(m1.centered_second_moment) - (n + 2) * np.log(m1.volume)
    return float(np.exp(d1 - d0))


def prop4_prediction(frame, r, sign=None):
    """First-order prediction of ``L_{perturbed}^{2n} / L_K^{2n}``.

    ``sign`` is ``"added"``/``"removed"`` (defaults to the region's own sign).
    """
    _require_isotropic(r.original_moments)
    s = r.sign if sign is None else {"added": 1, "removed": -1}[sign]
    n = frame.dim
    M2 = frame.M_K ** 2
    return 1.0 + s * (r.delta_second / M2 - (n + 2) * r.delta_volume / frame.volume)


def expansion_residuals(frame, r):
    """Remainders of the determinant-integral expansion and of the centroid
    correction for the perturbed body.

    ``first = |det ∫ x xᵀ - M^{2n} ∓ M^{2(n-1)} ∫_region |X|²|`` and
    ``second = |det(centered) - det(uncentered)|``, both O(|region|²).
    """
    _require_isotropic(r.original_moments)
    n = frame.dim
    M2 = frame.M_K ** 2
    S = r.moments.second_moment
    det_unc = np.linalg.det(S)
    det_c = np.linalg.det(r.moments.centered_second_moment)
    first = abs(det_unc - M2 ** n - r.sign * M2 ** (n - 1) * r.delta_second)
    second = abs(det_c - det_unc)
    return float(first), float(second)


def _check_schedule(scales):
    s = np.asarray(scales, dtype=float)
    if len(s) < 6:
        raise InsufficientSchedule("need at least 6 scales")
    if np.any(s <= 0) or np.any(np.diff(s) >= 0):
        raise InsufficientSchedule("scales must be positive and strictly decreasing")
    return s


def _perturb(K, kind, u, scale, X0):
    if kind == "slab":
        return cut_slab(K, u, scale)
    if kind == "spike":
        if X0 is None:
            X0 = support(K, u)[1]
        return add_spike(K, X0, u, scale)
    raise ValueError("kind must be 'slab' or 'spike'")


SCHEDULE_COLUMNS = ("scale", "delta_volume", "delta_second", "exact_ratio", "predicted_ratio",
                    "residual")


def prop4_schedule(K, u, scales, kind="slab", X0=None):
    """Rows of :data:`SCHEDULE_COLUMNS` for each scale (depth or spike height)."""
    from .isotropy import isotropic_frame

    scales = _check_schedule(scales)
    _require_isotropic(K)
    frame = isotropic_frame(K)
    rows = []
    for s in scales:
        r = _perturb(K, kind, u, float(s), X0)
        ex = exact_ratio(r)
        pr = prop4_prediction(frame, r)
        rows.append({"scale": float(s), "delta_volume": r.delta_volume,
                     "delta_second": r.delta_second, "exact_ratio": ex,
                     "predicted_ratio": pr, "residual": abs(ex - pr)})
    return rows


def _fit(xs, ys):
    xs, ys = np.asarray(xs), np.asarray(ys)
    if np.any(ys <= 0):
        raise InsufficientSchedule("zero residual in schedule; cannot fit an order")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def prop4_error_order(K, u, scales, kind="slab", X0=None):
    """Least-squares slope of log residual against log |region|."""
    rows = prop4_schedule(K, u, scales, kind, X0)
    dv = [r["delta_volume"] for r in rows]
    if np.ptp(np.log(dv)) == 0:
        raise InsufficientSchedule("region volume does not vary over the schedule")
    return _fit(dv, [r["residual"] for r in rows])


def expansion_error_orders(K, u, scales, kind="spike", X0=None):
    """Fitted orders of both expansion residuals against |region|."""
    from .isotropy import isotropic_frame

    scales = _check_schedule(scales)
    frame = isotropic_frame(K)
    dv, l1, l3 = [], [], []
    for s in scales:
        r = _perturb(K, kind, u, float(s), X0)
        a, b = expansion_residuals(frame, r)
        dv.append(r.delta_volume)
        l1.append(a)
        l3.append(b)
    return _fit(dv, l1), _fit(dv, l3)


# ---------------------------------------------------------------------------
# boundary diagnostics
# ---------------------------------------------------------------------------

def sphere_condition_residual(K, X0):
    """``|X0|² |K| - (n+2) M_K²`` for an isotropic K and X0 on its boundary."""
    m = body_moments(K)
    _require_isotropic(m)
    X0 = np.asarray(X0, dtype=float)
    _require_boundary(K, X0)
    n = m.dim
    M2 = np.trace(m.second_moment) / n
    return float(X0 @ X0 * m.volume - (n + 2) * M2)


def sphere_condition_radius(K):
    """Radius ``sqrt((n+2) M_K² / |K|)`` of the balance sphere (isotropic K)."""
    m = body_moments(K)
    n = m.dim
    return float(sqrt((n + 2) * np.trace(m.second_moment) / n / m.volume))


def cap_max_norm(K, u, alpha):
    """``max |X|`` over the cap ``{X in K : <X, u> >= alpha}``."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    h = support(K, u)[0]
    if alpha >= h:
        raise EmptyIntersection("cap is empty")
    if isinstance(K, VPolytope):
        cap = clip_halfspace(K, Halfspace(-u, -alpha))
        return float(np.linalg.norm(cap.vertices, axis=1).max())
    if isinstance(K, Ball):
        c, r = K.center, K.radius
        nc = np.linalg.norm(c)
        far = c + r * (c / nc if nc > 0 else u)
        if far @ u >= alpha:
            return float(nc + r)
        s = alpha - c @ u
        m = c + s * u
        rho = sqrt(max(r * r - s * s, 0.0))
        m_par = m @ u
        m_perp = np.linalg.norm(m - m_par * u)
        return float(sqrt(m_par ** 2 + (m_perp + rho) ** 2))
    if isinstance(K, Ellipsoid):
        return _ellipsoid_cap_max_norm(K, u, alpha)
    raise TypeError(f"cap_max_norm not supported on {type(K).__name__}")


def _ellipsoid_cap_max_norm(K, u, alpha):
    from scipy.optimize import minimize

    L, c = K.root, K.center
    n = K.dim
    cons = [{"type": "ineq", "fun": lambda z: 1.0 - z @ z},
            {"type": "ineq", "fun": lambda z: (c + L @ z) @ u - alpha}]
    best = -np.inf
    rng = np.random.default_rng(0)
    starts = [np.linalg.solve(L, support(K, u)[1] - c)]
    starts += list(rng.normal(size=(16, n)) * 0.5)
    for z0 in starts:
        res = minimize(lambda z: -np.sum((c + L @ z) ** 2), z0, constraints=cons, method="SLSQP",
                       options={"ftol": 1e-15, "maxiter": 500})
        z = res.x
        if z @ z <= 1 + 1e-9 and (c + L @ z) @ u >= alpha - 1e-9:
            best = max(best, float(np.linalg.norm(c + L @ z)))
    return best


def shrinking_spike_schedule(K, X0, u, diameters):
    """Shrinking-spike ratio ``∫_region |X|² / |region|`` at target region diameters.

    For each target diameter the spike height is solved for by bisection.
    Returns rows with the ratio, ``|X0|²`` and the absolute error.
    """
    from scipy.optimize import brentq

    X0 = np.asarray(X0, dtype=float)
    target = float(X0 @ X0)
    rows = []
    for dia in diameters:
        g = lambda lt: add_spike(K, X0, u, np.exp(lt)).region_diameter - dia
        lo, hi = np.log(1e-12), np.log(1.0)
        lt = brentq(g, lo, hi, xtol=1e-10)
        r = add_spike(K, X0, u, float(np.exp(lt)))
        ratio = r.delta_second / r.delta_volume
        rows.append({"diameter": r.region_diameter, "t": float(np.exp(lt)),
                     "delta_volume": r.delta_volume, "ratio": ratio, "target": target,
                     "error": abs(ratio - target)})
    return rows
