from itertools import combinations
from math import acos, pi, sqrt

import numpy as np
import pytest

from convexiso.errors import (
    EmptyIntersection,
    InsufficientSchedule,
    NotIsotropic,
    NotOnBoundary,
    NotSymmetric,
    PointInside,
)
from convexiso.geometry import (
    Ball,
    Ellipsoid,
    MomentData,
    VPolytope,
    body_moments,
    contains,
    convex_hull,
    cube,
    regular_polygon,
    support,
)
from convexiso.isotropy import isotropic_frame, isotropy_constant
from convexiso.perturbation import (
    PerturbationResult,
    add_spike,
    cap_max_norm,
    cut_slab,
    exact_ratio,
    expansion_error_orders,
    expansion_residuals,
    shrinking_spike_schedule,
    prop4_error_order,
    prop4_prediction,
    prop4_schedule,
    sphere_condition_radius,
    sphere_condition_residual,
    symmetrize,
)

SQUARE = cube(2)
DISC = Ball(np.zeros(2), 1.0)
SCALES = [2.0 ** -k for k in range(4, 11)]


def box_mc(indicator, lo, hi, count, seed, weight=None):
    """Integral of ``weight`` over {indicator} inside the box, with its SE."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(lo, hi, size=(count, len(lo)))
    vol = np.prod(np.asarray(hi) - np.asarray(lo))
    inside = indicator(X)
    w = np.ones(count) if weight is None else weight(X)
    vals = vol * w * inside
    return vals.mean(), vals.std(ddof=1) / sqrt(count)


# --- spikes ------------------------------------------------------------------

def test_square_spike_triangle():
    r = add_spike(SQUARE, [0.5, 0.0], [1.0, 0.0], 0.1)
    assert r.delta_volume == pytest.approx(0.05, rel=1e-13)
    assert r.sign == 1 and r.body is not None
    assert body_moments(r.body).volume == pytest.approx(1.05, rel=1e-12)


def test_spike_volume_linear_in_t():
    vols = [add_spike(SQUARE, [0.5, 0.0], [1.0, 0.0], t).delta_volume for t in (1e-2, 1e-3, 1e-4)]
    assert np.allclose(np.array(vols) / [1e-2, 1e-3, 1e-4], 0.5, rtol=1e-10)


def test_cube_facet_pyramid_and_mc():
    t = 0.3
    C = cube(3)
    r = add_spike(C, [0.5, 0, 0], [1.0, 0, 0], t)
    assert r.delta_volume == pytest.approx(t / 3, rel=1e-13)
    est, se = box_mc(lambda X: contains(r.body, X) & (X[:, 0] > 0.5),
                     [0.5, -0.5, -0.5], [0.5 + t, 0.5, 0.5], 40_000, seed=11)
    assert abs(est - r.delta_volume) < 3 * se


def test_spike_moments_match_hull():
    rng = np.random.default_rng(4)
    for _ in range(5):
        P = convex_hull(rng.normal(size=(10, 3)))
        f = P.facets[rng.integers(len(P.facets))]
        X0 = P.vertices[list(f.vertices)].mean(axis=0)
        r = add_spike(P, X0, f.normal + 0.2 * rng.normal(size=3), 0.2)
        m = body_moments(r.body)
        assert m.volume == pytest.approx(r.moments.volume, rel=1e-10)
        assert np.allclose(m.second_moment, r.moments.second_moment, rtol=1e-10, atol=1e-12)


def test_spike_errors():
    with pytest.raises(NotOnBoundary):
        add_spike(SQUARE, [0.2, 0.0], [1.0, 0], 0.1)
    with pytest.raises(ValueError):
        add_spike(SQUARE, [0.5, 0.0], [-1.0, 0], 0.1)
    with pytest.raises(ValueError):
        add_spike(SQUARE, [0.5, 0.0], [1.0, 0], 0.0)


def test_spike_apex_inside_rejected():
    from convexiso.perturbation import _polytope_spike_region
    with pytest.raises(PointInside):
        _polytope_spike_region(SQUARE, np.array([0.4, 0.0]))


def test_disc_spike_closed_form():
    # conv(disc, d e1) minus disc: kite area minus the sector it covers.
    for d in (1.5, 1.01, 1.0001):
        r = add_spike(DISC, [1.0, 0.0], [1.0, 0.0], d - 1)
        exact = sqrt(d * d - 1) - acos(1 / d)
        assert r.delta_volume == pytest.approx(exact, rel=1e-9)


def test_ellipsoid_spike_mc():
    E = Ellipsoid(np.zeros(2), np.diag([4.0, 1.0]))
    r = add_spike(E, [2.0, 0.0], [1.0, 0.0], 0.5)
    p = np.array([2.5, 0.0])

    def in_region(X):
        # x is in conv(E, p) iff the ray from p through x meets E at or beyond x.
        from convexiso.geometry import line_intersection
        out = []
        for x in X:
            li = line_intersection(E, p, x - p)
            out.append(li is not None and li[1] >= 1.0)
        return np.array(out) & ~contains(E, X)
    est, se = box_mc(in_region, [1.0, -1.0], [2.5, 1.0], 40_000, seed=3)
    assert abs(est - r.delta_volume) < 3 * se


def test_spike_monotone_in_t():
    vols = [add_spike(DISC, [0.6, 0.8], [0.6, 0.8], t).delta_volume for t in (1e-3, 1e-2, 1e-1)]
    assert vols[0] < vols[1] < vols[2]


# --- slabs -------------------------------------------------------------------

def test_square_slab():
    r = cut_slab(SQUARE, [1.0, 0], 0.25)
    assert r.delta_volume == pytest.approx(0.25, rel=1e-14)
    assert r.sign == -1
    with pytest.raises(EmptyIntersection):
        cut_slab(SQUARE, [1.0, 0], 1.0)


def test_disc_slab_segment():
    for delta in (0.5, 1e-2, 1e-4):
        r = cut_slab(DISC, [0.0, 1.0], delta)
        h = 1 - delta
        assert r.delta_volume == pytest.approx(acos(h) - h * sqrt(1 - h * h), rel=1e-10)


def test_ball_cap_volume_3d():
    B = Ball(np.array([1.0, 0, 0]), 2.0)
    h = 0.3
    r = cut_slab(B, [0, 0, 1.0], h)
    assert r.delta_volume == pytest.approx(pi * h * h * (3 * 2.0 - h) / 3, rel=1e-12)


def test_pentagon_slab_second_moment_mc():
    rng = np.random.default_rng(8)
    P = convex_hull(rng.normal(size=(5, 2)))
    u = np.array([0.6, 0.8])
    h = support(P, u)[0]
    r = cut_slab(P, u, 0.4)
    lo, hi = P.vertices.min(axis=0), P.vertices.max(axis=0)
    est, se = box_mc(lambda X: contains(P, X) & (X @ u >= h - 0.4), lo, hi, 60_000, seed=9,
                     weight=lambda X: np.sum(X ** 2, axis=1))
    assert abs(est - r.delta_second) < 3 * se


def test_slab_volume_invariant_and_monotone():
    P = regular_polygon(7)
    prev = 0.0
    for depth in (0.01, 0.1, 0.5):
        r = cut_slab(P, [1.0, 0], depth)
        assert body_moments(r.body).volume == pytest.approx(body_moments(P).volume - r.delta_volume,
                                                            rel=1e-10)
        assert r.delta_volume > prev
        prev = r.delta_volume


# --- symmetrize --------------------------------------------------------------

def test_symmetrize_hexagon_spike():
    H = regular_polygon(6)
    r = add_spike(H, H.vertices[0], H.vertices[0], 0.1)
    s = symmetrize(r)
    assert s.delta_volume == pytest.approx(2 * r.delta_volume, rel=1e-12)
    V = s.body.vertices
    assert all(np.min(np.linalg.norm(V + v, axis=1)) < 1e-12 for v in V)
    assert body_moments(s.body).volume == pytest.approx(s.moments.volume, rel=1e-12)


def test_symmetrize_slab_and_errors():
    s = symmetrize(cut_slab(SQUARE, [1.0, 0], 0.1))
    assert body_moments(s.body).volume == pytest.approx(0.8, rel=1e-13)
    with pytest.raises(NotSymmetric):
        symmetrize(add_spike(regular_polygon(3), [1.0, 0], [1.0, 0], 0.1))


def test_symmetric_constructions_keep_centroid():
    # The centering correction vanishes identically for symmetric modifications.
    rng = np.random.default_rng(2)
    for _ in range(10):
        X = rng.normal(size=(5, 2))
        K = isotropic_frame(convex_hull(np.vstack([X, -X]))).apply_body(convex_hull(np.vstack([X, -X])))
        f = K.facets[rng.integers(len(K.facets))]
        X0 = K.vertices[list(f.vertices)].mean(axis=0)
        s = symmetrize(add_spike(K, X0, f.normal, 0.05))
        assert np.linalg.norm(s.moments.first_moment) < 1e-13
        _, l3 = expansion_residuals(isotropic_frame(K), s)
        assert l3 < 1e-15


def test_symmetric_first_order_change_doubles():
    # A hexagon; parallelograms are affine squares and cancel at first order.
    X = np.random.default_rng(0).normal(size=(7, 2))
    K = convex_hull(np.vstack([X, -X]))
    assert len(K.vertices) == 6
    K = isotropic_frame(K).apply_body(K)
    v = K.vertices[0]
    r = add_spike(K, v, v, 1e-6)
    s = symmetrize(r)
    single = exact_ratio(r) - 1
    assert abs(single) > 1e-2 * r.delta_volume
    assert exact_ratio(s) - 1 == pytest.approx(2 * single, rel=1e-3)


# --- expansions --------------------------------------------------------------

def _zero_result(K):
    m = body_moments(K)
    return PerturbationResult(K, K, m, MomentData.zero(K.dim), 1, "spike")


def test_zero_perturbation():
    f = isotropic_frame(SQUARE)
    z = _zero_result(SQUARE)
    assert prop4_prediction(f, z) == 1.0
    l1, l3 = expansion_residuals(f, z)
    assert l1 < 1e-12 and l3 < 1e-12


def test_prediction_requires_isotropy():
    R = VPolytope(np.array([[-1.0, -0.25], [1, -0.25], [1, 0.25], [-1, 0.25]]))
    r = cut_slab(R, [1.0, 0], 0.1)
    with pytest.raises(NotIsotropic):
        prop4_prediction(isotropic_frame(R), r)


def test_prediction_sign_relative_to_sphere():
    f = isotropic_frame(SQUARE)
    rad = sphere_condition_radius(SQUARE)
    assert rad == pytest.approx(sqrt(1 / 3))
    # Corner spike lies outside the balance sphere, edge-midpoint spike inside.
    out = add_spike(SQUARE, [0.5, 0.5], [1.0, 1.0], 1e-3)
    inn = add_spike(SQUARE, [0.5, 0.0], [1.0, 0.0], 1e-3)
    assert prop4_prediction(f, out) > 1
    assert prop4_prediction(f, inn) < 1


def test_prediction_on_balance_sphere_is_second_order():
    f = isotropic_frame(DISC)
    for t in (1e-3, 1e-5):
        r = add_spike(DISC, [0.0, 1.0], [0.0, 1.0], t)
        assert abs(prop4_prediction(f, r) - 1) < 5 * r.delta_volume * r.region_diameter


@pytest.mark.parametrize("body", ["disc", "square"])
@pytest.mark.parametrize("kind", ["slab", "spike"])
def test_expansion_error_order(body, kind):
    K = DISC if body == "disc" else SQUARE
    X0 = None if body == "disc" or kind == "slab" else np.array([0.5, 0.1])
    u = np.array([1.0, 0.3]) if X0 is not None else np.array([1.0, 0.0])
    assert abs(prop4_error_order(K, u, SCALES, kind, X0) - 2) < 0.3


def test_expansion_schedule_rows():
    rows = prop4_schedule(DISC, [0.0, 1.0], SCALES, "slab")
    assert list(rows[0]) == ["scale", "delta_volume", "delta_second", "exact_ratio",
                             "predicted_ratio", "residual"]
    assert all(r["residual"] < 10 * r["delta_volume"] ** 2 for r in rows)


def test_insufficient_schedule():
    with pytest.raises(InsufficientSchedule):
        prop4_error_order(DISC, [1.0, 0], [0.1] * 7)
    with pytest.raises(InsufficientSchedule):
        prop4_error_order(DISC, [1.0, 0], SCALES[:5])
    with pytest.raises(InsufficientSchedule):
        prop4_error_order(DISC, [1.0, 0], SCALES[::-1])


def test_expansion_residual_orders():
    l1, l3 = expansion_error_orders(SQUARE, np.array([1.0, 0.3]), SCALES, "spike",
                                    np.array([0.5, 0.1]))
    assert l1 >= 1.8 and l3 >= 1.8


def test_expansion_residual_reflection_symmetry():
    f = isotropic_frame(SQUARE)
    a = expansion_residuals(f, add_spike(SQUARE, [0.5, 0.1], [1.0, 0.3], 1e-2))
    b = expansion_residuals(f, add_spike(SQUARE, [-0.5, -0.1], [-1.0, -0.3], 1e-2))
    assert a == pytest.approx(b, abs=1e-10)


# --- boundary diagnostics ----------------------------------------------------

def test_sphere_condition_examples():
    assert sphere_condition_residual(SQUARE, [0.5, 0.5]) == pytest.approx(1 / 6, rel=1e-12)
    assert sphere_condition_residual(SQUARE, [0.5, 0.0]) == pytest.approx(0.25 - 1 / 3, rel=1e-12)
    rng = np.random.default_rng(0)
    for n in (2, 3, 4):
        x = rng.normal(size=n)
        assert abs(sphere_condition_residual(Ball(np.zeros(n), 1.0), x / np.linalg.norm(x))) < 1e-12


def test_sphere_condition_errors():
    with pytest.raises(NotIsotropic):
        sphere_condition_residual(Ball(np.ones(2), 1.0), [2.0, 1.0])
    with pytest.raises(NotOnBoundary):
        sphere_condition_residual(DISC, [0.5, 0.0])


def test_shrinking_spike_ratio():
    x0 = np.array([0.6, 0.8])
    rows = shrinking_spike_schedule(DISC, x0, x0, [1e-1, 1e-2, 1e-3])
    errs = [r["error"] for r in rows]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3
    assert rows[2]["diameter"] == pytest.approx(1e-3, rel=1e-6)


def brute_cap_max(P, u, alpha):
    # Cap vertices are K-vertices in the cap or plane crossings of edges;
    # every vertex pair contains all edges.
    V = P.vertices
    s = V @ u - alpha
    pts = [v for v, si in zip(V, s) if si >= 0]
    for i, j in combinations(range(len(V)), 2):
        if s[i] * s[j] < 0:
            pts.append(V[i] + s[i] / (s[i] - s[j]) * (V[j] - V[i]))
    return max(np.linalg.norm(p) for p in pts)


def test_cap_max_norm_examples():
    assert cap_max_norm(DISC, [1.0, 0], 0.9) == pytest.approx(1.0)
    assert cap_max_norm(SQUARE, [1.0, 0], 0.4) == pytest.approx(sqrt(2) / 2)
    rng = np.random.default_rng(1)
    for _ in range(10):
        P = convex_hull(rng.normal(size=(12, 3)))
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        h = support(P, u)[0]
        alpha = h - rng.uniform(0.05, 0.8) * (h + support(P, -u)[0])
        assert cap_max_norm(P, u, alpha) == pytest.approx(brute_cap_max(P, u, alpha), abs=1e-9)
    with pytest.raises(EmptyIntersection):
        cap_max_norm(SQUARE, [1.0, 0], 0.6)


def test_cap_max_norm_ball_matches_ellipsoid_route():
    c = np.array([0.3, -0.2])
    B = Ball(c, 1.0)
    E = Ellipsoid(c, np.eye(2))
    for u, alpha in (([1.0, 0], 0.8), ([0.0, 1.0], 0.1), ([-0.6, 0.8], 0.2)):
        assert cap_max_norm(B, u, alpha) == pytest.approx(cap_max_norm(E, u, alpha), abs=1e-7)


def test_isotropy_constant_of_modified_body_matches_moments():
    r = add_spike(SQUARE, [0.5, 0.1], [1.0, 0.3], 0.2)
    assert isotropy_constant(r.body) == pytest.approx(isotropy_constant(r.moments), rel=1e-12)
