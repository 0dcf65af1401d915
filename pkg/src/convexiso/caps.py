"""Paraboloid-cap integrals near a boundary point of positive curvature.

Local coordinates: the boundary point sits at the origin, the body lies in
``y >= 0`` and near the origin its boundary is ``y = |Y|²/(2R)`` with
``X = (Y, y)``.  Two regions are studied for a cut parameter ``a``:

* the slab ``D_a = {(Y, y) in K : y <= a}`` removed by a halfspace cut;
* the cone ``C_a = conv(K, (0, -a)) minus K`` added by a spike.

The weighted integrals ``ψ(a) = ∫_{D_a} w`` and ``φ(a) = ∫_{C_a} w`` use
``w(X) = |Λ⁻¹(X - G)|² - |Λ⁻¹G|²`` with ``G = (0, b)`` and ``Λ = diag(λ)``.
Closed forms below are exact for the model paraboloid; the leading terms
carry an explicit correction that is linear in ``a``.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import pi, sqrt

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .errors import QuadratureFailure
from .geometry import unit_ball_volume


@dataclass(frozen=True)
class CapSpec:
    n: int
    R: float
    a: float
    b: float = 0.0
    lam: tuple = None
    eps: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        lam = (1.0,) * self.n if self.lam is None else tuple(float(x) for x in self.lam)
        if len(lam) != self.n or min(lam) <= 0:
            raise ValueError("lam must hold n positive scalings")
        if abs(np.prod(lam) - 1.0) > 1e-12:
            raise ValueError("scalings must have product 1")
        if not (self.R > 0 and self.a > 0):
            raise ValueError("R and a must be positive")
        if self.a >= self.R / 4:
            raise ValueError("cut parameter must satisfy a < R/4")
        if self.b < 0 or self.eps < 0:
            raise ValueError("b and eps must be nonnegative")
        if self.eps >= self.R:
            raise ValueError("eps must be smaller than R")
        object.__setattr__(self, "lam", lam)

    def with_(self, **kw):
        d = dict(n=self.n, R=self.R, a=self.a, b=self.b, lam=self.lam, eps=self.eps)
        d.update(kw)
        return CapSpec(**d)


@dataclass(frozen=True)
class CapFormulaResult:
    """Leading term, exact model value and the explicit O(a) envelope."""

    value: float
    leading_coefficient: float
    correction: float
    interval: tuple

    @property
    def correction_bound(self):
        """Relative half-width of the envelope around the leading term."""
        lo, hi = self.interval
        if self.leading_coefficient == 0:
            return float("inf")
        return max(abs(lo - self.leading_coefficient), abs(hi - self.leading_coefficient)) / abs(
            self.leading_coefficient)

    def contains(self, x):
        lo, hi = self.interval
        return lo <= x <= hi


def alpha(spec, exponent=2):
    """Mean of ``λ_j^{-exponent}`` over the tangential directions."""
    return float(np.mean(np.asarray(spec.lam[:-1]) ** -exponent))


def _mu(spec, exponent=2):
    return spec.lam[-1] ** -exponent


def _surface(n):
    # Area of the unit sphere in R^{n-1}.
    return (n - 1) * unit_ball_volume(n - 1)


def _poly_integral(n, poly):
    """Exact ``∫_0^1 s^{n-2} p(s) ds``; ``poly`` maps power -> coefficient."""
    return sum(Fraction(c) / (n - 1 + k) for k, c in poly.items())


def _expand(*factors):
    out = {0: Fraction(1)}
    for f in factors:
        nxt = {}
        for i, ci in out.items():
            for j, cj in f.items():
                nxt[i + j] = nxt.get(i + j, 0) + ci * cj
        out = nxt
    return out


def _add(*polys):
    out = {}
    for sign, p in polys:
        for k, c in p.items():
            out[k] = out.get(k, 0) + sign * c
    return out


# (2s - 1) as a polynomial
_LIN = {0: Fraction(-1), 1: Fraction(2)}


def slab_correction_coefficient(n):
    """``∫_0^1 s^{n-2}(1 - s⁶)/3 ds`` (the piece of ψ linear in a)."""
    return _poly_integral(n, {0: Fraction(1, 3), 6: Fraction(-1, 3)})


def cone_correction_coefficient(n):
    """``∫_0^1 s^{n-2}(s⁶ - (2s-1)³)/3 ds`` (the piece of φ linear in a)."""
    p = _add((1, {6: Fraction(1)}), (-1, _expand(_LIN, _LIN, _LIN)))
    return _poly_integral(n, {k: c / 3 for k, c in p.items()})


def slab_volume_closed(spec):
    """``|D_a| = 2 v_{n-1}/(n+1) · (2R)^{(n-1)/2} a^{(n+1)/2}``."""
    _require_exact(spec)
    n = spec.n
    return 2 * unit_ball_volume(n - 1) / (n + 1) * (2 * spec.R) ** ((n - 1) / 2) * spec.a ** ((n + 1) / 2)


def cone_volume_closed(spec):
    """``|C_a| = 2 v_{n-1}/(n(n+1)) · (2R)^{(n-1)/2} a^{(n+1)/2}``."""
    _require_exact(spec)
    n = spec.n
    return (2 * unit_ball_volume(n - 1) / (n * (n + 1)) * (2 * spec.R) ** ((n - 1) / 2)
            * spec.a ** ((n + 1) / 2))


def _require_exact(spec):
    if spec.eps != 0:
        raise ValueError("closed forms need eps = 0; use sandwich_bounds")


def _psi_phi_prefactor(spec):
    n = spec.n
    return (4 * (n - 1) * unit_ball_volume(n - 1) * (2 * spec.R) ** ((n - 1) / 2)
            * spec.a ** ((n + 3) / 2) / ((n + 1) * (n + 3)))


def _result(leading, correction, scale):
    tau = 1e-12 * abs(scale)
    lo = leading + min(0.0, correction) - tau
    hi = leading + max(0.0, correction) + tau
    return CapFormulaResult(leading + correction, leading, correction, (lo, hi))


def psi_closed(spec, exponent=2):
    """ψ(a) for the model paraboloid.

    Leading term ``P · (α R - (n+1) μ b/(n-1))`` with
    ``P = 4(n-1) v_{n-1} (2R)^{(n-1)/2} a^{(n+3)/2} / ((n+1)(n+3))``,
    ``α = mean_j λ_j^{-2}`` and ``μ = λ_n^{-2}``; the exact remainder is
    ``(n-1) v_{n-1} (2R)^{(n-1)/2} a^{(n+3)/2} · a μ ∫ s^{n-2}(1-s⁶)/3``.

    ``exponent=1`` evaluates the variant with ``λ^{-1}`` weights instead.
    """
    _require_exact(spec)
    n, R, b = spec.n, spec.R, spec.b
    al, mu = alpha(spec, exponent), _mu(spec, exponent)
    P = _psi_phi_prefactor(spec)
    leading = P * (al * R - (n + 1) * mu * b / (n - 1))
    base = _surface(n) * (2 * R) ** ((n - 1) / 2) * spec.a ** ((n + 3) / 2)
    corr = base * spec.a * mu * float(slab_correction_coefficient(n))
    return _result(leading, corr, P * (al * R + mu * b + mu * spec.a))


def phi_closed(spec, exponent=2):
    """φ(a) for the model paraboloid.

    Leading term ``P · (α R/(n+2) - (n-3) μ b/(n(n-1)))`` with the same
    ``P``, ``α`` and ``μ`` as :func:`psi_closed`.
    """
    _require_exact(spec)
    n, R, b = spec.n, spec.R, spec.b
    al, mu = alpha(spec, exponent), _mu(spec, exponent)
    P = _psi_phi_prefactor(spec)
    leading = P * (al * R / (n + 2) - (n - 3) * mu * b / (n * (n - 1)))
    base = _surface(n) * (2 * R) ** ((n - 1) / 2) * spec.a ** ((n + 3) / 2)
    corr = base * spec.a * mu * float(cone_correction_coefficient(n))
    return _result(leading, corr, P * (al * R + mu * b + mu * spec.a))


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------

def _sphere_rule(m, n_theta=24, n_phi=16):
    """Directions and weights on the unit sphere of R^m (weights sum to its area)."""
    if m == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    phi = 2 * pi * np.arange(n_phi) / n_phi
    dirs = np.c_[np.cos(phi), np.sin(phi)]
    w = np.full(n_phi, 2 * pi / n_phi)
    x, wx = leggauss(n_theta)
    theta = 0.5 * pi * (x + 1)
    wt = 0.5 * pi * wx
    for k in range(3, m + 1):
        # Prepend a polar angle: ω_k = (cos θ, sin θ · ω_{k-1}).
        jac = np.sin(theta) ** (k - 2)
        new_dirs = np.concatenate(
            [np.c_[np.full(len(dirs), np.cos(t)), np.sin(t) * dirs] for t in theta])
        new_w = np.concatenate([wt[i] * jac[i] * w for i in range(len(theta))])
        dirs, w = new_dirs, new_w
    return dirs, w


def paraboloid_profile(R):
    return (lambda r: r ** 2 / (2 * R)), (lambda r: r / R)


def _region_limits(spec, region, profile):
    f, df = profile
    a = spec.a
    if region == "slab":
        rmax = brentq(lambda r: f(r) - a, 0.0, 8 * sqrt(2 * spec.R * a) + 1.0, xtol=1e-300, rtol=4 * np.finfo(float).eps)
        return rmax, (lambda r: f(r)), (lambda r: np.full_like(r, a))
    if region == "cone":
        g = lambda r: r * df(r) - f(r) - a
        hi = sqrt(2 * spec.R * a)
        while g(hi) <= 0:
            hi *= 2
        rstar = brentq(g, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
        k = df(rstar)
        return rstar, (lambda r: -a + k * r), (lambda r: f(r))
    raise ValueError("region must be 'slab' or 'cone'")


def _weight(spec, Y, y):
    lam = np.asarray(spec.lam)
    G = np.zeros(spec.n)
    G[-1] = spec.b
    X = np.concatenate([Y, y[..., None]], axis=-1)
    return np.sum(((X - G) / lam) ** 2, axis=-1) - np.sum((G / lam) ** 2)


def _oracle_once(spec, region, integrand, profile, nodes):
    n = spec.n
    rmax, lower, upper = _region_limits(spec, region, profile)
    xr, wr = leggauss(nodes)
    r = 0.5 * rmax * (xr + 1)
    wr = 0.5 * rmax * wr
    xt, wt = leggauss(nodes)
    t = 0.5 * (xt + 1)
    wt = 0.5 * wt
    lo, hi = lower(r), upper(r)
    # y nodes per radius: (nr, nt)
    y = lo[:, None] + (hi - lo)[:, None] * t[None, :]
    wy = (hi - lo)[:, None] * wt[None, :]
    radial_w = wr * r ** (n - 2)
    if integrand == "one":
        return float(_surface(n) * np.sum(radial_w[:, None] * wy))
    dirs, wd = _sphere_rule(n - 1)
    total = 0.0
    for d, w in zip(dirs, wd):
        Y = r[:, None, None] * d[None, None, :]
        Y = np.broadcast_to(Y, (len(r), len(t), n - 1))
        total += w * np.sum(radial_w[:, None] * wy * _weight(spec, Y, y))
    return float(total)


def region_integral_oracle(spec, region, integrand="weight", profile=None, side=0,
                           tol=1e-12, max_nodes=512):
    """Tensor Gauss–Legendre evaluation of a region integral.

    ``integrand`` is ``"one"`` (volume) or ``"weight"`` for
    ``|Λ⁻¹(X - G)|² - |Λ⁻¹G|²`` evaluated pointwise in Cartesian coordinates.
    The boundary is the radial profile ``(f, f')``; by default the paraboloid
    of radius ``R + side·eps``.  Nodes double until successive estimates agree
    to ``tol`` relative.
    """
    if integrand not in ("one", "weight"):
        raise ValueError("integrand must be 'one' or 'weight'")
    if profile is None:
        profile = paraboloid_profile(spec.R + side * spec.eps)
    nodes = 32
    prev = _oracle_once(spec, region, integrand, profile, nodes)
    scale = abs(prev)
    while nodes < max_nodes:
        nodes *= 2
        cur = _oracle_once(spec, region, integrand, profile, nodes)
        scale = max(scale, abs(cur))
        if abs(cur - prev) <= tol * scale:
            return cur
        prev = cur
    raise QuadratureFailure(f"{region}/{integrand} oracle did not reach tol {tol:g}")


# ---------------------------------------------------------------------------
# sandwich bounds
# ---------------------------------------------------------------------------

def _clip_pieces(lo_poly, hi_poly, rmax):
    """Breakpoints in [0, rmax] where hi-lo, lo or hi change sign."""
    pts = {0.0, rmax}
    for p in (hi_poly - lo_poly, lo_poly, hi_poly):
        for z in p.roots():
            if abs(z.imag) < 1e-14 and 0 < z.real < rmax:
                pts.add(float(z.real))
    return sorted(pts)


def _radial_integrals(n, lo_poly, hi_poly, rmax, nodes=24):
    """Integrals over ``{|Y| <= rmax, lo(|Y|) <= y <= hi(|Y|)}`` of
    1, |Y|², y², max(y, 0) and min(y, 0)."""
    x, w = leggauss(nodes)
    acc = np.zeros(5)
    br = _clip_pieces(lo_poly, hi_poly, rmax)
    for r0, r1 in zip(br[:-1], br[1:]):
        r = 0.5 * (r1 - r0) * (x + 1) + r0
        wr = 0.5 * (r1 - r0) * w
        lo, hi = lo_poly(r), hi_poly(r)
        ok = hi > lo
        lo, hi = np.where(ok, lo, 0.0), np.where(ok, hi, 0.0)
        base = wr * r ** (n - 2)
        acc += [
            np.sum(base * (hi - lo)),
            np.sum(base * r ** 2 * (hi - lo)),
            np.sum(base * (hi ** 3 - lo ** 3) / 3),
            np.sum(base * (np.maximum(hi, 0) ** 2 - np.maximum(lo, 0) ** 2) / 2),
            np.sum(base * -(np.minimum(lo, 0) ** 2 - np.minimum(hi, 0) ** 2) / 2),
        ]
    return _surface(n) * acc


def _region_pieces(spec, region, R_cone, R_para):
    """Radial limits of the slab/cone region built from two radii."""
    P = np.polynomial.Polynomial
    a = spec.a
    if region == "slab":
        return P([0, 0, 1 / (2 * R_para)]), P([a]), sqrt(2 * R_para * a)
    return P([-a, sqrt(2 * a / R_cone)]), P([0, 0, 1 / (2 * R_para)]), sqrt(2 * R_cone * a)


def _weighted(spec, pieces):
    vol, Y2, y2, ypos, yneg = pieces
    al, mu, b = alpha(spec), _mu(spec), spec.b
    positive = al * Y2 + mu * y2 - 2 * b * mu * yneg
    negative = -2 * b * mu * ypos
    return vol, positive, negative


def sandwich_bounds(spec):
    """Lower/upper bounds for |D_a|, |C_a|, ψ and φ over every convex boundary
    squeezed between the paraboloids of radii ``R - eps`` and ``R + eps``.

    The slab satisfies ``D(R-eps) ⊂ D_a ⊂ D(R+eps)``.  The cone satisfies
    ``C_- ⊂ C_a ⊂ C_+`` where ``C_+`` lies between the tangent cone of the
    outer paraboloid and the inner paraboloid, and ``C_-`` the other way
    round.  Nonnegative parts of the weight are bounded with the outer region
    and nonpositive parts with the inner one.
    """
    n, R, e = spec.n, spec.R, spec.eps
    Rm, Rp = R - e, R + e
    out = {}
    for region, vol_name, w_name in (("slab", "slab_volume", "psi"), ("cone", "cone_volume", "phi")):
        if region == "slab":
            inner, outer = _region_pieces(spec, "slab", Rm, Rm), _region_pieces(spec, "slab", Rp, Rp)
        else:
            inner, outer = _region_pieces(spec, "cone", Rm, Rp), _region_pieces(spec, "cone", Rp, Rm)
        vi, pi_, ni = _weighted(spec, _radial_integrals(n, *inner))
        vo, po, no = _weighted(spec, _radial_integrals(n, *outer))
        out[vol_name] = (float(vi), float(vo))
        out[w_name] = (float(pi_ + no), float(po + ni))
    return out


# ---------------------------------------------------------------------------
# final comparison and verification helpers
# ---------------------------------------------------------------------------

def contradiction_coefficients(n):
    """Coefficients of ``b`` forced by a spike and by a cut at a local maximizer.

    Returns ``(c_out, c_in, verdict)`` as exact fractions; a maximizer would
    need ``c_out >= c_in`` and ``verdict`` reports that it fails.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    c_out = Fraction((n + 2) * (n - 3), n * (n - 1))
    c_in = Fraction(n + 1, n - 1)
    return c_out, c_in, c_out < c_in


def order_fit(scales, values):
    """Least-squares slope of ``log|value|`` against ``log scale``."""
    x = np.log(np.asarray(scales, dtype=float))
    y = np.log(np.abs(np.asarray(values, dtype=float)))
    return float(np.polyfit(x, y, 1)[0])


CAP_COLUMNS = ("n", "R", "a", "b", "quantity", "leading", "closed", "oracle", "rel_err",
               "lower", "upper", "contained", "order_fit")

# Exact volumes carry no envelope; they must match the oracle to this level.
VOLUME_RTOL = 1e-10


def _volume_result(value):
    pad = VOLUME_RTOL * abs(value)
    return CapFormulaResult(value, value, 0.0, (value - pad, value + pad))


def verify_caps(n, R, a_values, b=0.0, lam=None):
    """Closed form vs oracle for the four cap quantities over a schedule of a.

    Returns ``(rows, fits)``.  Each row has the leading term, the exact model
    value (``closed``), the oracle, their relative distance, the explicit
    envelope ``[lower, upper]`` around the leading term and whether it
    contains the oracle.  ``order_fit`` is the slope of the oracle values
    against ``a`` over the whole schedule.
    """
    quantities = {
        "slab_volume": (lambda s: _volume_result(slab_volume_closed(s)), "slab", "one"),
        "cone_volume": (lambda s: _volume_result(cone_volume_closed(s)), "cone", "one"),
        "psi": (psi_closed, "slab", "weight"),
        "phi": (phi_closed, "cone", "weight"),
    }
    rows = []
    fits = {}
    for name, (closed_fn, region, integrand) in quantities.items():
        vals = []
        recs = []
        for a in a_values:
            spec = CapSpec(n, R, a, b, lam)
            res = closed_fn(spec)
            oracle = region_integral_oracle(spec, region, integrand)
            vals.append(oracle)
            lo, hi = res.interval
            recs.append([n, R, a, b, name, res.leading_coefficient, res.value, oracle,
                         abs(res.value - oracle) / abs(oracle), lo, hi, bool(res.contains(oracle))])
        fit = order_fit(a_values, vals) if len(a_values) > 1 else float("nan")
        fits[name] = fit
        rows.extend(r + [fit] for r in recs)
    return rows, fits


def expected_cap_orders(n):
    """Exponents of a: (n+1)/2 for the volumes, (n+3)/2 for ψ and φ."""
    return {"slab_volume": (n + 1) / 2, "cone_volume": (n + 1) / 2,
            "psi": (n + 3) / 2, "phi": (n + 3) / 2}


def lambda_exponent_resolution(lam=(2.0, 0.5, 1.0), R=1.0, a=1e-3, b=0.1):
    """Compare the oracle with closed forms using λ^{-2} and λ^{-1} weights.

    Returns a dict with relative errors of both conventions for ψ and φ and
    the convention that reproduces the oracle.
    """
    spec = CapSpec(len(lam), R, a, b, tuple(lam))
    report = {"lam": list(spec.lam), "R": R, "a": a, "b": b}
    for name, fn, region in (("psi", psi_closed, "slab"), ("phi", phi_closed, "cone")):
        oracle = region_integral_oracle(spec, region, "weight")
        for p in (2, 1):
            val = fn(spec, exponent=p).value
            report[f"{name}_rel_err_exp{p}"] = abs(val - oracle) / abs(oracle)
        report[f"{name}_oracle"] = oracle
    errs2 = max(report["psi_rel_err_exp2"], report["phi_rel_err_exp2"])
    errs1 = max(report["psi_rel_err_exp1"], report["phi_rel_err_exp1"])
    report["matching_exponent"] = 2 if errs2 < errs1 else 1
    return report
