"""Centroids, isotropic frames, M_K and L_K.

``L_K`` is evaluated through ``L_K^{2n} = det(C) / |K|^{n+2}`` where ``C`` is
the centered second-moment matrix; by the Cauchy–Binet expansion of
``(1/n!) ∫…∫ det(X_1 - g, …, X_n - g)² dX_1…dX_n`` this equals ``M_K^{2n}``
divided by the volume power.  The Monte Carlo routes below estimate the same
quantity from uniform samples and serve as independent checks.
"""
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import DegenerateBody
from .geometry import MomentData, body_moments, sample_uniform, transform_body

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class IsotropicFrame:
    """Affine map ``x -> A (x + translation)`` to isotropic position."""

    translation: np.ndarray
    A: np.ndarray
    M_K: float
    L_K: float
    volume: float

    @property
    def dim(self):
        return self.A.shape[0]

    def apply(self, X):
        X = np.asarray(X, dtype=float)
        return (X + self.translation) @ self.A.T

    def apply_body(self, K):
        return transform_body(K, self.A, self.A @ self.translation)

    def apply_moments(self, m):
        return m.transformed(self.A, self.A @ self.translation)

    def to_dict(self):
        return {"translation": self.translation.tolist(), "A": self.A.tolist(),
                "M_K": self.M_K, "L_K": self.L_K, "volume": self.volume}


def _moments(K_or_m):
    return K_or_m if isinstance(K_or_m, MomentData) else body_moments(K_or_m)


def _covariance(m):
    if not m.volume > 0:
        raise DegenerateBody("body has zero volume")
    cov = m.centered_second_moment / m.volume
    cov = 0.5 * (cov + cov.T)
    w = np.linalg.eigvalsh(cov)
    if w[0] <= 0 or w[-1] / w[0] > MAX_CONDITION:
        raise DegenerateBody(f"second-moment matrix is numerically singular (eigenvalues {w[0]:.3g}..{w[-1]:.3g})")
    return cov


def _canonical_eigenbasis(cov, rel_tol=1e-10):
    """Eigenvectors sorted by descending eigenvalue with a deterministic basis
    inside degenerate eigenspaces and the sign convention that each vector's
    largest-magnitude entry is positive."""
    w, V = np.linalg.eigh(cov)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    n = len(w)
    basis = np.empty_like(V)
    i = 0
    while i < n:
        j = i + 1
        while j < n and abs(w[j] - w[i]) <= rel_tol * abs(w[0]):
            j += 1
        block = V[:, i:j]
        if j - i > 1:
            # Project the standard basis onto the eigenspace and orthonormalize.
            proj = block @ block.T
            cand = proj @ np.eye(n)
            norms = np.linalg.norm(cand, axis=0)
            picks = []
            for k in np.argsort(-norms, kind="stable"):
                vec = cand[:, k].copy()
                for p in picks:
                    vec -= (p @ vec) * p
                nv = np.linalg.norm(vec)
                if nv > 1e-6:
                    picks.append(vec / nv)
                if len(picks) == j - i:
                    break
            # Keep the picked vectors in standard-basis order.
            picks.sort(key=lambda v: int(np.argmax(np.abs(v))))
            block = np.column_stack(picks)
        basis[:, i:j] = block
        i = j
    for k in range(n):
        col = basis[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            basis[:, k] = -col
    return w, basis


def isotropic_frame(K):
    """Isotropic frame of a body (or of its :class:`MomentData`)."""
    m = _moments(K)
    n = m.dim
    cov = _covariance(m)
    w, Q = _canonical_eigenbasis(cov)
    c = np.prod(w) ** (1.0 / (2 * n))
    A = c * (Q / np.sqrt(w)).T
    g = m.centroid
    image = m.transformed(A, -A @ g)
    M2 = float(np.trace(image.second_moment)) / n
    M_K = np.sqrt(M2)
    L_K = M_K / m.volume ** ((n + 2) / (2 * n))
    return IsotropicFrame(-g, A, float(M_K), float(L_K), float(m.volume))


def isotropy_constant(K):
    """``L_K`` for a body or its moments; affine invariant."""
    m = _moments(K)
    n = m.dim
    _covariance(m)
    sign, logdet = np.linalg.slogdet(m.centered_second_moment)
    if sign <= 0:
        raise DegenerateBody("centered second moment is not positive definite")
    return float(np.exp((logdet - (n + 2) * np.log(m.volume)) / (2 * n)))


@dataclass
class IsotropyReport:
    M_K: float
    L_K: float
    first_moment_resid: float
    isotropy_resid: float
    tol: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"M_K": self.M_K, "L_K": self.L_K,
                "first_moment_resid": self.first_moment_resid,
                "isotropy_resid": self.isotropy_resid,
                "tol": self.tol, "passed": self.passed}


def check_isotropic(K, tol=1e-9):
    """Is K in isotropic position (centroid 0, ``∫ x xᵀ = M² I``)?

    Both residuals are dimensionless: the first moment is divided by
    ``volume · rms_radius`` and the off-isotropy part of ``∫ x xᵀ`` by its
    mean diagonal ``trace / n``.
    """
    m = _moments(K)
    n = m.dim
    S = m.second_moment
    mean_diag = np.trace(S) / n
    rms = np.sqrt(mean_diag / m.volume)
    first = float(np.abs(m.first_moment).max() / (m.volume * rms))
    off = float(np.abs(S - mean_diag * np.eye(n)).max() / mean_diag)
    M2 = float(np.linalg.det(m.centered_second_moment) ** (1.0 / n))
    M_K = np.sqrt(M2)
    L_K = M_K / m.volume ** ((n + 2) / (2 * n))
    return IsotropyReport(float(M_K), float(L_K), first, off, tol, first <= tol and off <= tol)


def mc_isotropy_constant(K, count, seed):
    """Monte Carlo estimate of ``L_K`` with a delta-method standard error.

    Both the covariance and the volume are estimated from the rejection
    sampler; ``log L = (log det Σ - 2 log |K|) / (2n)`` with Σ the covariance
    of the uniform distribution on K.
    """
    if count < 10_000:
        raise ValueError("count must be at least 1e4")
    s = sample_uniform(K, count, seed)
    X = s.points
    n = X.shape[1]
    mu = X.mean(axis=0)
    Z = X - mu
    cov = Z.T @ Z / count
    sign, logdet = np.linalg.slogdet(cov)
    vol = s.volume_estimate
    log_l = (logdet - 2 * np.log(vol)) / (2 * n)
    est = float(np.exp(log_l))
    # Var(log det Σ̂) ≈ Var(zᵀ Σ⁻¹ z)/N; Var(log V̂) ≈ (1 - p)/(p · proposals).
    q = np.einsum("ij,jk,ik->i", Z, np.linalg.inv(cov), Z)
    var_logdet = q.var() / count
    p = s.acceptance_rate
    var_logvol = (1 - p) / (p * s.proposals)
    se = est * np.sqrt(var_logdet + 4 * var_logvol) / (2 * n)
    return est, float(se)


def mc_determinant_integral(K, tuples, seed, center=True):
    """Literal Monte Carlo estimate of ``(1/n!) ∫_K…∫_K det(X_1 - g, …, X_n - g)² dX``.

    Draws ``tuples`` independent n-tuples of uniform points and returns
    ``(estimate, standard_error)``.  ``g`` is the exact centroid when
    ``center`` is true, else 0.  The volume factor uses the exact volume.
    """
    m = body_moments(K)
    n = m.dim
    s = sample_uniform(K, tuples * n, seed)
    X = s.points.reshape(tuples, n, n)
    if center:
        X = X - m.centroid
    d2 = np.linalg.det(X) ** 2
    scale = m.volume ** n / factorial(n)
    return float(scale * d2.mean()), float(scale * d2.std(ddof=1) / np.sqrt(tuples))


def ball_isotropy_constant(n):
    """``L`` of the Euclidean ball in R^n: ``(n+2)^{-1/2} v_n^{-1/n}``."""
    from .geometry import unit_ball_volume
    return float((n + 2) ** -0.5 * unit_ball_volume(n) ** (-1.0 / n))
