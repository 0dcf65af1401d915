"""Exact moment integrals: volume, first moment and second moment about the
origin, for simplices and unions of simplices."""
from dataclasses import dataclass
from math import factorial

import numpy as np

from ..errors import DegenerateInput


@dataclass(frozen=True)
class MomentData:
    """Volume, ``∫ x dx`` and ``∫ x xᵀ dx`` of a region, about the origin."""

    volume: float
    first_moment: np.ndarray
    second_moment: np.ndarray

    @property
    def dim(self):
        return self.first_moment.shape[0]

    @property
    def centroid(self):
        return self.first_moment / self.volume

    @property
    def centered_second_moment(self):
        f = self.first_moment
        return self.second_moment - np.outer(f, f) / self.volume

    @property
    def second_moment_trace(self):
        """``∫ |x|² dx``."""
        return float(np.trace(self.second_moment))

    def __add__(self, other):
        return MomentData(self.volume + other.volume,
                          self.first_moment + other.first_moment,
                          self.second_moment + other.second_moment)

    def __sub__(self, other):
        return MomentData(self.volume - other.volume,
                          self.first_moment - other.first_moment,
                          self.second_moment - other.second_moment)

    def __neg__(self):
        # Moments of the point reflection -R of the region R.
        return MomentData(self.volume, -self.first_moment, self.second_moment.copy())

    def transformed(self, A, t=None):
        """Moments of the image region under ``x -> A x + t``."""
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        t = np.zeros(n) if t is None else np.asarray(t, dtype=float)
        j = abs(np.linalg.det(A))
        af = A @ self.first_moment
        S = A @ self.second_moment @ A.T
        S = S + np.outer(af, t) + np.outer(t, af) + self.volume * np.outer(t, t)
        return MomentData(j * self.volume, j * (af + self.volume * t), j * S)

    @classmethod
    def zero(cls, n):
        return cls(0.0, np.zeros(n), np.zeros((n, n)))

    def to_dict(self):
        return {"volume": self.volume,
                "first_moment": self.first_moment.tolist(),
                "second_moment": self.second_moment.tolist()}


@dataclass(frozen=True)
class Simplex:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        n = pts.shape[1]
        if pts.shape != (n + 1, n):
            raise ValueError(f"a simplex in R^{n} needs {n + 1} points")
        object.__setattr__(self, "points", pts)
        if np.linalg.det(pts[1:] - pts[0]) == 0.0:
            raise DegenerateInput("simplex edge matrix is singular")

    @property
    def volume(self):
        n = self.points.shape[1]
        return abs(np.linalg.det(self.points[1:] - self.points[0])) / factorial(n)


def simplices_moments(simplices):
    """Summed moments of a stack of simplices, shape ``(k, n+1, n)``.

    Uses the closed form ``∫_S x xᵀ = vol (Σ v vᵀ + s sᵀ) / ((n+1)(n+2))``
    with ``s = Σ v``.
    """
    V = np.asarray(simplices, dtype=float)
    if V.ndim == 2:
        V = V[None]
    k, m, n = V.shape
    if k == 0:
        return MomentData.zero(n)
    vol = np.abs(np.linalg.det(V[:, 1:] - V[:, :1])) / factorial(n)
    s = V.sum(axis=1)
    first = (vol[:, None] * s).sum(axis=0) / (n + 1)
    outer = np.einsum("kij,kil->kjl", V, V) + np.einsum("kj,kl->kjl", s, s)
    second = np.einsum("k,kjl->jl", vol, outer) / ((n + 1) * (n + 2))
    return MomentData(float(vol.sum()), first, 0.5 * (second + second.T))


def simplex_moments(simplex):
    pts = simplex.points if isinstance(simplex, Simplex) else np.asarray(simplex, float)
    m = simplices_moments(pts[None])
    if m.volume < 1e-300:
        raise DegenerateInput("simplex volume underflows")
    return m
