"""Rejection sampling from the bounding box (oracle for Monte Carlo checks)."""
from dataclasses import dataclass

import numpy as np

from ..errors import LowAcceptance
from .bodies import bounding_box, contains

MIN_ACCEPTANCE = 1e-4
_PILOT = 20_000
_CHUNK = 1 << 18


@dataclass
class UniformSample:
    points: np.ndarray
    acceptance_rate: float
    proposals: int
    box_volume: float

    @property
    def volume_estimate(self):
        return self.box_volume * self.acceptance_rate


def sample_uniform(K, count, seed):
    """Draw ``count`` i.i.d. uniform points of K; deterministic given ``seed``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = bounding_box(K)
    box_volume = float(np.prod(hi - lo))
    n = lo.shape[0]
    accepted = []
    have = proposals = 0
    while have < count:
        size = _PILOT if proposals == 0 else _CHUNK
        X = lo + (hi - lo) * rng.random((size, n))
        keep = X[contains(K, X)]
        proposals += size
        if proposals == size and len(keep) / size < MIN_ACCEPTANCE:
            raise LowAcceptance(len(keep) / size)
        accepted.append(keep)
        have += len(keep)
    pts = np.concatenate(accepted)[:count]
    return UniformSample(pts, have / proposals, proposals, box_volume)
