"""Hill-climbing search over polytopes for extreme values of L_K.

Each proposal displaces one vertex (or a symmetric pair), re-hulls, and is
accepted only on strict improvement.  Accepted bodies are moved back to
isotropic position with unit volume, which leaves L_K unchanged and keeps
step sizes meaningful.  Results are evidence about local optimizers, not
certificates.
"""
import csv
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .curvature import probe
from .errors import CorruptFile, DegenerateBody, FormatVersionMismatch
from .geometry import VPolytope, body_moments, convex_hull, transform_body
from .isotropy import isotropic_frame, isotropy_constant

FORMAT_VERSION = 1
IMPROVEMENT_RTOL = 1e-12
TRACE_COLUMNS = ("iteration", "L_K", "accepted", "moved", "step")


@dataclass(frozen=True)
class SearchConfig:
    n: int = 2
    vertices: int = 12
    mode: str = "minimize"
    symmetric: bool = False
    step_initial: float = 0.1      # relative to the diameter
    step_decay: float = 0.5
    step_floor: float = 1e-6
    max_iter: int = 4000
    seed: int = 0
    reject_streak: int = 20
    free_count: bool = False

    def __post_init__(self):
        if self.mode not in ("maximize", "minimize"):
            raise ValueError("mode must be 'maximize' or 'minimize'")
        if not 2 <= self.n <= 6:
            raise ValueError("n must lie in 2..6")
        if self.vertices < self.n + 1:
            raise ValueError("vertex count must be at least n+1")
        if self.symmetric and (self.vertices % 2 or self.vertices < 2 * self.n):
            raise ValueError("symmetric runs need an even vertex count >= 2n")
        if not (self.step_initial > self.step_floor > 0):
            raise ValueError("step sizes must be positive with floor below the initial step")
        if not 0 < self.step_decay < 1:
            raise ValueError("step_decay must lie in (0, 1)")
        if self.max_iter < 0 or self.reject_streak < 1:
            raise ValueError("max_iter and reject_streak must be positive")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class RunLog:
    config: SearchConfig
    records: list
    initial_vertices: np.ndarray
    final_vertices: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def final_body(self):
        return VPolytope(self.final_vertices)

    @property
    def final_L(self):
        return self.diagnostics.get("L_K", isotropy_constant(self.final_body))

    @property
    def accepted_L(self):
        return [r["L_K"] for r in self.records if r["accepted"]]


def _normalize(V):
    """Isotropic position with unit volume (L_K is unchanged)."""
    P = VPolytope(V)
    frame = isotropic_frame(P)
    n = P.dim
    s = frame.volume ** (-1.0 / n)
    return transform_body(P, s * frame.A, s * frame.A @ frame.translation).vertices


def _initial_vertices(cfg, rng):
    n, m = cfg.n, cfg.vertices
    while True:
        k = m // 2 if cfg.symmetric else m
        X = rng.normal(size=(k, n))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        if cfg.symmetric:
            X = np.vstack([X, -X])
        try:
            P = convex_hull(X)
        except DegenerateBody:
            continue
        if len(P.vertices) == m:
            return X


def _better(new, old, mode):
    margin = IMPROVEMENT_RTOL * old
    return new > old + margin if mode == "maximize" else new < old - margin


def evaluate_candidate(P, probe_radius=None):
    """Diagnostics for a polytope in its isotropic, volume-preserving frame.

    Returns a dict with L_K, the frame, the isotropic vertices, per-vertex
    sphere-condition residuals ``|X|²|K| - (n+2)M_K²``, vertex curvature
    verdicts and normal-alignment angles at facet centroids.
    """
    frame = isotropic_frame(P)
    iso = frame.apply_body(P)
    m = body_moments(iso)
    n = iso.dim
    M2 = frame.M_K ** 2
    V = iso.vertices
    resid = (np.sum(V ** 2, axis=1) * m.volume - (n + 2) * M2).tolist()
    radius = probe_radius if probe_radius is not None else iso.diameter / 50
    verdicts = [probe(iso, v, radius)["verdict"] for v in V]
    angles = []
    for f in iso.facets:
        c = V[list(f.vertices)].mean(axis=0)
        angles.append(float(np.arccos(np.clip(f.normal @ c / np.linalg.norm(c), -1, 1))))
    return {"L_K": frame.L_K, "M_K": frame.M_K, "volume": frame.volume,
            "frame": frame.to_dict(), "isotropic_vertices": V.tolist(),
            "sphere_residuals": resid, "vertex_verdicts": verdicts,
            "facet_normal_angles": angles}


def hill_climb(config):
    """Strict-improvement local search; always returns a :class:`RunLog`."""
    cfg = config
    rng = np.random.default_rng(cfg.seed)
    X0 = _initial_vertices(cfg, rng)
    V = _normalize(X0)
    L = isotropy_constant(VPolytope(V))
    m = len(V)
    half = m // 2
    step = cfg.step_initial
    streak = 0
    records = []
    for it in range(cfg.max_iter):
        if step < cfg.step_floor:
            break
        diam = VPolytope(V).diameter
        i = int(rng.integers(half if cfg.symmetric else m))
        g = rng.normal(size=cfg.n)
        W = V.copy()
        W[i] += step * diam * g / np.sqrt(cfg.n)
        if cfg.symmetric:
            W[i + half] = -W[i]
        accepted = False
        try:
            P = convex_hull(W)
            if cfg.free_count or len(P.vertices) == m:
                newL = isotropy_constant(P)
                if _better(newL, L, cfg.mode):
                    V = _normalize(P.vertices)
                    L, accepted = newL, True
        except DegenerateBody:
            pass
        if accepted:
            streak = 0
            if cfg.free_count:
                m = len(V)
        else:
            streak += 1
            if streak >= cfg.reject_streak:
                step *= cfg.step_decay
                streak = 0
        records.append({"iteration": it, "L_K": float(L), "accepted": accepted,
                        "moved": i, "step": float(step)})
    diag = evaluate_candidate(VPolytope(V))
    return RunLog(cfg, records, X0, V, diag)


def multi_start(config, restarts):
    """Independent runs with seeds spawned deterministically from ``config.seed``."""
    seeds = np.random.SeedSequence(config.seed).spawn(restarts)
    return [hill_climb(replace(config, seed=int(s.generate_state(1)[0]))) for s in seeds]


def save_run(log, path):
    doc = {"format_version": FORMAT_VERSION, "config": log.config.to_dict(),
           "records": log.records, "initial_vertices": np.asarray(log.initial_vertices).tolist(),
           "final_vertices": np.asarray(log.final_vertices).tolist(),
           "diagnostics": log.diagnostics}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_run(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptFile(f"{path}: not a run log")
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatVersionMismatch(f"{path}: format_version {doc.get('format_version')!r}, "
                                    f"expected {FORMAT_VERSION}")
    try:
        return RunLog(SearchConfig.from_dict(doc["config"]), doc["records"],
                      np.array(doc["initial_vertices"], dtype=float),
                      np.array(doc["final_vertices"], dtype=float), doc["diagnostics"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"{path}: {exc}") from exc


def write_trace_csv(log, path):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=TRACE_COLUMNS)
        w.writeheader()
        for r in log.records:
            w.writerow({k: r[k] for k in TRACE_COLUMNS})
