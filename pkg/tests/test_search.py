import csv
import json
from math import pi, sqrt

import numpy as np
import pytest

from convexiso.errors import CorruptFile, FormatVersionMismatch
from convexiso.geometry import VPolytope, cube, regular_polygon
from convexiso.isotropy import check_isotropic, isotropy_constant
from convexiso.search import (
    SearchConfig,
    evaluate_candidate,
    hill_climb,
    load_run,
    save_run,
    write_trace_csv,
)

TRIANGLE = 108 ** -0.25
DISC = 1 / (2 * sqrt(pi))


def test_evaluate_triangle_and_square():
    d = evaluate_candidate(regular_polygon(3))
    assert d["L_K"] == pytest.approx(TRIANGLE, rel=1e-12)
    r = d["sphere_residuals"]
    assert max(r) - min(r) < 1e-12
    d = evaluate_candidate(cube(2))
    assert np.allclose(d["sphere_residuals"], 1 / 6, rtol=1e-12)
    assert d["vertex_verdicts"] == ["cone"] * 4
    assert np.allclose(d["facet_normal_angles"], 0, atol=1e-12)


def test_regular_polygons_decrease_to_disc():
    Ls = [evaluate_candidate(regular_polygon(m))["L_K"] for m in (3, 4, 6, 12, 48)]
    assert all(a > b for a, b in zip(Ls, Ls[1:]))
    assert Ls[-1] == pytest.approx(DISC, rel=1e-3)


def test_accepted_sequence_monotone_and_reproducible():
    cfg = SearchConfig(n=2, vertices=8, mode="minimize", max_iter=400, seed=4)
    a, b = hill_climb(cfg), hill_climb(cfg)
    assert a.records == b.records
    assert np.array_equal(a.final_vertices, b.final_vertices)
    acc = a.accepted_L
    assert len(acc) > 5
    assert all(x > y for x, y in zip(acc, acc[1:]))
    assert check_isotropic(a.final_body, 1e-6).passed
    assert len(a.final_vertices) == 8


def test_triangle_is_rigid_under_maximize():
    log = hill_climb(SearchConfig(n=2, vertices=3, mode="maximize", max_iter=300, seed=1))
    assert log.final_L == pytest.approx(TRIANGLE, rel=1e-9)
    assert not any(r["accepted"] for r in log.records)


def test_maximize_stays_below_triangle():
    log = hill_climb(SearchConfig(n=2, vertices=6, mode="maximize", max_iter=600, seed=2))
    assert log.final_L <= TRIANGLE + 1e-6
    acc = log.accepted_L
    assert all(x < y for x, y in zip(acc, acc[1:]))


def test_symmetric_and_free_count_runs():
    log = hill_climb(SearchConfig(n=2, vertices=8, symmetric=True, max_iter=300, seed=5))
    V = log.final_vertices
    assert all(np.min(np.linalg.norm(V + v, axis=1)) < 1e-9 for v in V)
    log = hill_climb(SearchConfig(n=3, vertices=8, free_count=True, max_iter=200, seed=6))
    assert len(log.final_vertices) <= 8
    assert isotropy_constant(log.final_body) == pytest.approx(log.final_L, rel=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(n=2, vertices=2)
    with pytest.raises(ValueError):
        SearchConfig(mode="sideways")
    with pytest.raises(ValueError):
        SearchConfig(step_initial=1e-7, step_floor=1e-6)
    with pytest.raises(ValueError):
        SearchConfig.from_dict({"n": 2, "colour": "red"})


def test_save_load_round_trip(tmp_path):
    log = hill_climb(SearchConfig(n=2, vertices=5, max_iter=100, seed=7))
    p = tmp_path / "run.json"
    save_run(log, p)
    back = load_run(p)
    assert np.array_equal(back.final_vertices, log.final_vertices)
    assert np.array_equal(back.initial_vertices, log.initial_vertices)
    assert back.records == log.records
    assert back.config == log.config
    save_run(back, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_text() == p.read_text()


def test_load_errors(tmp_path):
    log = hill_climb(SearchConfig(n=2, vertices=4, max_iter=20, seed=0))
    p = tmp_path / "run.json"
    save_run(log, p)
    doc = json.loads(p.read_text())
    doc["format_version"] = 2
    bad = tmp_path / "v2.json"
    bad.write_text(json.dumps(doc))
    with pytest.raises(FormatVersionMismatch):
        load_run(bad)
    cut = tmp_path / "cut.json"
    cut.write_text(p.read_text()[:200])
    with pytest.raises(CorruptFile):
        load_run(cut)


def test_trace_csv(tmp_path):
    log = hill_climb(SearchConfig(n=2, vertices=5, max_iter=50, seed=3))
    p = tmp_path / "trace.csv"
    write_trace_csv(log, p)
    rows = list(csv.DictReader(open(p)))
    assert list(rows[0]) == ["iteration", "L_K", "accepted", "moved", "step"]
    assert len(rows) == len(log.records)
