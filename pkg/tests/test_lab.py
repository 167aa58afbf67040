import csv
import io
import json
import math

import jsonschema
import numpy as np
import pytest
from conftest import multigraphs
from hypothesis import given, settings

from nearcrit import lab
from nearcrit.errors import PreconditionError, TreeOverflowError
from nearcrit.graph import bfs_distances, component_labels
from nearcrit.lab import (
    CONTIGUITY_STATS,
    CSV_COLUMNS,
    GridPoint,
    component_diameters,
    contiguity_compare,
    fit_loglog,
    records_to_csv,
    run_sweep,
    subcritical_survey,
    survey_radius_and_mass,
)


def test_empty_grid():
    assert run_sweep([], 1) == []
    assert records_to_csv([]).splitlines() == [",".join(CSV_COLUMNS)]


@pytest.mark.parametrize("kwargs", [dict(n=100, epsilon=0.25), dict(n=10 ** 6, epsilon=0.1, model="er"),
                                    dict(n=10 ** 6, epsilon=0.1, regime="subcritical")])
def test_grid_point_preconditions(kwargs):
    with pytest.raises(PreconditionError):
        GridPoint(**kwargs)


def test_sweep_is_deterministic():
    grid = [GridPoint(32768, 0.25, 3)]
    a, b = run_sweep(grid, 17), run_sweep(grid, 17)
    assert len(a) == 3
    assert records_to_csv(a) == records_to_csv(b)
    assert len({r.stream_index for r in a}) == 3
    for r in a:
        assert r.status == "ok" and r.lam == 0.25 ** 3 * 32768
        assert min(r.giant_size, r.core_size, r.kernel_size, r.kernel_edges, r.longest_2path) >= 0
    assert records_to_csv(run_sweep(grid, 18)) != records_to_csv(a)


def test_sweep_in_a_pool_matches_serial():
    grid = [GridPoint(4096, 0.25, 2, "gnp"), GridPoint(8192, 0.25, 2)]
    assert records_to_csv(run_sweep(grid, 3, threads=2)) == records_to_csv(run_sweep(grid, 3))


def test_sweep_with_mixing():
    rec = run_sweep([GridPoint(4096, 0.25, 1)], 5, mixing=True)[0]
    assert rec.tmix_heuristic > 0 and rec.cesaro_heuristic >= rec.tmix_heuristic / 2
    assert run_sweep([GridPoint(4096, 0.25, 1)], 5, mixing=True, cesaro=False)[0].cesaro_heuristic is None


def test_replicate_failure_is_recorded(monkeypatch):
    def boom(*args, **kwargs):
        raise TreeOverflowError(11, 10)

    monkeypatch.setattr(lab, "build_c1tilde", boom)
    recs = run_sweep([GridPoint(4096, 0.25, 2)], 1)
    assert len(recs) == 2
    assert all(r.status.startswith("error: TreeOverflowError") and r.giant_size is None for r in recs)


def test_csv_has_every_column():
    recs = run_sweep([GridPoint(4096, 0.25, 2, "gnp")], 9)
    rows = list(csv.DictReader(io.StringIO(records_to_csv(recs))))
    assert len(rows) == 2
    for row in rows:
        assert list(row) == CSV_COLUMNS
        assert row["build"] == lab.build_tag()
        assert row["model"] == "gnp"


def test_fit_loglog_examples():
    slope, intercept, r2 = fit_loglog([(1, 1), (2, 4), (4, 16)])
    assert slope == pytest.approx(2) and r2 == pytest.approx(1)
    slope, intercept, r2 = fit_loglog([(1, 7), (10, 70), (100, 700)])
    assert slope == pytest.approx(1) and intercept == pytest.approx(math.log(7))
    for bad in ([(1, 1), (2, 2)], [(1, 1), (2, 2), (0, 3)], [(2, 1), (2, 2), (2, 3)]):
        with pytest.raises(PreconditionError):
            fit_loglog(bad)


def test_contiguity_same_model_ratio_is_one():
    table = contiguity_compare(20_000, 0.25, 2, 4, models=("c1", "c1"))
    assert set(table.rows) == set(CONTIGUITY_STATS)
    assert all(v == 1.0 for v in table.ratios().values())


def test_contiguity_rejects_subcritical():
    with pytest.raises(PreconditionError):
        contiguity_compare(20_000, 0.25, 2, 4, regime="subcritical")


def test_contiguity_table_shape():
    table = contiguity_compare(20_000, 0.25, 3, 4)
    row = table.rows["giant_size"]
    assert set(row) == {"gnp_mean", "gnp_sd", "c1_mean", "c1_sd", "ratio"}
    assert row["ratio"] == pytest.approx(row["gnp_mean"] / row["c1_mean"])


def diameter_oracle(g):
    labels, sizes = component_labels(g)
    out = np.zeros(len(sizes), dtype=int)
    for v in range(g.vertex_count):
        d = bfs_distances(g, v)
        out[labels[v]] = max(out[labels[v]], d.max())
    return out


@settings(max_examples=80, deadline=None)
@given(multigraphs(max_n=14, max_m=12))
def test_component_diameters_exact_on_forests(g):
    labels, diam = component_diameters(g)
    truth = diameter_oracle(g)
    _, sizes = component_labels(g)
    edges = np.bincount(labels[g.edges[:, 0]], minlength=len(sizes)) if g.edge_count else np.zeros(len(sizes))
    tree = edges == sizes - 1
    assert np.array_equal(diam[tree], truth[tree])
    assert np.all(diam <= truth)


def test_survey_parameters():
    r, s = survey_radius_and_mass(10 ** 6, 0.05)
    lam_log = math.log(125)
    assert r == math.ceil(lam_log / (20 * 0.05)) and s == pytest.approx(lam_log / (64 * 0.0025))


def test_subcritical_survey_report():
    rows = subcritical_survey(200_000, 0.1, 2, 3)
    assert len(rows) == 2
    for row in rows:
        assert row["exposed"] >= 0.1 * 200_000
        assert row["max_component"] <= row["size_bound"]
        assert isinstance(row["b_event"], bool)
    assert rows == subcritical_survey(200_000, 0.1, 2, 3)


def test_json_helper_handles_numpy():
    text = lab.to_json({"a": np.int64(3), "b": np.float64(0.5), "c": np.array([1, 2]), "d": np.bool_(True)})
    assert json.loads(text) == {"a": 3, "b": 0.5, "c": [1, 2], "d": True}


@pytest.mark.parametrize("name", ["generate", "decompose", "mix", "profile", "manifest"])
def test_published_schemas_are_valid(name):
    jsonschema.Draft202012Validator.check_schema(lab.load_schema(name))


def test_unknown_schema():
    with pytest.raises(PreconditionError):
        lab.load_schema("nope")


def test_model_expectations_match_simulation(c1_replicates):
    exp = lab.model_expectations(10 ** 6, 0.1)
    sims = {
        "kernel_size": [d.kernel.vertex_count for d in c1_replicates],
        "kernel_edges": [d.kernel.edge_count for d in c1_replicates],
        "N3": [d.meta["N3"] for d in c1_replicates],
        "core_size": [d.core.vertex_count for d in c1_replicates],
        "core_edges": [d.core.edge_count for d in c1_replicates],
        "giant_size": [d.full.vertex_count for d in c1_replicates],
    }
    for key, xs in sims.items():
        xs = np.asarray(xs, float)
        assert abs(xs.mean() - exp[key]) < 4 * xs.std(ddof=1) / math.sqrt(len(xs)) + 0.02 * exp[key], key


@pytest.mark.slow
def test_heavy_subtree_pair_appears_at_large_n():
    # rare per component, but there are ~eps^2 n / 2 components to try
    rows = subcritical_survey(10 ** 7, 0.05, 10, 20240601)
    assert any(r["b_event"] for r in rows)
