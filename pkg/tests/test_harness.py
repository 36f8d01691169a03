import math

import pytest

from srg import harness
from srg.harness import ExperimentSpec, read_csv, run_experiment, strip_wall_time


def quick(name, trials=2, **overrides):
    return run_experiment(ExperimentSpec(name, trials=trials, seed=3, overrides=overrides))


def test_table1_rows_and_columns():
    res = quick("table1_complete")
    trial_rows = [r for r in res.rows if r["kind"] == "trial"]
    assert len(trial_rows) == 2 * 7
    methods = [r["method"] for r in trial_rows[:7]]
    assert methods == ["bethe", "star1", "star1+1", "star2", "star2+1", "star3", "star3+1"]
    by = {r["method"]: r for r in trial_rows[:7]}
    assert by["star1+1"]["total_counting"] == 2
    assert by["star2+1"]["verdict"] == "Singular" and by["star2"]["verdict"] == "NonSingular"
    text = res.to_csv()
    assert text.splitlines()[0] == ",".join(harness.COLUMNS)


def test_aggregates_are_means_of_the_csv():
    res = quick("reduction_equivalence", trials=3)
    rows = read_csv(res.to_csv())
    trials = [r for r in rows if r["kind"] == "trial"]
    means = [r for r in rows if r["kind"] == "mean"]
    assert len(means) == 2
    for m in means:
        mine = [r for r in trials if r["method"] == m["method"] and r["step"] == m["step"]]
        for col in ("max_error", "discrepancy", "iterations"):
            expect = math.fsum(float(r[col]) for r in mine) / len(mine)
            assert float(m[col]) == pytest.approx(expect, rel=1e-10)


def test_reduction_equivalence_discrepancy():
    res = quick("reduction_equivalence", trials=3)
    for r in res.rows:
        assert r["converged"] and r["discrepancy"] < 1e-6


def test_determinism_modulo_wall_time(tmp_path):
    a = quick("reduction_equivalence")
    b = quick("reduction_equivalence")
    assert strip_wall_time(a.to_csv()) == strip_wall_time(b.to_csv())
    assert "wall_time" not in strip_wall_time(a.to_csv()).splitlines()[0]


def test_methods_override_and_output(tmp_path):
    out = tmp_path / "t.csv"
    spec = ExperimentSpec("table1_complete", trials=1, seed=0, output_path=str(out), overrides={"methods": ["bethe", "star1"]})
    res = run_experiment(spec)
    assert {r["method"] for r in res.rows} == {"bethe", "star1"}
    assert out.read_text() == res.to_csv()


def test_gbp_overrides_reach_the_runs():
    res = quick("reduction_equivalence", trials=1, max_iters=2)
    assert all(not r["converged"] for r in res.rows)


def test_failures_become_rows():
    res = quick("reduction_equivalence", trials=1, style="nope")
    assert res.failures and all(r["kind"] == "failure" for r in res.rows)


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec("nope")
    with pytest.raises(ValueError):
        ExperimentSpec("table1_complete", trials=0)
    with pytest.raises(ValueError):
        ExperimentSpec("table1_complete", overrides={"bogus": 1})


def test_pursuit_rows_shape():
    res = quick("pursuit_fig6", trials=1, max_triangles=3)
    rows = [r for r in res.rows if r["method"] == "nonsingular"]
    assert rows[0]["step"] == 0 and rows[0]["triangles"] == 0
    assert rows[-1]["verdict"] == "NonSingular"
    assert [r["triangles"] for r in rows if r["accepted"]] == sorted(r["triangles"] for r in rows if r["accepted"])


def test_convergence_fig7_smoke():
    res = quick("convergence_fig7", trials=1, max_triangles=4)
    methods = {r["method"] for r in res.rows}
    assert methods == {"nonsingular", "pursuit"}


def test_grid_sweep_smoke():
    res = quick("grid_boxes_sweep", trials=1)
    names = [r["method"] for r in res.rows]
    assert names[:4] == ["4x4:bethe", "4x4:box2x2", "4x4:box3x3", "4x4:box4x3"]
    assert all(r["converged"] for r in res.rows)


def test_parallel_workers_match_serial():
    serial = quick("reduction_equivalence", trials=2)
    par = run_experiment(ExperimentSpec("reduction_equivalence", trials=2, seed=3, workers=2))
    assert strip_wall_time(serial.to_csv()) == strip_wall_time(par.to_csv())
