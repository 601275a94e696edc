import math

import numpy as np
import pytest

from maxcorr.distributions import parse_distribution
from maxcorr.limit_sims import (
    InfeasibleConfig,
    Record,
    SimConfig,
    SimResult,
    read_records_csv,
    run_experiment,
    simulate_cell,
    summarize,
    trend_assert,
    write_plot_data,
    write_records_csv,
    write_summary_csv,
)
from maxcorr.stats_core import w_statistic

GAUSS = parse_distribution("gaussian")


def synthetic(medians, grid=None):
    grid = grid or [10 * 2**k for k in range(len(medians))]
    cfg = SimConfig(GAUSS, tuple(grid), reps=1, master_seed=0)
    return SimResult(cfg, [Record(n, 0, m, m) for n, m in zip(grid, medians)])


def test_trend_to_zero_synthetic():
    assert trend_assert(synthetic([1.0, 0.5, 0.25, 0.125]), "to_zero").passed
    assert not trend_assert(synthetic([1.0, 0.5, 0.6, 0.125]), "to_zero").passed
    assert not trend_assert(synthetic([1.0, 0.9, 0.8, 0.7]), "to_zero").passed


def test_trend_to_two_synthetic():
    chk = trend_assert(synthetic([3, 2.4, 2.1, 1.98]), "to_two", band=(1.75, 2.25))
    assert chk.passed and chk.medians == [3, 2.4, 2.1, 1.98]
    assert not trend_assert(synthetic([3, 2.4, 1.98, 2.1]), "to_two").passed
    assert not trend_assert(synthetic([3, 2.4, 2.1, 2.3]), "to_two").passed


def test_trend_bounded_and_diverges():
    assert trend_assert(synthetic([1.0, 2.0, 2.2]), "bounded_by_two", slack=0.25).passed
    assert not trend_assert(synthetic([1.0, 2.0, 2.3]), "bounded_by_two", slack=0.25).passed
    assert trend_assert(synthetic([1.0, 1.5, 2.1]), "diverges").passed
    assert not trend_assert(synthetic([1.0, 1.5, 2.0]), "diverges").passed


def test_trend_needs_three_points():
    with pytest.raises(ValueError, match="at least 3"):
        trend_assert(synthetic([1.0, 0.1]), "to_zero")
    with pytest.raises(ValueError):
        trend_assert(synthetic([1.0, 0.5, 0.1]), "sideways")


def test_summarize_quantiles():
    res = synthetic([1.7])
    assert summarize(res)[0].median == 1.7
    cfg = SimConfig(GAUSS, (10,), reps=3, master_seed=0)
    res = SimResult(cfg, [Record(10, k, v, v) for k, v in enumerate([3.0, 1.0, 2.0])])
    row = summarize(res)[0]
    assert row.median == 2.0
    assert row.q05 == pytest.approx(1.1) and row.q95 == pytest.approx(2.9)
    with pytest.raises(ValueError):
        summarize(SimResult(cfg, []))


def test_config_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        SimConfig(GAUSS, (10, 10, 20), 1, 0)
    with pytest.raises(ValueError, match="alpha"):
        SimConfig(GAUSS, (10, 20), 1, 0, normalization="power", alpha=0.5)
    with pytest.raises(ValueError, match="n >= 3"):
        SimConfig(GAUSS, (2, 20), 1, 0)
    with pytest.raises(ValueError, match="reps"):
        SimConfig(GAUSS, (10, 20), 0, 0)
    with pytest.raises(ValueError, match="T mode"):
        SimConfig.from_dict({"dist_u": "gaussian", "mode": "T", "n_grid": [10], "reps": 1, "master_seed": 0})
    with pytest.raises(ValueError, match="unknown"):
        SimConfig.from_dict({"dist_u": "gaussian", "n_grid": [10], "reps": 1, "master_seed": 0, "p": 3})
    cfg = SimConfig(GAUSS, (10, 20), 2, 5, normalization="power", alpha=0.75, c=1.5,
                    dist_v=parse_distribution("rademacher"))
    assert SimConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.p(10) == 15 and cfg.mode == "T"


def test_rademacher_ratio_bounded_by_one():
    cfg = SimConfig(parse_distribution("rademacher"), (4, 5, 6), reps=50, master_seed=1,
                    normalization="power", alpha=1.0)
    res = run_experiment(cfg)
    assert len(res.records) == 150
    assert all(0 <= r.ratio <= 1 for r in res.records)


def test_ratio_definition_and_cell_stream():
    cfg = SimConfig(GAUSS, (30, 60, 90), reps=3, master_seed=9)
    res = run_experiment(cfg)
    for r in res.records:
        assert r.ratio == r.statistic / math.sqrt(r.n * math.log(r.n))
        assert r.ratio >= 0
        assert simulate_cell(cfg, r.n, r.rep) == r


def test_determinism_across_workers():
    cfg = SimConfig(parse_distribution("symmetric-pareto(a=3)"), (20, 40, 80), reps=6, master_seed=3,
                    dist_v=GAUSS)
    assert run_experiment(cfg, workers=1).records == run_experiment(cfg, workers=4).records


def test_t_mode_dominates_w_on_same_matrix():
    # with U = V, the ordered pairs include every unordered one
    from maxcorr.rng import stream
    from maxcorr.distributions import sample
    from maxcorr.stats_core import t_statistic

    for rep in range(20):
        u = sample(GAUSS, (25, 30), stream(4, rep)).T
        assert t_statistic(u, u).value >= w_statistic(u).value


def test_memory_guard():
    cfg = SimConfig(GAUSS, (10, 100_000), reps=1, master_seed=0)
    with pytest.raises(InfeasibleConfig):
        run_experiment(cfg)


def test_outputs_round_trip_and_offline_quantiles(tmp_path):
    cfg = SimConfig(GAUSS, (40, 80, 160), reps=7, master_seed=12)
    res = run_experiment(cfg)
    write_records_csv(res, tmp_path / "r.csv")
    write_summary_csv(res, tmp_path / "s.csv")
    write_plot_data(res, tmp_path / "p.dat")
    back = read_records_csv(tmp_path / "r.csv")
    assert back == res.records
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "n,median,q05,q95"
    for line in lines[1:]:
        n, med, q05, q95 = line.split(",")
        vals = sorted(r.ratio for r in back if r.n == int(n))
        # type-7 quantile recomputed from the exported records
        h = (len(vals) - 1) * 0.95
        lo = int(math.floor(h))
        ref = vals[lo] + (h - lo) * (vals[min(lo + 1, len(vals) - 1)] - vals[lo])
        assert float(q95) == pytest.approx(ref, rel=1e-15)
        assert float(med) == vals[len(vals) // 2]
    plot = (tmp_path / "p.dat").read_text().splitlines()
    assert plot[0].startswith("#") and len(plot) == 4
    assert [int(l.split()[0]) for l in plot[1:]] == [40, 80, 160]
