import csv
import io

import numpy as np
import pytest

from lassocorr.experiments import (
    TABLE1_CONFIGS,
    TABLE1_REFERENCE,
    ExperimentConfig,
    LambdaGrid,
    ReplicateResult,
    bound_validation,
    build_replicate,
    coverage_check,
    curve_csv,
    run_algorithm1,
    run_algorithm2,
    run_replicate,
    run_replicates,
    summarize,
    summary_csv,
    table1,
    violations_csv,
)
from lassocorr.simcore import EmptyInputError


def small(**kw):
    base = dict(n=10, p=15, s=3, sigma=1.0, replicates=6, base_seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        small(replicates=0)
    with pytest.raises(ValueError):
        small(s=20)
    with pytest.raises(ValueError):
        small(mode="median")
    with pytest.raises(ValueError):
        small(design="clustered")
    with pytest.raises(ValueError):
        small(eta=0.0)
    with pytest.raises(ValueError):
        LambdaGrid(1.0, 1.0, 5)
    with pytest.raises(ValueError):
        LambdaGrid(count=1)
    assert small(mode="grid").grid == LambdaGrid()


def test_table_constants_cover_all_rows():
    assert len(TABLE1_CONFIGS) == 15
    assert set(TABLE1_CONFIGS) == set(TABLE1_REFERENCE)


def test_replicates_are_reproducible_and_order_free():
    cfg = small()
    a = run_replicates(cfg)
    b = [run_replicate(cfg, r) for r in reversed(range(cfg.replicates))][::-1]
    assert [r.lambda_star for r in a] == [r.lambda_star for r in b]
    assert len({r.seed_used for r in a}) == cfg.replicates


def test_jobs_do_not_change_results():
    cfg = small(replicates=4)
    a = run_replicates(cfg, jobs=1)
    b = run_replicates(cfg, jobs=2)
    assert [(r.lambda_star, r.pe_star) for r in a] == [(r.lambda_star, r.pe_star) for r in b]


def test_expansion_shares_base_design_and_noise():
    c1, c2 = small(), small(eta=0.1)
    X1, b1, e1, _, s1 = build_replicate(c1, 2)
    X2, b2, e2, _, s2 = build_replicate(c2, 2)
    assert s1 == s2 and np.array_equal(e1, e2)
    assert X2.shape == (10, 15 * 15)
    assert np.allclose(X2[:, :15], X1, rtol=0, atol=1e-14)
    assert np.count_nonzero(b2) == 3


def test_scale_options():
    Xu = build_replicate(small(), 0)[0]
    Xs = build_replicate(small(scale="sqrt_n"), 0)[0]
    assert np.allclose(np.linalg.norm(Xu, axis=0), 1.0)
    assert np.allclose(Xs, np.sqrt(10) * Xu)


def test_exact_optimum_beats_grid():
    grid = LambdaGrid(0, 10, 201)
    ex = run_replicates(small(grid=grid))
    gr = run_replicates(small(grid=grid, mode="grid"))
    for a, b in zip(ex, gr):
        assert a.pe_star <= b.pe_star + 1e-10
        assert b.pe_star == pytest.approx(b.pe_curve.min())
        assert a.pe_star <= a.pe_curve.min() + 1e-10


def test_algorithm_guards():
    with pytest.raises(ValueError):
        run_algorithm1(small(eta=0.1))
    with pytest.raises(ValueError):
        run_algorithm2(small())
    assert len(run_algorithm2(small(eta=0.1, replicates=2))) == 2


def test_summarize_se_convention():
    cfg = small()
    res = [ReplicateResult(float(v), 2 * float(v), np.empty(0), np.empty(0), 0) for v in (1, 2, 3, 6)]
    row = summarize(res, cfg)
    assert row.lambda_min_mean == 3.0
    assert row.lambda_min_se == pytest.approx(np.std([1, 2, 3, 6], ddof=1) / 2)
    assert summarize(res[:1], cfg).lambda_min_se == 0.0
    with pytest.raises(EmptyInputError):
        summarize([], cfg)


def test_curve_band_contains_mean():
    cfg = small(grid=LambdaGrid(0, 5, 11))
    row = summarize(run_replicates(cfg), cfg)
    assert np.all(row.curve_ci_low <= row.curve_mean) and np.all(row.curve_mean <= row.curve_ci_high)
    text = curve_csv({"algorithm1": row})
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["lambda", "pe_mean", "ci_low", "ci_high", "algorithm"]
    assert len(rows) == 12
    with pytest.raises(ValueError):
        curve_csv({"x": summarize(run_replicates(small()), small())})


def test_summary_csv_roundtrip():
    rows = table1([(10, 15, 3, 1.0, 0.5)], replicates=3, base_seed=1)
    recs = list(csv.DictReader(io.StringIO(summary_csv(rows))))
    assert len(recs) == 1
    assert float(recs[0]["lambda_min_mean"]) == rows[0].lambda_min_mean
    assert recs[0]["replicates"] == "3" and recs[0]["eta"] == ""


def test_table1_rejects_expansion():
    with pytest.raises(ValueError):
        table1([small(eta=0.1)])


def test_bound_validation_small():
    for cfg in (small(), small(eta=0.05, replicates=2), small(design="clustered", nu=0.1)):
        rep = bound_validation(cfg)
        assert rep.ok() and rep.pairs == 101 * cfg.replicates
        assert rep.pairs_on_T > 0
        assert len(list(csv.reader(io.StringIO(violations_csv(rep))))) == rep.pairs + 1


def test_coverage_small():
    res = coverage_check(small(rho=0.9, replicates=1), kappa=0.5, draws=2000)
    assert res.frequency >= 0.5 - 3 * np.sqrt(0.25 / 2000)
    assert 0 < res.K_kappa_hat[0] <= 1
    classic = coverage_check(small(replicates=1), kappa=0.05, draws=2000, classical=True)
    assert classic.K_kappa_hat == [1.0] and classic.frequency >= 0.95
    with pytest.raises(ValueError):
        coverage_check(small(), kappa=0.0)
