import math

import numpy as np
import pytest

import sketchcv as sc


def test_bivariate_model_weights_and_variances():
    model = sc.bivariate_sigma12_model(1.0, 1.0, 0.5)
    alpha = np.array([1.0])
    c = sc.cv_weights(model, alpha)
    assert c == pytest.approx([-0.4, -0.4], abs=1e-12)
    assert sc.cve_variance(model, alpha) == pytest.approx(0.45, abs=1e-12)
    assert sc.mle_variance(model, alpha) == pytest.approx(0.45, abs=1e-12)


def test_partition_shapes():
    v = np.array([[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 1.5]])
    a, b, d = sc.partition(sc.CovarianceModel(v, 1))
    assert a.shape == (1, 1)
    assert b.shape == (1, 2)
    assert d.shape == (2, 2)


def test_cubic_roots_match_numpy():
    rng = np.random.default_rng(3)
    for _ in range(200):
        c2, c1, c0 = rng.normal(size=3) * 3
        cubic = sc.CubicPoly(c2, c1, c0)
        ours = sorted(sc.real_roots(cubic))
        theirs = np.roots([1.0, c2, c1, c0])
        real = sorted(t.real for t in theirs if abs(t.imag) < 1e-7)
        if len(real) != len(ours):
            continue  # numpy and the discriminant can disagree right at a double root
        assert ours == pytest.approx(real, abs=1e-6)
        assert sc.count_real_roots(cubic) == len(ours)


def test_estimators_on_a_small_example():
    s = sc.SuffStats(1.2, 0.9, 0.5)
    assert sc.baseline(s).estimate == 0.5
    init = sc.cv_init(s, 1.0, 1.0)
    assert init.estimate == pytest.approx(0.46, abs=1e-15)
    assert init.iterations == 1

    cfg = sc.SolverConfig.scaled(1.0, 1.0)
    em = sc.cv_em(s, 1.0, 1.0, cfg)
    assert em.converged
    assert em.status == "Converged"
    assert em.trace[1] == init.estimate
    cubic = sc.mle_cubic(s, 1.0, 1.0)
    nr = sc.mle_newton(cubic, s.w3, cfg)
    sec = sc.mle_secant(cubic, cfg.secant_lo + s.w3, cfg.secant_hi + s.w3, cfg)
    if sc.count_real_roots(cubic) == 1:
        assert nr.estimate == pytest.approx(em.estimate, abs=1e-6)
        assert sec.estimate == pytest.approx(em.estimate, abs=1e-6)
    assert abs(cubic(em.estimate)) <= 1e-6


def test_feature_hash_tables():
    v = sc.feature_hash(np.array([1.0, 2.0, 3.0]), 2, [0, 1, 0], [1, -1, 1])
    assert list(v) == [4.0, -2.0]


def test_vector_pair_geometry():
    x1, x2 = sc.generate_vector_pair(50, 4.0, 0.7, seed=5)
    assert x2 @ x2 == pytest.approx(50.0, rel=1e-12)
    assert x1 @ x1 == pytest.approx(200.0, rel=1e-12)
    cos = x1 @ x2 / math.sqrt((x1 @ x1) * (x2 @ x2))
    assert math.acos(cos) == pytest.approx(0.7, abs=1e-10)


def test_trace_estimators():
    m = np.array([[2.0, 1.0], [1.0, 3.0]])
    ones = np.ones(2)
    probes = sc.draw_probes(2, 400, seed=7)
    assert probes.shape == (2, 400)
    hutch = sc.hutchinson(m, ones, probes)
    adams = sc.adams_cv(m, ones, probes, tr_mb=5.0)
    assert abs(hutch - 5.0) < 1.0
    assert abs(adams - 5.0) < 1.0
    # A diagonal matrix is recovered exactly.
    diag = np.diag([1.0, -2.0])
    assert sc.bekas(diag, ones, sc.draw_probes(2, 3, seed=1)) == pytest.approx(-1.0, abs=1e-12)
    rademacher = sc.draw_probes(2, 8, kind=sc.ProbeKind.Rademacher, seed=2)
    assert set(np.unique(rademacher)) <= {-1.0, 1.0}


def test_run_inner_product_rows():
    rows = sc.run_inner_product(d=100, k_values=[10], trials=50, threads=1)
    assert len(rows) == 6
    assert rows[0]["method"] == "Baseline"
    again = sc.run_inner_product(d=100, k_values=[10], trials=50, threads=2)
    assert rows == again
    box = sc.boxplot_stats(list(range(1, 101)))
    assert box["median"] == 50.5


def test_errors_map_to_sketchcv_error():
    assert issubclass(sc.SketchcvError, ValueError)
    with pytest.raises(sc.SketchcvError):
        sc.feature_hash(np.array([1.0, 2.0]), 2, [0, 2], [1, 1])
    with pytest.raises(sc.SketchcvError):
        sc.run_inner_product(d=100, k_values=[2], trials=5)
    with pytest.raises(sc.SketchcvError):
        sc.generate_vector_pair(10, 1.0, 4.0)
