import math

import numpy as np
import pytest

import qsle


def test_semicircle_density_and_cdf():
    g = qsle.QGaussian(0.0)
    assert g.support == pytest.approx((-2.0, 2.0))
    # q = 0 is the semicircle law sqrt(4 - x^2) / (2 pi).
    for x in (-1.5, 0.0, 0.7):
        assert g.density(x) == pytest.approx(math.sqrt(4 - x * x) / (2 * math.pi), rel=1e-12)
    assert g.cdf(0.0) == pytest.approx(0.5, abs=1e-12)
    assert g.inverse_cdf(g.cdf(0.3)) == pytest.approx(0.3, abs=1e-10)


def test_quadrature_moments_match_norms():
    q = 0.4
    nodes, weights = qsle.quadrature(q, 0.0, 1.0, 128)
    nodes, weights = np.asarray(nodes), np.asarray(weights)
    assert weights.sum() == pytest.approx(1.0, abs=1e-13)
    h = np.array([qsle.hermite(q, x, 4) for x in nodes])
    for n in range(5):
        assert (weights * h[:, n] ** 2).sum() == pytest.approx(qsle.q_factorial(n, q), rel=1e-11)
    assert (weights * h[:, 1] * h[:, 3]).sum() == pytest.approx(0.0, abs=1e-12)


def test_sampling_is_seeded():
    g = qsle.QGaussian(-0.5, 2.0, 0.25)
    a = g.sample(seed=11, count=500)
    assert a == g.sample(seed=11, count=500)
    lo, hi = g.support
    assert all(lo <= x <= hi for x in a)
    assert abs(np.mean(a) - 2.0) < 0.1


def test_bimodality():
    q0 = qsle.bimodal_threshold()
    assert -1.0 < q0 < 0.0
    assert qsle.QGaussian(q0 - 0.05).mode_count() == 2
    assert qsle.QGaussian(q0 + 0.05).mode_count() == 1


def test_cls_fit_recovers_polynomial():
    prior = [qsle.QGaussian(0.3), qsle.QGaussian(0.3)]
    model = qsle.cls_fit(lambda x: 1 + x[0] - 2 * x[0] * x[1], prior, degree=3, seed=5)
    assert model(np.array([0.4, -0.2]).tolist()) == pytest.approx(1 + 0.4 + 2 * 0.4 * 0.2, abs=1e-10)
    assert len(model.coeffs) == len(model.indices) == 10


def test_config_validation_and_hash():
    cfg = qsle.default_config()
    assert cfg["experiment"] == "one_d"
    assert qsle.config_hash(cfg) == qsle.config_hash(None)
    with pytest.raises(qsle.ConfigError, match="one_d.bogus"):
        qsle.normalize_config({"one_d": {"bogus": 1}})
    with pytest.raises(qsle.DomainError):
        qsle.QGaussian(1.5)


def test_density_dump_run(tmp_path):
    cfg = {"experiment": "density_dump", "density_dump": {"points": 50}}
    directory, files = qsle.run_experiment(cfg, tmp_path)
    assert "density.csv" in files and "manifest.json" in files
    rows = (directory / "density.csv").read_text().splitlines()
    assert rows[0] == "x,density,truncated,abs_error,bound"
    assert len(rows) == 51
