"""Smoke tests for the python extension module."""

import numpy as np
import pytest

import specseries as ss


def test_kernel_basis_roundtrip():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(60, 2))
    grid = ss.default_eps_grid(pts)
    assert len(grid) >= 1 and all(e > 0 for e in grid)

    basis = ss.fit_basis(pts, grid[len(grid) // 2], 6)
    assert basis.j_kept >= 1
    psi = basis.evaluate(pts)
    # training-point identity: psi = sqrt(n) * eigvecs
    assert np.allclose(psi, np.sqrt(60.0) * basis.eigvecs, atol=1e-8)
    # empirical orthonormality
    inner = psi.T @ psi / 60.0
    assert np.allclose(inner, np.eye(basis.j_kept), atol=1e-8)


def test_ratio_pipeline(tmp_path):
    f = ss.simulate_gaussian_shift(0.5, 600, 1, seed=2)
    g = ss.simulate_gaussian_shift(0.0, 600, 1, seed=3)
    grid = ss.default_eps_grid(g[:360])
    model, report = ss.select_ratio_model(g[:360], f[:360], g[360:], f[360:], grid, 12)
    assert report.selected.loss == min(e.loss for e in report.entries)

    pred = model.predict(g)
    assert pred.shape == (600,)
    assert (pred >= 0).all()

    # persistence round-trip reproduces predictions
    path = str(tmp_path / "ratio.json")
    ss.save_ratio_model(path, model)
    loaded = ss.load_ratio_model(path)
    assert np.allclose(loaded.predict(g), pred, atol=1e-12)

    # constant-1 predictor loss is -1; the fitted model should do at least as well
    loss = ss.estimate_ratio_loss(model, g[360:], f[360:])
    assert loss == pytest.approx(report.selected.loss, abs=1e-10)


def test_likelihood_pipeline(tmp_path):
    x, theta = ss.simulate_joint("spiral", 400, seed=4)
    gx, _ = ss.simulate_joint("spiral", 400, seed=5)
    lo, hi = ss.param_box("spiral")

    model, report = ss.select_likelihood_model(
        x[:240], theta[:240], gx[:240],
        x[240:], theta[240:], gx[240:],
        ss.default_eps_grid(gx[:240]), ss.default_eps_grid(theta[:240]),
        8, 8, b=5, seed=6,
    )
    assert report.selected.loss == min(e.loss for e in report.entries)

    grid = ss.ThetaGrid.regular(lo, hi, 50)
    obs = ss.simulate_spiral(7.0, 10, seed=7)
    density, flat = ss.sample_log_likelihood(model, obs, grid)
    assert not flat
    assert density.sum() * grid.cell_volume == pytest.approx(1.0, abs=1e-9)

    dist = ss.posterior_distance_to_truth(model, obs, np.array([7.0]), grid)
    assert 0.0 <= dist <= 1.0

    path = str(tmp_path / "lik.json")
    ss.save_likelihood_model(path, model, lo, hi)
    loaded, lo2, hi2 = ss.load_likelihood_model(path)
    assert np.allclose(lo2, lo) and np.allclose(hi2, hi)
    surface = model.predict(obs, grid.points)
    assert np.allclose(loaded.predict(obs, grid.points), surface, atol=1e-12)


def test_simulators_and_errors():
    img = ss.edge_image(0.0, 0.0)
    assert img.shape == (400,)
    assert img.sum() == 200.0

    x, theta = ss.simulate_joint("klein", 50, seed=8)
    assert x.shape == (50, 4) and theta.shape == (50, 2)

    with pytest.raises(ValueError):
        ss.simulate_spiral(99.0, 5, seed=1)
    with pytest.raises(ValueError):
        ss.fit_basis(np.zeros((1, 2)), 1.0, 3)
    with pytest.raises(IOError):
        ss.load_ratio_model("/nonexistent/model.json")
