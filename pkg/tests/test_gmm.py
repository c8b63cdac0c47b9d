import json

import numpy as np
import pytest

from conftest import random_model
from mgcdiff import (
    DegenerateComponentError,
    GmmModel,
    NotPositiveDefiniteError,
    ValidationError,
    gmm_density,
    gmm_fit_em,
    gmm_load,
    gmm_sample,
    gmm_store,
)
from mgcdiff.experiments import sample_two_squares
from mgcdiff.gaussian import GaussianParams, gaussian_pdf
from mgcdiff.gmm import read_points, write_points


def test_single_component_mode():
    model = GmmModel([1.0], [[0.0, 0.0]], [np.eye(2)])
    assert gmm_density(model, [0.0, 0.0]) == pytest.approx(1 / (2 * np.pi), rel=1e-14)


def test_symmetric_midpoint():
    model = GmmModel([0.5, 0.5], [[-1.0], [1.0]], [[[1.0]], [[1.0]]])
    one = gaussian_pdf([0.0], GaussianParams([1.0], [[1.0]]))
    assert gmm_density(model, [0.0]) == pytest.approx(one, rel=1e-14)


def test_density_matches_component_sum(rng):
    model = random_model(rng, 2, 2)
    r = rng.standard_normal((7, 2))
    ref = sum(w * gaussian_pdf(r, model.component(j)) for j, w in enumerate(model.weights))
    np.testing.assert_allclose(gmm_density(model, r), ref, rtol=1e-12)


def test_validation():
    with pytest.raises(ValidationError, match="sum"):
        GmmModel([0.5, 0.4], [[0.0], [1.0]], [[[1.0]], [[1.0]]])
    with pytest.raises(ValidationError, match="negative"):
        GmmModel([1.5, -0.5], [[0.0], [1.0]], [[[1.0]], [[1.0]]])
    with pytest.raises(ValidationError, match="tied"):
        GmmModel([0.5, 0.5], [[0.0], [1.0]], [[[1.0]], [[2.0]]], tied=True)
    with pytest.raises(NotPositiveDefiniteError) as err:
        GmmModel([0.5, 0.5], [[0.0], [1.0]], [[[1.0]], [[-2.0]]])
    assert err.value.component == 1


def test_arrays_read_only(rng):
    model = random_model(rng, 2, 2)
    with pytest.raises(ValueError):
        model.weights[0] = 1.0


def test_fit_single_gaussian():
    rng = np.random.default_rng(0)
    data = rng.standard_normal((500, 2))
    model = gmm_fit_em(data, 1)
    assert np.all(np.abs(model.means[0]) < 0.15)
    assert np.linalg.norm(model.covariances[0] - np.eye(2), 2) < 0.2
    np.testing.assert_allclose(model.means[0], data.mean(0), atol=1e-12)
    np.testing.assert_allclose(model.covariances[0], np.cov(data.T, bias=True), atol=1e-10)


def test_fit_two_squares_mass_split():
    data = sample_two_squares(2000, 0)
    model = gmm_fit_em(data, 10, tied=True, seed=0)
    assert model.tied
    upper = model.weights[model.means[:, 0] > 2.0].sum()
    assert upper == pytest.approx(0.8, abs=0.05)


def test_fit_log_likelihood_monotone():
    data = sample_two_squares(1000, 3)
    _, hist = gmm_fit_em(data, 5, tied=True, seed=1, return_history=True)
    assert np.all(np.diff(hist) >= -1e-9)


def test_fit_deterministic():
    data = sample_two_squares(400, 2)
    assert gmm_fit_em(data, 4, seed=9) == gmm_fit_em(data, 4, seed=9)


def test_fit_degenerate():
    data = np.repeat([[0.0, 0.0], [1.0, 1.0]], 20, axis=0)
    with pytest.raises((DegenerateComponentError, ValidationError)):
        gmm_fit_em(data, 5, seed=0)


def test_sample_empty_and_moments():
    model = GmmModel([1.0], [[0.0, 0.0]], [np.eye(2)])
    assert gmm_sample(model, 0).shape[0] == 0
    x = gmm_sample(model, 10_000, seed=1)
    assert np.all(np.abs(x.mean(0)) < 0.05)


def test_sample_frequencies():
    model = GmmModel([0.3, 0.7], [[-10.0], [10.0]], [[[1.0]], [[1.0]]])
    x = gmm_sample(model, 10_000, seed=2)
    assert np.mean(x[:, 0] < 0) == pytest.approx(0.3, abs=0.02)


def test_store_load_round_trip(tmp_path, rng):
    for tied in (False, True):
        model = random_model(rng, 3, 4, tied=tied)
        path = tmp_path / "m.json"
        gmm_store(model, path)
        assert gmm_load(path) == model


def test_load_rejects_bad_weights(tmp_path, rng):
    path = tmp_path / "m.json"
    gmm_store(random_model(rng, 1, 2), path)
    doc = json.loads(path.read_text())
    doc["weights"] = [0.45, 0.45]
    path.write_text(json.dumps(doc))
    with pytest.raises(ValidationError, match="weights"):
        gmm_load(path)


def test_load_rejects_non_spd(tmp_path, rng):
    path = tmp_path / "m.json"
    gmm_store(random_model(rng, 1, 2), path)
    doc = json.loads(path.read_text())
    doc["covariances"][1] = [-1.0]
    path.write_text(json.dumps(doc))
    with pytest.raises(NotPositiveDefiniteError, match="component 1"):
        gmm_load(path)


def test_load_missing_field(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"dim": 1}))
    with pytest.raises(ValidationError, match="tied"):
        gmm_load(path)


def test_points_round_trip(tmp_path, rng):
    pts = rng.standard_normal((5, 3))
    write_points(tmp_path / "p.csv", pts)
    np.testing.assert_array_equal(read_points(tmp_path / "p.csv"), pts)
