"""Smoke tests for the Python module."""

import json

import numpy as np
import pytest

import pdr

TINY = {
    "image_size": 16,
    "feature_dim": 8,
    "model": {"encoder_widths": [4, 8], "decoder_widths": [8, 4], "mlp_hidden": 8},
    "dataset": {"size": 60},
    "loocc": {"batch_size": 8, "max_epochs": 1, "mode": "LV"},
    "probe": {"epochs": 10},
    "eval": {"n_train": 20},
}


def test_scene_and_render_agree():
    scene = pdr.generate_scene(seed=3, shape_class=1, albedo_class=2, image_size=16)
    assert scene["image"].shape == (1, 16, 16, 3)
    assert scene["light"].shape == (1, 4) and scene["camera"].shape == (1, 6)
    again = pdr.render(scene["depth"], scene["albedo"], scene["light"], scene["camera"])
    np.testing.assert_array_equal(again, scene["image"])
    unbatched = pdr.render(scene["depth"][0], scene["albedo"][0], scene["light"][0], scene["camera"][0])
    np.testing.assert_array_equal(unbatched, again)
    assert 0.0 <= again.min() and again.max() <= 1.0


def test_metrics():
    labels = np.array([0, 0, 1, 1, 1])
    split = np.array([0, 0, 0, 1, 1])
    assert pdr.cluster_accuracy(split, labels) == pytest.approx(0.8, abs=1e-12)
    assert pdr.weighted_f1(split, labels) == pytest.approx(0.8, abs=1e-12)
    assert pdr.nmi(np.array([0, 0, 1, 1]), np.array([5, 5, 3, 3])) == pytest.approx(1.0)
    rng = np.random.default_rng(0)
    x = np.concatenate([rng.normal(size=(10, 3)), rng.normal(size=(10, 3)) + 20])
    ids = pdr.hac_ward(x, 2)
    assert len(set(ids[:10])) == 1 and len(set(ids[10:])) == 1 and ids[0] != ids[10]


def test_pcc():
    rng = np.random.default_rng(1)
    blocks = [rng.normal(size=(2000, 4)) for _ in range(4)]
    matrix, mean = pdr.pcc_disentanglement(blocks)
    assert matrix.shape == (4, 4)
    np.testing.assert_allclose(np.diag(matrix), 1.0)
    assert mean < 0.05


def test_tensor_round_trip(tmp_path):
    a = np.arange(24, dtype=np.float64).reshape(2, 3, 4) / 7
    pdr.save_tensor(tmp_path / "a.pdrt", a)
    np.testing.assert_array_equal(pdr.load_tensor(tmp_path / "a.pdrt"), a)


def test_generate_train_evaluate(tmp_path):
    summary = pdr.generate(tmp_path / "ds", TINY)
    assert summary["splits"]["train"] == 48
    train = pdr.train(tmp_path / "ds", tmp_path / "run", TINY)
    assert train["mode"] == "loocc-lv" and train["epochs"] == 1
    report = pdr.evaluate(tmp_path / "run" / "best", tmp_path / "ds", "cluster")
    assert 0.0 <= report["metrics"]["cluster_accuracy"] <= 1.0

    model = pdr.Model(tmp_path / "run" / "best")
    assert json.loads(model.config_json)["image_size"] == 16
    images = pdr.load_tensor(tmp_path / "ds" / "examples" / "000000_image.pdrt")
    z = model.encode(images)
    assert set(z) == {"geom", "alb", "cam", "light"}
    assert all(v.shape == (1, 8) for v in z.values())
    params = model.decode_images(images)
    assert params["depth"].shape == (1, 16, 16)


def test_errors_surface_as_exceptions(tmp_path):
    with pytest.raises(pdr.UsageError):
        pdr.evaluate(tmp_path / "nope", tmp_path / "nope", "cluster")
    with pytest.raises(ValueError):
        pdr.generate_scene(seed=0, shape_class=99, albedo_class=0, image_size=16)
    assert pdr.default_config()["feature_dim"] == 256
