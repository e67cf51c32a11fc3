import numpy as np
import pytest

from mcdl.ingest import Dataset
from mcdl.neuralnet import ConstantOutputError, forward
from mcdl.pipeline import (
    BundleError,
    bundle_checksum,
    bundle_files,
    decision_values,
    fit_pipeline,
    load_bundle,
    predict_targets,
    rank_alternatives,
    route,
    save_bundle,
    score_record,
)


def test_blob_model_structure(blob_model):
    assert blob_model.tree.n_leaves == 4
    assert all(r.final_loss < 0.1 for r in blob_model.leaf_reports)
    assert blob_model.leaf_models[0].sizes == [2, 16, 8, 1]


def test_predictions_track_blob_targets(blob_data, blob_model):
    data, _ = blob_data
    pred = predict_targets(blob_model, data.rows)
    assert np.sqrt(np.mean((pred - data.targets) ** 2)) < 0.2


def test_single_row_path_matches_batch(blob_data, blob_model):
    data, _ = blob_data
    Z, leaves = route(blob_model, data.rows[:20])
    batch = decision_values(blob_model, data.rows[:20])
    for z, want in zip(Z, batch):
        assert score_record(blob_model, z) == pytest.approx(want, abs=1e-12)
    # decision value is the leaf output itself when targets were z-scored for training
    out = forward(blob_model.leaf_models[leaves[0]], Z[0])[0]
    assert batch[0] == pytest.approx(out, abs=1e-12)


def test_rank_top_from_highest_target_blob(blob_data, blob_model):
    data, blob = blob_data
    graph, ranking = rank_alternatives(blob_model, data.rows)
    assert blob[ranking.order[0]] == blob.max()
    assert sorted(ranking.order) == list(range(len(data)))
    assert graph.K == blob_model.config.mcdm.neighborhood_k


def test_identical_alternatives_rank_by_id(blob_model):
    X = np.tile([[0.0, 0.0]], (12, 1))
    _, ranking = rank_alternatives(blob_model, X)
    assert ranking.order == list(range(12))


def test_constant_target_rejected():
    with pytest.raises(ConstantOutputError):
        fit_pipeline(Dataset(np.random.default_rng(0).normal(size=(50, 2)), np.ones(50), ("a", "b")))


def test_bundle_roundtrip(tmp_path, blob_data, blob_model):
    save_bundle(blob_model, tmp_path / "b")
    back = load_bundle(tmp_path / "b")
    X = blob_data[0].rows
    np.testing.assert_array_equal(decision_values(back, X), decision_values(blob_model, X))
    assert bundle_checksum(back) == bundle_checksum(blob_model)
    assert set(bundle_files(blob_model)) >= {"manifest.json", "tree.json", "norm.json", "config.ini", "loss_curves.csv"}


def test_bundle_tamper_detected(tmp_path, blob_model):
    path = save_bundle(blob_model, tmp_path / "b")
    tree = path / "tree.json"
    tree.write_text(tree.read_text().replace("1", "2", 1))
    with pytest.raises(BundleError, match="checksum"):
        load_bundle(path)
    with pytest.raises(BundleError, match="manifest"):
        load_bundle(tmp_path)


def test_loss_curve_csv(blob_model):
    lines = bundle_files(blob_model)["loss_curves.csv"].decode().splitlines()
    assert lines[0] == "leaf,epoch,mse"
    assert len(lines) == 1 + sum(r.epochs_run for r in blob_model.leaf_reports)
