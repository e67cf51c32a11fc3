"""End-to-end model: normalize, grow the cluster tree, train one network per leaf.

Leaf networks are trained on z-scored features and z-scored targets, so a
leaf's raw output is already the decision value of its prediction; the
target-space prediction is recovered with the stored target statistics.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cluster import ClusterTree, TreeConfig, assign_leaf, build_hierarchy, child_seed
from .config import PipelineConfig
from .ingest import Dataset, NormParams, zscore_normalize
from .mcdm import AgentGraph, Ranking, build_agent_graph, rank
from .neuralnet import ConstantOutputError, Mlp, TrainConfig, TrainReport, decision_value, forward, init_mlp, predict, train

BUNDLE_FORMAT = 1


@dataclass(frozen=True)
class PipelineModel:
    feature_names: tuple[str, ...]
    target_name: str
    feature_params: NormParams
    target_params: NormParams
    tree: ClusterTree
    leaf_models: tuple[Mlp, ...]
    leaf_reports: tuple[TrainReport, ...]
    config: PipelineConfig

    @property
    def dim(self) -> int:
        return len(self.feature_names)

    def tree_config(self) -> TreeConfig:
        return _tree_config(self.config)


def _tree_config(config: PipelineConfig) -> TreeConfig:
    c = config.clustering
    return TreeConfig(
        branching_k=c.branching_k,
        max_depth=c.max_depth,
        min_leaf_size=c.min_leaf_size,
        quality_threshold=c.quality_threshold,
        max_iter=c.max_iter,
        tol=c.tol,
        seed=config.seed,
    )


def fit_pipeline(data: Dataset, config: PipelineConfig | None = None) -> PipelineModel:
    config = (config or PipelineConfig()).validate()
    normed, fparams = zscore_normalize(data)
    tparams = NormParams.fit(data.targets)
    if tparams.constant[0]:
        raise ConstantOutputError("target column is constant; decision values undefined")
    z_targets = tparams.apply(data.targets[:, None])
    tree = build_hierarchy(normed.rows, _tree_config(config))

    net = config.network
    sizes = [data.dim, *net.hidden, 1]
    models, reports = [], []
    for leaf in tree.leaves:
        seed = child_seed(config.seed, 10_000 + leaf.leaf_id)
        init = init_mlp(sizes, seed=seed)
        model, report = train(
            init,
            normed.rows[leaf.members],
            z_targets[leaf.members],
            TrainConfig(lr=net.lr, epochs=net.epochs, batch_size=net.batch_size, seed=seed),
        )
        models.append(model)
        reports.append(report)
    return PipelineModel(
        feature_names=data.feature_names,
        target_name=data.target_name,
        feature_params=fparams,
        target_params=tparams,
        tree=tree,
        leaf_models=tuple(models),
        leaf_reports=tuple(reports),
        config=config,
    )


def route(model: PipelineModel, X: np.ndarray, feature_params: NormParams | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Normalized rows and their leaf ids."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.dim:
        raise ValueError(f"dimension mismatch: got {X.shape[1]} features, model expects {model.dim}")
    Z = (feature_params or model.feature_params).apply(X)
    return Z, np.array([assign_leaf(model.tree, z) for z in Z], dtype=int)


def predict_normalized(model: PipelineModel, X: np.ndarray, feature_params: NormParams | None = None) -> np.ndarray:
    """Leaf-network outputs (z-scored target units) for raw rows ``X``.

    ``feature_params`` overrides the training statistics, e.g. with
    sliding-window statistics from a stream.
    """
    Z, leaves = route(model, X, feature_params)
    out = np.empty(len(Z))
    for leaf_id in np.unique(leaves):
        mask = leaves == leaf_id
        out[mask] = predict(model.leaf_models[leaf_id], Z[mask])[:, 0]
    return out


def predict_targets(model: PipelineModel, X: np.ndarray, feature_params: NormParams | None = None) -> np.ndarray:
    return model.target_params.invert(predict_normalized(model, X, feature_params)[:, None])[:, 0]


def decision_values(model: PipelineModel, X: np.ndarray, feature_params: NormParams | None = None) -> np.ndarray:
    preds = predict_targets(model, X, feature_params)
    return np.array([decision_value(p, model.target_params, 0) for p in preds])


def score_record(model: PipelineModel, z: np.ndarray) -> float:
    """Decision value of one already-normalized row (single-row path)."""
    out = forward(model.leaf_models[assign_leaf(model.tree, z)], z)[0]
    pred = out * model.target_params.delta[0] + model.target_params.mean[0]
    return decision_value(pred, model.target_params, 0)


def rank_alternatives(model: PipelineModel, X: np.ndarray) -> tuple[AgentGraph, Ranking]:
    m = model.config.mcdm
    graph = build_agent_graph(decision_values(model, X)[:, None], m.neighborhood_k, m.K)
    return graph, rank(graph, m.weighting)  # type: ignore[arg-type]


# ---------------------------------------------------------------- bundles


def _dumps(obj) -> bytes:
    return (json.dumps(obj, indent=1, sort_keys=True) + "\n").encode("utf-8")


def bundle_files(model: PipelineModel) -> dict[str, bytes]:
    """Every file of a model bundle, keyed by relative path (manifest included)."""
    files: dict[str, bytes] = {
        "config.ini": model.config.to_ini().encode("utf-8"),
        "norm.json": _dumps({
            "feature_names": list(model.feature_names),
            "target_name": model.target_name,
            "features": model.feature_params.to_dict(),
            "target": model.target_params.to_dict(),
        }),
        "tree.json": _dumps(model.tree.to_dict()),
        "graph.json": _dumps({
            "neighborhood_k": model.config.mcdm.neighborhood_k,
            "K": model.config.mcdm.K if model.config.mcdm.K is not None else float(model.config.mcdm.neighborhood_k),
            "weighting": model.config.mcdm.weighting,
        }),
    }
    curves = io.StringIO()
    w = csv.writer(curves, lineterminator="\n")
    w.writerow(["leaf", "epoch", "mse"])
    for leaf_id, (mlp, rep) in enumerate(zip(model.leaf_models, model.leaf_reports)):
        files[f"leaves/leaf_{leaf_id:03d}.json"] = _dumps({
            "leaf_id": leaf_id,
            "model": mlp.to_dict(),
            "epoch_losses": rep.epoch_losses,
            "final_loss": rep.final_loss,
        })
        for epoch, loss in enumerate(rep.epoch_losses, start=1):
            w.writerow([leaf_id, epoch, repr(loss)])
    files["loss_curves.csv"] = curves.getvalue().encode("utf-8")
    files["manifest.json"] = _dumps({
        "format": BUNDLE_FORMAT,
        "n_leaves": len(model.leaf_models),
        "files": {name: hashlib.sha256(data).hexdigest() for name, data in sorted(files.items())},
    })
    return files


def bundle_checksum(model: PipelineModel) -> str:
    return hashlib.sha256(bundle_files(model)["manifest.json"]).hexdigest()


def save_bundle(model: PipelineModel, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    for name, data in bundle_files(model).items():
        path = out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    return out_dir


class BundleError(IOError):
    pass


def load_bundle(path: str | Path) -> PipelineModel:
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.is_file():
        raise BundleError(f"not a model bundle (no manifest.json): {path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        for name, digest in manifest["files"].items():
            data = (path / name).read_bytes()
            if hashlib.sha256(data).hexdigest() != digest:
                raise BundleError(f"checksum mismatch for {path / name}")
        config = PipelineConfig.from_ini((path / "config.ini").read_text(encoding="utf-8"))
        norm = json.loads((path / "norm.json").read_text(encoding="utf-8"))
        tree = ClusterTree.from_dict(json.loads((path / "tree.json").read_text(encoding="utf-8")))
        models, reports = [], []
        for leaf_id in range(manifest["n_leaves"]):
            leaf = json.loads((path / f"leaves/leaf_{leaf_id:03d}.json").read_text(encoding="utf-8"))
            models.append(Mlp.from_dict(leaf["model"]))
            reports.append(TrainReport(list(leaf["epoch_losses"])))
    except (OSError, KeyError, ValueError) as exc:
        if isinstance(exc, BundleError):
            raise
        raise BundleError(f"unreadable bundle {path}: {exc}") from None
    return PipelineModel(
        feature_names=tuple(norm["feature_names"]),
        target_name=norm["target_name"],
        feature_params=NormParams.from_dict(norm["features"]),
        target_params=NormParams.from_dict(norm["target"]),
        tree=tree,
        leaf_models=tuple(models),
        leaf_reports=tuple(reports),
        config=config,
    )
