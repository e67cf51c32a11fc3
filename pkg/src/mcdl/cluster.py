"""Hierarchical k-means cluster tree.

The root is clustered with seeded k-means++/Lloyd; any child cluster that is
both loose (mean squared distance to its centroid above ``quality_threshold``)
and large enough (``>= 2 * min_leaf_size``) is re-clustered, down to
``max_depth`` layers. Leaves record their member rows; the pipeline attaches
one trained model per leaf.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np


class ClusterError(ValueError):
    pass


@dataclass(frozen=True)
class ClusterAssignment:
    centroids: np.ndarray
    membership: np.ndarray
    wcss: float
    iterations: int
    history: tuple[float, ...] = ()


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _assign(points, centroids):
    d2 = _sq_dists(points, centroids)
    labels = np.argmin(d2, axis=1)  # first minimum = lowest index on ties
    return labels, d2[np.arange(len(points)), labels]


def _kmeanspp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    chosen = [int(rng.integers(n))]
    closest = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0 and np.isfinite(total):
            idx = int(rng.choice(n, p=closest / total))
        else:
            # distances underflowed; fall back to any point not yet chosen
            fresh = [i for i in range(n) if not any(np.array_equal(points[i], points[c]) for c in chosen)]
            idx = int(fresh[rng.integers(len(fresh))])
        chosen.append(idx)
        closest = np.minimum(closest, ((points - points[idx]) ** 2).sum(axis=1))
    return points[chosen].copy()


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int = 0,
    max_iter: int = 100,
    tol: float = 1e-6,
) -> ClusterAssignment:
    """Lloyd's algorithm from a seeded k-means++ start.

    Stops when the largest centroid move drops below ``tol`` or after
    ``max_iter`` updates. ``history`` holds the WCSS seen at every assignment
    step; it is non-increasing. An emptied cluster is reseeded at the point
    farthest from its own (stale) centroid.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or len(points) == 0:
        raise ClusterError("kmeans needs a non-empty 2-D point array")
    if k < 1 or max_iter < 1 or tol < 0:
        raise ClusterError(f"invalid kmeans arguments k={k} max_iter={max_iter} tol={tol}")
    n_distinct = len(np.unique(points, axis=0))
    if k > n_distinct:
        raise ClusterError(f"k={k} exceeds the {n_distinct} distinct points")

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp(points, k, rng)
    history = []
    iterations = 0
    for iterations in range(1, max_iter + 1):
        labels, d2 = _assign(points, centroids)
        history.append(float(d2.sum()))
        new = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new[c] = points[members].mean(axis=0)
            else:
                far = ((points - centroids[c]) ** 2).sum(axis=1)
                new[c] = points[int(np.argmax(far))]
        shift = float(np.sqrt(((new - centroids) ** 2).sum(axis=1)).max())
        centroids = new
        if shift < tol or shift == 0.0:
            break
    labels, d2 = _assign(points, centroids)
    history.append(float(d2.sum()))
    return ClusterAssignment(
        centroids=centroids,
        membership=labels,
        wcss=float(d2.sum()),
        iterations=iterations,
        history=tuple(history),
    )


@dataclass(frozen=True)
class TreeConfig:
    branching_k: int = 2
    max_depth: int = 5
    min_leaf_size: int = 20
    quality_threshold: float = 0.5
    max_iter: int = 100
    tol: float = 1e-6
    seed: int = 0

    def validate(self) -> None:
        if self.branching_k < 2:
            raise ClusterError("branching_k must be >= 2")
        if self.max_depth < 1:
            raise ClusterError("max_depth must be >= 1")
        if self.min_leaf_size < 1:
            raise ClusterError("min_leaf_size must be >= 1")
        if self.quality_threshold < 0:
            raise ClusterError("quality_threshold must be >= 0")


@dataclass
class ClusterNode:
    centroid: np.ndarray
    members: np.ndarray
    quality: float
    depth: int
    children: list["ClusterNode"] = field(default_factory=list)
    leaf_id: int | None = None
    _child_centroids: np.ndarray | None = field(default=None, repr=False, compare=False)

    def child_centroids(self) -> np.ndarray:
        if self._child_centroids is None:
            self._child_centroids = np.stack([c.centroid for c in self.children])
        return self._child_centroids

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class ClusterTree:
    root: ClusterNode
    config: TreeConfig
    dim: int
    leaves: list[ClusterNode] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return max(leaf.depth for leaf in self.leaves)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    def to_dict(self) -> dict:
        def node(nd: ClusterNode) -> dict:
            out = {
                "centroid": nd.centroid.tolist(),
                "size": int(len(nd.members)),
                "quality": nd.quality,
                "depth": nd.depth,
            }
            if nd.is_leaf:
                out["leaf_id"] = nd.leaf_id
                out["members"] = nd.members.tolist()
            else:
                out["children"] = [node(c) for c in nd.children]
            return out

        return {"dim": self.dim, "config": asdict(self.config), "root": node(self.root)}

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterTree":
        leaves: list[ClusterNode] = []

        def node(x: dict) -> ClusterNode:
            nd = ClusterNode(
                centroid=np.asarray(x["centroid"], dtype=float),
                members=np.asarray(x.get("members", []), dtype=int),
                quality=float(x["quality"]),
                depth=int(x["depth"]),
            )
            if "children" in x:
                nd.children = [node(c) for c in x["children"]]
                nd.members = np.sort(np.concatenate([c.members for c in nd.children]))
            else:
                nd.leaf_id = int(x["leaf_id"])
                leaves.append(nd)
            return nd

        root = node(d["root"])
        leaves.sort(key=lambda nd: nd.leaf_id)
        return cls(root=root, config=TreeConfig(**d["config"]), dim=int(d["dim"]), leaves=leaves)


def child_seed(parent_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([parent_seed, index]).generate_state(1)[0])


def _quality(points: np.ndarray, centroid: np.ndarray) -> float:
    return float(((points - centroid) ** 2).sum(axis=1).mean())


def build_hierarchy(points: np.ndarray, config: TreeConfig = TreeConfig()) -> ClusterTree:
    """Grow the cluster tree over ``points`` (already normalized rows).

    A node is split when it is shallower than ``max_depth``, looser than
    ``quality_threshold``, holds at least ``2 * min_leaf_size`` rows and at
    least ``branching_k`` distinct points. A split is kept only if every
    child has ``min_leaf_size`` rows or more. Leaf ids follow depth-first
    order.
    """
    config.validate()
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or len(points) == 0:
        raise ClusterError("build_hierarchy needs a non-empty 2-D point array")

    def grow(members: np.ndarray, depth: int, seed: int) -> ClusterNode:
        sub = points[members]
        centroid = sub.mean(axis=0)
        nd = ClusterNode(centroid=centroid, members=members, quality=_quality(sub, centroid), depth=depth)
        if (
            depth >= config.max_depth
            or nd.quality <= config.quality_threshold
            or len(members) < 2 * config.min_leaf_size
            or len(np.unique(sub, axis=0)) < config.branching_k
        ):
            return nd
        fit = kmeans(sub, config.branching_k, seed=seed, max_iter=config.max_iter, tol=config.tol)
        groups = [members[fit.membership == c] for c in range(config.branching_k)]
        if min(len(g) for g in groups) < config.min_leaf_size:
            return nd
        children = []
        for c, g in enumerate(groups):
            child = grow(g, depth + 1, child_seed(seed, c))
            # route by the k-means centroid so descent reproduces membership
            child.centroid = fit.centroids[c]
            children.append(child)
        nd.children = children
        return nd

    root = grow(np.arange(len(points)), 0, config.seed)
    leaves: list[ClusterNode] = []

    def collect(nd: ClusterNode) -> None:
        if nd.is_leaf:
            nd.leaf_id = len(leaves)
            leaves.append(nd)
        for c in nd.children:
            collect(c)

    collect(root)
    return ClusterTree(root=root, config=config, dim=points.shape[1], leaves=leaves)


def assign_leaf(tree: ClusterTree, point: np.ndarray) -> int:
    """Descend from the root to the nearest child centroid at each level."""
    point = np.asarray(point, dtype=float)
    if point.shape != (tree.dim,):
        raise ClusterError(f"point has shape {point.shape}, tree expects ({tree.dim},)")
    nd = tree.root
    while nd.children:
        d2 = ((nd.child_centroids() - point) ** 2).sum(axis=1)
        nd = nd.children[int(np.argmin(d2))]
    return nd.leaf_id  # type: ignore[return-value]


def assign_leaves(tree: ClusterTree, points: np.ndarray) -> np.ndarray:
    return np.array([assign_leaf(tree, p) for p in np.asarray(points, dtype=float)], dtype=int)
