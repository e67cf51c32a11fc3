"""Multi-criteria decision making fused with a cluster-tree neural predictor."""

__version__ = "0.1.0"
