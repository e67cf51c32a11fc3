"""Comparison models and metrics for the benchmark tables."""

from .bayes import BernoulliNB, GaussianNB, bernoulli_nb, gaussian_nb
from .bench import BenchReport, BenchRow, BenchTable, bench, format_value
from .knn import KnnRegressor, euclidean, knn_regress, manhattan, minkowski
from .linear import LinearModel, SingularSystemError, fit_linear, ols_regress, ridge_regress
from .metrics import (
    ClassificationMetrics,
    MetricError,
    RegressionMetrics,
    evaluate_classification,
    evaluate_regression,
)
from .svm import LinearSVM, hinge_objective, linear_svm
from .tree import DecisionTree, tree_classify, tree_regress

__all__ = [
    "BenchReport", "BenchRow", "BenchTable", "BernoulliNB", "ClassificationMetrics", "DecisionTree",
    "GaussianNB", "KnnRegressor", "LinearModel", "LinearSVM", "MetricError", "RegressionMetrics",
    "SingularSystemError", "bench", "bernoulli_nb", "euclidean", "evaluate_classification",
    "evaluate_regression", "fit_linear", "format_value", "gaussian_nb", "hinge_objective",
    "knn_regress", "linear_svm", "manhattan", "minkowski", "ols_regress", "ridge_regress",
    "tree_classify", "tree_regress",
]
