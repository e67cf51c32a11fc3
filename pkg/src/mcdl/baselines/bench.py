"""Benchmark harness: every baseline plus the proposed pipeline on one split.

Row order and column names follow the two comparison tables (numerical and
categorical). A model that fails yields an error-annotated row.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..config import PipelineConfig
from ..ingest import Dataset, NormParams, split
from .bayes import BernoulliNB, GaussianNB
from .knn import KnnRegressor
from .linear import fit_linear
from .metrics import evaluate_classification, evaluate_regression
from .svm import LinearSVM
from .tree import DecisionTree

REGRESSION_TITLE = "Numerical Prediction accuracy for the fields estimated"
CLASSIFICATION_TITLE = "Categorical Prediction accuracy for the fields estimated"
REGRESSION_COLUMNS = ("Statistical analysis", "Estimation error")
CLASSIFICATION_COLUMNS = ("Precision value", "Accuracy")
TECHNIQUE_COLUMN = "Techniques applied"
REGRESSION_ROWS = ("Decision tree", "KNN", "Ridge", "Linear Regression", "Proposed MLDM")
CLASSIFICATION_ROWS = (
    "Gaussiandistribution",
    "Bernoulis approximation",
    "Decision tree",
    "Support vector machine (SVM)",
)
PROPOSED_CLASSIFIER_ROW = "Proposed MLDM (extension)"
NO_LABELS_NOTICE = "Categorical table omitted: dataset has no label column."


@dataclass
class BenchRow:
    technique: str
    values: tuple[float, ...] | None = None
    error: str | None = None
    note: str | None = None


@dataclass
class BenchTable:
    title: str
    columns: tuple[str, ...]
    rows: list[BenchRow] = field(default_factory=list)


@dataclass
class BenchReport:
    regression: BenchTable
    classification: BenchTable | None = None
    notice: str | None = None

    def to_markdown(self) -> str:
        return render_markdown(self)

    def to_csv(self) -> str:
        return render_csv(self)

    def to_json(self) -> str:
        return render_json(self)


def format_value(x: float) -> str:
    """Up to four decimals, trailing zeros dropped (-0.0123, 586.369, 0.98)."""
    if not math.isfinite(x):
        return str(x)
    return "{:.10g}".format(round(x, 4))


def _cell_values(row: BenchRow, n: int) -> list[str]:
    if row.values is None:
        return [f"error: {row.error}"] + [""] * (n - 1) if row.error else ["n/a"] * n
    return [format_value(v) for v in row.values]


def render_markdown(report: BenchReport) -> str:
    out = []
    tables = [report.regression] + ([report.classification] if report.classification else [])
    for table in tables:
        out.append(f"### {table.title}\n")
        out.append("| " + " | ".join((TECHNIQUE_COLUMN,) + table.columns) + " |")
        out.append("|" + "---|" * (len(table.columns) + 1))
        for row in table.rows:
            cells = _cell_values(row, len(table.columns))
            name = row.technique + (f" ({row.note})" if row.note and row.values is None else "")
            out.append("| " + " | ".join([name] + cells) + " |")
        out.append("")
    if report.notice:
        out.append(f"> {report.notice}\n")
    return "\n".join(out)


def render_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", TECHNIQUE_COLUMN, "metric_1_name", "metric_1", "metric_2_name", "metric_2", "error"])
    tables = [("numerical", report.regression)]
    if report.classification:
        tables.append(("categorical", report.classification))
    for key, table in tables:
        for row in table.rows:
            vals = [format_value(v) for v in row.values] if row.values else ["", ""]
            w.writerow([key, row.technique, table.columns[0], vals[0], table.columns[1], vals[1], row.error or ""])
    return buf.getvalue()


def render_json(report: BenchReport) -> str:
    def table(t: BenchTable | None):
        if t is None:
            return None
        return {
            "title": t.title,
            "columns": [TECHNIQUE_COLUMN, *t.columns],
            "rows": [
                {
                    TECHNIQUE_COLUMN: r.technique,
                    **({c: v for c, v in zip(t.columns, r.values)} if r.values else {}),
                    **({"error": r.error} if r.error else {}),
                    **({"note": r.note} if r.note else {}),
                }
                for r in t.rows
            ],
        }

    return json.dumps(
        {"numerical": table(report.regression), "categorical": table(report.classification), "notice": report.notice},
        indent=1,
    ) + "\n"


def _row(name: str, fn: Callable[[], tuple[float, ...]], note: str | None = None) -> BenchRow:
    try:
        return BenchRow(name, tuple(float(v) for v in fn()), note=note)
    except Exception as exc:  # a failed model must not sink the run
        return BenchRow(name, error=f"{type(exc).__name__}: {exc}", note=note)


def bench(data: Dataset, config: PipelineConfig | None = None) -> BenchReport:
    """Train every technique on the train split and score it on the test split.

    Features are z-scored with train-split statistics before fitting the
    baselines; the proposed pipeline normalizes internally.
    """
    from ..pipeline import decision_values, fit_pipeline, predict_targets

    config = (config or PipelineConfig()).validate()
    b = config.bench
    train, test = split(data, b.test_fraction, config.seed)
    norm = NormParams.fit(train.rows)
    Xtr, Xte = norm.apply(train.rows), norm.apply(test.rows)
    ytr, yte = train.targets, test.targets

    def reg(model_fn):
        def run():
            m = evaluate_regression(model_fn(), yte)
            return m.score, m.estimation_error
        return run

    regression = BenchTable(REGRESSION_TITLE, REGRESSION_COLUMNS, [
        _row("Decision tree", reg(lambda: DecisionTree("regression", b.tree_max_depth, b.tree_min_leaf).fit(Xtr, ytr).predict(Xte))),
        _row("KNN", reg(lambda: KnnRegressor(b.knn_k, b.knn_metric, b.minkowski_p).fit(train.with_rows(Xtr)).predict(Xte))),
        _row("Ridge", reg(lambda: fit_linear(Xtr, ytr, b.ridge_lambda).predict(Xte))),
        _row("Linear Regression", reg(lambda: fit_linear(Xtr, ytr, 0.0).predict(Xte))),
        _row("Proposed MLDM", reg(lambda: predict_targets(fit_pipeline(train, config), test.rows))),
    ])

    if data.labels is None:
        return BenchReport(regression, None, NO_LABELS_NOTICE)

    ltr, lte = train.labels, test.labels

    def clf(model_fn):
        def run():
            m = evaluate_classification(model_fn(), lte)
            return m.precision, m.accuracy
        return run

    def proposed_classifier():
        classes = np.unique(ltr)
        if len(classes) != 2:
            raise ValueError("binary label tasks only")
        positive = classes[1]
        as_target = Dataset(train.rows, (ltr == positive).astype(float), train.feature_names, ltr, "is_" + str(positive))
        model = fit_pipeline(as_target, config)
        # threshold halfway between the two indicator values
        threshold = (0.5 - model.target_params.mean[0]) / model.target_params.delta[0]
        return np.where(decision_values(model, test.rows) > threshold, positive, classes[0])

    classification = BenchTable(CLASSIFICATION_TITLE, CLASSIFICATION_COLUMNS, [
        _row("Gaussiandistribution", clf(lambda: GaussianNB().fit(Xtr, ltr).predict(Xte))),
        _row("Bernoulis approximation", clf(lambda: BernoulliNB(b.nb_threshold).fit(Xtr, ltr).predict(Xte))),
        _row("Decision tree", clf(lambda: DecisionTree("classification", b.tree_max_depth, b.tree_min_leaf).fit(Xtr, ltr).predict(Xte))),
        _row("Support vector machine (SVM)", clf(lambda: LinearSVM(b.svm_lr, b.svm_epochs, b.svm_c, seed=config.seed).fit(Xtr, ltr).predict(Xte))),
        _row(PROPOSED_CLASSIFIER_ROW, clf(proposed_classifier), note="decision value thresholded; binary tasks only"),
    ])
    return BenchReport(regression, classification)
