import json

import pytest

from mcdl import synth
from mcdl.baselines.bench import (
    CLASSIFICATION_COLUMNS,
    CLASSIFICATION_ROWS,
    CLASSIFICATION_TITLE,
    NO_LABELS_NOTICE,
    PROPOSED_CLASSIFIER_ROW,
    REGRESSION_COLUMNS,
    REGRESSION_ROWS,
    REGRESSION_TITLE,
    BenchReport,
    BenchRow,
    BenchTable,
    bench,
    format_value,
    render_csv,
)
from mcdl.config import PipelineConfig
from mcdl.ingest import Dataset


@pytest.fixture(scope="module")
def quick():
    cfg = PipelineConfig()
    cfg.network.epochs = 30
    cfg.bench.svm_epochs = 30
    return cfg.validate()


@pytest.mark.parametrize("x,text", [(-0.0123, "-0.0123"), (586.369, "586.369"), (0.43, "0.43"), (0.98, "0.98"), (1.0, "1"), (0.123456, "0.1235")])
def test_format_value(x, text):
    assert format_value(x) == text


def test_markdown_fixture_rows():
    report = BenchReport(
        BenchTable(REGRESSION_TITLE, REGRESSION_COLUMNS, [BenchRow("Proposed MLDM", (-0.0123, 586.369))]),
        BenchTable(CLASSIFICATION_TITLE, CLASSIFICATION_COLUMNS, [BenchRow("Decision tree", (0.43, 0.98))]),
    )
    md = report.to_markdown()
    assert "| Techniques applied | Statistical analysis | Estimation error |" in md
    assert "| Techniques applied | Precision value | Accuracy |" in md
    assert "| Proposed MLDM | -0.0123 | 586.369 |" in md
    assert "| Decision tree | 0.43 | 0.98 |" in md


def test_regression_rows_in_order(quick):
    report = bench(synth.piecewise(n=160, seed=1), quick)
    assert tuple(r.technique for r in report.regression.rows) == REGRESSION_ROWS
    assert report.regression.rows[-1].technique == "Proposed MLDM"
    assert all(r.error is None for r in report.regression.rows)
    assert all(r.values[0] <= 1 and r.values[1] >= 0 for r in report.regression.rows)


def test_classification_rows_in_order(quick):
    report = bench(synth.linear_noise(n=160, seed=2), quick)
    names = tuple(r.technique for r in report.classification.rows)
    assert names[:4] == CLASSIFICATION_ROWS
    assert names[4] == PROPOSED_CLASSIFIER_ROW
    for r in report.classification.rows:
        assert r.error is None
        assert 0 <= r.values[0] <= 1 and 0 <= r.values[1] <= 1


def test_no_labels_gives_notice(quick):
    d = synth.linear_noise(n=120, seed=3)
    report = bench(Dataset(d.rows, d.targets, d.feature_names), quick)
    assert report.classification is None
    assert report.notice == NO_LABELS_NOTICE
    assert NO_LABELS_NOTICE in report.to_markdown()
    assert json.loads(report.to_json())["categorical"] is None


def test_failed_model_is_annotated_not_fatal(quick):
    # collinear features: OLS is singular, the rest still run
    d = synth.linear_noise(n=100, d=1, seed=4)
    rows = d.rows.repeat(2, axis=1)
    report = bench(Dataset(rows, d.targets, ("a", "b"), d.labels), quick)
    by_name = {r.technique: r for r in report.regression.rows}
    assert "SingularSystemError" in by_name["Linear Regression"].error
    assert by_name["Ridge"].error is None
    assert "error: SingularSystemError" in report.to_markdown()


def test_multiclass_proposed_row_errors(quick):
    data, _ = synth.blobs(n_per_blob=30, n_blobs=3, seed=0)
    report = bench(data, quick)
    last = report.classification.rows[-1]
    assert last.technique == PROPOSED_CLASSIFIER_ROW and "binary" in last.error


def test_csv_and_json_shapes():
    report = BenchReport(BenchTable(REGRESSION_TITLE, REGRESSION_COLUMNS, [BenchRow("KNN", (-5.432, 1.5))]))
    lines = render_csv(report).splitlines()
    assert lines[0].startswith("table,Techniques applied")
    assert lines[1] == "numerical,KNN,Statistical analysis,-5.432,Estimation error,1.5,"
    doc = json.loads(report.to_json())
    assert doc["numerical"]["rows"][0] == {"Techniques applied": "KNN", "Statistical analysis": -5.432, "Estimation error": 1.5}
