import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcdl.mcdm import IncrementalAgentGraph, rank
from mcdl.pipeline import bundle_checksum, bundle_files, decision_values, fit_pipeline
from mcdl.stream import (
    ColdWindowError,
    LatencyReport,
    SlidingWindow,
    SnapshotError,
    SnapshotStore,
    SpeedLayer,
    StreamError,
    StreamRecord,
    batch_layer_run,
    latency_csv,
    read_replay,
    run_latency_experiment,
    speed_layer_score,
    synthetic_stream,
    write_replay,
)
from oracles import population_stats


def zero_work(model, window, x):
    return 0.0


def test_window_hand_values():
    w = SlidingWindow(3, 1)
    for v in (1.0, 2.0, 3.0):
        w.update(np.array([v]))
    assert w.mean[0] == 2.0
    assert w.delta[0] == pytest.approx(0.816496580927726, abs=1e-15)
    w.update(np.array([4.0]))
    np.testing.assert_array_equal(w.buffer()[:, 0], [2, 3, 4])
    assert w.mean[0] == 3.0


def test_window_constant_flag():
    w = SlidingWindow(4, 2)
    for _ in range(4):
        w.update(np.array([0.1, 7.0]))
    assert list(w.constant) == [True, True]
    assert list(w.delta) == [0.0, 0.0]
    np.testing.assert_array_equal(w.normalize(np.array([1.0, 2.0])), [1.0, 2.0])


def test_window_errors():
    w = SlidingWindow(4, 2, min_fill=2)
    with pytest.raises(StreamError):
        w.update(np.zeros(3))
    with pytest.raises(ColdWindowError):
        _ = w.mean
    with pytest.raises(StreamError):
        SlidingWindow(2, 1, min_fill=3)


@given(
    st.integers(1, 12),
    st.lists(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=2), min_size=1, max_size=80),
)
def test_window_matches_recompute_after_every_update(capacity, stream):
    w = SlidingWindow(capacity, 2)
    seen = []
    for row in stream:
        w.update(np.array(row))
        seen.append(row)
        mean, delta = population_stats(seen[-capacity:])
        np.testing.assert_allclose(w.mean, mean, rtol=1e-12, atol=1e-9)
        np.testing.assert_allclose(w.delta, delta, rtol=1e-12, atol=1e-9)


def test_window_survives_catastrophic_magnitudes():
    # a float running sum would be left holding 1e16's rounding residue
    w = SlidingWindow(2, 1)
    for v in (1e16, 1.0, 2.0, 3.0):
        w.update(np.array([v]))
    assert w.mean[0] == 2.5 and w.delta[0] == 0.5


def test_batch_layer_determinism_and_versions(blob_data, fast_config):
    store = SnapshotStore()
    with pytest.raises(SnapshotError):
        _ = store.current
    a = batch_layer_run(store, blob_data[0], fast_config)
    b = batch_layer_run(store, blob_data[0], fast_config)
    assert (a.version, b.version, store.version) == (1, 2, 2)
    assert a.checksum == b.checksum
    assert bundle_files(a.model) == bundle_files(b.model)
    with pytest.raises(StreamError):
        batch_layer_run(store, blob_data[0].take(range(5)), fast_config)


def test_no_torn_reads(blob_data, fast_config):
    data = blob_data[0]
    models = [fit_pipeline(data.take(range(i, len(data))), fast_config) for i in range(3)]
    expected = {id(m): bundle_checksum(m) for m in models}
    store = SnapshotStore()
    store.publish(models[0])
    stop = threading.Event()
    problems = []

    def reader():
        last = 0
        while not stop.is_set():
            snap = store.current
            if snap.checksum != expected[id(snap.model)] or snap.version < last:
                problems.append(snap.version)
            last = snap.version

    threads = [threading.Thread(target=reader) for _ in range(3)]
    for t in threads:
        t.start()
    for i in range(30):
        store.publish(models[i % 3])
    stop.set()
    for t in threads:
        t.join()
    assert not problems and store.version == 31


def test_online_equals_offline_for_training_rows(blob_data, blob_model):
    data = blob_data[0]
    window = SlidingWindow(len(data), data.dim)
    for row in data.rows:
        window.update(row)
    store = SnapshotStore()
    snap = store.publish(blob_model)
    offline = decision_values(blob_model, data.rows)
    for i in range(0, len(data), 7):
        dv, _ = speed_layer_score(StreamRecord(i, 0.0, data.rows[i]), snap, window)
        assert dv == pytest.approx(offline[i], abs=1e-9)


def test_speed_layer_preconditions(blob_model):
    w = SlidingWindow(8, 2, min_fill=4)
    rec = StreamRecord(0, 0.0, np.zeros(2))
    with pytest.raises(SnapshotError):
        speed_layer_score(rec, None, w)
    with pytest.raises(ColdWindowError):
        speed_layer_score(rec, SnapshotStore().publish(blob_model), w)
    store = SnapshotStore()
    store.publish(blob_model)
    layer = SpeedLayer(store, w, IncrementalAgentGraph(3))
    for i in range(3):
        with pytest.raises(ColdWindowError):
            layer.process(StreamRecord(i, i, np.zeros(2)))
    layer.process(StreamRecord(3, 3.0, np.ones(2)))
    with pytest.raises(StreamError, match="sequence"):
        layer.process(StreamRecord(3, 4.0, np.ones(2)))


def test_speed_layer_ranking_matches_full_recompute(blob_model):
    store = SnapshotStore()
    store.publish(blob_model)
    warm, records = synthetic_stream(blob_model, 100, seed=1, warmup=32)
    w = SlidingWindow(64, blob_model.dim, min_fill=16)
    for row in warm:
        w.update(row)
    layer = SpeedLayer(store, w, IncrementalAgentGraph(5, weighting="mutual"))
    for r in records:
        out = layer.process(r)
        full = rank(layer.graph.to_agent_graph(), "mutual")
        assert layer.graph.ranking().order == full.order
        assert out.delta.position == full.position(r.sequence_id)
        assert out.snapshot_version == 1


def test_replay_roundtrip(tmp_path, blob_model):
    _, recs = synthetic_stream(blob_model, 25, seed=3)
    write_replay(tmp_path / "r.csv", recs, blob_model.feature_names)
    back, names = read_replay(tmp_path / "r.csv")
    assert names == blob_model.feature_names
    assert [r.sequence_id for r in back] == [r.sequence_id for r in recs]
    np.testing.assert_array_equal(np.stack([r.features for r in back]), np.stack([r.features for r in recs]))
    (tmp_path / "bad.csv").write_text("sequence_id,timestamp,x1,x2\n2,0,1,1\n1,1,1,1\n")
    with pytest.raises(StreamError, match="monotone"):
        read_replay(tmp_path / "bad.csv")


def test_stream_is_seeded(blob_model):
    a = synthetic_stream(blob_model, 50, seed=9, warmup=10)
    b = synthetic_stream(blob_model, 50, seed=9, warmup=10)
    np.testing.assert_array_equal(a[0], b[0])
    assert all(np.array_equal(x.features, y.features) for x, y in zip(a[1], b[1]))


def test_zero_work_scorer_is_all_mcdm(blob_model):
    store = SnapshotStore()
    store.publish(blob_model)
    with pytest.warns(UserWarning, match="unstable"):
        reports = run_latency_experiment(store, records=400, workers=(1, 2), repetitions=1, window=64, min_fill=8, scorer=zero_work)
    for r in reports:
        assert r.overhead_pct > 90.0


def test_report_invariants_and_csv(blob_model):
    store = SnapshotStore()
    store.publish(blob_model)
    with pytest.warns(UserWarning):
        reports = run_latency_experiment(store, records=300, workers=(1, 3), repetitions=2, window=32, min_fill=8)
    assert [r.workers for r in reports] == [1, 3]
    for r in reports:
        assert 0 <= r.overhead_pct <= 100
        assert r.p50_us <= r.p95_us <= r.p99_us
        assert r.paper_reference_overhead_pct == 4.9
        assert "throughput_us" in r.to_dict()["measured"]
    lines = latency_csv(reports).splitlines()
    assert lines[0] == "workers,p50_us,p95_us,p99_us,overhead_pct"
    assert [l.split(",")[0] for l in lines[1:]] == ["1", "3"]


def test_latency_report_dict_marks_measurements():
    r = LatencyReport(1, 10, 1, 1.0, 1.0, 50.0, 1.0, 2.0, 3.0, 2.5)
    d = r.to_dict()
    assert d["paper_reference_overhead_pct"] == 4.9
    assert set(d["measured"]) <= set(d)
