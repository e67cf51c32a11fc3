import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mcdl import synth
from mcdl.config import PipelineConfig

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "failed": [], "ran": 0, "details": []})
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        entry["ran"] += 1
        if rep.outcome != "passed":
            entry["failed"].append(item.name)
        entry["details"] += [v for k, v in item.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[number]
        status = "FAIL" if e["failed"] or not e["ran"] else "PASS"
        detail = f"  ({', '.join(e['failed'])})" if e["failed"] else ""
        tr.write_line(f"criterion {number:>2} {status}  {e['title']}{detail}")
        for line in e["details"]:
            tr.write_line(f"      {line}")


@pytest.fixture(scope="session")
def blob_data():
    data, blob = synth.blobs(n_per_blob=50, n_blobs=4, seed=0)
    return data, blob


@pytest.fixture(scope="session")
def fast_config():
    cfg = PipelineConfig()
    cfg.network.epochs = 100
    return cfg.validate()


@pytest.fixture(scope="session")
def blob_model(blob_data, fast_config):
    from mcdl.pipeline import fit_pipeline

    return fit_pipeline(blob_data[0], fast_config)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
