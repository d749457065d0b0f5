import json
import os
from pathlib import Path

import pytest

import abrlab

LADDER = [235.0, 500.0, 1500.0, 3000.0]


def test_cbr_fixed_point_has_no_rebuffers():
    m = abrlab.generate_vbr_manifest([1000.0, 2000.0], 50, 4.0, 0.0, 1)
    t = abrlab.constant_trace(1000.0, 1000.0)
    log = abrlab.simulate(m, t, "rmin_always")
    metrics = abrlab.compute_metrics(log, m)
    assert metrics["rebuffer_count"] == 0
    assert metrics["chunks"] == 50
    ends = [e for e in log.events if e.kind == "DownloadEnd"]
    assert all(e.buffer_s == pytest.approx(4.0) for e in ends)


def test_sticky_rule_examples():
    rates = [235.0, 500.0, 1000.0]
    assert abrlab.sticky_rate_choice(rates, 1, 1200.0) == 2
    assert abrlab.sticky_rate_choice(rates, 1, 235.0) == 1


def test_capacity_inverse_roundtrip():
    t = abrlab.trace_from_points([(0.0, 1000.0), (10.0, 500.0)], float("inf"))
    end = abrlab.invert_capacity(t, 2.0, 9000.0)
    assert end == pytest.approx(12.0)
    assert abrlab.capacity_integral(t, 2.0, end) == pytest.approx(9000.0)


def test_reservoir_is_floor_for_cbr():
    m = abrlab.generate_vbr_manifest(LADDER, 200, 4.0, 0.0, 1)
    assert abrlab.compute_reservoir(m) == 8.0


def test_unknown_algorithm_raises_value_error():
    m = abrlab.generate_vbr_manifest(LADDER, 10, 4.0, 0.0, 1)
    t = abrlab.constant_trace(1000.0, 600.0)
    with pytest.raises(ValueError):
        abrlab.simulate(m, t, "nope")


def test_config_yaml_is_applied():
    m = abrlab.generate_vbr_manifest(LADDER, 100, 4.0, 0.0, 1)
    t = abrlab.constant_trace(20000.0, 3600.0)
    log = abrlab.simulate(m, t, "bba1", "buffer_capacity_s: 160\nreservoir_max_s: 60\n")
    assert max(e.buffer_s for e in log.events) <= 160.0


def test_cli_run_writes_artifacts(tmp_path: Path):
    fixtures = Path(os.environ["ABRLAB_FIXTURES_DIR"])
    out = tmp_path / "run"
    code = abrlab.run_cli([
        "run",
        "--manifest", str(fixtures / "manifest_vbr.json"),
        "--trace", str(fixtures / "trace_outage.csv"),
        "--abr", "bba2",
        "--out", str(out),
    ])
    assert code == 0
    log = json.loads((out / "session.log.json").read_text())
    assert log["algorithm"] == "bba2"
    header = (out / "timeseries.csv").read_text().splitlines()[0]
    assert header == "time_s,buffer_s,rate_kbps"
    assert "rebuffers_per_playhour" in json.loads((out / "metrics.json").read_text())


def test_cli_bad_algorithm_exit_code(tmp_path: Path):
    fixtures = Path(os.environ["ABRLAB_FIXTURES_DIR"])
    code = abrlab.run_cli([
        "run",
        "--manifest", str(fixtures / "manifest_vbr.json"),
        "--trace", str(fixtures / "trace_outage.csv"),
        "--abr", "nope",
        "--out", str(tmp_path),
    ])
    assert code == 1
