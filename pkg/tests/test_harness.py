import csv
import io

import numpy as np
import pytest

from oodbench.datasets import assemble_benchmark, from_arrays, novelty_instances
from oodbench.errors import ParameterError, ShapeError
from oodbench.harness import (
    CSV_HEADER,
    Readout,
    measure_resources,
    read_readouts,
    readouts_to_csv,
    run_stream,
    write_readouts,
)
from oodbench.monitors import make_monitor
from oodbench.monitors.base import Monitor


@pytest.fixture(scope="module")
def bench(tiny_shapes):
    x, y = tiny_shapes[2][:30], tiny_shapes[3][:30]
    nov = novelty_instances(1.0 - x[:10], np.arange(10) % 3, 10, "inv")
    return assemble_benchmark(from_arrays(x, y, "h"), nov, seed=2, name="b")


class CountingMonitor(Monitor):
    kind = "counting"

    def __init__(self):
        super().__init__()
        self.calls = []

    def detect(self, net, x, trace):
        self.calls.append(trace.prediction)
        return trace.prediction % 2 == 0


def test_exact_csv_header():
    assert ",".join(CSV_HEADER) == "instance_id,origin,variation,novelty,y,y_hat,confidence,m_hat,s_hat,ml_time_s,sm_time_s"


def test_never_and_always_stubs(tiny_net, bench):
    never = run_stream(tiny_net, make_monitor("never").fit(None, None, None), bench)
    always = run_stream(tiny_net, make_monitor("always").fit(None, None, None), bench)
    assert len(never) == len(always) == len(bench)
    assert not any(r.m_hat or r.s_hat for r in never)
    assert all(r.m_hat and r.s_hat for r in always)


def test_stream_order_and_readout_fields(tiny_net, bench):
    out = run_stream(tiny_net, make_monitor("never").fit(None, None, None), bench)
    assert [r.instance_id for r in out] == [i.id for i in bench.instances]
    for r, inst in zip(out, bench.instances):
        assert (r.origin, r.variation, r.novelty, r.y) == (inst.origin, inst.variation, inst.novelty, inst.label)
        logits = tiny_net.predict_logits(inst.image[None])[0]
        assert r.y_hat == int(np.argmax(logits))
        assert r.ml_time_s >= 0 and r.sm_time_s >= 0
        assert r.sut_time_s >= r.ml_time_s + r.sm_time_s


def test_warmup_is_discarded(tiny_net, bench):
    mon = CountingMonitor().fit(None, None, None)
    out = run_stream(tiny_net, mon, bench)
    assert len(mon.calls) == len(bench) + 1
    assert len(out) == len(bench)
    assert all(r.s_hat == r.m_hat == (r.y_hat % 2 == 0) for r in out)


def test_shape_mismatch_names_instance(tiny_net):
    bad = assemble_benchmark(from_arrays(np.zeros((2, 1, 5, 5)), [0, 1], "odd"), [], seed=0)
    with pytest.raises(ShapeError, match="odd-00000"):
        run_stream(tiny_net, make_monitor("never").fit(None, None, None), bad)


def test_preconditions(tiny_net, bench):
    with pytest.raises(ParameterError):
        run_stream(tiny_net, make_monitor("never"), bench)
    with pytest.raises(ParameterError):
        run_stream(tiny_net, make_monitor("never").fit(None, None, None), [])
    with pytest.raises(ParameterError):
        measure_resources([])


def _r(ml, sm, sut):
    r = Readout("i", "ID", "none", False, 0, 0, 1.0, False, False, ml, sm)
    r.sut_time_s = sut
    return r


def test_share_breakdown_reproduces_reference_row():
    rep = measure_resources([_r(0.007, 0.2217, 0.2288)], ml_bytes=10, sm_bytes=2_500_000)
    # the reference row quotes 96.8%, computed before its times were rounded; the rounded ones give 96.90%
    assert rep.sm_share == pytest.approx(96.8, abs=0.15)
    assert rep.ml_share == pytest.approx(100 * 0.007 / 0.2288)
    assert rep.time_row() == "0.0070 (3.1%) | 0.2217 (96.9%) | 0.2288"
    d = rep.to_dict()
    assert d["sm_mb"] == 2.5 and d["ml_bytes"] == 10


def test_percentiles():
    rs = [_r(t, 2 * t, 3 * t) for t in np.linspace(0.001, 0.1, 100)]
    rep = measure_resources(rs)
    ml = np.linspace(0.001, 0.1, 100)
    assert rep.ml_time_p50 == pytest.approx(np.percentile(ml, 50))
    assert rep.sm_time_p95 == pytest.approx(np.percentile(2 * ml, 95))
    assert rep.sut_time_mean == pytest.approx(3 * ml.mean())


def test_sut_time_never_below_parts():
    rep = measure_resources([_r(0.002, 0.003, 0.001)])
    assert rep.sut_time_mean == pytest.approx(0.005)


def test_sleep_stub_timing(tiny_net, bench):
    mon = make_monitor("sleep", seconds=0.001).fit(None, None, None)
    rep = measure_resources(run_stream(tiny_net, mon, bench))
    assert 0.001 <= rep.sm_time_mean <= 0.003


def test_csv_format_and_roundtrip(tmp_path, tiny_net, bench):
    out = run_stream(tiny_net, make_monitor("random", seed=1).fit(None, None, None), bench)
    path = tmp_path / "r.csv"
    write_readouts(path, out)
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0] == CSV_HEADER
    assert len(rows) == len(bench) + 1
    for row, r in zip(rows[1:], out):
        assert row[3] in ("0", "1") and row[7] in ("0", "1") and row[8] in ("0", "1")
        assert row[6] == f"{r.confidence:.9g}"
    back = read_readouts(path)
    assert [(b.instance_id, b.y, b.y_hat, b.m_hat, b.s_hat, b.novelty) for b in back] == [
        (r.instance_id, r.y, r.y_hat, r.m_hat, r.s_hat, r.novelty) for r in out
    ]
    assert readouts_to_csv(back).splitlines()[1:] == path.read_text().splitlines()[1:]


def test_csv_header_mismatch_rejected(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_readouts(p)
