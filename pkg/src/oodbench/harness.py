"""System-under-test runner: stream a benchmark through classifier + monitor.

Per instance, three regions are timed with ``time.perf_counter``: the forward
pass alone (``ml_time_s``), the monitor's ``detect`` call alone
(``sm_time_s``), and the whole step including readout construction
(``sut_time_s``). The first instance is processed once as a discarded warm-up.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .nn import forward

CSV_HEADER = [
    "instance_id",
    "origin",
    "variation",
    "novelty",
    "y",
    "y_hat",
    "confidence",
    "m_hat",
    "s_hat",
    "ml_time_s",
    "sm_time_s",
]
TIMING_COLUMNS = ("ml_time_s", "sm_time_s")


@dataclass
class Readout:
    instance_id: str
    origin: str
    variation: str
    novelty: bool
    y: int
    y_hat: int
    confidence: float
    m_hat: bool
    s_hat: bool
    ml_time_s: float = 0.0
    sm_time_s: float = 0.0
    # not part of the CSV; kept in memory for the resource report
    sut_time_s: float = 0.0

    @property
    def ml_correct(self) -> bool:
        return self.y == self.y_hat


def invalidate_on_alarm(m_hat: bool) -> bool:
    """Reaction policy: an alarm cancels the ML output."""
    return bool(m_hat)


def _step(net, monitor, inst, policy):
    clock = time.perf_counter
    t0 = clock()
    trace = forward(net, inst.image)
    t1 = clock()
    m_hat = bool(monitor.detect(net, inst.image, trace))
    t2 = clock()
    r = Readout(
        instance_id=inst.id,
        origin=inst.origin,
        variation=inst.variation,
        novelty=bool(inst.novelty),
        y=int(inst.label),
        y_hat=trace.prediction,
        confidence=trace.confidence,
        m_hat=m_hat,
        s_hat=policy(m_hat),
        ml_time_s=t1 - t0,
        sm_time_s=t2 - t1,
    )
    r.sut_time_s = clock() - t0
    return r


def run_stream(net, monitor, benchmark, policy=invalidate_on_alarm, warmup: bool = True):
    """Process ``benchmark`` one instance at a time, in stream order."""
    if not monitor.fitted:
        raise ParameterError(f"monitor {monitor.name!r} is not fitted")
    instances = benchmark.instances if hasattr(benchmark, "instances") else list(benchmark)
    if not instances:
        raise ParameterError("benchmark is empty")
    readouts = []
    if warmup:
        try:
            _step(net, monitor, instances[0], policy)
        except ShapeError as exc:
            raise ShapeError(f"instance {instances[0].id}: {exc}") from exc
    for inst in instances:
        try:
            readouts.append(_step(net, monitor, inst, policy))
        except ShapeError as exc:
            raise ShapeError(f"instance {inst.id}: {exc}") from exc
    return readouts


@dataclass
class ResourceReport:
    n: int
    ml_time_mean: float
    sm_time_mean: float
    sut_time_mean: float
    ml_time_p50: float
    ml_time_p95: float
    sm_time_p50: float
    sm_time_p95: float
    sut_time_p50: float
    sut_time_p95: float
    ml_bytes: int
    sm_bytes: int

    @property
    def ml_share(self) -> float:
        return 100.0 * self.ml_time_mean / self.sut_time_mean if self.sut_time_mean > 0 else 0.0

    @property
    def sm_share(self) -> float:
        return 100.0 * self.sm_time_mean / self.sut_time_mean if self.sut_time_mean > 0 else 0.0

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["ml_share_pct"] = self.ml_share
        d["sm_share_pct"] = self.sm_share
        d["ml_mb"] = self.ml_bytes / 1e6
        d["sm_mb"] = self.sm_bytes / 1e6
        return d

    def time_row(self) -> str:
        """One line in the per-instance time table layout: ML (share) | SM (share) | SUT."""
        return (
            f"{self.ml_time_mean:.4f} ({self.ml_share:.1f}%) | "
            f"{self.sm_time_mean:.4f} ({self.sm_share:.1f}%) | {self.sut_time_mean:.4f}"
        )


def measure_resources(readouts, ml_bytes: int = 0, sm_bytes: int = 0) -> ResourceReport:
    """Mean and p50/p95 of the per-instance times; sizes are serialized checkpoint bytes."""
    if not readouts:
        raise ParameterError("resource report needs at least one readout")
    ml = np.array([r.ml_time_s for r in readouts])
    sm = np.array([r.sm_time_s for r in readouts])
    sut = np.array([max(r.sut_time_s, r.ml_time_s + r.sm_time_s) for r in readouts])
    return ResourceReport(
        n=len(readouts),
        ml_time_mean=float(ml.mean()),
        sm_time_mean=float(sm.mean()),
        sut_time_mean=float(sut.mean()),
        ml_time_p50=float(np.percentile(ml, 50)),
        ml_time_p95=float(np.percentile(ml, 95)),
        sm_time_p50=float(np.percentile(sm, 50)),
        sm_time_p95=float(np.percentile(sm, 95)),
        sut_time_p50=float(np.percentile(sut, 50)),
        sut_time_p95=float(np.percentile(sut, 95)),
        ml_bytes=int(ml_bytes),
        sm_bytes=int(sm_bytes),
    )


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def readouts_to_csv(readouts) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in readouts:
        w.writerow(
            [
                r.instance_id,
                r.origin,
                r.variation,
                int(r.novelty),
                r.y,
                r.y_hat,
                _fmt(r.confidence),
                int(r.m_hat),
                int(r.s_hat),
                _fmt(r.ml_time_s),
                _fmt(r.sm_time_s),
            ]
        )
    return buf.getvalue()


def write_readouts(path, readouts):
    with open(path, "w", newline="") as fh:
        fh.write(readouts_to_csv(readouts))


def read_readouts(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected readout header {header}")
        out = []
        for row in reader:
            rec = dict(zip(header, row))
            out.append(
                Readout(
                    instance_id=rec["instance_id"],
                    origin=rec["origin"],
                    variation=rec["variation"],
                    novelty=rec["novelty"] == "1",
                    y=int(rec["y"]),
                    y_hat=int(rec["y_hat"]),
                    confidence=float(rec["confidence"]),
                    m_hat=rec["m_hat"] == "1",
                    s_hat=rec["s_hat"] == "1",
                    ml_time_s=float(rec["ml_time_s"]),
                    sm_time_s=float(rec["sm_time_s"]),
                )
            )
    return out
