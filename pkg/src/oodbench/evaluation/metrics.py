"""Confusion counts, MCC and rate metrics, and the with/without-monitor impact."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from .oracle import readout_verdicts

REJECT = -1


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self):
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def count_verdicts(verdicts) -> ConfusionCounts:
    tally = {"TP": 0, "FP": 0, "TN": 0, "FN": 0}
    for v in verdicts:
        tally[v] += 1
    return ConfusionCounts(tally["TP"], tally["FP"], tally["TN"], tally["FN"])


def confusion(readouts):
    """``(specific_counts, overall_counts)`` for a list of readouts."""
    pairs = [readout_verdicts(r) for r in readouts]
    return count_verdicts(p.specific for p in pairs), count_verdicts(p.overall for p in pairs)


def _ratio(num, den):
    return num / den if den else 0.0


def mcc(c: ConfusionCounts) -> float:
    """Matthews correlation coefficient; 0 when any marginal is empty."""
    den = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if den == 0:
        return 0.0
    return (c.tp * c.tn - c.fp * c.fn) / math.sqrt(den)


def rates(c: ConfusionCounts) -> dict:
    pr = _ratio(c.tp, c.tp + c.fp)
    re = _ratio(c.tp, c.tp + c.fn)
    return {
        "fpr": _ratio(c.fp, c.fp + c.tn),
        "fnr": _ratio(c.fn, c.fn + c.tp),
        "precision": pr,
        "recall": re,
        "micro_f1": _ratio(2 * pr * re, pr + re),
    }


def metric_bundle(c: ConfusionCounts) -> dict:
    out = {"mcc": mcc(c)}
    out.update(rates(c))
    out["counts"] = c.to_dict()
    return out


def multiclass_mcc(y_true, y_pred) -> float:
    """K-class MCC (Gorodkin's R_K) over the union of true and predicted labels; 0 if undefined."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    labels, inv = np.unique(np.concatenate([y_true, y_pred]), return_inverse=True)
    n = len(y_true)
    if n == 0:
        return 0.0
    t = np.bincount(inv[:n], minlength=len(labels)).astype(np.float64)
    p = np.bincount(inv[n:], minlength=len(labels)).astype(np.float64)
    c = float(np.sum(y_true == y_pred))
    s = float(n)
    cov_tp = c * s - float(t @ p)
    cov_pp = s * s - float(p @ p)
    cov_tt = s * s - float(t @ t)
    if cov_pp <= 0 or cov_tt <= 0:
        return 0.0
    return cov_tp / math.sqrt(cov_pp * cov_tt)


def sut_outputs(readouts):
    """The SUT's answer per readout: the ML class, or ``REJECT`` when the monitor cancelled it."""
    return [REJECT if r.s_hat else r.y_hat for r in readouts]


def overall_impact(readouts_with_sm, baseline_ml_only) -> dict:
    """MCC of the guarded system against the classifier alone, plus the relative change.

    Both are multi-class MCCs of ``y`` against the delivered answer; a cancelled
    output counts as the extra answer ``REJECT``. ``relative_change`` is None
    when the baseline MCC is 0.
    """
    by_id = {r.instance_id: r for r in baseline_ml_only}
    if set(by_id) != {r.instance_id for r in readouts_with_sm} or len(by_id) != len(readouts_with_sm):
        raise ParameterError("SUT and baseline readouts cover different instance ids")
    base = [by_id[r.instance_id] for r in readouts_with_sm]
    y = [r.y for r in readouts_with_sm]
    mcc_sut = multiclass_mcc(y, sut_outputs(readouts_with_sm))
    mcc_ml = multiclass_mcc([b.y for b in base], [b.y_hat for b in base])
    change = (mcc_sut - mcc_ml) / abs(mcc_ml) if mcc_ml != 0 else None
    return {"mcc_sut": mcc_sut, "mcc_ml": mcc_ml, "relative_change": change}
