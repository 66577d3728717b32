"""Two-dimensional verdicts for one readout: specific OOD detection and overall failure avoidance."""

from __future__ import annotations

from typing import NamedTuple

from ..errors import IntegrityError

TP, FP, TN, FN = "TP", "FP", "TN", "FN"


class VerdictPair(NamedTuple):
    specific: str
    overall: str


def oracle(origin: str, novelty: bool, m_hat: bool, ml_correct: bool) -> VerdictPair:
    """Verdicts for one readout.

    Specific task: an alarm on OOD data is a TP, on ID data an FP; silence is
    FN / TN respectively. Overall task: an alarm is a TP when it cancels a
    wrong ML output and an FP when the output was right; silence is a TN when
    the ML was right and an FN when it was wrong. Novel classes are the
    exception: an alarm is always an overall TP and silence always an overall FN.
    """
    if origin not in ("ID", "OOD"):
        raise IntegrityError(f"unknown origin {origin!r}")
    if novelty and origin != "OOD":
        raise IntegrityError("novelty readout must have origin OOD")
    if origin == "ID":
        specific = FP if m_hat else TN
    else:
        specific = TP if m_hat else FN
    if novelty:
        return VerdictPair(specific, TP if m_hat else FN)
    if m_hat:
        overall = FP if ml_correct else TP
    else:
        overall = TN if ml_correct else FN
    return VerdictPair(specific, overall)


def readout_verdicts(readout) -> VerdictPair:
    return oracle(readout.origin, readout.novelty, readout.m_hat, readout.ml_correct)
