"""MetricReport assembly, schema and plain-text tables."""

from __future__ import annotations

import math
from dataclasses import replace

import jsonschema
import numpy as np

from .cd_diagram import cd_diagram
from .metrics import confusion, metric_bundle, overall_impact
from .stats import NEMENYI_Q05, RankMatrix, friedman, nemenyi_cd

_METRICS = {
    "type": "object",
    "required": ["mcc", "fpr", "fnr", "precision", "recall", "micro_f1", "counts"],
    "properties": {
        "mcc": {"type": "number", "minimum": -1, "maximum": 1},
        "fpr": {"type": "number", "minimum": 0, "maximum": 1},
        "fnr": {"type": "number", "minimum": 0, "maximum": 1},
        "precision": {"type": "number", "minimum": 0, "maximum": 1},
        "recall": {"type": "number", "minimum": 0, "maximum": 1},
        "micro_f1": {"type": "number", "minimum": 0, "maximum": 1},
        "counts": {
            "type": "object",
            "required": ["tp", "fp", "tn", "fn"],
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
    },
}

_IMPACT = {
    "type": "object",
    "required": ["mcc_sut", "mcc_ml", "relative_change"],
    "properties": {
        "mcc_sut": {"type": "number"},
        "mcc_ml": {"type": "number"},
        "relative_change": {"type": ["number", "null"]},
    },
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["config_hash", "benchmarks", "cross"],
    "properties": {
        "config_hash": {"type": "string"},
        "benchmarks": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": {
                    "type": "object",
                    "required": ["specific", "overall", "impact", "impact_id", "n", "resources"],
                    "properties": {
                        "specific": _METRICS,
                        "overall": _METRICS,
                        "impact": _IMPACT,
                        "impact_id": _IMPACT,
                        "n": {"type": "integer", "minimum": 1},
                        "resources": {"type": "object"},
                    },
                },
            },
        },
        "cross": {
            "type": ["object", "null"],
            "required": ["methods", "benchmarks", "mcc", "mean_ranks", "chi2_F", "df", "p", "cd", "groups"],
            "properties": {
                "methods": {"type": "array", "items": {"type": "string"}},
                "benchmarks": {"type": "array", "items": {"type": "string"}},
                "mcc": {"type": "array"},
                "mean_ranks": {"type": "object", "additionalProperties": {"type": "number"}},
                "chi2_F": {"type": "number", "minimum": 0},
                "df": {"type": "integer"},
                "p": {"type": "number", "minimum": 0, "maximum": 1},
                "cd": {"type": ["number", "null"]},
                "groups": {"type": "array"},
            },
        },
    },
}


def validate_report(report: dict):
    jsonschema.validate(report, REPORT_SCHEMA)


def benchmark_entry(readouts, resources: dict | None = None) -> dict:
    specific, overall = confusion(readouts)
    id_only = [r for r in readouts if r.origin == "ID"]
    return {
        "n": len(readouts),
        "specific": metric_bundle(specific),
        "overall": metric_bundle(overall),
        # the baseline is the same stream with every alarm ignored
        "impact": overall_impact(readouts, readouts_without_monitor(readouts)),
        "impact_id": overall_impact(id_only, readouts_without_monitor(id_only))
        if id_only
        else {"mcc_sut": 0.0, "mcc_ml": 0.0, "relative_change": None},
        "resources": resources or {},
    }


def readouts_without_monitor(readouts):
    return [replace(r, m_hat=False, s_hat=False) for r in readouts]


def cross_benchmark(entries: dict, control: set = frozenset()):
    """Friedman/Nemenyi over specific-task MCC; ``entries[bench][monitor]``."""
    benches = sorted(b for b in entries if b not in control)
    if not benches:
        return None
    methods = sorted(set.intersection(*(set(entries[b]) for b in benches)))
    if len(methods) < 2 or len(benches) < 2:
        return None
    values = np.array([[entries[b][m]["specific"]["mcc"] for b in benches] for m in methods])
    matrix = RankMatrix(methods, benches, values)
    fr = friedman(matrix)
    mean_ranks = {m: float(r) for m, r in zip(methods, matrix.mean_ranks)}
    cd = nemenyi_cd(len(methods), len(benches)) if len(methods) in NEMENYI_Q05 else None
    diagram = cd_diagram(mean_ranks, cd) if cd is not None else None
    return {
        "methods": methods,
        "benchmarks": benches,
        "mcc": values.tolist(),
        "mean_ranks": mean_ranks,
        "chi2_F": fr["chi2_F"],
        "df": fr["df"],
        "p": fr["p_value"],
        "cd": cd,
        "groups": diagram["groups"] if diagram else [],
    }, diagram


def _pct(v):
    return "undef" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{100 * v:+.1f}%"


def render_tables(report: dict, timing: dict | None = None) -> str:
    """Human-readable summary: detection metrics, impact, time and memory tables.

    ``timing[bench][monitor]`` holds resource-report dicts; it lives outside
    the report because wall-clock numbers differ from run to run.
    """
    lines = []
    for bench, monitors in sorted(report["benchmarks"].items()):
        lines.append(f"== {bench}")
        lines.append(f"{'monitor':<14}{'dim':<10}{'MCC':>8}{'FPR':>8}{'FNR':>8}{'Pr':>8}{'Re':>8}{'F1':>8}")
        for mon, e in sorted(monitors.items()):
            for dim in ("specific", "overall"):
                m = e[dim]
                lines.append(
                    f"{mon:<14}{dim:<10}{m['mcc']:>8.3f}{m['fpr']:>8.3f}{m['fnr']:>8.3f}"
                    f"{m['precision']:>8.3f}{m['recall']:>8.3f}{m['micro_f1']:>8.3f}"
                )
        lines.append("")
    lines.append("== impact on the system (MCC, ML alone vs ML + monitor, ID data)")
    for bench, monitors in sorted(report["benchmarks"].items()):
        for mon, e in sorted(monitors.items()):
            imp = e["impact_id"]
            lines.append(
                f"{bench:<28}{mon:<14}ML {imp['mcc_ml']:.3f}  SUT {imp['mcc_sut']:.3f}  {_pct(imp['relative_change'])}"
            )
    if timing:
        lines.append("")
        lines.append("== time per instance in seconds: ML (share) | SM (share) | SUT")
        for bench, monitors in sorted(timing.items()):
            for mon, r in sorted(monitors.items()):
                lines.append(
                    f"{bench:<28}{mon:<14}{r['ml_time_mean']:.4f} ({r['ml_share_pct']:.1f}%) | "
                    f"{r['sm_time_mean']:.4f} ({r['sm_share_pct']:.1f}%) | {r['sut_time_mean']:.4f}"
                )
    lines.append("")
    lines.append("== memory in MB: ML | SM")
    seen = set()
    for monitors in report["benchmarks"].values():
        for mon, e in sorted(monitors.items()):
            r = e["resources"]
            if mon not in seen and "ml_mb" in r:
                seen.add(mon)
                lines.append(f"{mon:<14}{r['ml_mb']:.4f} | {r['sm_mb']:.4f}")
    cross = report.get("cross")
    if cross:
        lines.append("")
        lines.append(
            f"== Friedman over {len(cross['benchmarks'])} benchmarks: chi2_F = {cross['chi2_F']:.4f}, "
            f"df = {cross['df']}, p = {cross['p']:.4g}; Nemenyi CD = "
            + ("n/a" if cross["cd"] is None else f"{cross['cd']:.4f}")
        )
        for m, r in sorted(cross["mean_ranks"].items(), key=lambda kv: kv[1]):
            lines.append(f"  {m:<14} mean rank {r:.3f}")
    return "\n".join(lines) + "\n"
