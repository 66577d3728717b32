"""Oracle verdicts, detection metrics and cross-benchmark statistics."""

from .cd_diagram import cd_diagram, render_svg, render_text
from .metrics import (
    ConfusionCounts,
    confusion,
    count_verdicts,
    mcc,
    metric_bundle,
    multiclass_mcc,
    overall_impact,
    rates,
)
from .oracle import FN, FP, TN, TP, VerdictPair, oracle, readout_verdicts
from .report import REPORT_SCHEMA, benchmark_entry, cross_benchmark, render_tables, validate_report
from .stats import (
    NEMENYI_Q05,
    RankMatrix,
    cd_groups,
    chi2_sf,
    friedman,
    friedman_monte_carlo_p,
    friedman_statistic,
    gammaincc,
    nemenyi_cd,
    rank_row,
)

__all__ = [
    "FN",
    "FP",
    "NEMENYI_Q05",
    "REPORT_SCHEMA",
    "TN",
    "TP",
    "ConfusionCounts",
    "RankMatrix",
    "VerdictPair",
    "benchmark_entry",
    "cd_diagram",
    "cd_groups",
    "chi2_sf",
    "confusion",
    "count_verdicts",
    "cross_benchmark",
    "friedman",
    "friedman_monte_carlo_p",
    "friedman_statistic",
    "gammaincc",
    "mcc",
    "metric_bundle",
    "multiclass_mcc",
    "nemenyi_cd",
    "oracle",
    "overall_impact",
    "rank_row",
    "rates",
    "readout_verdicts",
    "render_svg",
    "render_tables",
    "render_text",
    "validate_report",
]
