import itertools
import math

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats
from scipy.special import gammaincc as scipy_gammaincc
from sklearn.metrics import matthews_corrcoef

from oodbench.errors import IntegrityError, ParameterError
from oodbench.evaluation import (
    REPORT_SCHEMA,
    ConfusionCounts,
    RankMatrix,
    benchmark_entry,
    cd_diagram,
    cd_groups,
    chi2_sf,
    confusion,
    cross_benchmark,
    friedman,
    friedman_statistic,
    gammaincc,
    mcc,
    multiclass_mcc,
    nemenyi_cd,
    oracle,
    overall_impact,
    rank_row,
    rates,
    render_tables,
    validate_report,
)
from oodbench.harness import Readout

# (origin, novelty, m_hat, ml_correct) -> (specific, overall), written out row by row
ORACLE_TABLE = {
    ("ID", False, True, False): ("FP", "TP"),
    ("ID", False, True, True): ("FP", "FP"),
    ("ID", False, False, True): ("TN", "TN"),
    ("ID", False, False, False): ("TN", "FN"),
    ("OOD", False, True, False): ("TP", "TP"),
    ("OOD", False, True, True): ("TP", "FP"),
    ("OOD", False, False, True): ("FN", "TN"),
    ("OOD", False, False, False): ("FN", "FN"),
    ("OOD", True, True, True): ("TP", "TP"),
    ("OOD", True, False, True): ("FN", "FN"),
}


@pytest.mark.parametrize("case,expected", list(ORACLE_TABLE.items()))
def test_oracle_table(case, expected):
    assert tuple(oracle(*case)) == expected


@pytest.mark.parametrize("m_hat", [True, False])
def test_novelty_ignores_ml_correctness(m_hat):
    assert oracle("OOD", True, m_hat, True) == oracle("OOD", True, m_hat, False)


def test_novelty_on_id_is_integrity_error():
    with pytest.raises(IntegrityError):
        oracle("ID", True, True, True)
    with pytest.raises(IntegrityError):
        oracle("somewhere", False, True, True)


def _brute_mcc(tp, fp, tn, fn):
    y_true = [1] * tp + [0] * fp + [0] * tn + [1] * fn
    y_pred = [1] * tp + [1] * fp + [0] * tn + [0] * fn
    return matthews_corrcoef(y_true, y_pred)


@given(st.tuples(*[st.integers(0, 40)] * 4))
def test_mcc_matches_sklearn(counts):
    tp, fp, tn, fn = counts
    if tp + fp + tn + fn == 0:
        return
    assert mcc(ConfusionCounts(tp, fp, tn, fn)) == pytest.approx(_brute_mcc(*counts), abs=1e-12)


def test_mcc_degenerate_is_zero_and_extremes():
    assert mcc(ConfusionCounts(5, 0, 0, 0)) == 0.0
    assert mcc(ConfusionCounts(3, 0, 4, 0)) == 1.0
    assert mcc(ConfusionCounts(0, 3, 0, 4)) == -1.0


def test_rates_closed_form():
    r = rates(ConfusionCounts(tp=6, fp=2, tn=8, fn=4))
    assert r == pytest.approx({"fpr": 0.2, "fnr": 0.4, "precision": 0.75, "recall": 0.6, "micro_f1": 2 * 0.45 / 1.35})
    assert rates(ConfusionCounts()) == {"fpr": 0.0, "fnr": 0.0, "precision": 0.0, "recall": 0.0, "micro_f1": 0.0}


@given(st.lists(st.tuples(st.integers(-1, 4), st.integers(-1, 4)), min_size=2, max_size=60))
def test_multiclass_mcc_matches_sklearn(pairs):
    y, p = map(list, zip(*pairs))
    ref = matthews_corrcoef(y, p) if len(set(y) | set(p)) > 1 else 0.0
    assert multiclass_mcc(y, p) == pytest.approx(ref, abs=1e-12)


def _readout(i, origin="ID", novelty=False, y=0, y_hat=0, m=False):
    return Readout(f"r{i}", origin, "none" if origin == "ID" else "x", novelty, y, y_hat, 0.9, m, m)


def test_confusion_counts_sum():
    rs = [_readout(i, *case[:2], y=0, y_hat=0 if case[3] else 1, m=case[2]) for i, case in enumerate(ORACLE_TABLE)]
    spec, over = confusion(rs)
    assert spec.total == over.total == len(rs)
    assert spec == ConfusionCounts(tp=3, fp=2, tn=2, fn=3)
    assert over == ConfusionCounts(tp=3, fp=2, tn=2, fn=3)


def test_impact_of_never_flag_is_zero_change():
    rs = [_readout(i, y=i % 3, y_hat=(i % 3) if i % 4 else 0) for i in range(30)]
    imp = overall_impact(rs, rs)
    assert imp["mcc_sut"] == imp["mcc_ml"]
    assert imp["relative_change"] == 0.0


def test_impact_rejecting_errors_helps():
    base = [_readout(i, y=i % 3, y_hat=(i % 3) if i % 4 else (i + 1) % 3) for i in range(40)]
    guarded = [_readout(r.instance_id[1:], y=r.y, y_hat=r.y_hat, m=r.y != r.y_hat) for r in base]
    for g, b in zip(guarded, base):
        g.instance_id = b.instance_id
    imp = overall_impact(guarded, base)
    assert imp["mcc_sut"] > imp["mcc_ml"] and imp["relative_change"] > 0


def test_impact_undefined_when_baseline_mcc_zero():
    rs = [_readout(i, y=i % 2, y_hat=0) for i in range(10)]
    assert overall_impact(rs, rs)["relative_change"] is None


def test_impact_requires_same_ids():
    a = [_readout(1)]
    b = [_readout(2)]
    with pytest.raises(ParameterError):
        overall_impact(a, b)


def test_rank_row_matches_scipy():
    v = np.array([0.3, 0.9, 0.3, -0.1, 0.9, 0.5])
    np.testing.assert_array_equal(rank_row(v), stats.rankdata(-v))


@given(st.lists(st.integers(0, 3), min_size=2, max_size=8))
def test_ranks_sum_to_triangular(values):
    k = len(values)
    assert rank_row(values).sum() == k * (k + 1) / 2


def test_friedman_identical_rankings_fixture():
    ranks = np.array([[1, 1, 1], [2, 2, 2], [3, 3, 3]], dtype=float)
    assert friedman_statistic(ranks) == 6.0
    res = friedman(RankMatrix.from_ranks(ranks))
    assert res["chi2_F"] == 6.0 and res["df"] == 2
    assert res["p_value"] == pytest.approx(math.exp(-3.0), rel=1e-12)


def test_friedman_matches_scipy_without_ties():
    rng = np.random.default_rng(2)
    vals = rng.random((4, 12))
    ours = friedman(RankMatrix(["a", "b", "c", "d"], list(range(12)), vals))
    ref = stats.friedmanchisquare(*vals)
    assert ours["chi2_F"] == pytest.approx(ref.statistic, rel=1e-12)
    assert ours["p_value"] == pytest.approx(ref.pvalue, rel=1e-9)


def test_friedman_needs_two_by_two():
    with pytest.raises(ParameterError):
        friedman(RankMatrix(["a"], ["x", "y"], np.zeros((1, 2))))


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5, 7.0, 30.0])
@pytest.mark.parametrize("x", [0.0, 1e-3, 0.7, 3.0, 12.0, 80.0])
def test_gammaincc_matches_scipy(a, x):
    assert gammaincc(a, x) == pytest.approx(scipy_gammaincc(a, x), rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("df", [1, 2, 3, 9])
def test_chi2_sf_matches_scipy(df):
    for x in (0.1, 2.0, 5.991, 20.0):
        assert chi2_sf(x, df) == pytest.approx(stats.chi2.sf(x, df), rel=1e-10)


def test_nemenyi_cd_reference_value():
    # q(3) = 2.343; sqrt(3*4/(6*79))
    assert nemenyi_cd(3, 79) == pytest.approx(2.343 * math.sqrt(12 / 474), abs=1e-12)
    assert abs(nemenyi_cd(3, 79) - 0.3728) <= 0.0005
    with pytest.raises(ParameterError):
        nemenyi_cd(11, 10)
    with pytest.raises(ParameterError):
        nemenyi_cd(3, 10, alpha=0.1)


def test_cd_groups():
    ranks = {"a": 1.0, "b": 1.3, "c": 2.2, "d": 2.4}
    assert cd_groups(ranks, 0.5) == [["a", "b"], ["c", "d"]]
    assert cd_groups(ranks, 5.0) == [["a", "b", "c", "d"]]
    assert cd_groups(ranks, 0.1) == []


def test_cd_diagram_is_deterministic():
    ranks = {"odin": 2.5, "oob": 2.125, "recon": 1.375}
    a, b = cd_diagram(ranks, 1.1715), cd_diagram(dict(reversed(list(ranks.items()))), 1.1715)
    assert a == b
    assert a["svg"].startswith("<svg") and a["svg"].rstrip().endswith("</svg>")
    assert "CD = 1.1715" in a["text"]


def _stream(seed, n=40, flag_rate=0.3):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        origin = "OOD" if i % 2 else "ID"
        y = int(rng.integers(3))
        y_hat = y if rng.random() < 0.8 else (y + 1) % 3
        out.append(_readout(i, origin, False, y, y_hat, bool(rng.random() < flag_rate)))
    return out


def test_report_structure_and_schema():
    entries = {
        b: {m: benchmark_entry(_stream(10 * bi + mi, flag_rate=0.2 + 0.2 * mi), {"ml_bytes": 1, "sm_bytes": 2}) for mi, m in enumerate("xyz")}
        for bi, b in enumerate(["b1", "b2", "b3", "ctrl"])
    }
    cross, diagram = cross_benchmark(entries, control={"ctrl"})
    assert cross["benchmarks"] == ["b1", "b2", "b3"]
    assert cross["methods"] == ["x", "y", "z"]
    assert cross["cd"] == pytest.approx(nemenyi_cd(3, 3))
    assert diagram["groups"] == cross["groups"]
    report = {"config_hash": "h", "benchmarks": entries, "cross": cross}
    validate_report(report)
    text = render_tables(report, {"b1": {"x": {"ml_time_mean": 0.001, "sm_time_mean": 0.003, "sut_time_mean": 0.0041, "ml_share_pct": 24.4, "sm_share_pct": 73.2}}})
    assert "0.0010 (24.4%) | 0.0030 (73.2%) | 0.0041" in text
    assert "Friedman over 3 benchmarks" in text
    bad = dict(report, cross=dict(cross, p=2.0))
    with pytest.raises(jsonschema.ValidationError):
        validate_report(bad)


def test_cross_benchmark_needs_two_of_each():
    e = {"b": {"x": benchmark_entry(_stream(0)), "y": benchmark_entry(_stream(1))}}
    assert cross_benchmark(e) is None
    assert REPORT_SCHEMA["properties"]["cross"]["type"] == ["object", "null"]


def test_exhaustive_oracle_is_total():
    # every admissible input combination has a verdict in both dimensions
    for origin, novelty, m, ok in itertools.product(["ID", "OOD"], [False, True], [False, True], [False, True]):
        if novelty and origin == "ID":
            continue
        v = oracle(origin, novelty, m, ok)
        assert v.specific in {"TP", "FP", "TN", "FN"} and v.overall in {"TP", "FP", "TN", "FN"}
