#!/usr/bin/env python3
"""
Tests for the report module.

Run with: python -m pytest cegar_verifier/test_report.py -v
"""

import json

import pytest

from cegar_verifier.config import BENCH_CSV_COLUMNS, REPORT_STATS_KEYS
from cegar_verifier.models import RunStats, Status, VerdictReport
from cegar_verifier.report import (
    bench_row,
    emit_report,
    error_row,
    format_summary,
    parse_report,
    read_csv_rows,
    rows_to_csv,
)


# =============================================================================
# Sample Reports
# =============================================================================

SAT_REPORT = VerdictReport(
    status=Status.SAT,
    witness=[0.25, 1.0],
    stats=RunStats(
        refinement_rounds=2,
        solver_calls=3,
        initial_abstract_size=4,
        final_abstract_size=6,
        preprocess_ms=1.5,
        solve_ms=20.25,
        total_ms=21.75,
        original_size=5,
        classified_size=9,
    ),
)

UNSAT_REPORT = VerdictReport(status=Status.UNSAT, stats=RunStats(solver_calls=1, initial_abstract_size=4, final_abstract_size=4))


# =============================================================================
# JSON reports
# =============================================================================

def test_report_schema():
    """status, witness, stats with the fixed keys first, in order."""
    data = json.loads(emit_report(SAT_REPORT))
    assert data["status"] == "SAT"
    assert data["witness"] == [0.25, 1.0]
    assert list(data["stats"])[: len(REPORT_STATS_KEYS)] == REPORT_STATS_KEYS
    assert data["stats"]["solver_calls"] == 3


def test_emit_then_parse_is_lossless():
    """Status, witness and stats survive the JSON form."""
    for report in (SAT_REPORT, UNSAT_REPORT):
        back = parse_report(emit_report(report))
        assert back.status is report.status
        assert back.witness == report.witness
        assert back.stats == report.stats


def test_omit_timings_zeroes_only_timings():
    """The three timing fields become 0, everything else stays."""
    data = json.loads(emit_report(SAT_REPORT, omit_timings=True))
    assert data["stats"]["preprocess_ms"] == 0.0
    assert data["stats"]["solve_ms"] == 0.0
    assert data["stats"]["total_ms"] == 0.0
    assert data["stats"]["refinement_rounds"] == 2


def test_witness_present_exactly_when_sat():
    """A SAT report needs a witness and other statuses must not carry one."""
    with pytest.raises(ValueError):
        VerdictReport(status=Status.SAT)
    with pytest.raises(ValueError):
        VerdictReport(status=Status.UNSAT, witness=[0.0])


def test_summary_mentions_sizes_and_rounds():
    """The human summary reports verdict, sizes and refinement rounds."""
    text = format_summary(SAT_REPORT)
    assert "Verdict: SAT" in text
    assert "original 5" in text
    assert "initial 4, final 6" in text
    assert "Refinement rounds: 2" in text
    assert "Counterexample" in text


# =============================================================================
# CSV rows
# =============================================================================

def test_csv_rows():
    """Header row plus one row per run, ERROR rows keep the query id."""
    rows = [bench_row("q1", "saturation-cegar", SAT_REPORT, 12.3456), error_row("q2", "no-abstraction", 1.0)]
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == ",".join(BENCH_CSV_COLUMNS)
    parsed = read_csv_rows(text)
    assert len(parsed) == 2
    assert parsed[0]["verdict"] == "SAT"
    assert parsed[0]["rounds"] == "2"
    assert parsed[0]["wall_ms"] == "12.346"
    assert parsed[1]["verdict"] == "ERROR"
    assert parsed[1]["query_id"] == "q2"
