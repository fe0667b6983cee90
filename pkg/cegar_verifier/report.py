"""
Report serialization.

Handles:
- JSON verdict reports (emit and parse back)
- Human-readable summaries
- Bench CSV rows
"""

import csv
import io
import json
from dataclasses import asdict
from typing import Dict, Iterable, List

from .config import BENCH_CSV_COLUMNS, REPORT_STATS_KEYS
from .models import RunStats, Status, VerdictReport


_TIMING_KEYS = ("preprocess_ms", "solve_ms", "total_ms")


def report_to_dict(report: VerdictReport, omit_timings: bool = False) -> Dict[str, object]:
    stats = asdict(report.stats)
    ordered = {key: stats.pop(key) for key in REPORT_STATS_KEYS}
    ordered.update(stats)
    if omit_timings:
        for key in _TIMING_KEYS:
            ordered[key] = 0.0
    return {
        "status": report.status.value,
        "witness": None if report.witness is None else [float(v) for v in report.witness],
        "stats": ordered,
        "message": report.message,
    }


def emit_report(report: VerdictReport, omit_timings: bool = False) -> str:
    """Serialize a report as JSON; lossless for status, witness and stats."""
    return json.dumps(report_to_dict(report, omit_timings), indent=2, ensure_ascii=True)


def parse_report(text: str) -> VerdictReport:
    data = json.loads(text)
    stats = RunStats(**data["stats"])
    witness = data.get("witness")
    return VerdictReport(
        status=Status(data["status"]),
        witness=None if witness is None else [float(v) for v in witness],
        stats=stats,
        message=data.get("message"),
    )


def format_summary(report: VerdictReport) -> str:
    """Verdict, abstract size against original size, refinement rounds."""
    s = report.stats
    lines = [
        f"Verdict: {report.status.value}",
        f"Hidden neurons: original {s.original_size}, classified {s.classified_size}",
        f"Abstract size: initial {s.initial_abstract_size}, final {s.final_abstract_size}",
        f"Refinement rounds: {s.refinement_rounds}, solver calls: {s.solver_calls}",
        f"Time: preprocess {s.preprocess_ms:.1f} ms, solve {s.solve_ms:.1f} ms, total {s.total_ms:.1f} ms",
    ]
    if report.witness is not None:
        lines.append("Counterexample: [" + ", ".join(f"{v:.6g}" for v in report.witness) + "]")
    if report.message:
        lines.append(f"Note: {report.message}")
    return "\n".join(lines)


def bench_row(query_id: str, mode: str, report: VerdictReport, wall_ms: float) -> Dict[str, object]:
    return {
        "query_id": query_id,
        "mode": mode,
        "verdict": report.status.value,
        "rounds": report.stats.refinement_rounds,
        "solver_calls": report.stats.solver_calls,
        "final_abstract_size": report.stats.final_abstract_size,
        "wall_ms": round(wall_ms, 3),
    }


def error_row(query_id: str, mode: str, wall_ms: float) -> Dict[str, object]:
    return {
        "query_id": query_id,
        "mode": mode,
        "verdict": "ERROR",
        "rounds": "",
        "solver_calls": "",
        "final_abstract_size": "",
        "wall_ms": round(wall_ms, 3),
    }


def rows_to_csv(rows: Iterable[Dict[str, object]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=BENCH_CSV_COLUMNS, lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def read_csv_rows(text: str) -> List[Dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))
