"""
Report writers and console summaries for checks, probes and refinement studies.
"""

import csv
import json
import logging
import os
import platform
import time
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import scipy

from ..evaluation.checks import CheckReport
from ..evaluation.probes import ProbeResult
from ..evaluation.refinement import RefinementTable

logger = logging.getLogger(__name__)

CHECK_COLUMNS = ["check", "grid", "ladder", "max_residual", "violation_fraction", "pass"]
PROBE_COLUMNS = ["function", "params", "norm_pstar", "norm_grad_p", "ratio"]
STUDY_COLUMNS = ["res", "h", "value", "error", "order"]


def _ensure_parent(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return " ".join(_cell(v) for v in value)
    return str(value)


def write_json(payload: Dict[str, object], path: str) -> None:
    """Deterministic JSON (sorted keys, fixed indentation)."""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    logger.info("report saved to %s", path)


def write_csv(rows: Iterable[Dict[str, object]], columns: Sequence[str], path: str) -> None:
    """CSV with a header row; missing values are written empty."""
    _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])
    logger.info("table saved to %s", path)


def write_check_reports(reports: List[CheckReport], config: Dict[str, object],
                        json_path: str, csv_path: str) -> None:
    write_json({"config": config, "reports": [r.to_dict() for r in reports],
                "passed": all(r.passed for r in reports)}, json_path)
    write_csv([r.summary_row() for r in reports], CHECK_COLUMNS, csv_path)


def write_probe_result(result: ProbeResult, config: Dict[str, object],
                       csv_path: str, json_path: Optional[str] = None) -> None:
    write_csv([vars(row) for row in result.rows], PROBE_COLUMNS, csv_path)
    if json_path:
        write_json({"config": config, "probe": result.to_dict()}, json_path)


def write_refinement_table(table: RefinementTable, config: Dict[str, object],
                           csv_path: str, json_path: Optional[str] = None) -> None:
    write_csv([vars(row) for row in table.rows], STUDY_COLUMNS, csv_path)
    if json_path:
        write_json({"config": config, "study": table.to_dict()}, json_path)


def write_run_meta(path: str, command: str, workers: int, started: float) -> None:
    """The only output carrying timestamps and environment details."""
    write_json({
        "command": command,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(started)),
        "elapsed_seconds": round(time.time() - started, 3),
        "workers": workers,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }, path)


def print_check_summary(reports: List[CheckReport]) -> None:
    """
    Print a formatted summary of verification reports.

    Args:
        reports: Reports in run order
    """
    print("\nVerification Results:")
    print("-" * 80)
    print(f"{'Check':<26} {'Max residual':>14} {'Violations':>12} {'Result':>10}")
    print("-" * 80)
    for report in reports:
        verdict = "pass" if report.passed else "FAIL"
        print(f"{report.name:<26} {report.max_residual:>14.3e} "
              f"{100.0 * report.violation_fraction:>11.2f}% {verdict:>10}")
    print("-" * 80)
    passed = sum(r.passed for r in reports)
    print(f"Passed {passed} of {len(reports)} checks")


def print_probe_summary(result: ProbeResult) -> None:
    """Print the per-member ratio table and the family maximum."""
    print(f"\nNorm probe: {result.op}, family {result.family}, n={result.n}, "
          f"p={result.p:.4g}, p*={result.p_star:.4g}")
    if result.exploratory:
        print("(exploratory range p <= n/(n-1): ratios are data, not a bound)")
    print("-" * 80)
    print(f"{'Function':<20} {'||Af||_p*':>12} {'||grad Af||_p':>14} {'Ratio':>10}  Params")
    print("-" * 80)
    for row in result.rows:
        print(f"{row.function:<20} {row.norm_pstar:>12.4f} {row.norm_grad_p:>14.4f} "
              f"{row.ratio:>10.4f}  {row.params}")
    print("-" * 80)
    print(f"Family max ratio: {result.family_max:.4f}")
    if result.refinement_delta is not None:
        print(f"Refined max ratio: {result.refined_max:.4f} "
              f"(change {100.0 * result.refinement_delta:.2f}%)")


def print_refinement_summary(table: RefinementTable) -> None:
    print(f"\nRefinement study: {table.op} / {table.function}")
    print("-" * 60)
    print(f"{'Res':>6} {'h':>12} {'Error':>14} {'Order':>8}")
    print("-" * 60)
    for row in table.rows:
        order = f"{row.order:.2f}" if row.order is not None else "-"
        print(f"{row.res:>6} {row.h:>12.5g} {row.error:>14.3e} {order:>8}")
    print("-" * 60)
    if table.fitted_order is not None:
        print(f"Fitted order: {table.fitted_order:.2f}")
