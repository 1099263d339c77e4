"""
result_writer.py

Writes a CocycleReport as a CSV table (one row per parameter point, fixed
header, 17 significant digits) and a JSON summary (criteria, fits, notes,
runtime, echoed config, logs).
"""

import csv
import json
import logging
import math
import os

from app.core.constants import CSV_FLOAT_FORMAT
from app.core.models import CocycleReport

logger = logging.getLogger(__name__)


def format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return CSV_FLOAT_FORMAT.format(value)
    return str(value)


def report_stem(report: CocycleReport) -> str:
    return f"{report.experiment}_{report.group}{report.n}"


def write_csv(report: CocycleReport, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([format_cell(c) for c in row])
    return path


def summary(report: CocycleReport) -> dict:
    data = report.model_dump(mode="json", exclude={"rows", "columns"})
    data["passed"] = report.passed
    data["row_count"] = len(report.rows)
    return data


def write_json(report: CocycleReport, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary(report), fh, indent=2, sort_keys=True)
    return path


def save_report(report: CocycleReport, out_dir: str) -> dict:
    """Write ``<experiment>_<group><n>.csv`` and ``.json`` under ``out_dir``."""
    stem = os.path.join(out_dir, report_stem(report))
    paths = {"csv": write_csv(report, stem + ".csv"), "json": write_json(report, stem + ".json")}
    logger.info("Report written to %s", paths)
    return paths
