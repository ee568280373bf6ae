from typing import Any, Mapping, Sequence
import csv
import json

import numpy as np

from .exceptions import ExtrapolationException


def format_value(value: Any) -> str:
    """CSV text of one cell; floats use repr so they read back bit for bit."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def rows_to_csv(rows: Sequence[Mapping[str, Any]], file_path: str, fieldnames: list[str]) -> None:
    with open(file_path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({name: format_value(row[name]) for name in fieldnames})


def csv_to_rows(file_path: str) -> list[dict[str, str]]:
    with open(file_path, "r", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def dict_to_json(dict_obj: dict, file_path: str):
    with open(file_path, "w", encoding="utf-8") as f:
        json.dump(dict_obj, f, ensure_ascii=False, sort_keys=True, indent=4)


def log_log_slope(a_values: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log|error| against log a; NaN when an error vanishes."""
    a = np.asarray(a_values, dtype=np.float64)
    e = np.abs(np.asarray(errors, dtype=np.float64))
    if a.size != e.size or a.size < 2:
        raise ExtrapolationException(f"a slope needs two or more points, got {a.size} and {e.size}")
    if np.any(e == 0.0) or np.any(a <= 0.0):
        return float("nan")
    slope, _ = np.polyfit(np.log(a), np.log(e), 1)
    return float(slope)
