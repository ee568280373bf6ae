"""Log-log SVG charts of sweep and verification CSVs.

SVG output is byte-stable: the hash salt is fixed and no creation date is written.
"""

from importlib import resources
from logging import Logger
from typing import NamedTuple
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .exceptions import EmptyDataException, SchemaMismatchException  # noqa: E402
from .logger import LOGGER  # noqa: E402
from .types import PlotKind  # noqa: E402
from .utils import csv_to_rows  # noqa: E402

SCHEMA_FILE = "csv_schema.json"
SVG_HASH_SALT = "greytensors"

PLOTS: dict[PlotKind, tuple[str, str, str, str]] = {
    # schema, series column, x column, y column
    PlotKind.BIAS: ("sweep", "component", "a", "abs_bias"),
    PlotKind.VERIFY: ("verify", "theorem", "a", "rel_diff"),
}
LABELS = {"a": "a", "abs_bias": "|bias|", "rel_diff": "relative difference"}


class PlotSummary(NamedTuple):
    path: str
    series: int
    markers: int


def load_schema() -> dict[str, dict[str, str]]:
    text = resources.files("greytensors").joinpath(SCHEMA_FILE).read_text(encoding="utf-8")
    return json.loads(text)


def check_columns(rows: list[dict[str, str]], schema_name: str) -> None:
    expected = load_schema()[schema_name]
    present = set(rows[0].keys()) if rows else set()
    missing = sorted(set(expected) - present)
    if missing:
        raise SchemaMismatchException(missing)


def emit_plot(
    csv_path: str,
    kind: PlotKind | str = PlotKind.BIAS,
    svg_path: str | None = None,
    log: Logger = LOGGER,
) -> PlotSummary:
    schema_name, series_column, x_column, y_column = PLOTS[PlotKind(kind)]
    rows = csv_to_rows(csv_path)
    if not rows:
        raise EmptyDataException(f"{csv_path} holds no rows")
    check_columns(rows, schema_name)

    series: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        x, y = float(row[x_column]), float(row[y_column])
        if x > 0.0 and y > 0.0:
            series.setdefault(row[series_column], []).append((x, y))
    if not series:
        raise EmptyDataException(f"{csv_path} has no positive values to plot on log axes")

    if svg_path is None:
        svg_path = f"{os.path.splitext(csv_path)[0]}.svg"

    markers = 0
    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "axes.unicode_minus": False}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for name in sorted(series):
            points = sorted(series[name])
            ax.loglog([p[0] for p in points], [p[1] for p in points], marker="o", label=name)
            markers += len(points)
        ax.set_xlabel(LABELS[x_column])
        ax.set_ylabel(LABELS[y_column])
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(loc="best", fontsize=8)
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
        plt.close(fig)

    log.info(f"wrote {markers} points in {len(series)} series to {svg_path}")
    return PlotSummary(path=svg_path, series=len(series), markers=markers)
