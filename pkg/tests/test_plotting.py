import pytest

from greytensors.__main__ import SWEEP_FIELDS, VERIFY_FIELDS
from greytensors.exceptions import EmptyDataException, SchemaMismatchException
from greytensors.plotting import check_columns, emit_plot, load_schema
from greytensors.types import PlotKind
from greytensors.utils import rows_to_csv


def sweep_rows():
    rows = []
    for component, scale in (("(0, 0)", 1.0), ("(1, 1)", 0.5)):
        for a in (0.0625, 0.03125, 0.015625):
            bias = scale * a
            rows.append(
                {
                    "version": "v0.1.0",
                    "estimator": "surface2",
                    "shape": "ball",
                    "a": a,
                    "seed": 1,
                    "translations": 4,
                    "component": component,
                    "estimate": 1.0 + bias,
                    "stderr": 0.0,
                    "oracle": 1.0,
                    "bias": bias,
                    "abs_bias": bias,
                    "slope": 1.0,
                }
            )
    return rows


@pytest.fixture
def sweep_csv(tmp_path):
    path = str(tmp_path / "sweep.csv")
    rows_to_csv(sweep_rows(), path, SWEEP_FIELDS)
    return path


def test_schema_matches_cli_columns():
    schema = load_schema()
    assert set(schema["sweep"]) == set(SWEEP_FIELDS)
    assert set(schema["verify"]) == set(VERIFY_FIELDS)


def test_bias_plot(sweep_csv, tmp_path):
    summary = emit_plot(sweep_csv)
    assert summary.path == str(tmp_path / "sweep.svg")
    assert summary.series == 2
    assert summary.markers == 6
    text = (tmp_path / "sweep.svg").read_text()
    assert "|bias|" in text
    assert "(1, 1)" in text


def test_plot_is_byte_stable(sweep_csv, tmp_path):
    first = emit_plot(sweep_csv, PlotKind.BIAS, str(tmp_path / "first.svg"))
    second = emit_plot(sweep_csv, PlotKind.BIAS, str(tmp_path / "second.svg"))
    with open(first.path, "rb") as f, open(second.path, "rb") as g:
        assert f.read() == g.read()


def test_empty_csv_writes_nothing(tmp_path):
    path = str(tmp_path / "empty.csv")
    rows_to_csv([], path, SWEEP_FIELDS)
    with pytest.raises(EmptyDataException):
        emit_plot(path)
    assert not (tmp_path / "empty.svg").exists()


def test_zero_bias_is_not_plotted(tmp_path):
    rows = sweep_rows()
    for row in rows:
        row["abs_bias"] = 0.0
    path = str(tmp_path / "exact.csv")
    rows_to_csv(rows, path, SWEEP_FIELDS)
    with pytest.raises(EmptyDataException):
        emit_plot(path)


def test_schema_mismatch(sweep_csv):
    with pytest.raises(SchemaMismatchException) as e:
        emit_plot(sweep_csv, PlotKind.VERIFY)
    assert "theorem" in e.value.missing
    with pytest.raises(SchemaMismatchException):
        check_columns([{"a": "0.1"}], "sweep")
