import argparse
import logging
import os
import sys

from rich.console import Console
from rich.table import Table

from .__init__ import __version__, __description__
from .config import apply_overrides, load_config
from .exceptions import GreyTensorsException, ToleranceGateException
from .harness import Harness, check_gates
from .imageio import read_image, write_image
from .logger import LOGGER, LoggerAdapter, set_log_level
from .plotting import emit_plot
from .types import (
    CurvatureWeightKind,
    EstimatorKind,
    ExpectationMode,
    PlotKind,
)
from .utils import dict_to_json, rows_to_csv

DEFAULT_CONFIG_PATH = "./config.json"
DEFAULT_IMAGE_FORMAT = "pgm"
ESTIMATE_FIELDS = [
    "version",
    "estimator",
    "shape",
    "a",
    "seed",
    "translations",
    "component",
    "estimate",
    "stderr",
]
SWEEP_FIELDS = [*ESTIMATE_FIELDS, "oracle", "bias", "abs_bias", "slope"]
VERIFY_FIELDS = [
    "version",
    "theorem",
    "shape",
    "a",
    "seed",
    "translations",
    "lhs",
    "rhs",
    "rel_diff",
    "passed",
]
MCMULLEN_FIELDS = [
    "version",
    "source",
    "shape",
    "k",
    "r",
    "a",
    "seed",
    "translations",
    "residual",
    "threshold",
    "passed",
]

console = Console()


def print_rows(title: str, rows: list[dict], fieldnames: list[str]) -> None:
    table = Table(title=title)
    for name in fieldnames:
        table.add_column(name)
    for row in rows:
        table.add_row(*(str(row[name]) for name in fieldnames))
    console.print(table)


def output_path(harness: Harness, file_name: str) -> str:
    directory = harness.config["output"]["directory"]
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, file_name)


def init_harness(args: argparse.Namespace) -> tuple[Harness, LoggerAdapter]:
    log = set_log_level(args.log_level)
    config = apply_overrides(load_config(config_path=args.config_path), args)
    return Harness(config=config, logger=log.logger), log


def render_image(args: argparse.Namespace) -> None:
    harness, log = init_harness(args)
    image_format = harness.config["output"].get("image_format", DEFAULT_IMAGE_FORMAT)
    for a in harness.config["a_schedule"]:
        image = harness.render(a, args.index)
        path = output_path(harness, f"{harness.shape.kind}_a{a!r}_{args.index}.{image_format}")
        write_image(image, path)
        log.info(f"wrote {image.shape} image to {path}")


def estimate(args: argparse.Namespace) -> None:
    harness, _ = init_harness(args)
    if args.image is not None:
        tensor = harness.estimate_image(read_image(args.image))
        print(tensor.to_text())
        return

    results = harness.estimate()
    rows = harness.estimate_rows(results)
    rows_to_csv(rows, output_path(harness, "estimate.csv"), ESTIMATE_FIELDS)
    print_rows("estimates", rows, ESTIMATE_FIELDS)
    if args.extrapolate:
        print(harness.extrapolate(results).to_text())


def sweep(args: argparse.Namespace) -> None:
    harness, log = init_harness(args)
    rows = harness.sweep()
    csv_path = output_path(harness, "sweep.csv")
    rows_to_csv(rows, csv_path, SWEEP_FIELDS)
    print_rows("sweep", rows, SWEEP_FIELDS)
    if args.plot:
        emit_plot(csv_path, PlotKind.BIAS, log=log.logger)


def calibrate(args: argparse.Namespace) -> None:
    harness, _ = init_harness(args)
    calibration = harness.calibrate()
    record = calibration._asdict()
    record["limits"] = list(calibration.limits)
    record["version"] = __version__
    dict_to_json(record, output_path(harness, "calibration.json"))
    print(record)
    if not calibration.stable:
        raise ToleranceGateException(["calibration"])


def verify(args: argparse.Namespace) -> None:
    harness, log = init_harness(args)
    rows = harness.verify()
    csv_path = output_path(harness, "verify.csv")
    rows_to_csv(rows, csv_path, VERIFY_FIELDS)
    print_rows("verification", rows, VERIFY_FIELDS)
    if args.plot:
        emit_plot(csv_path, PlotKind.VERIFY, log=log.logger)
    check_gates(rows)


def mcmullen_check(args: argparse.Namespace) -> None:
    harness, _ = init_harness(args)
    rows = harness.mcmullen_check()
    rows_to_csv(rows, output_path(harness, "mcmullen.csv"), MCMULLEN_FIELDS)
    print_rows("McMullen relations", rows, MCMULLEN_FIELDS)
    check_gates(rows)


def plot(args: argparse.Namespace) -> None:
    log = set_log_level(args.log_level)
    summary = emit_plot(args.csv, args.kind, args.output, log=log.logger)
    print(summary.path)


def profile(args: argparse.Namespace) -> None:
    harness, log = init_harness(args)
    path = args.output or output_path(harness, f"profile_{harness.psf.kind}.txt")
    harness.psf.profile.export(path, points=args.points)
    log.info(f"wrote profile table to {path}")


def add_override_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-a", "--a", type=float, nargs="+", help="Override the a-schedule")
    parser.add_argument("--seed", type=int, help="Override the translation seed")
    parser.add_argument("-t", "--translations", type=int, help="Override the translation count")
    parser.add_argument(
        "-e",
        "--expectation",
        type=str,
        choices=[str(mode) for mode in ExpectationMode],
        help="Override how estimates are averaged over translations",
    )
    parser.add_argument("-w", "--workers", type=int, help="Override the sweep worker count")
    parser.add_argument("-o", "--output-directory", type=str, help="Override output.directory")
    parser.add_argument(
        "--estimator",
        type=str,
        choices=[str(kind) for kind in EstimatorKind],
        help="Override the estimator kind",
    )
    parser.add_argument("--r", type=int, help="Override the position rank")
    parser.add_argument("--s", type=int, help="Override the normal rank")
    parser.add_argument("--beta", type=float, help="Override the lower grey threshold")
    parser.add_argument("--omega", type=float, help="Override the upper grey threshold")
    parser.add_argument("--epsilon", type=float, help="Override the surface box half-width")
    parser.add_argument(
        "--g",
        type=str,
        choices=[str(kind) for kind in CurvatureWeightKind],
        help="Override the curvature weight",
    )
    parser.add_argument("--radii", type=float, nargs="+", help="Override the calibration radii")


def init_argparse() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=f"{__description__}")
    parser.add_argument("-v", "--version", action="version", version=f"{__version__}")
    parser.add_argument(
        "-c",
        "--config-path",
        type=str,
        default=DEFAULT_CONFIG_PATH,
        help="The path to the configuration file",
    )
    parser.add_argument(
        "-l",
        "--log-level",
        type=int,
        default=logging.INFO,
        help="The log level to output",
    )

    sub_parsers = parser.add_subparsers()

    render_parser = sub_parsers.add_parser("render", help="Render grey-value images")
    render_parser.set_defaults(func=render_image)
    render_parser.add_argument(
        "-i", "--index", type=int, default=0, help="Which seeded translation to render"
    )

    estimate_parser = sub_parsers.add_parser("estimate", help="Estimate a Minkowski tensor")
    estimate_parser.set_defaults(func=estimate)
    estimate_parser.add_argument(
        "--image", type=str, default=None, help="Estimate from a PGM or raw image instead"
    )
    estimate_parser.add_argument(
        "-x",
        "--extrapolate",
        default=False,
        action=argparse.BooleanOptionalAction,
        help="Print the estimate extrapolated to a = 0",
    )

    sweep_parser = sub_parsers.add_parser("sweep", help="Estimate and compare to the oracle")
    sweep_parser.set_defaults(func=sweep)

    calibrate_parser = sub_parsers.add_parser("calibrate", help="Calibrate curvature weights")
    calibrate_parser.set_defaults(func=calibrate)

    verify_parser = sub_parsers.add_parser("verify", help="Check the asymptotic expansions")
    verify_parser.set_defaults(func=verify)

    for command_parser in (sweep_parser, verify_parser):
        command_parser.add_argument(
            "-p",
            "--plot",
            default=False,
            action=argparse.BooleanOptionalAction,
            help="Save an SVG chart next to the CSV",
        )

    mcmullen_parser = sub_parsers.add_parser("mcmullen-check", help="Check McMullen relations")
    mcmullen_parser.set_defaults(func=mcmullen_check)

    profile_parser = sub_parsers.add_parser("profile", help="Export the blurred-halfspace profile")
    profile_parser.set_defaults(func=profile)
    profile_parser.add_argument(
        "-n", "--points", type=int, default=1001, help="Number of table rows"
    )
    profile_parser.add_argument("--output", type=str, default=None, help="The table path")

    for command_parser in (
        render_parser,
        estimate_parser,
        sweep_parser,
        calibrate_parser,
        verify_parser,
        mcmullen_parser,
        profile_parser,
    ):
        add_override_arguments(command_parser)

    plot_parser = sub_parsers.add_parser("plot", help="Plot a sweep or verification CSV")
    plot_parser.set_defaults(func=plot)
    plot_parser.add_argument("csv", type=str, help="The CSV file to plot")
    plot_parser.add_argument(
        "-k",
        "--kind",
        type=str,
        default=PlotKind.BIAS,
        choices=[str(kind) for kind in PlotKind],
        help="The chart to draw",
    )
    plot_parser.add_argument("--output", type=str, default=None, help="The SVG path")

    return parser


def main(argv: list[str] | None = None) -> None:
    arg_parser = init_argparse()
    args = arg_parser.parse_args(argv)
    if not hasattr(args, "func"):
        arg_parser.print_help()
        sys.exit(1)

    log = LoggerAdapter(LOGGER)
    try:
        args.func(args)
    except ToleranceGateException as e:
        log.logger.error(e)
        sys.exit(2)
    except GreyTensorsException as e:
        log.logger.exception(e)
        sys.exit(1)


if __name__ == "__main__":
    main()
