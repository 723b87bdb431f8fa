"""
Command-line entry point: ``mvtpmsvm synth | train | predict | benchmark | stats``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 solver non-convergence
(``train --strict`` only).
"""

import argparse
import json
import logging
import sys

import numpy as np
import pandas as pd

from mvtpmsvm import __version__
from mvtpmsvm.cli.config import load_config, resolve_settings
from mvtpmsvm.cli.persistence import load_model, save_model
from mvtpmsvm.data.dataset import load_dataset, load_manifest, read_views, save_dataset
from mvtpmsvm.data.synthetic import SYNTHETIC_NAMES, generate_synthetic
from mvtpmsvm.eval.benchmark import run_benchmark, write_accuracy_csv, write_report
from mvtpmsvm.eval.search import CV_SOLVER_OPTIONS, DEFAULT_GRID_VALUES, GridSpec
from mvtpmsvm.exceptions import DataParseError, InvalidArgumentError, ManifestError, SolverNotConvergedError
from mvtpmsvm.kernel.gram import GAUSSIAN_PAPER, KERNEL_KINDS, KernelSpec
from mvtpmsvm.model.classifier import train
from mvtpmsvm.model.dual import DEFAULT_EPSILON, Hyperparams
from mvtpmsvm.preprocess.pipeline import ViewPreprocessor
from mvtpmsvm.preprocess.transforms import SCALING_MODES
from mvtpmsvm.qp.solvers import DEFAULT_MAX_ITER, DEFAULT_TOL, PROJECTED_GRADIENT, SOLVER_METHODS, SolverOptions
from mvtpmsvm.stats.comparison import DEFAULT_Z, UNIT_FRACTION, UNIT_PERCENT, AccuracyMatrix, stats_report

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NOT_CONVERGED = 4

DEFAULT_SIZES = {"synthetic1": 800, "synthetic2": 1200, "synthetic3": 2000}

SYNTH_DEFAULTS = {"name": None, "n": None, "seed": 0, "out": None}
TRAIN_DEFAULTS = {
    "manifest": None,
    "out": None,
    "c1": 1.0,
    "c2": 1.0,
    "c3": 1.0,
    "c4": 1.0,
    "d1": 1.0,
    "d2": 1.0,
    "epsilon": DEFAULT_EPSILON,
    "kernel": GAUSSIAN_PAPER,
    "sigma": 1.0,
    "kernel_b": None,
    "sigma_b": None,
    "scaling": None,
    "solver": PROJECTED_GRADIENT,
    "tol": DEFAULT_TOL,
    "max_iter": DEFAULT_MAX_ITER,
    "strict": False,
}
PREDICT_DEFAULTS = {"model": None, "manifest": None, "out": None}
BENCHMARK_DEFAULTS = {
    "manifests": None,
    "out": None,
    "accuracy_csv": None,
    "grid_c1": list(DEFAULT_GRID_VALUES),
    "grid_c2": list(DEFAULT_GRID_VALUES),
    "grid_sigma": list(DEFAULT_GRID_VALUES),
    "epsilon": DEFAULT_EPSILON,
    "kernel": GAUSSIAN_PAPER,
    "folds": 5,
    "seed": 0,
    "ratio": 0.7,
    "stratify": False,
    "workers": 1,
    "solver": PROJECTED_GRADIENT,
    "tol": DEFAULT_TOL,
    "max_iter": DEFAULT_MAX_ITER,
    "cv_tol": CV_SOLVER_OPTIONS.tol,
    "cv_max_iter": CV_SOLVER_OPTIONS.max_iter,
}
STATS_DEFAULTS = {"accuracy_csv": None, "q_alpha": None, "unit": UNIT_FRACTION, "z": DEFAULT_Z, "out": None}


class UsageError(Exception):
    """A required setting is missing or inconsistent."""


def _require(settings: dict, *keys):
    missing = [key for key in keys if settings.get(key) in (None, [])]
    if missing:
        raise UsageError("missing required setting(s): " + ", ".join("--" + key.replace("_", "-") for key in missing))


def _echo(text: str):
    sys.stdout.write(text + "\n")


def cmd_synth(settings: dict) -> int:
    """Generate a synthetic dataset and write it with its manifest."""
    _require(settings, "name", "out")
    if settings["name"] not in SYNTHETIC_NAMES:
        raise UsageError(f"unknown dataset {settings['name']!r}")
    n = settings["n"] if settings["n"] is not None else DEFAULT_SIZES[settings["name"]]
    dataset = generate_synthetic(settings["name"], int(n), int(settings["seed"]))
    manifest_path = save_dataset(dataset, settings["out"])
    _echo(f"wrote {dataset.n_samples} samples to {manifest_path}")
    return EXIT_OK


def _solver_options(settings: dict, prefix: str = "") -> SolverOptions:
    return SolverOptions(
        method=settings["solver"],
        tol=float(settings[prefix + "tol"]),
        max_iter=int(settings[prefix + "max_iter"]),
    )


def cmd_train(settings: dict) -> int:
    """Train on a manifest and save the model; print convergence diagnostics."""
    _require(settings, "manifest", "out")
    manifest = load_manifest(settings["manifest"])
    dataset = load_dataset(manifest)
    kernel_a = KernelSpec(kind=settings["kernel"], sigma=float(settings["sigma"]))
    kernel_b = KernelSpec(
        kind=settings["kernel_b"] or settings["kernel"],
        sigma=float(settings["sigma_b"] if settings["sigma_b"] is not None else settings["sigma"]),
    )
    hp = Hyperparams(
        C1=float(settings["c1"]), C2=float(settings["c2"]), C3=float(settings["c3"]), C4=float(settings["c4"]),
        D1=float(settings["d1"]), D2=float(settings["d2"]),
        eps1=float(settings["epsilon"]), eps2=float(settings["epsilon"]),
        kernel_a=kernel_a, kernel_b=kernel_b,
    )
    preprocessor = ViewPreprocessor.fit(dataset, settings["scaling"] or manifest.scaling)
    model = train(dataset, hp, _solver_options(settings), preprocessor)

    for which, outcome in (("positive", model.diagnostics.positive), ("negative", model.diagnostics.negative)):
        _echo(
            f"{which} dual: iterations={outcome.iterations} converged={outcome.converged} "
            f"residual={outcome.stationarity_residual:.3e} objective={outcome.objective:.10g} "
            f"duality_gap={outcome.duality_gap:.3e}"
        )
    if settings["strict"] and not model.diagnostics.converged:
        raise SolverNotConvergedError(f"dual solver did not reach tol={settings['tol']}")
    save_model(model, settings["out"])
    _echo(f"training accuracy: {model.score(dataset):.4f}")
    return EXIT_OK


def cmd_predict(settings: dict) -> int:
    """Write ``index,f,label`` rows for every sample of a manifest."""
    _require(settings, "model", "manifest", "out")
    model = load_model(settings["model"])
    manifest = load_manifest(settings["manifest"], require_labels=False)
    view_a, view_b, raw_labels = read_views(manifest, require_labels=False)
    values = model.decision_function(view_a, view_b)
    labels = np.array([model.label_map[1] if value < 0.0 else model.label_map[-1] for value in values], dtype=object)
    pd.DataFrame({"index": np.arange(values.shape[0]), "f": values, "label": labels}).to_csv(
        settings["out"], index=False, lineterminator="\n", float_format="%.17g"
    )
    _echo(f"wrote {values.shape[0]} predictions to {settings['out']}")
    if raw_labels is not None:
        truth = np.array([str(value).strip() for value in raw_labels], dtype=object)
        _echo(f"accuracy: {np.mean(truth == labels):.4f}")
    return EXIT_OK


def cmd_benchmark(settings: dict) -> int:
    """Run the benchmark protocol over manifests and write the report."""
    _require(settings, "manifests", "out")
    grid = GridSpec(
        c1_values=tuple(settings["grid_c1"]),
        c2_values=tuple(settings["grid_c2"]),
        sigma_values=tuple(settings["grid_sigma"]),
        epsilon=float(settings["epsilon"]),
        kernel_kind=settings["kernel"],
    )
    report = run_benchmark(
        list(settings["manifests"]),
        grid,
        seed=int(settings["seed"]),
        folds=int(settings["folds"]),
        ratio=float(settings["ratio"]),
        solver_options=_solver_options(settings),
        cv_solver_options=_solver_options(settings, "cv_"),
        stratify=bool(settings["stratify"]),
        max_workers=int(settings["workers"]),
    )
    write_report(report, settings["out"])
    if settings["accuracy_csv"]:
        write_accuracy_csv(report, settings["accuracy_csv"])
    for row in report["rows"]:
        if row["status"] == "ok":
            _echo(f"{row['dataset']}: accuracy={row['metrics']['accuracy']:.4f}")
        else:
            _echo(f"{row['dataset']}: error: {row['error']}")
    if report["rows"] and all(row["status"] != "ok" for row in report["rows"]):
        return EXIT_DATA
    return EXIT_OK


def cmd_stats(settings: dict) -> int:
    """Compare models over an accuracy matrix."""
    _require(settings, "accuracy_csv", "q_alpha")
    acc = AccuracyMatrix.from_csv(settings["accuracy_csv"], unit=settings["unit"])
    report = stats_report(acc, float(settings["q_alpha"]), z=float(settings["z"]))
    text = json.dumps(report, indent=2)
    if settings["out"]:
        with open(settings["out"], "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    _echo(text)
    return EXIT_OK


COMMANDS = {
    "synth": (cmd_synth, SYNTH_DEFAULTS),
    "train": (cmd_train, TRAIN_DEFAULTS),
    "predict": (cmd_predict, PREDICT_DEFAULTS),
    "benchmark": (cmd_benchmark, BENCHMARK_DEFAULTS),
    "stats": (cmd_stats, STATS_DEFAULTS),
}


def _add_solver_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--solver", choices=SOLVER_METHODS, default=None, help="dual solver")
    parser.add_argument("--tol", type=float, default=None, help="stationarity tolerance (default 1e-8)")
    parser.add_argument("--max-iter", type=int, default=None, help="iteration cap (default 50000)")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser; flags default to ``None`` so the config file can fill them."""
    parser = argparse.ArgumentParser(prog="mvtpmsvm", description="Two-view twin parametric-margin SVM toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None, help="JSON file with default settings")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="log debug messages")
    verbosity.add_argument("--quiet", action="store_true", help="log warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="generate a synthetic two-view dataset")
    synth.add_argument("--name", choices=SYNTHETIC_NAMES, default=None)
    synth.add_argument("--n", type=int, default=None, help="number of samples (even)")
    synth.add_argument("--seed", type=int, default=None)
    synth.add_argument("--out", default=None, help="output directory")

    train_cmd = commands.add_parser("train", help="train a model on a dataset manifest")
    train_cmd.add_argument("--manifest", default=None)
    train_cmd.add_argument("--out", default=None, help="model file to write")
    for name in ("c1", "c2", "c3", "c4", "d1", "d2"):
        train_cmd.add_argument(f"--{name}", type=float, default=None)
    train_cmd.add_argument("--epsilon", type=float, default=None, help="eps1 = eps2 (default 0.1)")
    train_cmd.add_argument("--kernel", choices=KERNEL_KINDS, default=None)
    train_cmd.add_argument("--sigma", type=float, default=None)
    train_cmd.add_argument("--kernel-b", choices=KERNEL_KINDS, default=None, help="view B kernel (default: --kernel)")
    train_cmd.add_argument("--sigma-b", type=float, default=None, help="view B width (default: --sigma)")
    train_cmd.add_argument("--scaling", choices=SCALING_MODES, default=None, help="default: manifest scaling")
    _add_solver_flags(train_cmd)
    train_cmd.add_argument("--strict", action="store_true", default=None, help="exit 4 when a dual does not converge")

    predict = commands.add_parser("predict", help="predict with a saved model")
    predict.add_argument("--model", default=None)
    predict.add_argument("--manifest", default=None)
    predict.add_argument("--out", default=None, help="CSV file to write")

    bench = commands.add_parser("benchmark", help="split, tune, refit and test over datasets")
    bench.add_argument("manifests", nargs="*", default=None)
    bench.add_argument("--out", default=None, help="report file to write")
    bench.add_argument("--accuracy-csv", default=None, help="also write the accuracy column as CSV")
    bench.add_argument("--grid-c1", type=float, nargs="+", default=None)
    bench.add_argument("--grid-c2", type=float, nargs="+", default=None)
    bench.add_argument("--grid-sigma", type=float, nargs="+", default=None)
    bench.add_argument("--epsilon", type=float, default=None)
    bench.add_argument("--kernel", choices=KERNEL_KINDS, default=None)
    bench.add_argument("--folds", type=int, default=None)
    bench.add_argument("--seed", type=int, default=None)
    bench.add_argument("--ratio", type=float, default=None)
    bench.add_argument("--stratify", action="store_true", default=None)
    bench.add_argument("--workers", type=int, default=None, help="threads scoring grid points")
    _add_solver_flags(bench)
    bench.add_argument("--cv-tol", type=float, default=None, help="tolerance of the fold fits (default 1e-6)")
    bench.add_argument("--cv-max-iter", type=int, default=None, help="iteration cap of the fold fits (default 20000)")

    stats = commands.add_parser("stats", help="Friedman, Nemenyi and win-tie-loss comparison")
    stats.add_argument("accuracy_csv", nargs="?", default=None)
    stats.add_argument("--q-alpha", type=float, default=None, help="studentized range quantile, e.g. 2.850")
    stats.add_argument("--unit", choices=(UNIT_FRACTION, UNIT_PERCENT), default=None)
    stats.add_argument("--z", type=float, default=None, help="sign-test normal quantile (default 1.96)")
    stats.add_argument("--out", default=None, help="report file to write")
    return parser


def _configure_logging(args: argparse.Namespace):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    """
    Run one command.

    Args:
        argv (list, optional): Arguments without the program name. Defaults to ``sys.argv[1:]``.

    Returns:
        int: The exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return EXIT_OK if ex.code in (0, None) else EXIT_USAGE
    _configure_logging(args)
    handler, defaults = COMMANDS[args.command]

    try:
        config = load_config(args.config) if args.config else {}
        return handler(resolve_settings(args, config, defaults))
    except (UsageError, ManifestError) as ex:
        parser.print_usage(sys.stderr)
        log.error("%s", ex)
        return EXIT_USAGE
    except SolverNotConvergedError as ex:
        log.error("%s", ex)
        return EXIT_NOT_CONVERGED
    except (InvalidArgumentError, DataParseError, OSError) as ex:
        log.error("%s", ex)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
