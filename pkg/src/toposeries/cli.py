"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 computation error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict

from .exceptions import ComputationError, ConfigError, PipelineError, ScaleMismatchError
from .metrics import bottleneck
from .patterns import PATTERNS, PatternConfig, balance_report, label_patterns
from .persistence import PersistenceDiagram
from .pipeline import (
    ClassifyDemoConfig,
    PipelineConfig,
    classify_demo,
    diagram_of,
    emit_plot_data,
    env_seed,
    featurize,
    featurize_many,
    load_config,
    parse_grid,
)
from .stability import StabilityConfig, run_stability_suite
from .timeseries import GeneratorSpec, generate, load_csv, parse_params

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def _column(value: str):
    return int(value) if value.lstrip("-").isdigit() else value


def _flags(args, names) -> dict:
    return {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}


# featurize

FEATURIZE_FLAGS = ("m", "tau", "pca_dims", "center", "n_dim", "d_max", "summary", "order", "q",
                   "kappa", "concat", "dt", "simplex_cap", "input", "output")


def cmd_featurize(args) -> int:
    base = load_config(args.config) if args.config else {}
    config = PipelineConfig.from_dict({**base, **_flags(args, FEATURIZE_FLAGS)})
    columns = args.column or [config.column]
    if config.input is None:
        raise ConfigError("featurize needs --input (or 'input' in the config file)")
    series = [load_csv(config.input, column=c, dt=config.dt) for c in columns]
    fv = featurize(config, series[0]) if len(series) == 1 else featurize_many(config, series)
    _write(config.output, fv.to_json())
    if args.plot_data:
        _write(args.plot_data, emit_plot_data(fv))
    if args.diagram_out:
        _, _, dgm = diagram_of(config, series[0])
        _write(args.diagram_out, dgm.to_json())
    return EXIT_OK


# generate

def cmd_generate(args) -> int:
    spec = GeneratorSpec(args.kind, args.n, env_seed(args.seed), parse_params(args.params))
    ts = generate(spec)
    buf = ["value"] + [repr(float(v)) for v in ts.values]
    _write(args.out, "\n".join(buf) + "\n")
    return EXIT_OK


# stability-test

def cmd_stability(args) -> int:
    data = load_config(args.config) if args.config else {}
    data.update(_flags(args, ("trials", "seed")))
    data["seed"] = env_seed(data.get("seed", 0))
    report = run_stability_suite(StabilityConfig.from_dict(data))
    _write(args.out, report.to_json(indent=1))
    print(f"stability: {report.n_passed}/{len(report.trials)} trials within bound; "
          f"max observed/bound ratio {report.max_ratio:.4g}", file=sys.stderr)
    return EXIT_OK


# classify-demo

DEMO_FLAGS = ("sequences_per_class", "N", "knn_k", "train_fraction", "seed", "n_jobs")


def cmd_classify(args) -> int:
    data = load_config(args.config) if args.config else {}
    data.update(_flags(args, DEMO_FLAGS))
    data["seed"] = env_seed(data.get("seed", 0))
    pipeline = dict(data.get("pipeline", {}))
    pipeline.update(_flags(args, ("m", "tau", "pca_dims", "n_dim", "d_max", "summary", "kappa")))
    data["pipeline"] = pipeline
    if args.grid:
        data["grid"] = parse_grid(args.grid)
    report = classify_demo(ClassifyDemoConfig.from_dict(data))
    _write(args.out, report.to_json(indent=1))
    print(f"accuracy {report.accuracy:.4f} (error rate {report.error_rate:.4f}) on {report.n_test} test sequences",
          file=sys.stderr)
    return EXIT_OK


# bottleneck

def _read_diagram(path) -> PersistenceDiagram:
    try:
        with open(path, encoding="utf-8") as fh:
            return PersistenceDiagram.from_json(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read diagram {path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed diagram file {path}: {exc}") from exc


def cmd_bottleneck(args) -> int:
    d = bottleneck(_read_diagram(args.a), _read_diagram(args.b), args.dim)
    print(repr(float(d)))
    return EXIT_OK


# label-patterns

def cmd_label_patterns(args) -> int:
    cfg = PatternConfig(**_flags(args, ("k", "alpha", "n_training", "n_test")))
    prices = load_csv(args.input, column=args.column if args.column is not None else 0)
    patterns = tuple(args.patterns.split(",")) if args.patterns else PATTERNS
    results = label_patterns(prices, cfg, patterns)
    if args.out:
        rows = [["t", "pattern", "label"]]
        for name, res in results.items():
            rows.extend([int(t), name, int(lab)] for t, lab in zip(res.times, res.labels))
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc}") from exc
    print(json.dumps({"config": asdict(cfg), "balance": balance_report(results)}))
    return EXIT_OK


def _auto_int(value: str):
    return value if value == "auto" else int(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toposeries", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize", help="topological features of a CSV series")
    p.add_argument("--input")
    p.add_argument("--config")
    p.add_argument("--column", type=_column, action="append",
                   help="value column (name or 0-based index); repeat to concatenate several series")
    p.add_argument("--dt", type=float)
    p.add_argument("--m", type=_auto_int)
    p.add_argument("--tau", type=_auto_int)
    p.add_argument("--pca-dims", dest="pca_dims", type=int)
    p.add_argument("--center", action="store_true", default=None)
    p.add_argument("--ndim", dest="n_dim", type=int)
    p.add_argument("--dmax", dest="d_max", type=float)
    p.add_argument("--summary", choices=("landscape", "silhouette"))
    p.add_argument("--order", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--concat", action="store_true", default=None)
    p.add_argument("--cap", dest="simplex_cap", type=int)
    p.add_argument("--out", dest="output")
    p.add_argument("--plot-data", dest="plot_data")
    p.add_argument("--diagram-out", dest="diagram_out")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("generate", help="synthesize a series from one of the stochastic models")
    p.add_argument("--kind", required=True, choices=("arima112", "sinusoid", "ou"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--params")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stability-test", help="check the sampling-noise bounds empirically")
    p.add_argument("--config")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("classify-demo", help="k-NN classification of the three stochastic models")
    p.add_argument("--config")
    p.add_argument("--sequences-per-class", dest="sequences_per_class", type=int)
    p.add_argument("--n", dest="N", type=int)
    p.add_argument("--knn-k", dest="knn_k", type=int)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-jobs", dest="n_jobs", type=int)
    p.add_argument("--grid", help="e.g. m=10,25,tau=1,5")
    p.add_argument("--m", type=_auto_int)
    p.add_argument("--tau", type=_auto_int)
    p.add_argument("--pca-dims", dest="pca_dims", type=int)
    p.add_argument("--ndim", dest="n_dim", type=int)
    p.add_argument("--dmax", dest="d_max", type=float)
    p.add_argument("--summary", choices=("landscape", "silhouette"))
    p.add_argument("--kappa", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bottleneck", help="bottleneck distance between two diagram files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.set_defaults(func=cmd_bottleneck)

    p = sub.add_parser("label-patterns", help="P1-P4 labels of a price CSV under the rolling protocol")
    p.add_argument("--input", required=True)
    p.add_argument("--column", type=_column)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n-training", dest="n_training", type=int)
    p.add_argument("--n-test", dest="n_test", type=int)
    p.add_argument("--patterns", help="comma-separated subset of P1,P2,P3,P4")
    p.add_argument("--out")
    p.set_defaults(func=cmd_label_patterns)
    return parser


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, PipelineError):
        return exit_code(exc.cause)
    if isinstance(exc, (ConfigError, ScaleMismatchError)):
        return EXIT_CONFIG
    if isinstance(exc, ComputationError):
        return EXIT_COMPUTE
    raise exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScaleMismatchError, ComputationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
