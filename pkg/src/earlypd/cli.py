"""Command line interface.

Subcommands:

    generate    synthesize a cohort CSV
    validate    check a cohort CSV against the schema and list violations
    experiment  full run: data -> normalize -> split -> train -> report
    train       fit and save models (plus preprocessing sidecar) only
    evaluate    score a saved model against a CSV, print metrics JSON
    report      re-render the metrics table from evaluations.json
    roc         re-render one ROC curve (csv or svg) from evaluations.json

Exit codes: 0 success, 1 data problem, 2 bad configuration or usage.
Failures print a single JSON line to stderr so callers can parse them.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._version import __version__
from .data import export_csv, ingest_csv, validate_file
from .errors import ConfigError, DataError
from .metrics import (
    SPLITS,
    EvaluationReport,
    evaluate_scores,
    render_report_csv,
    render_report_text,
    roc_csv,
    roc_svg,
)
from .pipeline import (
    DISPLAY_NAMES,
    MODEL_ORDER,
    PipelineConfig,
    acquire_dataset,
    config_from_dict,
    load_config,
    load_model_file,
    prepare_splits,
    run_and_write,
    save_model_file,
    score_batch,
    train_models,
)
from .preprocess import load_sidecar, normalize_apply, save_sidecar
from .synth import CohortSpec, generate, load_params


def _add_generate_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None,
                        help="root seed for every random stream (default 42)")
    parser.add_argument("--n-healthy", type=int, default=None,
                        help="healthy records to synthesize (default 184)")
    parser.add_argument("--n-pd", type=int, default=None,
                        help="PD records to synthesize (default 402)")
    parser.add_argument("--separation", type=float, default=None,
                        help="class separation scale; 0 removes all signal, "
                             "1 keeps the configured gap")
    parser.add_argument("--params", default=None,
                        help="JSON file with generator feature parameters")


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None,
                        help="JSON config file; flags override its values")
    parser.add_argument("--input", default=None,
                        help="cohort CSV to ingest instead of generating one")
    parser.add_argument("--train-fraction", type=float, default=None,
                        help="fraction of each class placed in the training split")
    parser.add_argument("--models", default=None,
                        help="comma separated subset of: " + ", ".join(MODEL_ORDER))
    parser.add_argument("--normalize-on", choices=("all", "train"), default=None,
                        help="fit min/max on the whole cohort or on the training "
                             "split only")
    _add_generate_flags(parser)


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, then the config file, then CLI flags. Last writer wins."""
    if args.config is not None:
        base = load_config(args.config).to_json_dict()
    else:
        base = PipelineConfig().to_json_dict()
    if args.input is not None:
        base["input"] = args.input
    if args.seed is not None:
        base["seed"] = args.seed
    if args.train_fraction is not None:
        base["train_fraction"] = args.train_fraction
    if args.models is not None:
        base["models"] = [m.strip() for m in args.models.split(",") if m.strip()]
    if args.normalize_on is not None:
        base["normalize_on"] = args.normalize_on
    gen = base["generate"]
    if args.n_healthy is not None:
        gen["n_healthy"] = args.n_healthy
    if args.n_pd is not None:
        gen["n_pd"] = args.n_pd
    if args.separation is not None:
        gen["separation"] = args.separation
    if args.params is not None:
        gen["params_path"] = args.params
    return config_from_dict(base)


def cmd_generate(args: argparse.Namespace) -> int:
    params = load_params(args.params)
    spec = CohortSpec(
        n_healthy=args.n_healthy if args.n_healthy is not None else 184,
        n_pd=args.n_pd if args.n_pd is not None else 402,
        separation=args.separation if args.separation is not None else 1.0,
        seed=args.seed if args.seed is not None else 42,
        params=params,
    )
    ds = generate(spec)
    export_csv(ds, args.out)
    healthy, pd = ds.class_counts()
    print(f"wrote {args.out} ({healthy} healthy, {pd} pd)")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    findings = validate_file(args.input)
    for row, column, kind, message in findings:
        where = f"row {row}" if row is not None else "header"
        if column is not None:
            where += f", column {column}"
        print(f"{where}: {kind}: {message}")
    if findings:
        print(f"{len(findings)} problem(s) found")
        return 1
    print("ok")
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    config = _build_config(args)
    result = run_and_write(config, args.out)
    print(result.report_text)
    print(f"artifacts written to {args.out} "
          f"({result.elapsed_seconds:.1f}s)")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = _build_config(args)
    ds = acquire_dataset(config)
    train, _test, stats = prepare_splits(config, ds)
    models = train_models(config, train)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "models").mkdir(exist_ok=True)
    if config.input is None:
        export_csv(ds, out / "cohort.csv")
    dmap = models["bayesnet"].dmap if "bayesnet" in models else None
    save_sidecar(out / "preprocess.json", stats, dmap)
    for name, model in models.items():
        save_model_file(name, model, out / "models" / f"{name}.json")
    (out / "run_config.json").write_text(
        json.dumps(config.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    print(f"trained {', '.join(models)} on {len(train)} records; "
          f"models under {out / 'models'}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    with open(args.model, encoding="utf-8") as fh:
        obj = json.load(fh)
    kind = obj.get("kind") if isinstance(obj, dict) else None
    if kind not in MODEL_ORDER:
        raise ConfigError(f"{args.model} is not a saved model file")
    model = load_model_file(kind, args.model)
    ds = ingest_csv(args.input, strict=True)
    stats, _dmap = load_sidecar(args.preprocess)
    scaled = normalize_apply(ds, stats)
    report = evaluate_scores(scaled.labels,
                             score_batch(kind, model, scaled.features))
    payload = {"model": kind, "records": len(ds), **report.to_json_dict()}
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _load_evaluations(path):
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    try:
        order = [m for m in obj["model_order"] if m in MODEL_ORDER]
        reports = {
            name: {split: EvaluationReport.from_json_dict(rep)
                   for split, rep in by_split.items()}
            for name, by_split in obj["models"].items()
        }
    except (KeyError, TypeError) as err:
        raise ConfigError(f"{path} is not an evaluations file: {err}") from None
    return order, reports


def cmd_report(args: argparse.Namespace) -> int:
    order, reports = _load_evaluations(args.evaluations)
    if args.format == "csv":
        text = render_report_csv(reports, order)
    else:
        text = render_report_text(reports, order, DISPLAY_NAMES)
    if args.out is not None:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_roc(args: argparse.Namespace) -> int:
    _order, reports = _load_evaluations(args.evaluations)
    if args.model not in reports:
        raise ConfigError(f"no evaluation for model {args.model!r}")
    curve = reports[args.model][args.split].roc
    if args.format == "svg":
        text = roc_svg(curve, f"ROC ({DISPLAY_NAMES[args.model]}, {args.split} split)")
    else:
        text = roc_csv(curve)
    if args.out is not None:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="earlypd",
        description="Early PD prediction pipeline on clinical-style cohorts.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a cohort CSV")
    _add_generate_flags(p)
    p.add_argument("--out", default="cohort.csv", help="output CSV path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="check a cohort CSV for schema violations")
    p.add_argument("input", help="cohort CSV path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("experiment", help="run the full pipeline and write artifacts")
    _add_experiment_flags(p)
    p.add_argument("--out", default="runs/experiment", help="artifact directory")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("train", help="fit and save models without evaluation artifacts")
    _add_experiment_flags(p)
    p.add_argument("--out", default="runs/train", help="artifact directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model against a CSV")
    p.add_argument("--model", required=True, help="saved model JSON file")
    p.add_argument("--input", required=True, help="cohort CSV path")
    p.add_argument("--preprocess", required=True,
                   help="preprocess.json sidecar with normalization stats")
    p.add_argument("--out", default=None, help="write metrics JSON here instead of stdout")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="render the metrics table from evaluations.json")
    p.add_argument("--evaluations", required=True, help="evaluations.json path")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out", default=None, help="write here instead of stdout")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("roc", help="render one ROC curve from evaluations.json")
    p.add_argument("--evaluations", required=True, help="evaluations.json path")
    p.add_argument("--model", required=True, choices=MODEL_ORDER)
    p.add_argument("--split", choices=SPLITS, default="testing")
    p.add_argument("--format", choices=("csv", "svg"), default="csv")
    p.add_argument("--out", default=None, help="write here instead of stdout")
    p.set_defaults(func=cmd_roc)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on --help and usage errors
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except DataError as err:
        payload = {"error": "data", "kind": type(err).__name__,
                   "message": str(err)}
        if err.row is not None:
            payload["row"] = err.row
        if err.column is not None:
            payload["column"] = err.column
        print(json.dumps(payload), file=sys.stderr)
        return 1
    except ConfigError as err:
        print(json.dumps({"error": "config", "message": str(err)}),
              file=sys.stderr)
        return 2
    except OSError as err:
        print(json.dumps({"error": "io", "message": str(err)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
