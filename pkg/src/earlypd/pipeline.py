"""End-to-end experiment orchestration shared by the CLI subcommands.

One root seed drives everything through labeled streams ("generate", "split",
"mlp", "tree/<i>"), so reruns with the same config are byte-identical and
enabling or disabling one model never changes what the others see. All
artifact content is computed in memory before anything touches disk; a
failure therefore leaves no partial artifacts behind.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from ._version import __version__
from .bayesnet import BayesNetConfig, bn_score_batch, bn_train
from .bayesnet import load_model as load_bayesnet
from .bayesnet import save_model as save_bayesnet
from .boostlr import adaboost_train, boosted_score_batch
from .boostlr import load_model as load_boostlr
from .boostlr import save_model as save_boostlr
from .data import Dataset, export_csv, ingest_csv
from .errors import ConfigError
from .forest import ForestConfig, forest_score_batch, forest_train
from .forest import load_model as load_forest
from .forest import save_model as save_forest
from .metrics import (
    EvaluationReport,
    evaluate_scores,
    render_report_csv,
    render_report_text,
    roc_csv,
    roc_svg,
)
from .mlp import MlpConfig, mlp_score_batch, mlp_train
from .mlp import load_model as load_mlp
from .mlp import save_model as save_mlp
from .preprocess import (
    SplitSpec,
    discretize_fit,
    normalize_apply,
    normalize_fit_transform,
    save_sidecar,
    stratified_split,
)
from .synth import CohortSpec, generate, load_params

MODEL_ORDER = ("mlp", "bayesnet", "forest", "boostlr")
DISPLAY_NAMES = {
    "mlp": "Multilayer Perceptron",
    "bayesnet": "BayesNet",
    "forest": "Random Forest",
    "boostlr": "Boosted Logistic Regression",
}


@dataclass(frozen=True)
class BoostConfig:
    max_rounds: int = 10
    ridge: float = 1e-8


@dataclass(frozen=True)
class GenerateConfig:
    n_healthy: int = 184
    n_pd: int = 402
    separation: float = 1.0
    params_path: str | None = None


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 42
    input: str | None = None  # CSV path; None means generate a cohort
    generate: GenerateConfig = field(default_factory=GenerateConfig)
    train_fraction: float = 0.7
    models: tuple = MODEL_ORDER
    normalize_on: str = "all"  # scale before splitting, or fit on train only
    mlp: MlpConfig = field(default_factory=MlpConfig)
    bayesnet: BayesNetConfig = field(default_factory=BayesNetConfig)
    forest: ForestConfig = field(default_factory=ForestConfig)
    boostlr: BoostConfig = field(default_factory=BoostConfig)

    def __post_init__(self):
        unknown = [m for m in self.models if m not in MODEL_ORDER]
        if unknown:
            raise ConfigError(f"unknown models: {', '.join(unknown)}")
        if not self.models:
            raise ConfigError("at least one model must be selected")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.normalize_on not in ("all", "train"):
            raise ConfigError("normalize_on must be 'all' or 'train'")

    def ordered_models(self) -> tuple:
        return tuple(m for m in MODEL_ORDER if m in self.models)

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "input": self.input,
            "generate": {
                "n_healthy": self.generate.n_healthy,
                "n_pd": self.generate.n_pd,
                "separation": self.generate.separation,
                "params_path": self.generate.params_path,
            },
            "train_fraction": self.train_fraction,
            "models": list(self.models),
            "normalize_on": self.normalize_on,
            "mlp": {"hidden_units": self.mlp.hidden_units,
                    "learning_rate": self.mlp.learning_rate,
                    "momentum": self.mlp.momentum, "epochs": self.mlp.epochs},
            "bayesnet": {"bins": self.bayesnet.bins,
                         "strategy": self.bayesnet.strategy,
                         "max_parents": self.bayesnet.max_parents,
                         "alpha": self.bayesnet.alpha},
            "forest": {"trees": self.forest.trees,
                       "feature_subset": self.forest.feature_subset,
                       "bootstrap": self.forest.bootstrap},
            "boostlr": {"max_rounds": self.boostlr.max_rounds,
                        "ridge": self.boostlr.ridge},
        }


def config_from_dict(obj: dict) -> PipelineConfig:
    """PipelineConfig from a parsed JSON config file."""
    try:
        gen = GenerateConfig(**obj.get("generate", {}))
        return PipelineConfig(
            seed=obj.get("seed", 42),
            input=obj.get("input"),
            generate=gen,
            train_fraction=obj.get("train_fraction", 0.7),
            models=tuple(obj.get("models", MODEL_ORDER)),
            normalize_on=obj.get("normalize_on", "all"),
            mlp=MlpConfig(**obj.get("mlp", {})),
            bayesnet=BayesNetConfig(**obj.get("bayesnet", {})),
            forest=ForestConfig(**obj.get("forest", {})),
            boostlr=BoostConfig(**obj.get("boostlr", {})),
        )
    except TypeError as err:
        raise ConfigError(f"bad config file: {err}") from None


def load_config(path) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file is not valid JSON: {err}") from None
    if not isinstance(obj, dict):
        raise ConfigError("config file must hold a JSON object")
    return config_from_dict(obj)


def acquire_dataset(config: PipelineConfig) -> Dataset:
    """Ingest the configured CSV, or generate a synthetic cohort."""
    if config.input is not None:
        return ingest_csv(config.input, strict=True)
    params = load_params(config.generate.params_path)
    spec = CohortSpec(config.generate.n_healthy, config.generate.n_pd,
                      config.generate.separation, config.seed, params)
    return generate(spec)


def prepare_splits(config: PipelineConfig, ds: Dataset):
    """(train, test, stats) after normalization and stratified splitting."""
    split_spec = SplitSpec(config.train_fraction, config.seed)
    if config.normalize_on == "all":
        scaled, stats = normalize_fit_transform(ds)
        train, test = stratified_split(scaled, split_spec)
    else:
        raw_train, raw_test = stratified_split(ds, split_spec)
        train, stats = normalize_fit_transform(raw_train)
        test = normalize_apply(raw_test, stats)
    return train, test, stats


def train_models(config: PipelineConfig, train: Dataset) -> dict:
    models = {}
    for name in config.ordered_models():
        if name == "mlp":
            models[name] = mlp_train(train, config.mlp, config.seed)
        elif name == "bayesnet":
            models[name] = bn_train(train, config.bayesnet)
        elif name == "forest":
            models[name] = forest_train(train, config.forest, config.seed)
        elif name == "boostlr":
            models[name] = adaboost_train(train, config.boostlr.max_rounds,
                                          config.boostlr.ridge)
    return models


_SCORERS = {
    "mlp": mlp_score_batch,
    "bayesnet": bn_score_batch,
    "forest": forest_score_batch,
    "boostlr": boosted_score_batch,
}
_SAVERS = {
    "mlp": save_mlp,
    "bayesnet": save_bayesnet,
    "forest": save_forest,
    "boostlr": save_boostlr,
}
_LOADERS = {
    "mlp": load_mlp,
    "bayesnet": load_bayesnet,
    "forest": load_forest,
    "boostlr": load_boostlr,
}


def score_batch(name: str, model, features):
    return _SCORERS[name](model, features)


def load_model_file(name: str, path):
    return _LOADERS[name](path)


def save_model_file(name: str, model, path):
    _SAVERS[name](model, path)


def evaluate_models(models: dict, train: Dataset, test: Dataset) -> dict:
    out = {}
    for name, model in models.items():
        out[name] = {
            "training": evaluate_scores(train.labels, score_batch(name, model, train.features)),
            "testing": evaluate_scores(test.labels, score_batch(name, model, test.features)),
        }
    return out


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: PipelineConfig
    dataset: Dataset
    train: Dataset
    test: Dataset
    stats: object
    models: dict
    evaluations: dict
    report_csv: str
    report_text: str
    elapsed_seconds: float


def run_experiment(config: PipelineConfig) -> ExperimentResult:
    started = time.perf_counter()
    ds = acquire_dataset(config)
    train, test, stats = prepare_splits(config, ds)
    models = train_models(config, train)
    evaluations = evaluate_models(models, train, test)
    order = config.ordered_models()
    report = render_report_csv(evaluations, order)
    text = render_report_text(evaluations, order, DISPLAY_NAMES)
    return ExperimentResult(config, ds, train, test, stats, models, evaluations,
                            report, text, time.perf_counter() - started)


def _write_text(path: Path, content: str, written: list) -> None:
    path.write_text(content, encoding="utf-8")
    written.append(path)


def write_artifacts(result: ExperimentResult, out_dir) -> list:
    """Write every experiment artifact under out_dir; returns written paths.

    Timestamps live only in metadata.json, so every other artifact is
    byte-identical across reruns of the same config. If any write fails, the
    files written so far are removed.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "models").mkdir(exist_ok=True)
    written = []
    config = result.config
    try:
        if config.input is None:
            export_csv(result.dataset, out / "cohort.csv")
            written.append(out / "cohort.csv")
        dmap = None
        if "bayesnet" in result.models:
            dmap = result.models["bayesnet"].dmap
        save_sidecar(out / "preprocess.json", result.stats, dmap)
        written.append(out / "preprocess.json")
        for name, model in result.models.items():
            path = out / "models" / f"{name}.json"
            _SAVERS[name](model, path)
            written.append(path)
        evaluations = {
            "model_order": list(config.ordered_models()),
            "models": {
                name: {split: report.to_json_dict()
                       for split, report in by_split.items()}
                for name, by_split in result.evaluations.items()
            },
        }
        _write_text(out / "evaluations.json",
                    json.dumps(evaluations, indent=2, sort_keys=True) + "\n", written)
        _write_text(out / "report.csv", result.report_csv, written)
        _write_text(out / "report.txt", result.report_text, written)
        for name in config.ordered_models():
            curve = result.evaluations[name]["testing"].roc
            _write_text(out / f"roc_{name}_test.csv", roc_csv(curve), written)
            _write_text(out / f"roc_{name}_test.svg",
                        roc_svg(curve, f"ROC ({DISPLAY_NAMES[name]}, test split)"),
                        written)
        _write_text(out / "run_config.json",
                    json.dumps(config.to_json_dict(), indent=2, sort_keys=True) + "\n",
                    written)
        metadata = {
            "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "package_version": __version__,
            "elapsed_seconds": result.elapsed_seconds,
            "input": config.input if config.input is not None else "generated",
        }
        _write_text(out / "metadata.json",
                    json.dumps(metadata, indent=2, sort_keys=True) + "\n", written)
    except Exception:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        raise
    return written


def run_and_write(config: PipelineConfig, out_dir) -> ExperimentResult:
    result = run_experiment(config)
    write_artifacts(result, out_dir)
    return result
