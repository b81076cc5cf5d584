"""Experiment orchestration: config handling, split preparation, the full
run, and artifact writing with its cleanup guarantee."""

import json

import numpy as np
import pytest

import earlypd.pipeline
from earlypd.data import export_csv, ingest_csv
from earlypd.errors import ConfigError, EmptyCohort
from earlypd.mlp import MlpConfig
from earlypd.forest import ForestConfig
from earlypd.pipeline import (
    DISPLAY_NAMES,
    MODEL_ORDER,
    GenerateConfig,
    PipelineConfig,
    acquire_dataset,
    config_from_dict,
    load_config,
    load_model_file,
    prepare_splits,
    run_and_write,
    run_experiment,
    save_model_file,
    score_batch,
    write_artifacts,
)

FAST = {
    "mlp": MlpConfig(hidden_units=4, epochs=40),
    "forest": ForestConfig(trees=10),
}


def fast_config(**overrides):
    """Small cohort and light model settings so pipeline tests stay quick."""
    base = dict(
        seed=11,
        generate=GenerateConfig(n_healthy=24, n_pd=40),
        mlp=FAST["mlp"],
        forest=FAST["forest"],
    )
    base.update(overrides)
    return PipelineConfig(**base)


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        PipelineConfig(models=("mlp", "svm"))
    with pytest.raises(ConfigError):
        PipelineConfig(models=())
    with pytest.raises(ConfigError):
        PipelineConfig(train_fraction=0.0)
    with pytest.raises(ConfigError):
        PipelineConfig(train_fraction=1.0)
    with pytest.raises(ConfigError):
        PipelineConfig(normalize_on="test")


def test_ordered_models_follow_canonical_order():
    config = PipelineConfig(models=("boostlr", "mlp"))
    assert config.ordered_models() == ("mlp", "boostlr")


def test_config_json_round_trip():
    config = fast_config(train_fraction=0.6, models=("forest", "bayesnet"),
                         normalize_on="train")
    again = config_from_dict(config.to_json_dict())
    assert again == config


def test_config_from_partial_dict_uses_defaults():
    config = config_from_dict({"seed": 7})
    assert config.seed == 7
    assert config.models == MODEL_ORDER
    assert config.train_fraction == 0.7
    assert config.generate == GenerateConfig()


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        config_from_dict({"mlp": {"neurons": 12}})
    with pytest.raises(ConfigError):
        config_from_dict({"generate": {"count": 5}})


def test_load_config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"seed": 3, "models": ["mlp"]}))
    config = load_config(path)
    assert config.seed == 3
    assert config.models == ("mlp",)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    array = tmp_path / "array.json"
    array.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(array)


def test_acquire_dataset_generates_by_default():
    config = fast_config()
    ds = acquire_dataset(config)
    assert ds.class_counts() == (24, 40)
    # same config gives the same cohort, a different seed does not
    again = acquire_dataset(config)
    assert np.array_equal(ds.features, again.features)
    other = acquire_dataset(fast_config(seed=12))
    assert not np.array_equal(ds.features, other.features)


def test_acquire_dataset_reads_input(fixture_csv):
    config = fast_config(input=str(fixture_csv))
    ds = acquire_dataset(config)
    assert len(ds) == 3
    assert ds.subject_ids[0] == "S001"


def test_prepare_splits_whole_dataset_normalization():
    config = fast_config(normalize_on="all")
    ds = acquire_dataset(config)
    train, test, stats = prepare_splits(config, ds)
    assert len(train) + len(test) == len(ds)
    # min-max over the whole cohort puts both splits inside the unit cube
    for part in (train, test):
        assert part.features.min() >= 0.0
        assert part.features.max() <= 1.0
    combined = np.vstack([train.features, test.features])
    assert combined.min(axis=0) == pytest.approx(np.zeros(13), abs=1e-12)
    assert combined.max(axis=0) == pytest.approx(np.ones(13), abs=1e-12)


def test_prepare_splits_train_only_normalization():
    config = fast_config(normalize_on="train")
    ds = acquire_dataset(config)
    train, test, stats = prepare_splits(config, ds)
    # the scaler saw only the training split, so training spans the unit
    # cube exactly; the whole-dataset path fits different extremes whenever
    # a global extreme lands in the test split
    assert train.features.min(axis=0) == pytest.approx(np.zeros(13), abs=1e-12)
    assert train.features.max(axis=0) == pytest.approx(np.ones(13), abs=1e-12)
    _, test_all, stats_all = prepare_splits(fast_config(normalize_on="all"), ds)
    assert stats.pairs != stats_all.pairs
    assert not np.array_equal(test.features, test_all.features)


def test_split_is_stratified():
    config = fast_config()
    ds = acquire_dataset(config)
    train, test, _ = prepare_splits(config, ds)
    # 0.7 of 24 healthy rounds to 17, 0.7 of 40 pd is 28
    assert train.class_counts() == (17, 28)
    assert test.class_counts() == (7, 12)


def test_run_experiment_structure():
    config = fast_config(models=("forest", "boostlr"))
    result = run_experiment(config)
    assert set(result.models) == {"forest", "boostlr"}
    assert set(result.evaluations) == {"forest", "boostlr"}
    for by_split in result.evaluations.values():
        assert set(by_split) == {"training", "testing"}
    assert result.elapsed_seconds > 0.0
    header = result.report_csv.splitlines()[0]
    assert header.split(",") == ["measure", "model", "split", "value"]
    assert "Random Forest" in result.report_text
    assert "Boosted Logistic Regression" in result.report_text


def test_score_and_model_file_dispatch(tmp_path):
    config = fast_config(models=("forest",))
    result = run_experiment(config)
    model = result.models["forest"]
    path = tmp_path / "forest.json"
    save_model_file("forest", model, path)
    again = load_model_file("forest", path)
    assert np.array_equal(score_batch("forest", again, result.test.features),
                          score_batch("forest", model, result.test.features))


EXPECTED_FILES = {
    "cohort.csv", "preprocess.json", "evaluations.json", "report.csv",
    "report.txt", "run_config.json", "metadata.json",
}


def test_write_artifacts_file_set(tmp_path):
    config = fast_config(models=("mlp", "forest"))
    result = run_experiment(config)
    written = write_artifacts(result, tmp_path / "out")
    names = {p.relative_to(tmp_path / "out").as_posix() for p in written}
    expected = EXPECTED_FILES | {
        "models/mlp.json", "models/forest.json",
        "roc_mlp_test.csv", "roc_mlp_test.svg",
        "roc_forest_test.csv", "roc_forest_test.svg",
    }
    assert names == expected
    for p in written:
        assert p.is_file() and p.stat().st_size > 0
    evals = json.loads((tmp_path / "out" / "evaluations.json").read_text())
    assert evals["model_order"] == ["mlp", "forest"]
    assert set(evals["models"]) == {"mlp", "forest"}
    config_round = json.loads((tmp_path / "out" / "run_config.json").read_text())
    assert config_from_dict(config_round) == config


def test_write_artifacts_skips_cohort_for_csv_input(small_cohort, tmp_path):
    source = tmp_path / "input.csv"
    export_csv(small_cohort, source)
    config = fast_config(input=str(source), models=("forest",))
    result = run_experiment(config)
    written = write_artifacts(result, tmp_path / "out")
    assert not (tmp_path / "out" / "cohort.csv").exists()
    meta = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert meta["input"] == str(source)
    assert all(p.exists() for p in written)


def test_write_artifacts_cleans_up_on_failure(tmp_path, monkeypatch):
    config = fast_config(models=("mlp", "forest"))
    result = run_experiment(config)

    def boom(model, path):
        raise OSError("disk full")

    # the forest writer runs after several files already exist
    monkeypatch.setitem(earlypd.pipeline._SAVERS, "forest", boom)
    out = tmp_path / "out"
    with pytest.raises(OSError):
        write_artifacts(result, out)
    leftovers = [p for p in out.rglob("*") if p.is_file()]
    assert leftovers == []


def test_runs_are_deterministic():
    config = fast_config(models=("forest", "bayesnet"))
    first = run_experiment(config)
    second = run_experiment(config)
    assert first.report_csv == second.report_csv
    assert first.report_text == second.report_text
    assert np.array_equal(first.train.features, second.train.features)


def test_run_and_write_round_trips_report(tmp_path):
    config = fast_config(models=("boostlr",))
    result = run_and_write(config, tmp_path)
    assert (tmp_path / "report.csv").read_text() == result.report_csv
    saved = ingest_csv(tmp_path / "cohort.csv", strict=True)
    assert np.array_equal(saved.features, result.dataset.features)
    assert saved.subject_ids == result.dataset.subject_ids


def test_generated_cohort_rejects_bad_counts():
    with pytest.raises(EmptyCohort):
        run_experiment(fast_config(generate=GenerateConfig(n_healthy=0, n_pd=0)))
