"""Shared fixtures: a tiny hand-checked CSV and reusable synthetic cohorts."""

from pathlib import Path

import numpy as np
import pytest

from earlypd.data import FEATURE_NAMES, Dataset
from earlypd.preprocess import SplitSpec, normalize_fit_transform, stratified_split
from earlypd.synth import CohortSpec, generate

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fixture_csv() -> Path:
    return DATA_DIR / "fixture_three.csv"


@pytest.fixture(scope="session")
def small_cohort() -> Dataset:
    """90 records, enough signal for every model to beat chance."""
    return generate(CohortSpec(n_healthy=30, n_pd=60, seed=5))


@pytest.fixture(scope="session")
def small_split(small_cohort):
    """(train, test) of the normalized small cohort."""
    scaled, _stats = normalize_fit_transform(small_cohort)
    return stratified_split(scaled, SplitSpec(0.7, 5))


def make_dataset(features, labels, schema=None) -> Dataset:
    """Dataset from plain arrays, with generated ids and a matching schema."""
    features = np.asarray(features, dtype=np.float64)
    if schema is None:
        schema = tuple(f"f{i}" for i in range(features.shape[1]))
    ids = tuple(f"R{i:03d}" for i in range(features.shape[0]))
    return Dataset(ids, features, np.asarray(labels, dtype=np.int64), schema=schema)


@pytest.fixture()
def xor_dataset() -> Dataset:
    X = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]
    y = [0, 1, 1, 0]
    return make_dataset(X, y)


@pytest.fixture(scope="session")
def full_schema_random():
    """Deterministic random (n, 13) matrix in [0, 1] plus balanced labels."""
    rng = np.random.default_rng(77)
    X = rng.random((40, len(FEATURE_NAMES)))
    y = np.array([0, 1] * 20)
    return make_dataset(X, y, schema=FEATURE_NAMES)
