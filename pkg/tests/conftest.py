import os
from pathlib import Path

import pytest

from metamix import Dataset, Study, parse_csv

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"

SYNTHETIC_FILES = {
    1: DATA_DIR / "synthetic_k1.csv",
    2: DATA_DIR / "synthetic_k2.csv",
    3: DATA_DIR / "synthetic_k3.csv",
    5: DATA_DIR / "synthetic_k5.csv",
}


@pytest.fixture(scope="session")
def synthetic_datasets() -> dict[int, Dataset]:
    return {k: parse_csv(path) for k, path in SYNTHETIC_FILES.items()}


@pytest.fixture(scope="session")
def three_study_dataset() -> Dataset:
    return Dataset((Study("S1", -0.5, 0.4), Study("S2", 0.1, 0.3), Study("S3", 0.9, 0.5)))


@pytest.fixture(scope="session")
def two_study_dataset() -> Dataset:
    return Dataset((Study("A", 0.0, 1.0), Study("B", 2.0, 1.0)))


def smoking_csv_path() -> Path | None:
    env = os.environ.get("META_SMOKING_CSV")
    if env:
        return Path(env)
    default = DATA_DIR / "smoking_cessation.csv"
    return default if default.exists() else None
