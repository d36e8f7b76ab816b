import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def scenario_dir() -> Path:
    return REPO_ROOT / "scenarios"


@pytest.fixture(scope="session")
def map_dir() -> Path:
    return REPO_ROOT / "scenarios" / "maps"
