import json
import os
import subprocess
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("OSCID_CLI")
    if not path:
        pytest.skip("OSCID_CLI is not set")

    def run(*args, env=None, cwd=None):
        merged = {k: v for k, v in os.environ.items() if not k.startswith("OSCID_")}
        merged.update(env or {})
        return subprocess.run([path, *map(str, args)], capture_output=True, text=True, env=merged, cwd=cwd)

    return run


@pytest.fixture(scope="session")
def schema():
    path = os.environ.get("OSCID_SCHEMA", ROOT / "schemas" / "report.schema.json")
    return json.loads(Path(path).read_text())


@pytest.fixture(scope="session")
def golden_input():
    return ROOT / "tests" / "golden" / "input.csv"
