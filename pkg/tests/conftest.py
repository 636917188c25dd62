from pathlib import Path

import pytest

from mpec_cq.model import load_problem

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


@pytest.fixture(scope="session")
def ex41():
    return load_problem(str(PROBLEMS / "ex41.toml"))


@pytest.fixture(scope="session")
def ex41_reversed():
    return load_problem(str(PROBLEMS / "ex41_reversed_field.toml"))


@pytest.fixture(scope="session")
def identity_field():
    return load_problem(str(PROBLEMS / "identity_field.toml"))


@pytest.fixture(scope="session")
def problems_dir():
    return PROBLEMS
