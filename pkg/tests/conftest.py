"""Shared fixtures: repository paths and loaders for the bundled models and cases."""

import pathlib
import sys

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from engine import run_document  # noqa: E402
from language import ensure_valid, parse_text  # noqa: E402
from matpower import read_case  # noqa: E402

MODELS = ROOT / "data" / "models"
CASES = ROOT / "data" / "cases"


def model_text(name: str) -> str:
    return (MODELS / name).read_text(encoding="utf-8")


def solve_text(text: str, source: str = "<test>", seed: int = 0):
    document = parse_text(text, source)
    ensure_valid(document)
    return run_document(document, seed=seed)


@pytest.fixture
def load_model():
    """Text of a bundled model file."""
    return model_text


@pytest.fixture
def run_model():
    """Parse, validate and run a bundled model file."""

    def run(name: str, seed: int = 0, edit=None):
        text = model_text(name)
        if edit is not None:
            text = edit(text)
        return solve_text(text, name, seed)

    return run


@pytest.fixture
def run_text():
    return solve_text


@pytest.fixture
def load_case():
    def load(name: str):
        return read_case(CASES / name)

    return load


@pytest.fixture
def case_paths():
    return sorted(CASES.glob("*.m"))
