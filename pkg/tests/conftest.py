from pathlib import Path

import pytest
import torch

from corpus.loaders import load_sl
from corpus.synthetic import make_audit_fixture, make_restaurant_dataset
from corpus.types import ModelConfig
from modeling.span_model import build_model

SAMPLE_DATA = Path(__file__).resolve().parent.parent / "sample_data"
GOLDEN_DIR = SAMPLE_DATA / "eval_golden"


def tiny_config(**overrides) -> ModelConfig:
    """A toy backbone small enough for per-test training runs."""
    values = dict(
        hidden_size=32,
        num_layers=2,
        num_heads=4,
        intermediate_size=64,
        head_hidden_size=32,
        vocab_size=512,
        max_position=64,
    )
    values.update(overrides)
    return ModelConfig.toy(**values)


@pytest.fixture(autouse=True)
def _seed_torch():
    torch.manual_seed(0)


@pytest.fixture
def sample_data_dir():
    return SAMPLE_DATA


@pytest.fixture
def bus_path():
    return SAMPLE_DATA / "bus_dialog.json"


@pytest.fixture
def bus_dataset(bus_path):
    return load_sl(bus_path)


@pytest.fixture
def golden_dataset():
    return load_sl(GOLDEN_DIR / "gold.json")


@pytest.fixture
def toy_config():
    return tiny_config()


@pytest.fixture
def toy_model(toy_config):
    return build_model(toy_config, seed=0)


@pytest.fixture
def restaurants_small():
    return make_restaurant_dataset(40, seed=0)


@pytest.fixture(scope="session")
def audit_dataset():
    return make_audit_fixture()
