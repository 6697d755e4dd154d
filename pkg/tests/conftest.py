from pathlib import Path

import numpy as np
import pytest

from gmtpool.graphs.graph import Dataset, Graph
from gmtpool.graphs.tu import save_tu_dataset
from gmtpool.logging import setup_logger

MUTAG_DIR = Path(__file__).resolve().parent.parent / "data" / "MUTAG"


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance run, needs --runslow")
    # stderr only; test runs must not create log files
    setup_logger("WARNING", to_file=False)


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def _toy_graphs() -> list[Graph]:
    """Six small labelled graphs: triangles and paths, two node-label values."""
    graphs = []
    for i in range(6):
        if i % 2 == 0:
            edges = [[0, 1], [1, 2], [2, 0]]
            node_labels = np.array([0, 1, 0])
        else:
            edges = [[0, 1], [1, 2], [2, 3]]
            node_labels = np.array([1, 1, 0, 1])
        graphs.append(
            Graph(
                node_features=np.eye(2)[node_labels],
                edges=edges,
                label=i % 2,
                node_labels=node_labels,
            )
        )
    return graphs


@pytest.fixture
def toy_dataset() -> Dataset:
    return Dataset(_toy_graphs(), num_classes=2, num_features=2, name="TOY")


@pytest.fixture
def toy_dir(tmp_path, toy_dataset) -> Path:
    """TOY dataset written in TU format under ``tmp_path/TOY``."""
    return save_tu_dataset(toy_dataset, tmp_path / "TOY")


@pytest.fixture
def mutag_dir() -> Path:
    if not (MUTAG_DIR / "MUTAG_A.txt").is_file():
        pytest.skip(f"MUTAG not found under {MUTAG_DIR}")
    return MUTAG_DIR
