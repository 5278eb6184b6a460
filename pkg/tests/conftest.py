from pathlib import Path

import pytest

from topomata.graph import WeightedGraph, load_edge_list

DATA = Path(__file__).parent / "data"

FIG_GRAPH_PATH = DATA / "fig2_edges.csv"


@pytest.fixture(scope="session")
def ringed_square_path() -> Path:
    return FIG_GRAPH_PATH


@pytest.fixture(scope="session")
def ringed_square() -> WeightedGraph:
    """Four filled triangles around a central 4-cycle, one weight per triangle."""
    return load_edge_list(FIG_GRAPH_PATH)
