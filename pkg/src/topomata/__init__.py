"""Topological analysis of evolving weighted networks.

The pipeline: weighted graphs -> clique-weight-rank filtration -> persistence
barcodes with generators -> persistent-entropy chronogram -> an entropy
automaton of steady states (the global level), while the generators feed Chu
spaces / Hasse diagrams of interacting agents (the local level). A built-in
idiotypic-network simulator generates test data.
"""

from .automaton import (
    AutomatonState,
    EntropyAutomaton,
    Segment,
    build_automaton,
    segment,
)
from .chu import (
    ActionLabel,
    ChuSpace,
    HasseDiagram,
    actions_from_generators,
    constrain,
    full_chu,
    hasse,
    parallel,
)
from .entropy import EntropySeries, chronogram, persistent_entropy
from .errors import ToolError
from .filtration import (
    FilteredComplex,
    Simplex,
    build_filtration,
    maximal_cliques,
    weight_ladder,
)
from .graph import (
    ObservationSeries,
    WeightedGraph,
    from_symmetric_matrix,
    load_edge_list,
    load_observations,
)
from .homology import Barcode, Interval, betti_numbers, persistent_homology
from .immune import Antibody, SimConfig, coexistence_graph, interaction_predicate
from .immune import run as run_simulation

__all__ = [
    "ActionLabel",
    "Antibody",
    "AutomatonState",
    "Barcode",
    "ChuSpace",
    "EntropyAutomaton",
    "EntropySeries",
    "FilteredComplex",
    "HasseDiagram",
    "Interval",
    "ObservationSeries",
    "Segment",
    "SimConfig",
    "Simplex",
    "ToolError",
    "WeightedGraph",
    "actions_from_generators",
    "betti_numbers",
    "build_automaton",
    "build_filtration",
    "chronogram",
    "coexistence_graph",
    "constrain",
    "from_symmetric_matrix",
    "full_chu",
    "hasse",
    "interaction_predicate",
    "load_edge_list",
    "load_observations",
    "maximal_cliques",
    "parallel",
    "persistent_entropy",
    "persistent_homology",
    "run_simulation",
    "segment",
    "weight_ladder",
]
