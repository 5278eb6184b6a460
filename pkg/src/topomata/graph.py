"""Weighted undirected graphs and time-stamped series of them.

Edge weights are strictly positive finite reals; there is at most one edge
per unordered vertex pair and no self-loops. Graphs are immutable after
construction and safe to share between workers.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateEdge,
    NonPositiveWeight,
    NotSquare,
    NotSymmetric,
    ParseError,
    SelfLoop,
)

SYMMETRY_TOL = 1e-9

_VERTICES_DIRECTIVE = re.compile(r"^#\s*vertices\s*:\s*(.*)$")


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive real edge weights.

    ``edges`` maps normalized pairs ``(u, v)`` with ``u < v`` to weights.
    ``names`` is an optional display-label sidecar (vertex id -> string).
    """

    vertices: frozenset[int]
    edges: Mapping[tuple[int, int], float]
    names: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for v in self.vertices:
            if not isinstance(v, int) or v < 0:
                raise ParseError(f"vertex ids must be non-negative integers, got {v!r}")
        for (u, v), w in self.edges.items():
            if u == v:
                raise SelfLoop(f"self-loop on vertex {u}")
            if not (u < v):
                raise ParseError(f"edge key {(u, v)} is not normalized (u < v)")
            if u not in self.vertices or v not in self.vertices:
                raise ParseError(f"edge ({u},{v}) has an endpoint outside the vertex set")
            if not (isinstance(w, (int, float)) and math.isfinite(w)) or w <= 0:
                raise NonPositiveWeight(f"edge ({u},{v}) has weight {w!r}; need finite w > 0")

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[int, int, float]],
        vertices: Iterable[int] = (),
        names: Mapping[int, str] | None = None,
    ) -> "WeightedGraph":
        """Build a graph from (u, v, w) triples plus optional extra vertices."""
        edge_map: dict[tuple[int, int], float] = {}
        verts = set(vertices)
        for u, v, w in edges:
            if u == v:
                raise SelfLoop(f"self-loop on vertex {u}")
            key = _edge_key(u, v)
            if key in edge_map:
                raise DuplicateEdge(f"duplicate edge ({u},{v})")
            edge_map[key] = float(w)
            verts.add(u)
            verts.add(v)
        return cls(frozenset(verts), edge_map, dict(names or {}))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return _edge_key(u, v) in self.edges

    def weight(self, u: int, v: int) -> float:
        return self.edges[_edge_key(u, v)]

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def incident_weights(self, v: int) -> list[float]:
        return [w for (a, b), w in self.edges.items() if a == v or b == v]

    def edge_triples(self) -> list[tuple[int, int, float]]:
        return sorted((u, v, w) for (u, v), w in self.edges.items())

    def to_edge_lines(self) -> list[str]:
        """Render the edge-list CSV lines (one `u,v,weight` per edge)."""
        lines = []
        isolated = sorted(self.vertices - {x for e in self.edges for x in e})
        if isolated:
            lines.append("# vertices: " + " ".join(str(v) for v in isolated))
        lines.extend(f"{u},{v},{w!r}" for u, v, w in self.edge_triples())
        return lines

    def dump_edge_list(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.to_edge_lines()) + "\n", encoding="utf-8")


def _parse_vertex(tok: str, line_no: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"line {line_no}: vertex id {tok!r} is not an integer") from None
    if v < 0:
        raise ParseError(f"line {line_no}: vertex id {v} is negative")
    return v


def load_edge_list(path: str | Path) -> WeightedGraph:
    """Parse an edge-list CSV file: one `u,v,weight` per line, `#` comments.

    A `# vertices: ...` comment line may declare isolated vertices, which the
    plain format cannot otherwise express.
    """
    edge_map: dict[tuple[int, int], float] = {}
    verts: set[int] = set()
    text = Path(path).read_text(encoding="utf-8")
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _VERTICES_DIRECTIVE.match(line)
            if m and m.group(1).strip():
                verts.update(_parse_vertex(tok, line_no) for tok in m.group(1).split())
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"line {line_no}: expected `u,v,weight`, got {raw!r}")
        u = _parse_vertex(parts[0].strip(), line_no)
        v = _parse_vertex(parts[1].strip(), line_no)
        try:
            w = float(parts[2])
        except ValueError:
            raise ParseError(f"line {line_no}: weight {parts[2]!r} is not numeric") from None
        if u == v:
            raise SelfLoop(f"line {line_no}: self-loop on vertex {u}")
        if not math.isfinite(w) or w <= 0:
            raise NonPositiveWeight(f"line {line_no}: weight {w!r}; need finite w > 0")
        key = _edge_key(u, v)
        if key in edge_map:
            raise DuplicateEdge(f"line {line_no}: duplicate edge ({u},{v})")
        edge_map[key] = w
        verts.add(u)
        verts.add(v)
    return WeightedGraph(frozenset(verts), edge_map)


def from_symmetric_matrix(m, threshold: float = 0.0) -> WeightedGraph:
    """Turn a symmetric matrix into a graph; entry (i, j) > threshold becomes an edge.

    The diagonal is ignored. Symmetry is checked to SYMMETRY_TOL (absolute).
    All row/column indices become vertices, so zero rows give isolated vertices.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare(f"matrix has shape {a.shape}; need a square 2-d matrix")
    if a.size and np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise NotSymmetric(f"matrix is not symmetric within {SYMMETRY_TOL}")
    n = a.shape[0]
    edges = {
        (i, j): float(a[i, j])
        for i in range(n)
        for j in range(i + 1, n)
        if a[i, j] > threshold
    }
    return WeightedGraph(frozenset(range(n)), edges)


@dataclass(frozen=True)
class ObservationSeries:
    """Ordered (tick, graph) observations with strictly increasing ticks."""

    observations: tuple[tuple[int, WeightedGraph], ...]

    def __post_init__(self) -> None:
        ticks = [t for t, _ in self.observations]
        if any(t < 0 for t in ticks):
            raise ParseError("ticks must be non-negative")
        if any(b <= a for a, b in zip(ticks, ticks[1:])):
            raise ParseError("ticks must be strictly increasing")

    def __len__(self) -> int:
        return len(self.observations)

    def __iter__(self) -> Iterator[tuple[int, WeightedGraph]]:
        return iter(self.observations)

    @property
    def ticks(self) -> tuple[int, ...]:
        return tuple(t for t, _ in self.observations)


def write_observations_json(series: ObservationSeries, path: str | Path) -> None:
    payload = [
        {
            "tick": t,
            "vertices": sorted(g.vertices),
            "edges": [[u, v, w] for u, v, w in g.edge_triples()],
        }
        for t, g in series
    ]
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def read_observations_json(path: str | Path) -> ObservationSeries:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(payload, list):
        raise ParseError(f"{path}: expected a JSON list of observations")
    obs = []
    for entry in payload:
        if not isinstance(entry, dict) or "tick" not in entry or "edges" not in entry:
            raise ParseError(f"{path}: each observation needs `tick` and `edges`")
        g = WeightedGraph.from_edges(
            [(int(u), int(v), float(w)) for u, v, w in entry["edges"]],
            vertices=[int(v) for v in entry.get("vertices", [])],
        )
        obs.append((int(entry["tick"]), g))
    return ObservationSeries(tuple(obs))


def write_observation_dir(series: ObservationSeries, directory: str | Path) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for t, g in series:
        g.dump_edge_list(d / f"obs_{t}.csv")


def read_observation_dir(directory: str | Path) -> ObservationSeries:
    d = Path(directory)
    obs = []
    for p in d.glob("obs_*.csv"):
        m = re.fullmatch(r"obs_(\d+)\.csv", p.name)
        if m is None:
            raise ParseError(f"{p.name}: observation files must be named obs_<tick>.csv")
        obs.append((int(m.group(1)), load_edge_list(p)))
    obs.sort(key=lambda pair: pair[0])
    return ObservationSeries(tuple(obs))


def load_observations(path: str | Path) -> ObservationSeries:
    """Load either a directory of obs_<tick>.csv files or a single JSON file."""
    p = Path(path)
    if p.is_dir():
        return read_observation_dir(p)
    return read_observations_json(p)
