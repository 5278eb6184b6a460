"""Clique complexes with a discrete weight-rank filtration.

The filtration of a weighted graph is built in four steps: rank the distinct
edge weights into a ladder, enumerate maximal cliques, expand their
sub-cliques up to a dimension cap, and stamp every simplex with the ladder
index at which its last edge appears. A clique therefore enters the complex
exactly when its weakest-ranked edge does.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .errors import EmptyGraph, InvalidComplex
from .graph import WeightedGraph

DESCENDING = "descending"
ASCENDING = "ascending"


@dataclass(frozen=True)
class Simplex:
    """A simplex as a strictly ascending tuple of vertex ids."""

    vertices: tuple[int, ...]

    def __post_init__(self) -> None:
        vs = tuple(int(v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        if not vs:
            raise ValueError("a simplex needs at least one vertex")
        if any(a >= b for a, b in zip(vs, vs[1:])):
            raise ValueError(f"vertices must be strictly ascending, got {vs}")

    @property
    def dimension(self) -> int:
        return len(self.vertices) - 1

    def facets(self) -> Iterator["Simplex"]:
        """Codimension-1 faces (empty for a vertex)."""
        if self.dimension == 0:
            return
        for i in range(len(self.vertices)):
            yield Simplex(self.vertices[:i] + self.vertices[i + 1 :])

    def __repr__(self) -> str:
        return f"Simplex{self.vertices}"


def _canonical_key(item: tuple[Simplex, int]) -> tuple[int, int, tuple[int, ...]]:
    s, fi = item
    return (fi, s.dimension, s.vertices)


@dataclass(frozen=True)
class FilteredComplex:
    """Simplices tagged with filter indices, plus the weight ladder behind them.

    `simplices` is kept in canonical order: (filter index, dimension,
    lexicographic vertices). The structural invariants (face closure, filter
    monotonicity) are checked by validate(), not at construction, so that
    deliberately broken complexes can be built in tests.
    """

    simplices: tuple[tuple[Simplex, int], ...]
    weight_ladder: tuple[float, ...] = ()
    order: str = DESCENDING

    @property
    def max_filter(self) -> int:
        if self.weight_ladder:
            return len(self.weight_ladder) - 1
        return max((fi for _, fi in self.simplices), default=0)

    @property
    def dimension(self) -> int:
        """Top simplex dimension; -1 for the empty complex."""
        return max((s.dimension for s, _ in self.simplices), default=-1)

    def counts_at(self, at: int) -> dict[int, int]:
        """Number of simplices per dimension in the subcomplex at `at`."""
        counts: dict[int, int] = {}
        for s, fi in self.simplices:
            if fi <= at:
                counts[s.dimension] = counts.get(s.dimension, 0) + 1
        return counts

    def validate(self) -> None:
        """Raise InvalidComplex unless closure and monotonicity hold."""
        index: dict[tuple[int, ...], int] = {}
        ladder_size = len(self.weight_ladder)
        for s, fi in self.simplices:
            if fi < 0:
                raise InvalidComplex(f"{s} has negative filter index {fi}")
            if ladder_size and fi >= ladder_size:
                raise InvalidComplex(f"{s} has filter index {fi} >= ladder size {ladder_size}")
            if s.vertices in index:
                raise InvalidComplex(f"duplicate simplex {s}")
            index[s.vertices] = fi
        for s, fi in self.simplices:
            for f in s.facets():
                if f.vertices not in index:
                    raise InvalidComplex(f"{s} is present but its face {f} is missing")
                if index[f.vertices] > fi:
                    raise InvalidComplex(
                        f"face {f} enters at {index[f.vertices]}, after {s} at {fi}"
                    )

    def dump_lines(self) -> list[str]:
        """One `filter_index;v0 v1 ... vk` line per simplex, canonical order."""
        return [
            f"{fi};{' '.join(str(v) for v in s.vertices)}" for s, fi in self.simplices
        ]


def weight_ladder(g: WeightedGraph, order: str = DESCENDING) -> tuple[float, ...]:
    """Distinct edge weights sorted per `order`; the index is the filter parameter."""
    if not g.edges:
        raise EmptyGraph("graph has no edges, so there is no weight ladder")
    if order not in (DESCENDING, ASCENDING):
        raise ValueError(f"order must be {DESCENDING!r} or {ASCENDING!r}, got {order!r}")
    return tuple(sorted(set(g.edges.values()), reverse=(order == DESCENDING)))


def _degeneracy_order(adj: dict[int, set[int]]) -> list[int]:
    degree = {v: len(ns) for v, ns in adj.items()}
    alive = set(adj)
    order = []
    while alive:
        v = min(alive, key=lambda u: (degree[u], u))
        order.append(v)
        alive.remove(v)
        for u in adj[v]:
            if u in alive:
                degree[u] -= 1
    return order


def _bron_kerbosch(
    adj: dict[int, set[int]],
    r: set[int],
    p: set[int],
    x: set[int],
    out: list[frozenset[int]],
) -> None:
    if not p and not x:
        out.append(frozenset(r))
        return
    pivot = max(sorted(p | x), key=lambda u: len(p & adj[u]))
    for v in sorted(p - adj[pivot]):
        _bron_kerbosch(adj, r | {v}, p & adj[v], x & adj[v], out)
        p.remove(v)
        x.add(v)


def maximal_cliques(g: WeightedGraph) -> list[frozenset[int]]:
    """Inclusion-maximal cliques via Bron-Kerbosch with pivoting over a
    degeneracy ordering. Isolated vertices come out as singleton cliques."""
    adj = g.adjacency()
    order = _degeneracy_order(adj)
    rank = {v: i for i, v in enumerate(order)}
    out: list[frozenset[int]] = []
    for v in order:
        later = {u for u in adj[v] if rank[u] > rank[v]}
        earlier = {u for u in adj[v] if rank[u] < rank[v]}
        _bron_kerbosch(adj, {v}, later, earlier, out)
    return sorted(out, key=lambda c: sorted(c))


def build_filtration(
    g: WeightedGraph, order: str = DESCENDING, max_dim: int = 2
) -> FilteredComplex:
    """Expand maximal cliques into a filtered complex up to dimension max_dim.

    A k-simplex (k >= 1) is stamped with the largest ladder index among its
    edges; a vertex with the smallest index among its incident edges
    (0 when isolated), so vertices are born with their first interaction.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    ladder = weight_ladder(g, order) if g.edges else ()
    index_of = {w: i for i, w in enumerate(ladder)}

    def edge_index(u: int, v: int) -> int:
        return index_of[g.weight(u, v)]

    stamped: dict[tuple[int, ...], int] = {}
    for v in g.vertices:
        incident = g.incident_weights(v)
        stamped[(v,)] = min((index_of[w] for w in incident), default=0)
    if max_dim >= 1:
        for clique in maximal_cliques(g):
            verts = sorted(clique)
            top = min(len(verts), max_dim + 1)
            for size in range(2, top + 1):
                for sub in combinations(verts, size):
                    if sub in stamped:
                        continue
                    stamped[sub] = max(
                        edge_index(a, b) for a, b in combinations(sub, 2)
                    )
    simplices = tuple(
        sorted(
            ((Simplex(vs), fi) for vs, fi in stamped.items()),
            key=_canonical_key,
        )
    )
    return FilteredComplex(simplices, ladder, order)
