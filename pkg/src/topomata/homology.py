"""Persistent homology over Z/2 with interval generators.

The reduction is the standard column algorithm on the sparse boundary
matrix, run per dimension from the top down with the clearing optimization:
once a column pairs with a pivot row, the column living at that row is a
known creator and is skipped entirely in the next dimension. Columns are
sorted index lists merged by symmetric difference, which over Z/2 is both
the addition and the whole story.

Generators: a finite interval carries the reduced column of its destroyer
(a cycle whose simplices are all alive at the birth index); an infinite
interval carries the chain accumulated while its creator column reduced to
zero. Representatives are basis dependent; only cycle-validity and liveness
are guaranteed.

`betti_numbers` is an independent check: it computes ranks of the boundary
operators by Gaussian elimination on bitmask columns and never touches the
reduction above.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidComplex, ParseError
from .filtration import FilteredComplex, Simplex

INF = None  # death value for persistent intervals


@dataclass(frozen=True)
class Interval:
    """One bar: [birth, death) at `dimension`, with a representative cycle."""

    dimension: int
    birth: int
    death: int | None
    generator: tuple[Simplex, ...]

    @property
    def persistent(self) -> bool:
        return self.death is None

    def alive_at(self, t: int) -> bool:
        return self.birth <= t and (self.death is None or t < self.death)

    def length(self, max_filter: int) -> int:
        death = max_filter + 1 if self.death is None else self.death
        return death - self.birth


@dataclass(frozen=True)
class Barcode:
    """All intervals of a filtered complex, dimensions pooled.

    `weight_ladder` (when present) maps filter indices back to the real
    weights they rank, so output can be read either way.
    """

    intervals: tuple[Interval, ...]
    max_filter: int
    weight_ladder: tuple[float, ...] = ()
    order: str = "descending"

    def in_dimension(self, dim: int) -> tuple[Interval, ...]:
        return tuple(iv for iv in self.intervals if iv.dimension == dim)

    def alive_counts(self, t: int, max_dim: int) -> list[int]:
        counts = [0] * (max_dim + 1)
        for iv in self.intervals:
            if iv.dimension <= max_dim and iv.alive_at(t):
                counts[iv.dimension] += 1
        return counts

    def betti(self) -> dict[int, int]:
        """Persistent-interval counts per dimension (the final Betti numbers)."""
        out: dict[int, int] = {}
        for iv in self.intervals:
            if iv.death is None:
                out[iv.dimension] = out.get(iv.dimension, 0) + 1
        return out


def _symdiff(a: list[int], b: list[int]) -> list[int]:
    """Symmetric difference of two sorted index lists."""
    out: list[int] = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x < y:
            out.append(x)
            i += 1
        elif y < x:
            out.append(y)
            j += 1
        else:
            i += 1
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return out


def persistent_homology(c: FilteredComplex, max_dim: int = 1) -> Barcode:
    """Reduce the boundary matrix of `c` and report intervals for dims 0..max_dim.

    Simplices up to dimension max_dim + 1 participate (the extra dimension
    only destroys classes). Zero-persistence pairs are dropped.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    c.validate()
    sims = sorted(
        ((s, fi) for s, fi in c.simplices if s.dimension <= max_dim + 1),
        key=lambda p: (p[1], p[0].dimension, p[0].vertices),
    )
    pos = {s.vertices: i for i, (s, _) in enumerate(sims)}
    dims = [s.dimension for s, _ in sims]
    filt = [fi for _, fi in sims]
    boundary: list[list[int]] = []
    for s, _ in sims:
        boundary.append(sorted(pos[f.vertices] for f in s.facets()))

    by_dim: dict[int, list[int]] = {}
    for j, d in enumerate(dims):
        by_dim.setdefault(d, []).append(j)

    pivot_of_row: dict[int, int] = {}
    reduced: dict[int, list[int]] = {}
    chains: dict[int, list[int]] = {}
    cycles: dict[int, list[int]] = {}
    cleared: set[int] = set()
    pairs: list[tuple[int, int]] = []

    top = max(dims, default=-1)
    for d in range(top, 0, -1):
        for j in by_dim.get(d, ()):
            if j in cleared:
                continue
            col = boundary[j]
            chain = [j]
            while col:
                k = pivot_of_row.get(col[-1])
                if k is None:
                    break
                col = _symdiff(col, reduced[k])
                chain = _symdiff(chain, chains[k])
            if col:
                low = col[-1]
                pivot_of_row[low] = j
                reduced[j] = col
                chains[j] = chain
                pairs.append((low, j))
                cleared.add(low)
            else:
                cycles[j] = chain
    for j in by_dim.get(0, ()):
        if j not in cleared:
            cycles[j] = [j]

    intervals: list[Interval] = []
    for low, j in pairs:
        d = dims[low]
        if d > max_dim:
            continue
        birth, death = filt[low], filt[j]
        if birth == death:
            continue
        gen = tuple(sims[p][0] for p in reduced[j])
        intervals.append(Interval(d, birth, death, gen))
    for j, chain in cycles.items():
        d = dims[j]
        if d > max_dim:
            continue
        gen = tuple(sims[p][0] for p in chain)
        intervals.append(Interval(d, filt[j], None, gen))
    intervals.sort(
        key=lambda iv: (
            iv.dimension,
            iv.birth,
            math.inf if iv.death is None else iv.death,
            tuple(s.vertices for s in iv.generator),
        )
    )
    return Barcode(tuple(intervals), c.max_filter, c.weight_ladder, c.order)


def _gf2_rank(columns: list[int]) -> int:
    """Rank of a set of bitmask columns over Z/2."""
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            hi = col.bit_length() - 1
            other = pivots.get(hi)
            if other is None:
                pivots[hi] = col
                rank += 1
                break
            col ^= other
    return rank


def betti_numbers(c: FilteredComplex, at: int, max_dim: int | None = None) -> list[int]:
    """Betti numbers of the subcomplex at filter index `at`, from operator ranks.

    beta_n = #n-simplices - rank(d_n) - rank(d_{n+1}). By default dimensions
    0..top-1 are reported (the top dimension of a capped clique complex is a
    truncation artifact); pass max_dim explicitly to override. Empty complex
    gives [].
    """
    if at > c.max_filter:
        raise ValueError(f"filter index {at} exceeds max_filter {c.max_filter}")
    present = [(s, fi) for s, fi in c.simplices if fi <= at]
    if max_dim is None:
        top = max((s.dimension for s, _ in c.simplices), default=-1)
        if top < 0:
            return []
        max_dim = max(top - 1, 0)
    by_dim: dict[int, list[Simplex]] = {}
    for s, _ in present:
        by_dim.setdefault(s.dimension, []).append(s)
    row_of: dict[int, dict[tuple[int, ...], int]] = {
        d: {s.vertices: i for i, s in enumerate(group)} for d, group in by_dim.items()
    }
    ranks: dict[int, int] = {}
    for d, group in by_dim.items():
        if d == 0:
            continue
        rows = row_of[d - 1]
        cols = []
        for s in group:
            mask = 0
            for f in s.facets():
                mask |= 1 << rows[f.vertices]
            cols.append(mask)
        ranks[d] = _gf2_rank(cols)
    betti = []
    for d in range(max_dim + 1):
        n_d = len(by_dim.get(d, ()))
        betti.append(n_d - ranks.get(d, 0) - ranks.get(d + 1, 0))
    return betti


def euler_characteristic_holds(c: FilteredComplex, at: int) -> bool:
    """Check sum (-1)^n #simplices(at) == sum (-1)^n beta_n(at) over all dims."""
    top = max((s.dimension for s, _ in c.simplices), default=-1)
    if top < 0:
        return True
    counts = c.counts_at(at)
    lhs = sum((-1) ** d * n for d, n in counts.items())
    rhs = sum((-1) ** d * b for d, b in enumerate(betti_numbers(c, at, max_dim=top)))
    return lhs == rhs


def zeroth_intervals_union_find(c: FilteredComplex) -> list[tuple[int, int | None]]:
    """Dimension-0 intervals by a union-find sweep (elder rule).

    Independent of the matrix reduction; used to cross-check its dim-0 bars.
    Zero-length intervals are dropped, matching persistent_homology.
    """
    sims = sorted(
        ((s, fi) for s, fi in c.simplices if s.dimension <= 1),
        key=lambda p: (p[1], p[0].dimension, p[0].vertices),
    )
    parent: dict[int, int] = {}
    birth: dict[int, tuple[int, int]] = {}  # root -> (filter, arrival position)

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    out: list[tuple[int, int | None]] = []
    for position, (s, fi) in enumerate(sims):
        if s.dimension == 0:
            v = s.vertices[0]
            parent[v] = v
            birth[v] = (fi, position)
        else:
            a, b = (find(v) for v in s.vertices)
            if a == b:
                continue
            elder, younger = (a, b) if birth[a] <= birth[b] else (b, a)
            if birth[younger][0] != fi:
                out.append((birth[younger][0], fi))
            parent[younger] = elder
    roots = {find(v) for v in parent}
    out.extend((birth[r][0], None) for r in roots)
    out.sort(key=lambda p: (p[0], math.inf if p[1] is None else p[1]))
    return out


def boundary_is_empty(simplices: tuple[Simplex, ...]) -> bool:
    """True when the Z/2 boundary of the chain vanishes (the chain is a cycle)."""
    faces: set[tuple[int, ...]] = set()
    for s in simplices:
        for f in s.facets():
            faces.symmetric_difference_update({f.vertices})
    return not faces


# --- serialization ---------------------------------------------------------


def barcode_to_dict(b: Barcode) -> dict:
    out = {
        "max_filter": b.max_filter,
        "intervals": [
            {
                "dim": iv.dimension,
                "birth": iv.birth,
                "death": iv.death,
                "generator": [list(s.vertices) for s in iv.generator],
            }
            for iv in b.intervals
        ],
    }
    if b.weight_ladder:
        out["weight_ladder"] = list(b.weight_ladder)
        out["order"] = b.order
    return out


def barcode_from_dict(d: dict) -> Barcode:
    try:
        intervals = tuple(
            Interval(
                int(iv["dim"]),
                int(iv["birth"]),
                None if iv["death"] is None else int(iv["death"]),
                tuple(Simplex(tuple(v)) for v in iv["generator"]),
            )
            for iv in d["intervals"]
        )
        return Barcode(
            intervals,
            int(d["max_filter"]),
            tuple(d.get("weight_ladder", ())),
            d.get("order", "descending"),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed barcode JSON: {e}") from None


def write_barcode_json(b: Barcode, path: str | Path) -> None:
    Path(path).write_text(json.dumps(barcode_to_dict(b), indent=1) + "\n", encoding="utf-8")


def read_barcode_json(path: str | Path) -> Barcode:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON ({e})") from None
    return barcode_from_dict(payload)


def format_barcode_text(b: Barcode) -> str:
    """Human-readable barcode, one dimension per block.

    Filter indices are shown as the ladder weights when available, with the
    discrete index in a trailing comment, e.g.
        dim 1:
          [1.0, infinity): [0,1] + [0,3] + [1,2] + [2,3]   # index 3
    """

    def value(fi: int) -> str:
        if b.weight_ladder:
            return repr(b.weight_ladder[fi])
        return str(fi)

    lines = []
    for dim in sorted({iv.dimension for iv in b.intervals}):
        lines.append(f"dim {dim}:")
        for iv in b.in_dimension(dim):
            death = "infinity" if iv.death is None else value(iv.death)
            gen = " + ".join("[" + ",".join(map(str, s.vertices)) + "]" for s in iv.generator)
            suffix = f"   # index {iv.birth}" if b.weight_ladder else ""
            lines.append(f"  [{value(iv.birth)}, {death}): {gen}{suffix}")
    return "\n".join(lines)
