"""Shannon entropy of barcode bar lengths and its evolution over time.

Bars of infinite death are truncated at one past the top filter value; the
normalized lengths form a distribution whose entropy is high when many bars
have comparable length and zero for a single bar. Lengths are measured in
filter indices by default, or in ladder weights (`lengths="weight"`, only
meaningful for ascending filtrations).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import EmptyBarcode, ParseError
from .homology import Barcode

INDEX_LENGTHS = "index"
WEIGHT_LENGTHS = "weight"

EMPTY_ERROR = "error"
EMPTY_ZERO = "zero"


def _bar_lengths(b: Barcode, lengths: str) -> list[float]:
    if lengths == INDEX_LENGTHS:
        m = b.max_filter + 1
        out = [float((m if iv.death is None else iv.death) - iv.birth) for iv in b.intervals]
    elif lengths == WEIGHT_LENGTHS:
        if not b.weight_ladder:
            raise ValueError("weight-based lengths need a barcode with a weight ladder")
        m = max(b.weight_ladder) + 1.0
        out = []
        for iv in b.intervals:
            death = m if iv.death is None else b.weight_ladder[iv.death]
            out.append(death - b.weight_ladder[iv.birth])
        if any(l < 0 for l in out):
            raise ValueError(
                "negative bar length in weight mode; weight lengths only make "
                "sense for ascending filtrations"
            )
    else:
        raise ValueError(f"lengths must be {INDEX_LENGTHS!r} or {WEIGHT_LENGTHS!r}")
    return [l for l in out if l > 0]


def persistent_entropy(
    b: Barcode, *, base: float = math.e, lengths: str = INDEX_LENGTHS
) -> float:
    """Entropy of the normalized bar lengths of `b`.

    Zero-length bars are dropped before normalization; summation runs in
    sorted length order so the result is permutation-invariant to the bit.
    """
    ls = sorted(_bar_lengths(b, lengths))
    if not ls:
        raise EmptyBarcode("barcode has no bars of positive length")
    total = math.fsum(ls)
    h = -math.fsum(p * math.log(p) for p in (l / total for l in ls))
    if base != math.e:
        h /= math.log(base)
    return h + 0.0


@dataclass(frozen=True)
class EntropySeries:
    """Entropy per tick plus finite-difference first and second derivatives."""

    points: tuple[tuple[int, float], ...]
    d1: tuple[float, ...] = ()
    d2: tuple[float, ...] = ()
    n_bars: tuple[int, ...] = ()
    per_dim: dict[int, tuple[float | None, ...]] = field(default_factory=dict)

    @property
    def ticks(self) -> tuple[int, ...]:
        return tuple(t for t, _ in self.points)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(h for _, h in self.points)

    @classmethod
    def from_points(
        cls,
        points: Sequence[tuple[int, float]],
        n_bars: Sequence[int] = (),
        per_dim: dict[int, Sequence[float | None]] | None = None,
    ) -> "EntropySeries":
        pts = tuple((int(t), float(h)) for t, h in points)
        ticks = [t for t, _ in pts]
        if any(b <= a for a, b in zip(ticks, ticks[1:])):
            raise ParseError("ticks must be strictly increasing")
        hs = [h for _, h in pts]
        d1 = tuple(
            (hs[k + 1] - hs[k]) / (ticks[k + 1] - ticks[k]) for k in range(len(pts) - 1)
        )
        d2 = tuple(
            (d1[k + 1] - d1[k]) / (ticks[k + 1] - ticks[k]) for k in range(len(d1) - 1)
        )
        return cls(
            pts,
            d1,
            d2,
            tuple(int(n) for n in n_bars),
            {d: tuple(v) for d, v in (per_dim or {}).items()},
        )


def chronogram(
    series: Sequence[tuple[int, Barcode]],
    *,
    base: float = math.e,
    lengths: str = INDEX_LENGTHS,
    empty: str = EMPTY_ERROR,
) -> EntropySeries:
    """Evaluate persistent entropy along a (tick, barcode) series.

    `empty` decides what an interval-free barcode contributes: "error"
    propagates EmptyBarcode with the offending tick (the default contract),
    "zero" records H = 0, the natural reading for observations with no
    structure at all (e.g. an edgeless graph before any interaction).
    """
    if empty not in (EMPTY_ERROR, EMPTY_ZERO):
        raise ValueError(f"empty must be {EMPTY_ERROR!r} or {EMPTY_ZERO!r}")
    points: list[tuple[int, float]] = []
    n_bars: list[int] = []
    dims = sorted({iv.dimension for _, b in series for iv in b.intervals})
    per_dim: dict[int, list[float | None]] = {d: [] for d in dims}
    for tick, b in series:
        try:
            h = persistent_entropy(b, base=base, lengths=lengths)
        except EmptyBarcode:
            if empty == EMPTY_ERROR:
                raise EmptyBarcode(f"tick {tick}: barcode has no bars") from None
            h = 0.0
        points.append((tick, h))
        n_bars.append(len(b.intervals))
        for d in dims:
            sub = Barcode(b.in_dimension(d), b.max_filter, b.weight_ladder, b.order)
            try:
                per_dim[d].append(persistent_entropy(sub, base=base, lengths=lengths))
            except EmptyBarcode:
                per_dim[d].append(None)
    return EntropySeries.from_points(points, n_bars, per_dim)


# --- CSV + plot script -----------------------------------------------------


def series_to_csv_lines(s: EntropySeries) -> list[str]:
    lines = ["tick,H,d1,d2"]
    for k, (t, h) in enumerate(s.points):
        d1 = repr(s.d1[k]) if k < len(s.d1) else ""
        d2 = repr(s.d2[k]) if k < len(s.d2) else ""
        lines.append(f"{t},{h!r},{d1},{d2}")
    return lines


def write_series_csv(s: EntropySeries, path: str | Path) -> None:
    Path(path).write_text("\n".join(series_to_csv_lines(s)) + "\n", encoding="utf-8")


def read_series_csv(path: str | Path) -> EntropySeries:
    """Rebuild a series from `tick,H,...` rows; derivatives are recomputed."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("tick,H"):
        raise ParseError(f"{path}: expected a `tick,H,d1,d2` CSV header")
    points = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) < 2:
            raise ParseError(f"{path} line {line_no}: expected `tick,H,...`")
        try:
            points.append((int(parts[0]), float(parts[1])))
        except ValueError:
            raise ParseError(f"{path} line {line_no}: non-numeric tick or H") from None
    return EntropySeries.from_points(points)


def per_dim_csv_lines(s: EntropySeries) -> list[str]:
    lines = ["tick,dim,H"]
    for dim in sorted(s.per_dim):
        for (t, _), h in zip(s.points, s.per_dim[dim]):
            if h is not None:
                lines.append(f"{t},{dim},{h!r}")
    return lines


def plot_script(csv_path: str, out_path: str = "entropy.png") -> str:
    """A gnuplot script rendering the chronogram from the entropy CSV."""
    return "\n".join(
        [
            "set datafile separator ','",
            "set key autotitle columnhead",
            f"set output '{out_path}'",
            "set terminal pngcairo size 900,500",
            "set xlabel 'tick'",
            "set ylabel 'persistent entropy'",
            f"plot '{csv_path}' using 1:2 with linespoints title 'H(t)'",
            "",
        ]
    )
