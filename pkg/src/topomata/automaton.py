"""Segmenting an entropy chronogram and deriving its state machine.

Plateaus (long runs of near-zero slope) are the steady states; prominent
local maxima between them are the events that move the system from one
steady level to another. The derived automaton has one state per distinct
plateau level, a transition per peak, and per-state invariants of the form
"H stays inside the observed envelope and the slope stays below eps".
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from scipy.signal import find_peaks

from .entropy import EntropySeries
from .errors import InitialNotSteady, NoPlateaus, SeriesTooShort

PLATEAU = "plateau"
PEAK = "peak"
RISING = "rising"
FALLING = "falling"

DEFAULT_WINDOW = 5
DEFAULT_EPS_FRACTION = 0.05
DEFAULT_PROMINENCE_FRACTION = 0.25
_EPS_FLOOR = 1e-9


@dataclass(frozen=True)
class Segment:
    """A contiguous stretch of the chronogram with one qualitative behavior."""

    kind: str
    start_tick: int
    end_tick: int
    mean_h: float
    points: tuple[tuple[int, float], ...]
    slopes: tuple[float, ...]
    peak_tick: int | None = None


def default_eps(series: EntropySeries) -> float:
    return max(DEFAULT_EPS_FRACTION * max(series.values, default=0.0), _EPS_FLOOR)


def default_prominence(series: EntropySeries) -> float:
    return max(DEFAULT_PROMINENCE_FRACTION * max(series.values, default=0.0), _EPS_FLOOR)


def segment(
    series: EntropySeries,
    eps: float | None = None,
    window: int = DEFAULT_WINDOW,
    prominence: float | None = None,
) -> list[Segment]:
    """Partition the series into plateau / peak / rising / falling segments.

    A plateau is a maximal run of >= window points whose successive slopes
    all stay below eps in magnitude. Between plateaus, each local maximum of
    H with at least the given prominence becomes one peak segment (gaps with
    several peaks are split at the minima between them); peak-free gaps are
    classified by their net drift.
    """
    n = len(series.points)
    if window < 2:
        raise ValueError("window must be >= 2")
    if n < window:
        raise SeriesTooShort(f"need at least {window} points, got {n}")
    if eps is None:
        eps = default_eps(series)
    if prominence is None:
        prominence = default_prominence(series)
    if eps <= 0:
        raise ValueError("eps must be > 0")

    hs = list(series.values)
    flat = [abs(d) < eps for d in series.d1]

    plateau_ranges: list[tuple[int, int]] = []
    k = 0
    while k < len(flat):
        if flat[k]:
            start = k
            while k < len(flat) and flat[k]:
                k += 1
            if (k - start + 1) >= window:
                plateau_ranges.append((start, k))  # point indices, inclusive
        else:
            k += 1

    in_plateau = [False] * n
    for a, b in plateau_ranges:
        for i in range(a, b + 1):
            in_plateau[i] = True

    peak_idx = [int(i) for i in find_peaks(hs, prominence=prominence)[0] if not in_plateau[i]]

    # gaps = maximal runs of points not claimed by any plateau
    gaps: list[tuple[int, int]] = []
    i = 0
    while i < n:
        if not in_plateau[i]:
            start = i
            while i < n and not in_plateau[i]:
                i += 1
            gaps.append((start, i - 1))
        else:
            i += 1

    def make(kind: str, a: int, b: int, peak_at: int | None = None) -> Segment:
        pts = series.points[a : b + 1]
        return Segment(
            kind=kind,
            start_tick=series.points[a][0],
            end_tick=series.points[b][0],
            mean_h=math.fsum(h for _, h in pts) / len(pts),
            points=pts,
            slopes=series.d1[a:b],
            peak_tick=None if peak_at is None else series.points[peak_at][0],
        )

    segments = [make(PLATEAU, a, b) for a, b in plateau_ranges]
    for a, b in gaps:
        peaks_here = [q for q in peak_idx if a <= q <= b]
        if not peaks_here:
            kind = RISING if hs[b] >= hs[a] else FALLING
            segments.append(make(kind, a, b))
            continue
        bounds = [a]
        for q1, q2 in zip(peaks_here, peaks_here[1:]):
            split = min(range(q1 + 1, q2 + 1), key=lambda i: (hs[i], i))
            bounds.append(split)
        bounds.append(b + 1)
        for (lo, hi), q in zip(zip(bounds, bounds[1:]), peaks_here):
            segments.append(make(PEAK, lo, hi - 1, peak_at=q))
    segments.sort(key=lambda s: s.start_tick)
    return segments


@dataclass(frozen=True)
class AutomatonState:
    """A steady state: a plateau level with its observed entropy envelope."""

    name: str
    level: float
    h_min: float
    h_max: float
    slope_tol: float

    @property
    def zero_level(self) -> bool:
        return self.h_max <= _EPS_FLOOR

    def invariant_text(self) -> str:
        if self.zero_level:
            return "H = 0 and dH/dt = 0"
        return f"H ~ {self.level:.4g} and dH/dt = 0"


@dataclass(frozen=True)
class EntropyAutomaton:
    """States, labels, the initial state and labeled transitions."""

    states: tuple[AutomatonState, ...]
    labels: tuple[str, ...]
    initial: str
    transitions: tuple[tuple[str, str, str], ...]

    def state(self, name: str) -> AutomatonState:
        for s in self.states:
            if s.name == name:
                return s
        raise KeyError(name)

    def self_loops(self) -> tuple[tuple[str, str, str], ...]:
        return tuple(t for t in self.transitions if t[0] == t[2])


def build_automaton(
    segments: Sequence[Segment],
    level_eps: float | None = None,
    extra_transitions: Iterable[tuple[str, str, str]] = (),
    slope_tol: float | None = None,
) -> EntropyAutomaton:
    """Merge plateau levels into states and turn peaks into transitions.

    Plateaus whose mean levels differ by less than level_eps share a state;
    states are named s0, s1, ... by order of first appearance. Consecutive
    plateaus joined by peak segments contribute one transition per peak
    (labelled `peak@<tick>` by default); returns to a known level become
    self-loops. `extra_transitions` lets domain knowledge add transitions
    between existing states.
    """
    segments = list(segments)
    if not segments:
        raise NoPlateaus("no segments at all")
    plateaus = [s for s in segments if s.kind == PLATEAU]
    if not plateaus:
        raise NoPlateaus("no plateau segment found")
    if segments[0].kind != PLATEAU:
        raise InitialNotSteady(f"first segment is {segments[0].kind!r}, not a plateau")
    if level_eps is None:
        level_eps = max(
            DEFAULT_EPS_FRACTION * max(abs(p.mean_h) for p in plateaus), _EPS_FLOOR
        )
    if slope_tol is None:
        slope_tol = level_eps

    levels: list[list[Segment]] = []
    assignment: dict[int, int] = {}
    for k, p in enumerate(plateaus):
        for idx, members in enumerate(levels):
            level = math.fsum(m.mean_h for m in members) / len(members)
            if abs(p.mean_h - level) < level_eps:
                members.append(p)
                assignment[k] = idx
                break
        else:
            levels.append([p])
            assignment[k] = len(levels) - 1

    # states must be mutually exclusive over the samples assigned to them, so
    # groups whose observed envelopes collide are merged until disjoint
    def envelope(members: list[Segment]) -> tuple[float, float]:
        hs = [h for m in members for _, h in m.points]
        return min(hs), max(hs)

    merged = True
    while merged:
        merged = False
        for i in range(len(levels)):
            for k in range(i + 1, len(levels)):
                (alo, ahi), (blo, bhi) = envelope(levels[i]), envelope(levels[k])
                if ahi >= blo and bhi >= alo:
                    levels[i].extend(levels[k])
                    del levels[k]
                    for key, idx in assignment.items():
                        if idx == k:
                            assignment[key] = i
                        elif idx > k:
                            assignment[key] = idx - 1
                    merged = True
                    break
            if merged:
                break

    states = []
    for idx, members in enumerate(levels):
        lo, hi = envelope(members)
        states.append(
            AutomatonState(
                name=f"s{idx}",
                level=math.fsum(m.mean_h for m in members) / len(members),
                h_min=lo,
                h_max=hi,
                slope_tol=slope_tol,
            )
        )

    transitions: list[tuple[str, str, str]] = []
    order = {id(s): i for i, s in enumerate(segments)}
    for k in range(len(plateaus) - 1):
        lo, hi = order[id(plateaus[k])], order[id(plateaus[k + 1])]
        between = segments[lo + 1 : hi]
        src = states[assignment[k]].name
        dst = states[assignment[k + 1]].name
        for seg in between:
            if seg.kind == PEAK:
                transitions.append((src, f"peak@{seg.peak_tick}", dst))
    names = {s.name for s in states}
    for src, label, dst in extra_transitions:
        if src not in names or dst not in names:
            raise ValueError(f"extra transition {src}->{dst} references unknown states")
        transitions.append((src, label, dst))

    labels = tuple(dict.fromkeys(label for _, label, _ in transitions))
    return EntropyAutomaton(
        states=tuple(states),
        labels=labels,
        initial=states[assignment[0]].name,
        transitions=tuple(transitions),
    )


def rename(
    automaton: EntropyAutomaton,
    state_names: dict[str, str] | None = None,
    label_names: dict[str, str] | None = None,
) -> EntropyAutomaton:
    """Apply display renames to states and transition labels."""
    smap = state_names or {}
    lmap = label_names or {}

    def s(name: str) -> str:
        return smap.get(name, name)

    states = tuple(
        AutomatonState(s(st.name), st.level, st.h_min, st.h_max, st.slope_tol)
        for st in automaton.states
    )
    transitions = tuple(
        (s(a), lmap.get(l, l), s(b)) for a, l, b in automaton.transitions
    )
    labels = tuple(dict.fromkeys(l for _, l, _ in transitions))
    return EntropyAutomaton(states, labels, s(automaton.initial), transitions)


# --- export ----------------------------------------------------------------


def automaton_to_dot(a: EntropyAutomaton) -> str:
    lines = [
        "digraph entropy_automaton {",
        "  rankdir=LR;",
        '  __start [shape=point, label=""];',
    ]
    for st in a.states:
        lines.append(
            f'  "{st.name}" [shape=ellipse, label="{st.name}\\n{st.invariant_text()}"];'
        )
    lines.append(f'  __start -> "{a.initial}";')
    for src, label, dst in a.transitions:
        lines.append(f'  "{src}" -> "{dst}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def automaton_to_dict(a: EntropyAutomaton) -> dict:
    return {
        "states": [
            {
                "name": st.name,
                "level": st.level,
                "h_min": st.h_min,
                "h_max": st.h_max,
                "slope_tol": st.slope_tol,
                "invariant": st.invariant_text(),
            }
            for st in a.states
        ],
        "labels": list(a.labels),
        "initial": a.initial,
        "transitions": [
            {"source": s, "label": l, "target": t} for s, l, t in a.transitions
        ],
    }


def write_automaton_json(a: EntropyAutomaton, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(automaton_to_dict(a), indent=1) + "\n", encoding="utf-8"
    )
