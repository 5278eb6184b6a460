"""Chu spaces over {0,1,2} for agents read off homology generators.

Each action is a (name, source, target) triple over the vertices of a
persistent generator; a state assigns every action one of unstarted (0),
executing (1) or finished (2). Spaces are kept extensionally, states in
lexicographic order, with a hard size guard. The covering relation
(single-action progress) is the Hasse diagram of the execution order.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Sequence

from .errors import ChuTooLarge, LabelClash, NoGenerators
from .homology import Barcode

ALPHABET = (0, 1, 2)
MAX_STATES = 3 ** 16


@dataclass(frozen=True)
class ActionLabel:
    action: str
    source: int
    target: int

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise ValueError(f"action {self.action!r} needs distinct source and target")

    def __str__(self) -> str:
        return f"{self.action}:{self.source}->{self.target}"


@dataclass(frozen=True)
class ChuSpace:
    """Actions plus the explicit set of admissible states."""

    actions: tuple[ActionLabel, ...]
    states: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        seen = set()
        for s in self.states:
            if len(s) != len(self.actions):
                raise ValueError(f"state {s} has wrong arity {len(s)}")
            if any(x not in ALPHABET for x in s):
                raise ValueError(f"state {s} has entries outside {ALPHABET}")
            if s in seen:
                raise ValueError(f"duplicate state {s}")
            seen.add(s)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def n_states(self) -> int:
        return len(self.states)

    def matrix(self) -> list[list[int]]:
        """Rows are actions, columns are states, in stored order."""
        return [[s[i] for s in self.states] for i in range(len(self.actions))]


def actions_from_generators(
    b: Barcode, action_names: Sequence[str], bidirectional: bool = True
) -> list[ActionLabel]:
    """Action labels from the persistent generators of dimension > 0.

    Every vertex pair inside a generator simplex yields one label per action
    name; with `bidirectional` both directions appear. Labels are deduplicated
    in first-appearance order.
    """
    if not action_names:
        raise ValueError("need at least one action name")
    out: dict[ActionLabel, None] = {}
    for iv in b.intervals:
        if iv.death is not None or iv.dimension < 1:
            continue
        for s in iv.generator:
            if s.dimension < 1:
                continue
            for u, v in combinations(s.vertices, 2):
                for name in action_names:
                    out.setdefault(ActionLabel(name, u, v))
                if bidirectional:
                    for name in action_names:
                        out.setdefault(ActionLabel(name, v, u))
    if not out:
        raise NoGenerators("barcode has no persistent generators of dimension > 0")
    return list(out)


def _guard(n_states: int) -> None:
    if n_states > MAX_STATES:
        raise ChuTooLarge(f"{n_states} states exceeds the 3^16 guard")


def full_chu(actions: Sequence[ActionLabel]) -> ChuSpace:
    """The unconstrained space: all 3^n state vectors, lexicographic."""
    acts = tuple(actions)
    if not acts:
        raise ValueError("need at least one action")
    _guard(3 ** len(acts))
    return ChuSpace(acts, tuple(product(ALPHABET, repeat=len(acts))))


def constrain(c: ChuSpace, mutex: Iterable[tuple[int, int]]) -> ChuSpace:
    """Drop states where both actions of any mutex pair have started.

    A state survives iff min(s[i], s[j]) == 0 for every mutex pair (i, j).
    Idempotent, and more pairs can only shrink the state set.
    """
    pairs = [(int(i), int(j)) for i, j in mutex]
    for i, j in pairs:
        if not (0 <= i < c.n_actions and 0 <= j < c.n_actions):
            raise ValueError(f"mutex pair ({i},{j}) out of range for {c.n_actions} actions")
    states = tuple(
        s for s in c.states if all(min(s[i], s[j]) == 0 for i, j in pairs)
    )
    return ChuSpace(c.actions, states)


def parallel(c1: ChuSpace, c2: ChuSpace) -> ChuSpace:
    """Parallel composition: actions concatenate, states are all combinations."""
    clash = set(c1.actions) & set(c2.actions)
    if clash:
        raise LabelClash(f"shared action labels: {sorted(map(str, clash))}")
    _guard(c1.n_states * c2.n_states)
    states = tuple(a + b for a in c1.states for b in c2.states)
    return ChuSpace(c1.actions + c2.actions, states)


@dataclass(frozen=True)
class HasseDiagram:
    """Covering relation: s -> s' when exactly one coordinate steps up by 1."""

    nodes: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def successors(self, s: tuple[int, ...]) -> list[tuple[int, ...]]:
        return [b for a, b in self.edges if a == s]

    def maximal_states(self) -> tuple[tuple[int, ...], ...]:
        with_out = {a for a, _ in self.edges}
        return tuple(n for n in self.nodes if n not in with_out)

    def minimal_states(self) -> tuple[tuple[int, ...], ...]:
        with_in = {b for _, b in self.edges}
        return tuple(n for n in self.nodes if n not in with_in)


def hasse(c: ChuSpace) -> HasseDiagram:
    present = set(c.states)
    edges = []
    for s in c.states:
        for i, x in enumerate(s):
            if x >= 2:
                continue
            t = s[:i] + (x + 1,) + s[i + 1 :]
            if t in present:
                edges.append((s, t))
    return HasseDiagram(c.states, tuple(edges))


# --- export ----------------------------------------------------------------


def chu_to_csv_lines(c: ChuSpace) -> list[str]:
    """Matrix dump: header of state ids, then one row per action."""
    header = "action," + ",".join(f"s{k + 1}" for k in range(c.n_states))
    lines = [header]
    for label, row in zip(c.actions, c.matrix()):
        lines.append(str(label) + "," + ",".join(str(x) for x in row))
    return lines


def _node_id(s: tuple[int, ...]) -> str:
    return "(" + ",".join(str(x) for x in s) + ")"


def hasse_to_dot(h: HasseDiagram) -> str:
    lines = ["digraph hasse {", "  rankdir=BT;", '  node [shape=plaintext];']
    by_rank: dict[int, list[tuple[int, ...]]] = {}
    for n in h.nodes:
        by_rank.setdefault(sum(n), []).append(n)
    for rank in sorted(by_rank):
        row = " ".join(f'"{_node_id(n)}";' for n in by_rank[rank])
        lines.append(f"  {{ rank=same; {row} }}")
    for a, b in h.edges:
        lines.append(f'  "{_node_id(a)}" -> "{_node_id(b)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
