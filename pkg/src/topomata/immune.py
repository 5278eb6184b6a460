"""Desk-scale idiotypic-network simulator producing observation series.

Antibodies are fixed-width bitstrings; two of them interact when their
Hamming distance is within one of the full width (an antibody recognizes
near-complements). Concentrations follow a threshold dynamics on the random
affinity couplings; volumes relax toward concentration-driven targets; the
per-tick graph weighs each interacting pair by Hamming distance times the
product of volumes over the total volume.

Random 12-bit repertoires would be nearly interaction-free at this scale, so
the generator builds complement-closed clusters: a seed pair (x, ~x) plus
bit-flip mutant pairs, which wire up as chordless 4-cycles. The interaction
rule admits no triangles, so all the topology lives in dimensions 0 and 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatch,
    WidthMismatch,
    ZeroTotalVolume,
)
from .graph import ObservationSeries, WeightedGraph

SYNCHRONOUS = "synchronous"
ASYNCHRONOUS = "asynchronous"


@dataclass(frozen=True)
class Antibody:
    """One idiotype: bit pattern, current concentration and volume."""

    id: int
    bits: int
    width: int
    concentration: float = 0.0
    volume: float = 0.0

    def __post_init__(self) -> None:
        if not (0 <= self.bits < (1 << self.width)):
            raise ValueError(f"bits {self.bits:#x} out of range for width {self.width}")
        if self.volume < 0:
            raise ValueError("volume must be >= 0")

    @property
    def bitstring(self) -> str:
        return format(self.bits, f"0{self.width}b")


def hamming(a_bits: int, b_bits: int) -> int:
    return bin(a_bits ^ b_bits).count("1")


def interaction_predicate(a: Antibody, b: Antibody) -> bool:
    """True when the Hamming distance is width-1 or width (near-complements)."""
    if a.width != b.width:
        raise WidthMismatch(f"bit widths differ: {a.width} vs {b.width}")
    return a.width - 1 <= hamming(a.bits, b.bits) <= a.width


@dataclass(frozen=True)
class AffinityMatrix:
    """Symmetric couplings in [-1, 1] with zero diagonal."""

    values: np.ndarray

    def __post_init__(self) -> None:
        j = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", j)
        if j.ndim != 2 or j.shape[0] != j.shape[1]:
            raise ValueError(f"affinity matrix must be square, got {j.shape}")
        if np.any(np.diag(j) != 0):
            raise ValueError("affinity diagonal must be zero")
        if not np.array_equal(j, j.T):
            raise ValueError("affinity matrix must be symmetric")
        if np.max(np.abs(j), initial=0.0) > 1.0:
            raise ValueError("affinity entries must lie in [-1, 1]")

    @classmethod
    def random(
        cls, antibodies: Sequence[Antibody], rng: np.random.Generator
    ) -> "AffinityMatrix":
        """Uniform [-1, 1] couplings on interacting pairs, zero elsewhere."""
        n = len(antibodies)
        j = np.zeros((n, n))
        for a in range(n):
            for b in range(a + 1, n):
                if interaction_predicate(antibodies[a], antibodies[b]):
                    j[a, b] = j[b, a] = rng.uniform(-1.0, 1.0)
        return cls(j)


def _as_matrix(j) -> np.ndarray:
    return j.values if isinstance(j, AffinityMatrix) else np.asarray(j, dtype=float)


def field_on(i: int, j, c: Sequence[float], s: float = 0.0) -> float:
    """Total network effect on antibody i: s + sum_k J[i,k] * c[k]."""
    jm = _as_matrix(j)
    cv = np.asarray(c, dtype=float)
    if cv.shape != (jm.shape[0],):
        raise DimensionMismatch(
            f"concentration vector has shape {cv.shape}, matrix is {jm.shape}"
        )
    return float(s + jm[i] @ cv)


def step(
    c: Sequence[float],
    j,
    s: float = 0.0,
    forced: Mapping[int, float] | None = None,
    *,
    mode: str = SYNCHRONOUS,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """One threshold update: c_i becomes 1 if the field is positive, else 0.

    `forced` clamps the listed indices to given values (antigen injection),
    overriding the update. Asynchronous mode updates one antibody at a time
    in a shuffled order against the latest values.
    """
    jm = _as_matrix(j)
    cv = np.asarray(c, dtype=float).copy()
    if cv.shape != (jm.shape[0],):
        raise DimensionMismatch(
            f"concentration vector has shape {cv.shape}, matrix is {jm.shape}"
        )
    if mode == SYNCHRONOUS:
        h = s + jm @ cv
        out = np.where(h > 0, 1.0, 0.0)
    elif mode == ASYNCHRONOUS:
        if rng is None:
            raise ValueError("asynchronous mode needs an rng")
        out = cv
        for i in rng.permutation(len(cv)):
            out[i] = 1.0 if s + jm[i] @ out > 0 else 0.0
    else:
        raise ValueError(f"mode must be {SYNCHRONOUS!r} or {ASYNCHRONOUS!r}")
    for i, v in (forced or {}).items():
        out[i] = v
    return out


def relax_volumes(
    v: Sequence[float], c: Sequence[float], rho: float, v_max: float
) -> np.ndarray:
    """Exponential relaxation toward v_max * c."""
    vv = np.asarray(v, dtype=float)
    cv = np.asarray(c, dtype=float)
    return (1.0 - rho) * vv + rho * v_max * cv


def coexistence_graph(antibodies: Sequence[Antibody]) -> WeightedGraph:
    """Weighted graph of co-present interacting antibodies.

    Edge weight for a pair (j, k) is d(j,k) * vol_j * vol_k / total volume.
    Vertices are the antibodies with positive volume; zero-volume antibodies
    contribute nothing.
    """
    total = sum(a.volume for a in antibodies)
    if total <= 0:
        raise ZeroTotalVolume("total volume is zero; no coexistence to measure")
    alive = [a for a in antibodies if a.volume > 0]
    edges = {}
    for x in range(len(alive)):
        for y in range(x + 1, len(alive)):
            a, b = alive[x], alive[y]
            if not interaction_predicate(a, b):
                continue
            d = hamming(a.bits, b.bits)
            u, v = (a.id, b.id) if a.id < b.id else (b.id, a.id)
            edges[(u, v)] = d * a.volume * b.volume / total
    return WeightedGraph(
        frozenset(a.id for a in alive), edges, {a.id: f"Ab{a.id}" for a in alive}
    )


@dataclass(frozen=True)
class SimConfig:
    repertoire: int = 48
    bit_width: int = 12
    ticks: int = 260
    injections: tuple[int, ...] = (60, 160)
    seed: int = 36
    stride: int = 5
    s_threshold: float = 0.0
    rho: float = 0.2
    v_max: float = 1.0
    antigen: int = 0
    antigen_dose: float = 1.0
    antigen_duration: int = 12
    volume_floor: float = 1e-3
    v_spread: float = 0.25
    update: str = SYNCHRONOUS
    cluster_size: int = 10

    def __post_init__(self) -> None:
        object.__setattr__(self, "injections", tuple(int(t) for t in self.injections))
        if self.repertoire < 2:
            raise ConfigError("repertoire must be >= 2")
        if self.bit_width < 2:
            raise ConfigError("bit_width must be >= 2")
        if self.repertoire > 2 ** (self.bit_width - 1):
            raise ConfigError("repertoire too large for the bit width")
        if self.ticks < 1:
            raise ConfigError("ticks must be >= 1")
        if any(t < 0 or t >= self.ticks for t in self.injections):
            raise ConfigError("injection ticks must lie in [0, ticks)")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if not (0 < self.rho <= 1):
            raise ConfigError("rho must be in (0, 1]")
        if self.v_max <= 0:
            raise ConfigError("v_max must be > 0")
        if self.antigen_dose < 1:
            raise ConfigError("antigen_dose must be >= 1")
        if self.antigen_duration < 1:
            raise ConfigError("antigen_duration must be >= 1")
        if not (0 <= self.antigen < self.repertoire):
            raise ConfigError("antigen index out of range")
        if self.volume_floor < 0:
            raise ConfigError("volume_floor must be >= 0")
        if self.v_spread < 0:
            raise ConfigError("v_spread must be >= 0")
        if self.update not in (SYNCHRONOUS, ASYNCHRONOUS):
            raise ConfigError(f"update must be {SYNCHRONOUS!r} or {ASYNCHRONOUS!r}")
        if self.cluster_size < 2:
            raise ConfigError("cluster_size must be >= 2")

    @classmethod
    def from_file(cls, path: str | Path) -> "SimConfig":
        """Read a config from JSON or `key=value` lines."""
        text = Path(path).read_text(encoding="utf-8")
        raw: dict = {}
        stripped = text.lstrip()
        if stripped.startswith("{"):
            try:
                raw = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}: invalid JSON ({e})") from None
        else:
            for line in text.splitlines():
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                raw[key.strip()] = value.strip()
        return cls.from_mapping(raw, source=str(path))

    @classmethod
    def from_mapping(cls, raw: Mapping, source: str = "config") -> "SimConfig":
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, value in raw.items():
            if key not in known:
                raise ConfigError(f"{source}: unknown config key {key!r}")
            if key == "injections":
                if isinstance(value, str):
                    value = [t for t in value.replace(",", " ").split() if t]
                kwargs[key] = tuple(int(t) for t in value)
            elif key == "update":
                kwargs[key] = str(value)
            elif key in ("repertoire", "bit_width", "ticks", "seed", "stride",
                         "antigen", "antigen_duration", "cluster_size"):
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        return cls(**kwargs)


def build_repertoire(config: SimConfig, rng: np.random.Generator) -> list[int]:
    """Complement-closed clusters of bit patterns, globally distinct."""
    width, n = config.bit_width, config.repertoire
    mask = (1 << width) - 1
    out: list[int] = []
    used: set[int] = set()

    def push(x: int) -> None:
        if len(out) < n and x not in used:
            out.append(x)
            used.add(x)

    while len(out) < n:
        x = int(rng.integers(0, 1 << width))
        if x in used or (x ^ mask) in used:
            continue
        push(x)
        push(x ^ mask)
        mutant_pairs = max((config.cluster_size - 2) // 2, 0)
        for i in rng.permutation(width)[:mutant_pairs]:
            y = x ^ (1 << int(i))
            if y in used or (y ^ mask) in used:
                continue
            push(y)
            push(y ^ mask)
    return out


def _graph_at(bits: Sequence[int], width: int, c: np.ndarray, v: np.ndarray) -> WeightedGraph:
    if float(np.sum(v)) <= 0:
        return WeightedGraph(frozenset(), {})
    pop = [
        Antibody(i, bits[i], width, concentration=float(c[i]), volume=float(v[i]))
        for i in range(len(bits))
    ]
    return coexistence_graph(pop)


def run(config: SimConfig) -> ObservationSeries:
    """Run the simulation and sample the coexistence graph at the stride.

    Deterministic for a fixed config: same seed, same series. Ticks with no
    volume anywhere yield empty graphs (the pre-stimulation regime).
    """
    rng = np.random.default_rng(config.seed)
    bits = build_repertoire(config, rng)
    pop0 = [Antibody(i, b, config.bit_width) for i, b in enumerate(bits)]
    j = AffinityMatrix.random(pop0, rng)
    n = config.repertoire
    # heterogeneous production targets keep the weight ladder non-degenerate
    targets = config.v_max * (1.0 + config.v_spread * rng.uniform(0.0, 1.0, n))
    c = np.zeros(n)
    v = np.zeros(n)
    observations = []
    for t in range(config.ticks):
        if t % config.stride == 0:
            observations.append((t, _graph_at(bits, config.bit_width, c, v)))
        # the antigen is exogenous: present at the dose while injected,
        # cleared otherwise; only antibodies follow the threshold dynamics
        present = any(
            t0 <= t < t0 + config.antigen_duration for t0 in config.injections
        )
        forced = {config.antigen: config.antigen_dose if present else 0.0}
        c = step(c, j, config.s_threshold, forced, mode=config.update, rng=rng)
        v = relax_volumes(v, c, config.rho, targets)
        v[v < config.volume_floor] = 0.0
    return ObservationSeries(tuple(observations))
