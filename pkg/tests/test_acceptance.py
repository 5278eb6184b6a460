"""Acceptance gate: one test per criterion, each printing a PASS line with
its runtime. Tolerances and parameters are pinned here, not configurable.

Run with `pytest tests/test_acceptance.py -v -s`.
"""
import math
import random
import time
from itertools import product

import pytest

from topomata.automaton import PEAK, build_automaton, segment
from topomata.chu import ActionLabel, constrain, full_chu, hasse
from topomata.cli import barcodes_for_series
from topomata.entropy import chronogram, persistent_entropy
from topomata.filtration import Simplex, build_filtration
from topomata.graph import WeightedGraph
from topomata.homology import (
    Barcode,
    Interval,
    betti_numbers,
    boundary_is_empty,
    euler_characteristic_holds,
    persistent_homology,
)
from topomata.immune import Antibody, SimConfig, coexistence_graph, field_on, run, step

import numpy as np

from test_chu import COUPLED_PAIR_STATES


def report(n, started, label):
    print(f"\nACCEPTANCE {n}: PASS ({time.perf_counter() - started:.2f}s) - {label}")


def random_weighted_graph(rng):
    n = rng.randrange(1, 9)
    pool = [1.0, 2.0, 3.0, 4.5, 7.25] + [rng.uniform(0.1, 10.0) for _ in range(3)]
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < 0.5:
                edges.append((u, v, rng.choice(pool)))
    return WeightedGraph.from_edges(edges, vertices=range(n))


def test_criterion_1_ringed_square_golden(ringed_square):
    t0 = time.perf_counter()
    c = build_filtration(ringed_square, max_dim=2)
    b = persistent_homology(c, max_dim=1)
    dim0 = b.in_dimension(0)
    dim1 = b.in_dimension(1)
    assert [(iv.birth, iv.death) for iv in dim0] == [(0, None)]
    assert [(iv.birth, iv.death) for iv in dim1] == [(3, None)]
    (loop,) = dim1
    assert len(loop.generator) == 4
    assert all(s.dimension == 1 for s in loop.generator)
    assert len({v for s in loop.generator for v in s.vertices}) == 4
    assert boundary_is_empty(loop.generator)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    report(1, t0, "one component from filter 0, one 4-edge hole born at filter 3")


def test_criterion_2_entropy_worked_example(ringed_square):
    t0 = time.perf_counter()
    c = build_filtration(ringed_square, max_dim=2)
    b = persistent_homology(c, max_dim=1)
    h = persistent_entropy(b)  # natural log
    assert abs(h - 0.5) <= 1e-3
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    report(2, t0, f"persistent entropy {h:.4f} within 0.001 of 0.5")


def test_criterion_3_homology_oracle_suite():
    t0 = time.perf_counter()
    rng = random.Random(2024)
    n_graphs = 500
    for _ in range(n_graphs):
        g = random_weighted_graph(rng)
        c = build_filtration(g, max_dim=3)
        b = persistent_homology(c, max_dim=3)
        for t in range(c.max_filter + 1):
            assert b.alive_counts(t, 3) == betti_numbers(c, t, max_dim=3)
            assert euler_characteristic_holds(c, t)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    report(3, t0, f"{n_graphs} random graphs: barcode == rank oracle, Euler holds")


def test_criterion_4_entropy_property_suite():
    t0 = time.perf_counter()
    rng = random.Random(77)
    # exact maximum for equal bars
    for n in (1, 2, 3, 4, 7, 16, 81):
        b = Barcode(
            tuple(Interval(0, 0, 5, (Simplex((0,)),)) for _ in range(n)), 9
        )
        assert abs(persistent_entropy(b) - math.log(n)) < 1e-12
    n_barcodes = 1000
    for _ in range(n_barcodes):
        n = rng.randrange(1, 15)
        max_filter = 30
        intervals = []
        for _ in range(n):
            birth = rng.randrange(0, max_filter)
            death = rng.randrange(birth + 1, max_filter + 2)
            intervals.append(
                Interval(0, birth, None if rng.random() < 0.2 else death, (Simplex((0,)),))
            )
        b = Barcode(tuple(intervals), max_filter)
        h = persistent_entropy(b)
        assert 0.0 <= h <= math.log(len(b.intervals)) + 1e-12
        shuffled = list(b.intervals)
        rng.shuffle(shuffled)
        assert persistent_entropy(Barcode(tuple(shuffled), max_filter)) == h
        k = rng.choice((2, 3, 10))
        scaled = Barcode(
            tuple(
                Interval(
                    iv.dimension,
                    iv.birth * k,
                    None if iv.death is None else iv.death * k,
                    iv.generator,
                )
                for iv in b.intervals
            ),
            (max_filter + 1) * k - 1,
        )
        assert persistent_entropy(scaled) == h
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    report(4, t0, f"{n_barcodes} random barcodes: bounds, max, permutation+scale invariance")


def test_criterion_5_chu_goldens():
    t0 = time.perf_counter()
    two = full_chu([ActionLabel("elicits", 0, 1), ActionLabel("reduces", 0, 1)])
    assert two.n_states == 9
    assert two.matrix() == [
        [0, 0, 0, 1, 1, 1, 2, 2, 2],
        [0, 1, 2, 0, 1, 2, 0, 1, 2],
    ]
    pair = [
        ActionLabel("elicits", 1, 13),
        ActionLabel("reduces", 1, 13),
        ActionLabel("elicits", 13, 1),
        ActionLabel("reduces", 13, 1),
    ]
    coupled = constrain(full_chu(pair), [(0, 1), (2, 3)])
    assert coupled.n_states == 25
    assert set(coupled.states) == set(COUPLED_PAIR_STATES)
    h = hasse(two)
    assert ((1, 0), (1, 1)) in h.edges
    assert ((1, 0), (0, 1)) not in h.edges
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    report(5, t0, "9-state matrix, 25-state coupled subsystem, covering relation")


def test_criterion_6_end_to_end_desk_scale():
    t0 = time.perf_counter()
    cfg = SimConfig(
        repertoire=48,
        bit_width=12,
        ticks=260,
        injections=(60, 160),
        seed=36,
        stride=5,
    )
    assert cfg.repertoire <= 256
    series = run(cfg)
    barcodes = barcodes_for_series(series, "descending", max_dim=1, jobs=1)
    s = chronogram(barcodes, empty="zero")
    segments = segment(s)  # documented defaults: eps/prominence from max H
    peaks = [g for g in segments if g.kind == PEAK]
    assert len(peaks) == 2, f"expected exactly two peaks, got {len(peaks)}"
    a = build_automaton(segments)
    initial = a.state(a.initial)
    assert initial.zero_level  # H = 0 and dH/dt = 0 at the start
    positive = [st for st in a.states if not st.zero_level]
    assert positive, "expected a positive-entropy steady state"
    loop_sources = {src for src, _, dst in a.transitions if src == dst}
    assert any(st.name in loop_sources for st in positive)
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0
    report(
        6,
        t0,
        f"two peaks; automaton: zero-level initial + level {positive[0].level:.3f} "
        "state with self-loop",
    )


def test_criterion_7_threshold_dynamics_fixed_points():
    t0 = time.perf_counter()
    instances = [
        np.array([[0, 0.6, -0.2], [0.6, 0, 0.1], [-0.2, 0.1, 0]]),
        np.array([[0, -0.5, 0.9], [-0.5, 0, 0.4], [0.9, 0.4, 0]]),
        np.array([[0, 0.3, 0.3], [0.3, 0, -0.7], [0.3, -0.7, 0]]),
    ]
    for j in instances:
        for combo in product((0.0, 1.0), repeat=3):
            c = np.array(combo)
            nxt = step(c, j)
            if np.array_equal(nxt, c):
                for i in range(3):
                    assert (c[i] == 1.0) == (field_on(i, j, c) > 0)
        # iterate to a fixed point or a 2-cycle; any fixed point must be consistent
        c = np.zeros(3)
        for _ in range(20):
            nxt = step(c, j)
            if np.array_equal(nxt, c):
                break
            c = nxt
        if np.array_equal(step(c, j), c):
            for i in range(3):
                assert (c[i] == 1.0) == (field_on(i, j, c) > 0)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    report(7, t0, "fixed points satisfy c_i = 1 iff field > 0 on 3-node instances")


def test_criterion_8_coexistence_homogeneity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    patterns = [0b0, 0b111111111111, 0b111111111110, 0b1, 0b011111111111, 0b10]
    volumes = [0.7, 1.3, 0.4, 0.9, 2.1, 0.55]
    pop = [
        Antibody(i, bits, 12, volume=v) for i, (bits, v) in enumerate(zip(patterns, volumes))
    ]
    base_graph = coexistence_graph(pop)
    base_complex = build_filtration(base_graph, max_dim=2)
    base_barcode = persistent_homology(base_complex, max_dim=1)
    base_order = [(s.vertices, fi) for s, fi in base_complex.simplices]
    for lam in (0.5, 2.0, 10.0):
        scaled_pop = [
            Antibody(a.id, a.bits, a.width, volume=a.volume * lam) for a in pop
        ]
        g = coexistence_graph(scaled_pop)
        assert set(g.edges) == set(base_graph.edges)
        for key, w in g.edges.items():
            assert w == pytest.approx(lam * base_graph.edges[key], rel=1e-12)
        c = build_filtration(g, max_dim=2)
        assert [(s.vertices, fi) for s, fi in c.simplices] == base_order
        b = persistent_homology(c, max_dim=1)
        assert [
            (iv.dimension, iv.birth, iv.death, iv.generator) for iv in b.intervals
        ] == [
            (iv.dimension, iv.birth, iv.death, iv.generator)
            for iv in base_barcode.intervals
        ]
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    report(8, t0, "volume scaling scales weights by lambda; index barcode unchanged")
