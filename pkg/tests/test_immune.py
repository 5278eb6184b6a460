import json
import math

import numpy as np
import pytest

from topomata.errors import (
    ConfigError,
    DimensionMismatch,
    WidthMismatch,
    ZeroTotalVolume,
)
from topomata.graph import write_observations_json
from topomata.immune import (
    AffinityMatrix,
    Antibody,
    SimConfig,
    build_repertoire,
    coexistence_graph,
    field_on,
    hamming,
    interaction_predicate,
    relax_volumes,
    run,
    step,
)


def ab(i, bits, width=12, volume=0.0):
    return Antibody(i, bits, width, volume=volume)


class TestInteraction:
    def test_complement_interacts(self):
        assert interaction_predicate(ab(0, 0b111111111111), ab(1, 0))

    def test_identical_do_not(self):
        assert not interaction_predicate(ab(0, 0b1010), ab(1, 0b1010))

    def test_distance_11_yes_10_no(self):
        base = 0
        d11 = (1 << 11) - 1  # 11 ones
        d10 = (1 << 10) - 1
        assert hamming(base, d11) == 11
        assert interaction_predicate(ab(0, base), ab(1, d11))
        assert not interaction_predicate(ab(0, base), ab(1, d10))

    def test_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            interaction_predicate(ab(0, 0, width=12), ab(1, 0, width=8))

    def test_generalizes_to_other_widths(self):
        a, b = ab(0, 0b0000, 4), ab(1, 0b0111, 4)
        assert interaction_predicate(a, b)  # distance 3 = width - 1


class TestField:
    def test_zero_concentrations_give_threshold(self):
        j = np.zeros((3, 3))
        assert field_on(1, j, [0, 0, 0], s=0.75) == 0.75

    def test_row_arithmetic(self):
        j = np.array([[0, 0.5, -0.25], [0.5, 0, 0], [-0.25, 0, 0]])
        assert field_on(0, j, [1, 1, 1]) == pytest.approx(0.25)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            field_on(0, np.zeros((3, 3)), [1, 0])

    def test_matches_direct_formula_on_random_instances(self):
        rng = np.random.default_rng(10)
        for _ in range(30):
            n = 5
            a = rng.uniform(-1, 1, (n, n))
            j = (a + a.T) / 2
            np.fill_diagonal(j, 0)
            c = rng.integers(0, 2, n).astype(float)
            s = float(rng.uniform(-1, 1))
            i = int(rng.integers(0, n))
            direct = s + sum(j[i][k] * c[k] for k in range(n))
            assert field_on(i, j, c, s) == pytest.approx(direct, abs=1e-12)


class TestStep:
    def test_fixed_point_consistency(self):
        j = np.array([[0, 0.6, -0.2], [0.6, 0, 0.1], [-0.2, 0.1, 0]])
        c = np.array([1.0, 1.0, 0.0])
        nxt = step(c, j)
        assert np.array_equal(nxt, c)  # consistent state is a fixed point
        for i in range(3):
            h = field_on(i, j, c)
            assert (c[i] == 1.0) == (h > 0)

    def test_all_negative_couplings_suppress_everything(self):
        j = -0.5 * (np.ones((4, 4)) - np.eye(4))
        c = np.ones(4)
        assert np.array_equal(step(c, j), np.zeros(4))

    def test_zero_field_is_suppressed(self):
        j = np.zeros((2, 2))
        assert np.array_equal(step(np.ones(2), j), np.zeros(2))

    def test_forced_clamp_overrides(self):
        j = np.zeros((3, 3))
        out = step(np.zeros(3), j, forced={1: 2.0})
        assert out[1] == 2.0 and out[0] == 0.0

    def test_activation_spreads_from_clamped_node(self):
        # node 0 stimulates 1, which stimulates 2
        j = np.array([[0, 0.9, 0], [0.9, 0, 0.8], [0, 0.8, 0]])
        c = np.zeros(3)
        c = step(c, j, forced={0: 1.0})
        c = step(c, j, forced={0: 1.0})
        c = step(c, j, forced={0: 1.0})
        assert c.tolist() == [1.0, 1.0, 1.0]

    def test_asynchronous_mode_runs(self):
        j = np.array([[0, 0.5], [0.5, 0]])
        rng = np.random.default_rng(0)
        out = step(np.array([1.0, 0.0]), j, mode="asynchronous", rng=rng)
        assert set(out.tolist()) <= {0.0, 1.0}

    def test_asynchronous_needs_rng(self):
        with pytest.raises(ValueError):
            step(np.zeros(2), np.zeros((2, 2)), mode="asynchronous")

    def test_relax_volumes(self):
        v = relax_volumes([0.0, 1.0], [1.0, 0.0], rho=0.2, v_max=2.0)
        assert v.tolist() == [0.4, 0.8]


class TestAffinity:
    def test_random_respects_interaction_structure(self):
        rng = np.random.default_rng(5)
        pop = [ab(i, bits) for i, bits in enumerate([0b0, 0b111111111111, 0b1, 0b10])]
        j = AffinityMatrix.random(pop, rng)
        assert j.values[0, 1] != 0  # complements interact
        assert j.values[2, 3] == 0  # distance 2: no coupling
        assert np.array_equal(j.values, j.values.T)
        assert np.all(np.diag(j.values) == 0)

    def test_validation(self):
        with pytest.raises(ValueError):
            AffinityMatrix(np.array([[0, 1], [2, 0]]))  # asymmetric
        with pytest.raises(ValueError):
            AffinityMatrix(np.array([[1.0]]))  # nonzero diagonal
        with pytest.raises(ValueError):
            AffinityMatrix(np.array([[0, 1.5], [1.5, 0]]))  # out of range


class TestCoexistence:
    def test_two_antibody_weight(self):
        pop = [ab(0, 0, volume=1.0), ab(1, 0b111111111111, volume=1.0)]
        g = coexistence_graph(pop)
        assert g.edge_triples() == [(0, 1, 6.0)]  # 12 * 1 * 1 / 2

    def test_zero_volume_contributes_nothing(self):
        pop = [
            ab(0, 0, volume=1.0),
            ab(1, 0b111111111111, volume=0.0),
            ab(2, 0b111111111110, volume=1.0),
        ]
        g = coexistence_graph(pop)
        assert g.vertices == frozenset({0, 2})
        assert g.edge_triples() == [(0, 2, 11.0 * 1 * 1 / 2)]

    def test_zero_total_volume(self):
        with pytest.raises(ZeroTotalVolume):
            coexistence_graph([ab(0, 0), ab(1, 1)])

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(6)
        pop = []
        patterns = [0b0, 0b111111111111, 0b111111111110, 0b1, 0b011111111111]
        for i, bits in enumerate(patterns):
            pop.append(ab(i, bits, volume=float(rng.uniform(0.1, 3.0))))
        g = coexistence_graph(pop)
        total = sum(a.volume for a in pop)
        for u, v, w in g.edge_triples():
            a = next(x for x in pop if x.id == u)
            b = next(x for x in pop if x.id == v)
            assert w == pytest.approx(
                hamming(a.bits, b.bits) * a.volume * b.volume / total, rel=1e-12
            )

    def test_homogeneity_under_volume_scaling(self):
        pop = [
            ab(0, 0, volume=0.7),
            ab(1, 0b111111111111, volume=1.3),
            ab(2, 0b111111111110, volume=0.4),
        ]
        base = dict(coexistence_graph(pop).edges)
        for lam in (0.5, 2.0, 10.0):
            scaled = [
                Antibody(a.id, a.bits, a.width, volume=a.volume * lam) for a in pop
            ]
            for key, w in coexistence_graph(scaled).edges.items():
                assert w == pytest.approx(lam * base[key], rel=1e-12)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ConfigError):
            SimConfig(repertoire=1)
        with pytest.raises(ConfigError):
            SimConfig(injections=(999,), ticks=100)
        with pytest.raises(ConfigError):
            SimConfig(rho=0.0)
        with pytest.raises(ConfigError):
            SimConfig(antigen_dose=0.5)
        with pytest.raises(ConfigError):
            SimConfig(update="sideways")
        with pytest.raises(ConfigError):
            SimConfig(repertoire=5000, bit_width=12)

    def test_from_json_file(self, tmp_path):
        p = tmp_path / "sim.json"
        p.write_text(json.dumps({"repertoire": 16, "ticks": 50, "injections": [5]}))
        cfg = SimConfig.from_file(p)
        assert cfg.repertoire == 16
        assert cfg.injections == (5,)

    def test_from_key_value_file(self, tmp_path):
        p = tmp_path / "sim.cfg"
        p.write_text("repertoire=16\nticks=50\ninjections=5,20\nrho=0.3\n# comment\n")
        cfg = SimConfig.from_file(p)
        assert cfg.ticks == 50
        assert cfg.injections == (5, 20)
        assert cfg.rho == 0.3

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "sim.json"
        p.write_text(json.dumps({"volume": 3}))
        with pytest.raises(ConfigError):
            SimConfig.from_file(p)


class TestRun:
    def test_deterministic_byte_for_byte(self, tmp_path):
        cfg = SimConfig(repertoire=24, ticks=80, injections=(20,), seed=3)
        a, b = run(cfg), run(cfg)
        pa, pb = tmp_path / "a.json", tmp_path / "b.json"
        write_observations_json(a, pa)
        write_observations_json(b, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_sampling_stride(self):
        cfg = SimConfig(repertoire=16, ticks=31, injections=(5,), stride=10, seed=1)
        series = run(cfg)
        assert series.ticks == (0, 10, 20, 30)

    def test_virgin_phase_is_empty(self):
        cfg = SimConfig(repertoire=16, ticks=30, injections=(25,), seed=2)
        series = run(cfg)
        for t, g in series:
            if t <= 25:
                assert g.n_vertices == 0 and g.n_edges == 0

    def test_injection_at_final_tick_leaves_series_empty(self):
        cfg = SimConfig(repertoire=16, ticks=40, injections=(39,), seed=4)
        series = run(cfg)
        assert all(g.n_edges == 0 for _, g in series)

    def test_zero_injections_stay_flat(self):
        cfg = SimConfig(repertoire=16, ticks=60, injections=(), seed=5)
        series = run(cfg)
        assert all(g.n_vertices == 0 for _, g in series)

    def test_repertoire_is_distinct_and_in_range(self):
        cfg = SimConfig(repertoire=48, bit_width=12, seed=9)
        rng = np.random.default_rng(9)
        bits = build_repertoire(cfg, rng)
        assert len(bits) == 48
        assert len(set(bits)) == 48
        assert all(0 <= b < 2**12 for b in bits)

    def test_antibody_validation(self):
        with pytest.raises(ValueError):
            Antibody(0, 1 << 12, 12)
        with pytest.raises(ValueError):
            Antibody(0, 0, 12, volume=-1.0)
        assert Antibody(0, 0b101, 5).bitstring == "00101"
