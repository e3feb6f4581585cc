import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from nrgraph import oracle
from nrgraph.dist import ParetoTail, WeightSequence, build_weights
from nrgraph.sampler import (
    GraphSample,
    RngStream,
    as_generator,
    degree_histogram,
    read_graph_binary,
    sample_naive,
    sample_poisson_collapse,
    write_graph_binary,
    write_graph_csv,
)

SAMPLERS = [sample_naive, sample_poisson_collapse]
P_HALF = 1 - math.exp(-0.5)


def edge_freq(sampler, ws, R, seed):
    gen = RngStream(seed).generator()
    hits = 0
    for _ in range(R):
        hits += sampler(ws, gen).m
    return hits / R


class TestRng:
    def test_stream_reproducible(self):
        a = RngStream(5, 3).generator().random(4)
        b = RngStream(5, 3).generator().random(4)
        c = RngStream(5, 4).generator().random(4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_default_seed(self):
        _, seed, stream = as_generator(None)
        assert (seed, stream) == (42, 0)

    def test_bad_type(self):
        with pytest.raises(TypeError):
            as_generator("seed")


class TestGraphSample:
    def test_canonical(self):
        g = GraphSample(4, np.array([[3, 1], [0, 2]]), "naive")
        assert g.edges.tolist() == [[0, 2], [1, 3]]

    @pytest.mark.parametrize("edges", [[[0, 0]], [[0, 1], [1, 0]], [[0, 4]], [[-1, 2]]])
    def test_invalid(self, edges):
        with pytest.raises(ValueError):
            GraphSample(4, np.array(edges), "naive")

    def test_edge_mask_order(self):
        # lexicographic pair order on n=4: 01 02 03 12 13 23
        g = GraphSample(4, np.array([[0, 1], [2, 3]]), "naive")
        assert g.edge_mask() == 0b100001

    def test_io_round_trip(self, tmp_path):
        ws = build_weights(ParetoTail.critical(3.5), 500)
        g = sample_poisson_collapse(ws, RngStream(1))
        write_graph_binary(g, tmp_path / "g.bin")
        raw = (tmp_path / "g.bin").read_bytes()
        assert raw[:4] == b"NRG1"
        assert int.from_bytes(raw[4:12], "little") == 500
        assert int.from_bytes(raw[12:20], "little") == g.m
        assert len(raw) == 20 + 8 * g.m
        assert read_graph_binary(tmp_path / "g.bin") == g
        write_graph_csv(g, tmp_path / "g.csv")
        lines = (tmp_path / "g.csv").read_text().splitlines()
        assert lines[0] == "u,v" and len(lines) == g.m + 1

    def test_bad_binary(self, tmp_path):
        (tmp_path / "x.bin").write_bytes(b"NOPE" + bytes(16))
        with pytest.raises(ValueError):
            read_graph_binary(tmp_path / "x.bin")


@pytest.mark.parametrize("sampler", SAMPLERS)
class TestBothSamplers:
    @pytest.mark.slow
    def test_two_vertex_edge_probability(self, sampler, w11):
        R = 1_000_000
        f = edge_freq(sampler, w11, R, 11)
        se = math.sqrt(P_HALF * (1 - P_HALF) / R)
        assert abs(f - P_HALF) <= 3 * se
        assert P_HALF == pytest.approx(0.393469, abs=5e-7)

    def test_zero_weight_isolated(self, sampler):
        ws = WeightSequence(np.array([3.0, 2.0, 1.0, 0.0]))
        gen = RngStream(2).generator()
        for _ in range(2000):
            assert sampler(ws, gen).degrees[3] == 0

    def test_deterministic(self, sampler):
        ws = WeightSequence(np.ones(3))
        assert sampler(ws, RngStream(9, 1)) == sampler(ws, RngStream(9, 1))
        g = sampler(ws, RngStream(9, 1))
        assert (g.seed, g.stream) == (9, 1)

    @settings(max_examples=40, deadline=None)
    @given(w=st.lists(st.floats(0, 20), min_size=2, max_size=40).filter(lambda v: sum(v) > 0),
           seed=st.integers(0, 2**32))
    def test_simple_graph(self, sampler, w, seed):
        ws = WeightSequence(np.sort(w)[::-1])
        g = sampler(ws, RngStream(seed))
        e = g.edges
        assert np.all(e[:, 0] < e[:, 1])
        assert len({tuple(x) for x in e.tolist()}) == g.m <= ws.n * (ws.n - 1) // 2
        assert sum(degree_histogram(g).values()) == ws.n

    def test_marginals_n6(self, sampler):
        ws = build_weights(ParetoTail.critical(4.5), 6)
        p = oracle.exact_edge_marginals(ws)
        R = 40_000
        gen = RngStream(3).generator()
        counts = np.zeros((6, 6))
        for _ in range(R):
            e = sampler(ws, gen).edges
            counts[e[:, 0], e[:, 1]] += 1
        iu = np.triu_indices(6, 1)
        f, q = counts[iu] / R, p[iu]
        se = np.sqrt(q * (1 - q) / R)
        assert np.all(np.abs(f - q) <= 4 * se + 1e-12)


def test_single_positive_weight_empty():
    ws = WeightSequence(np.array([5.0, 0.0, 0.0]))
    for s in range(200):
        assert sample_poisson_collapse(ws, RngStream(s)).m == 0


def test_naive_guard():
    ws = WeightSequence(np.ones(10_001))
    with pytest.raises(ValueError, match="allow_large"):
        sample_naive(ws)


def test_samplers_agree_chi_square(crit35_n4):
    R = 100_000
    counts = []
    for sampler in SAMPLERS:
        gen = RngStream(21).generator()
        masks = np.array([sampler(crit35_n4, gen).edge_mask() for _ in range(R)])
        counts.append(((masks[:, None] >> np.arange(6)) & 1).sum(axis=0))
    a, b = counts
    # pairs that never fire (weight 0 vertex) carry no information
    live = (a + b) > 0
    table = np.stack([np.stack([a, R - a]), np.stack([b, R - b])])[:, :, live]
    pvals = [stats.chi2_contingency(table[:, :, i])[1] for i in range(table.shape[2])]
    assert min(pvals) > 0.001 / len(pvals)


def test_degree_histogram_small():
    assert degree_histogram(GraphSample(3, np.empty((0, 2)), "naive")) == {0: 3}
    tri = GraphSample(3, np.array([[0, 1], [1, 2], [0, 2]]), "naive")
    assert degree_histogram(tri) == {2: 3}
