import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robotcrawler.crawler import (BOUND_MAX, CrawlError, Weighting, audit_trace, bonato_bound,
                                  crawl, crawl_kpartite, jump_numbers, surplus)
from robotcrawler.graph import (Graph, GraphDiagnostics, PartiteSpec, build_kpartite,
                                diagnostics, load_edge_list)
from robotcrawler.theory import bridge_from_weighting, record

from conftest import connected_graphs, partite_specs
from oracles import kpartite_adjacency, naive_crawl, naive_jumps, naive_surplus

PATH3 = "0 1\n1 2"


@pytest.fixture
def hand_trace():
    spec = PartiteSpec((2, 1, 1))
    w0 = Weighting(np.array([-1, -2, -4, -3]))
    g = build_kpartite(spec)
    return spec, g, w0, crawl(g, w0)


def test_weighting_validation():
    Weighting(np.array([-2, -1, -3]))
    for bad in ([-1, -1, -3], [0, -1, -2], [-4, -1, -2], []):
        with pytest.raises(ValueError):
            Weighting(np.array(bad, dtype=np.int64))


def test_weighting_order_round_trip():
    w = Weighting.from_order([2, 0, 1])
    assert w.rank.tolist() == [-2, -1, -3]
    assert w.order().tolist() == [2, 0, 1]


def test_weighting_file_round_trip():
    w = Weighting.random(9, 4)
    assert np.array_equal(Weighting.loads(w.dumps()).rank, w.rank)
    with pytest.raises(ValueError, match="line 2"):
        Weighting.loads("-1\nabc\n")


def test_triangle_any_weighting():
    g = build_kpartite(PartiteSpec((1, 1, 1)))
    for seed in range(6):
        assert crawl(g, Weighting.random(3, seed)).T == 3


def test_hand_trace(hand_trace):
    spec, g, w0, tr = hand_trace
    assert tr.visits.tolist() == [2, 3, 1, 2, 0]
    assert tr.T == 5
    assert tr.first_clean_time.tolist() == [5, 3, 1, 2]
    assert naive_crawl(kpartite_adjacency(spec.sizes), w0.rank.tolist()) == [2, 3, 1, 2, 0]


def test_path_forced_moves():
    g = load_edge_list(PATH3)
    tr = crawl(g, Weighting(np.array([-3, -2, -1])))
    assert tr.visits.tolist() == [0, 1, 2] and tr.T == 3


def test_step_cap():
    g = build_kpartite(PartiteSpec((2, 1, 1)))
    w0 = Weighting(np.array([-1, -2, -4, -3]))
    with pytest.raises(CrawlError):
        crawl(g, w0, step_cap=4)
    assert crawl(g, w0, step_cap=5).T == 5


def test_size_mismatch():
    with pytest.raises(ValueError):
        crawl(load_edge_list(PATH3), Weighting.random(4, 0))


@given(connected_graphs(), st.data())
def test_crawl_matches_naive_oracle(g, data):
    w0 = Weighting(data.draw(st.permutations(range(-g.n, 0))))
    tr = crawl(g, w0)
    assert tr.visits.tolist() == naive_crawl([set(a) for a in g.adjacency], w0.rank.tolist())
    assert audit_trace(g, w0, tr) == []


@given(connected_graphs(), st.data())
def test_trace_invariants(g, data):
    w0 = Weighting(data.draw(st.permutations(range(-g.n, 0))))
    tr = crawl(g, w0)
    assert tr.visits[0] == int(np.argmin(w0.rank))
    assert set(tr.visits.tolist()) == set(range(g.n))
    assert tr.T >= g.n
    assert np.all(tr.first_clean_time >= 1)
    # first_clean_time agrees with the first occurrence in the visit list
    first = {}
    for t, v in enumerate(tr.visits.tolist(), start=1):
        first.setdefault(v, t)
    assert [first[v] for v in range(g.n)] == tr.first_clean_time.tolist()


@given(connected_graphs(max_n=8), st.data())
def test_crawl_within_bonato_bound(g, data):
    w0 = Weighting(data.draw(st.permutations(range(-g.n, 0))))
    assert crawl(g, w0).T <= bonato_bound(diagnostics(g), g.n)


def test_crawl_is_deterministic():
    g = build_kpartite(PartiteSpec((5, 4, 3)))
    w0 = Weighting.random(12, 77)
    a, b = crawl(g, w0), crawl(g, w0)
    assert np.array_equal(a.visits, b.visits)


def test_audit_catches_tampering(hand_trace):
    spec, g, w0, tr = hand_trace
    bad = type(tr)(np.array([2, 3, 0, 2, 1]), tr.first_clean_time)
    assert audit_trace(g, w0, bad)


@given(partite_specs(max_k=5, max_size=5), st.data())
def test_kpartite_kernel_matches_general_crawl(spec, data):
    w0 = Weighting(data.draw(st.permutations(range(-spec.n, 0))))
    a = crawl(build_kpartite(spec), w0)
    b = crawl_kpartite(spec, w0)
    assert np.array_equal(a.visits, b.visits)
    assert np.array_equal(a.first_clean_time, b.first_clean_time)


def test_surplus_hand_trace(hand_trace):
    spec, g, w0, tr = hand_trace
    rep = surplus(tr, spec)
    assert rep.per_class == (2, 0, 0)
    assert rep.total == 2
    assert rep.identity_holds


def test_surplus_hamiltonian_trace_has_surplus_one():
    spec = PartiteSpec((2, 2, 2))
    w0 = Weighting.from_order([0, 2, 4, 1, 3, 5])
    tr = crawl(build_kpartite(spec), w0)
    assert tr.T == spec.n
    assert surplus(tr, spec).total == 1


def test_surplus_below_record_when_largest_class_is_cleanest():
    # (3,3,1) with V1 the three cleanest vertices: m1 = 3 but S(1) <= 2
    spec = PartiteSpec((3, 3, 1))
    rng = np.random.default_rng(0)
    g = build_kpartite(spec)
    for _ in range(50):
        order = np.concatenate([rng.permutation([3, 4, 5, 6]), rng.permutation([0, 1, 2])])
        w0 = Weighting.from_order(order)
        tr = crawl(g, w0)
        assert record(bridge_from_weighting(w0, spec, 0)).m == 3
        assert surplus(tr, spec).per_class[0] <= 2


def test_surplus_layout_mismatch(hand_trace):
    spec, g, w0, tr = hand_trace
    with pytest.raises(ValueError):
        surplus(tr, PartiteSpec((3, 1, 1)))
    # a path trace moves inside what the partition calls one class
    path = crawl(load_edge_list("0 1\n1 2\n2 3"), Weighting(np.array([-4, -3, -2, -1])))
    with pytest.raises(ValueError, match="inside a class"):
        surplus(path, PartiteSpec((2, 1, 1)))


@given(partite_specs(max_k=5, max_size=5), st.data())
def test_surplus_properties(spec, data):
    w0 = Weighting(data.draw(st.permutations(range(-spec.n, 0))))
    tr = crawl_kpartite(spec, w0)
    rep = surplus(tr, spec)
    classes = [set(range(a, b)) for a, b in zip(spec.offsets, spec.offsets[1:])]
    assert list(rep.per_class) == naive_surplus(tr.visits.tolist(), classes)
    assert sum(1 for s in rep.per_class if s > 0) <= 1
    assert rep.total == sum(rep.per_class) == max(rep.per_class)
    assert rep.identity_holds
    for i in range(spec.k):
        assert rep.per_class[i] <= record(bridge_from_weighting(w0, spec, i)).m


def test_jump_numbers_small_cases(hand_trace):
    spec, g, w0, tr = hand_trace
    jumps = jump_numbers(g, w0, tr)
    # vertex 0 waits behind the move 1 -> 2 (vertex 2 already cleaned)
    assert jumps.tolist() == naive_jumps(w0.rank.tolist(), tr.visits.tolist()) == [1, 0, 0, 0]
    assert jumps[int(np.argmin(w0.rank))] == 0
    p = load_edge_list(PATH3)
    w = Weighting(np.array([-3, -2, -1]))
    assert jump_numbers(p, w, crawl(p, w))[2] == 0


@given(connected_graphs(), st.data())
def test_jump_numbers_match_oracle(g, data):
    w0 = Weighting(data.draw(st.permutations(range(-g.n, 0))))
    tr = crawl(g, w0)
    jumps = jump_numbers(g, w0, tr)
    assert jumps.tolist() == naive_jumps(w0.rank.tolist(), tr.visits.tolist())
    assert jumps.min() >= 0
    assert jumps[int(np.argmin(w0.rank))] == 0


@given(connected_graphs(), st.data())
def test_each_jump_witnesses_a_missing_edge(g, data):
    w0 = Weighting(data.draw(st.permutations(range(-g.n, 0))))
    tr = crawl(g, w0)
    adj = [set(a) for a in g.adjacency]
    w = w0.rank.tolist()
    visits = tr.visits.tolist()
    fct = tr.first_clean_time.tolist()
    for t in range(1, len(visits)):
        prev, x = visits[t - 1], visits[t]
        for v in range(g.n):
            if fct[v] > t + 1 and w[x] > w[v]:
                assert v not in adj[prev]
        w[x] = t + 1


@pytest.mark.parametrize("maxdeg, diam, n, expected", [(2, 2, 3, 27), (2, 1, 3, 9), (1, 1, 2, 4)])
def test_bonato_bound_values(maxdeg, diam, n, expected):
    assert bonato_bound(GraphDiagnostics(maxdeg, diam, True, True), n) == expected


def test_bonato_bound_from_graphs():
    assert bonato_bound(diagnostics(load_edge_list(PATH3)), 3) == 27
    assert bonato_bound(diagnostics(build_kpartite(PartiteSpec((1, 1, 1)))), 3) == 9
    assert bonato_bound(diagnostics(load_edge_list("0 1")), 2) == 4


def test_bonato_bound_saturates_and_needs_exact_diameter():
    assert bonato_bound(GraphDiagnostics(500, 40, True, True), 10_000) == BOUND_MAX
    with pytest.raises(ValueError):
        bonato_bound(GraphDiagnostics(5, 3, True, False), 100)


def test_trace_json_export(hand_trace):
    spec, g, w0, tr = hand_trace
    out = json.loads(tr.to_json(spec))
    assert out == {"T": 5, "n": 4, "visits": [2, 3, 1, 2, 0], "surplus": [2, 0, 0], "S": 2,
                   "identity_holds": True}


def test_kpartite_with_two_classes_oscillates():
    spec = PartiteSpec((3, 3))
    g = build_kpartite(spec)
    for seed in range(10):
        w0 = Weighting.random(6, seed)
        assert crawl_kpartite(spec, w0).T == crawl(g, w0).T


def test_star_graph():
    g = Graph.from_edges(5, [(0, i) for i in range(1, 5)])
    w0 = Weighting(np.array([-1, -5, -4, -3, -2]))
    tr = crawl(g, w0)
    assert tr.visits.tolist() == [1, 0, 2, 0, 3, 0, 4]
