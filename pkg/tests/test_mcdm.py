import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcdl.mcdm import (
    Agent,
    AgentGraph,
    IncrementalAgentGraph,
    McdmError,
    build_agent_graph,
    mu,
    mutual_mu,
    neighbor_benefit,
    overall_benefit,
    rank,
)
from oracles import brute_force_order, brute_force_scores


def graph_of(b: dict, nbrs: dict, K: float) -> AgentGraph:
    return AgentGraph(tuple(Agent(i, b[i], (), frozenset(nbrs[i])) for i in sorted(b)), K)


@st.composite
def random_graphs(draw, max_agents=7):
    n = draw(st.integers(1, max_agents))
    ids = draw(st.lists(st.integers(0, 50), min_size=n, max_size=n, unique=True))
    b = {i: draw(st.floats(-10, 10, allow_nan=False)) for i in ids}
    nbrs = {i: set(draw(st.lists(st.sampled_from(ids), max_size=n))) - {i} for i in ids}
    K = draw(st.floats(0.1, 20))
    return b, nbrs, K


def test_mu_examples():
    assert mu(2, 4, 2) == 3
    assert mu(0, 0, 7.5) == 0
    with pytest.raises(McdmError):
        mu(1, 1, 0)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(1e-3, 1e3))
def test_mu_symmetric(x, y, K):
    assert mu(x, y, K) == mu(y, x, K)


def test_mutual_mu_examples():
    assert mutual_mu(2, 4, 2, 0) == 3 == mu(2, 4, 2)
    assert mutual_mu(2, 4, 2, 1) == 6
    assert mutual_mu(2, 4, 2, 9) == 10 * mutual_mu(2, 4, 2, 0)
    with pytest.raises(McdmError):
        mutual_mu(1, 1, -1, 0)
    with pytest.raises(McdmError):
        mutual_mu(1, 1, 1, -1)


def test_two_agent_hand_values():
    g = graph_of({1: 2.0, 2: 4.0}, {1: {2}, 2: set()}, K=2.0)
    assert neighbor_benefit(1, g) == 12.0
    assert overall_benefit(1, g) == 14.0
    assert neighbor_benefit(2, g) == 0.0
    assert overall_benefit(2, g) == 4.0


def test_isolated_and_unknown():
    g = graph_of({7: 7.0}, {7: set()}, K=1.0)
    assert overall_benefit(7, g) == 7.0
    with pytest.raises(McdmError, match="unknown agent"):
        overall_benefit(8, g)
    with pytest.raises(McdmError):
        rank(AgentGraph((), 1.0))


def test_graph_validation():
    with pytest.raises(McdmError, match="itself"):
        Agent(1, 0.0, (), frozenset({1}))
    with pytest.raises(McdmError, match="unknown neighbors"):
        AgentGraph((Agent(1, 0.0, (), frozenset({2})),), 1.0)
    with pytest.raises(McdmError, match="unique"):
        AgentGraph((Agent(1, 0.0), Agent(1, 1.0)), 1.0)
    with pytest.raises(McdmError, match="K"):
        AgentGraph((Agent(1, 0.0),), 0.0)


@given(random_graphs())
def test_zero_benefits_give_zero(g):
    _, nbrs, K = g
    graph = graph_of({i: 0.0 for i in nbrs}, nbrs, K)
    for w in ("plain", "mutual"):
        assert all(neighbor_benefit(i, graph, w) == 0.0 for i in nbrs)


def test_rank_sort_and_ties():
    g = graph_of({0: 3.0, 1: 1.0, 2: 2.0}, {0: set(), 1: set(), 2: set()}, 1.0)
    assert rank(g).order == [0, 2, 1]
    g = graph_of({5: 1.0, 3: 1.0}, {5: set(), 3: set()}, 1.0)
    assert rank(g).order == [3, 5]


@pytest.mark.parametrize("n", [5, 6])
def test_fixed_graphs_match_oracle(n):
    rng = np.random.default_rng(n)
    b = {i: float(rng.normal()) for i in range(n)}
    nbrs = {i: {j for j in range(n) if j != i and rng.random() < 0.5} for i in range(n)}
    g = graph_of(b, nbrs, 3.0)
    for w in ("plain", "mutual"):
        want = brute_force_scores(b, nbrs, 3.0, w)
        for i in b:
            assert overall_benefit(i, g, w) == pytest.approx(want[i], abs=1e-12)
        assert rank(g, w).order == brute_force_order(want)


@given(random_graphs())
def test_ranking_is_permutation(g):
    b, nbrs, K = g
    order = rank(graph_of(b, nbrs, K)).order
    assert sorted(order) == sorted(b)


@given(random_graphs())
def test_plain_equals_mutual_without_shared_neighbors(g):
    b, nbrs, K = g
    if any(nbrs[i] & nbrs[j] for i in nbrs for j in nbrs[i]):
        return
    graph = graph_of(b, nbrs, K)
    for i in b:
        assert neighbor_benefit(i, graph, "plain") == neighbor_benefit(i, graph, "mutual")


def test_build_collinear_example():
    g = build_agent_graph(np.array([[0.0], [1.0], [10.0]]), neighborhood_k=1)
    nb = {a.id: set(a.neighbors) for a in g.agents}
    # middle's nearest is the first (distance 1 beats 9), first gains middle by union
    assert 0 in nb[1] and 1 in nb[0]
    assert nb[2] == {1}  # 10's nearest is 1, symmetrized into 1's set too
    assert nb[1] == {0, 2}
    assert g.K == 1.0 and g.symmetric


def test_build_identical_rows_rank_by_id():
    g = build_agent_graph(np.ones((6, 2)), neighborhood_k=2)
    assert len({a.b for a in g.agents}) == 1
    assert rank(g).order == list(range(6))


def test_build_range_checks():
    with pytest.raises(McdmError):
        build_agent_graph(np.zeros((3, 1)), neighborhood_k=3)
    with pytest.raises(McdmError):
        build_agent_graph(np.zeros((1, 1)), neighborhood_k=0)


def test_build_benefit_is_row_mean(rng):
    crit = rng.normal(size=(12, 3))
    g = build_agent_graph(crit, neighborhood_k=3, K=5.0)
    np.testing.assert_allclose([a.b for a in g.agents], crit.mean(axis=1))
    assert g.K == 5.0
    for a in g.agents:
        assert len(a.neighbors) >= 3
        for j in a.neighbors:
            assert a.id in g.agents[j].neighbors


@pytest.mark.parametrize("weighting", ["plain", "mutual"])
def test_incremental_matches_full_rank(weighting):
    rng = np.random.default_rng(3)
    inc = IncrementalAgentGraph(neighborhood_k=4, weighting=weighting)
    for i in range(100):
        delta = inc.add(i, [float(rng.normal())])
        full = rank(inc.to_agent_graph(), weighting)
        got = inc.ranking()
        assert got.order == full.order
        np.testing.assert_allclose([s for _, s in got.entries], [s for _, s in full.entries], rtol=0, atol=1e-12)
        assert delta.position == full.position(i)
        assert len(delta.changes) <= min(i, 4) + 1


def test_incremental_duplicate_rejected():
    inc = IncrementalAgentGraph(neighborhood_k=2)
    inc.add(1, [0.0])
    with pytest.raises(McdmError, match="duplicate"):
        inc.add(1, [1.0])


def test_benefit_scaling_counterexample():
    # neighbor terms are quadratic in b, so scaling b alone can reorder
    g = graph_of({1: 2.0, 2: 0.5, 3: 0.9}, {1: set(), 2: set(), 3: {2}}, 1.0)
    assert rank(g).order == [1, 3, 2]
    assert rank(g.scaled(10.0)).order == [3, 1, 2]


@given(random_graphs(), st.floats(0.01, 100))
def test_scaling_b_and_K_together_scales_scores(g, c):
    b, nbrs, K = g
    base = dict(rank(graph_of(b, nbrs, K)).entries)
    scaled = graph_of({i: v * c for i, v in b.items()}, nbrs, K * c)
    for i, s in rank(scaled).entries:
        assert s == pytest.approx(c * base[i], rel=1e-9, abs=1e-9 * c)
