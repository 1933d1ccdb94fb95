import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from amnesiac.graph import (
    Graph,
    GraphError,
    ParseError,
    WeightedGraph,
    complete_graph,
    cycle_graph,
    diameter,
    distance_sets,
    distances,
    ec_nodes,
    eccentricity,
    format_edge_list,
    is_bipartite,
    is_connected,
    is_ec_bipartite,
    parse_edge_list,
    path_graph,
)

import oracle
from helpers import to_nx


def test_parse_path():
    g = parse_edge_list("a b\nb c")
    assert isinstance(g, Graph)
    assert len(g) == 3 and len(g.edges) == 2
    assert g.labels == ("a", "b", "c")
    assert g.neighbours(g.node_id("b")) == (0, 2)


def test_parse_duplicate_reports_line():
    with pytest.raises(ParseError) as err:
        parse_edge_list("a b\na b")
    assert err.value.lineno == 2


def test_parse_reversed_duplicate():
    with pytest.raises(ParseError):
        parse_edge_list("a b\nb a")


def test_parse_weighted():
    wg = parse_edge_list("a b 2\nb c 3")
    assert isinstance(wg, WeightedGraph)
    assert wg.weights == {(0, 1): 2, (1, 2): 3}
    assert wg.weight(2, 1) == 3


@pytest.mark.parametrize(
    "text",
    ["a a", "a b 1\nb c", "a b 0", "a b x", "a b c d", "a"],
)
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_edge_list(text)


def test_parse_comments_and_blanks():
    g = parse_edge_list("# header\n\n x y \n# mid\ny z\n")
    assert g.labels == ("x", "y", "z")


def test_format_round_trip():
    for text in ("a b\nb c\nc a\n", "p q 2\nq r 5\n"):
        g = parse_edge_list(text)
        assert parse_edge_list(format_edge_list(g)) == g


def test_graph_rejects_bad_structure():
    with pytest.raises(GraphError):
        Graph.from_edges(2, [(0, 0)])
    with pytest.raises(GraphError):
        Graph.from_edges(2, [(0, 2)])
    with pytest.raises(GraphError):
        WeightedGraph(path_graph(3), {(0, 1): 1})


def test_distance_sets_examples():
    assert distance_sets(path_graph(3), [0]) == {0: {0}, 1: {1}, 2: {2}}
    assert distance_sets(complete_graph(3), [0]) == {0: {0}, 1: {1, 2}}
    assert distance_sets(path_graph(2), [0, 1]) == {0: {0, 1}}


def test_ec_nodes_examples():
    assert ec_nodes(cycle_graph(4), [0]) == set()
    assert ec_nodes(complete_graph(3), [0]) == {1, 2}
    assert ec_nodes(path_graph(2), [0, 1]) == {0, 1}


def test_eccentricity_and_diameter_examples():
    assert eccentricity(cycle_graph(6), [0]) == 3
    assert eccentricity(cycle_graph(5), [0]) == 2
    assert eccentricity(complete_graph(3), [0, 1, 2]) == 0
    assert diameter(complete_graph(3)) == 1
    assert diameter(path_graph(4)) == 3
    assert diameter(cycle_graph(6)) == 3


def test_bipartite_examples():
    c4, c5 = cycle_graph(4), cycle_graph(5)
    assert is_bipartite(c4) and is_ec_bipartite(c4, [0])
    assert not is_bipartite(c5) and not is_ec_bipartite(c5, [0])
    assert is_bipartite(c4) and not is_ec_bipartite(c4, [0, 1])


def test_disconnected_quantities_raise():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert not is_connected(g)
    assert distances(g, [0]) == {0: 0, 1: 1}
    with pytest.raises(GraphError):
        eccentricity(g, [0])
    with pytest.raises(GraphError):
        diameter(g)
    with pytest.raises(GraphError):
        distances(g, [])
    with pytest.raises(GraphError):
        distances(g, [7])


@st.composite
def graphs(draw, min_n=1, max_n=9, connected=False):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    if connected:
        parents = [draw(st.integers(0, i - 1)) for i in range(1, n)]
        chosen = sorted(set(chosen) | {(p, i) for i, p in enumerate(parents, start=1)})
    g = Graph.from_edges(n, chosen)
    sources = draw(st.lists(st.sampled_from(range(n)), min_size=1, unique=True))
    return g, sources


@settings(max_examples=300, deadline=None)
@given(graphs())
def test_distances_match_networkx(case):
    g, sources = case
    G = to_nx(g)
    assert distances(g, sources) == oracle.distances(G, sources)
    assert ec_nodes(g, sources) == oracle.ec_nodes(G, sources)
    assert is_bipartite(g) == nx.is_bipartite(G)
    assert is_connected(g) == nx.is_connected(G)


@settings(max_examples=200, deadline=None)
@given(graphs(connected=True))
def test_eccentricity_matches_networkx(case):
    g, sources = case
    G = to_nx(g)
    assert eccentricity(g, sources) == oracle.eccentricity(G, sources)
    assert diameter(g) == nx.diameter(G)


@settings(max_examples=200, deadline=None)
@given(graphs(connected=True))
def test_distance_sets_partition_nodes(case):
    g, sources = case
    layers = distance_sets(g, sources)
    assert layers[0] == frozenset(sources)
    assert sorted(v for layer in layers.values() for v in layer) == list(g.nodes)
    # edges join nodes at most one layer apart
    d = distances(g, sources)
    assert all(abs(d[u] - d[v]) <= 1 for u, v in g.edges)
