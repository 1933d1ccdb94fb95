"""Undirected graphs and the distance quantities flooding times depend on.

Nodes are dense integer ids; external labels are kept alongside for output.
All neighbour lists are sorted so that iteration order, and therefore every
simulation trace, is independent of input order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

Edge = tuple[int, int]


class GraphError(ValueError):
    """Raised for malformed graphs or quantities undefined on them."""


class ParseError(GraphError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Finite simple undirected graph.

    ``nodes`` is the set of present node ids; ``labels`` is indexed by id over
    the whole id space, which may be larger than ``nodes`` when a dynamic
    schedule adds or removes nodes.
    """

    nodes: tuple[int, ...]
    edges: frozenset[Edge]
    labels: tuple[str, ...]
    adjacency: Mapping[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        nodes = tuple(sorted(set(self.nodes)))
        object.__setattr__(self, "nodes", nodes)
        present = set(nodes)
        if nodes and nodes[-1] >= len(self.labels):
            raise GraphError("node id without a label")
        adj: dict[int, list[int]] = {v: [] for v in nodes}
        edges = set()
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop at {self.labels[u]}")
            if u not in present or v not in present:
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside the node set")
            e = edge_key(u, v)
            if e in edges:
                raise GraphError(f"duplicate edge {e}")
            edges.add(e)
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "edges", frozenset(edges))
        object.__setattr__(self, "adjacency", {v: tuple(sorted(ns)) for v, ns in adj.items()})

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[Edge], labels: Iterable[str] | None = None
    ) -> "Graph":
        labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        return cls(tuple(range(n)), frozenset(edge_key(u, v) for u, v in edges), labels)

    def __len__(self) -> int:
        return len(self.nodes)

    def neighbours(self, v: int) -> tuple[int, ...]:
        return self.adjacency.get(v, ())

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.edges

    def label(self, v: int) -> str:
        return self.labels[v]

    def node_id(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise GraphError(f"unknown node {label!r}") from None

    def with_structure(self, nodes: Iterable[int], edges: Iterable[Edge]) -> "Graph":
        """Same id space and labels, different node and edge sets."""
        return Graph(tuple(nodes), frozenset(edges), self.labels)


@dataclass(frozen=True)
class WeightedGraph:
    """A graph whose edges carry positive integer transit times."""

    graph: Graph
    weights: Mapping[Edge, int]

    def __post_init__(self) -> None:
        weights = {edge_key(*e): w for e, w in self.weights.items()}
        if set(weights) != set(self.graph.edges):
            raise GraphError("every edge needs exactly one weight")
        for e, w in weights.items():
            if not isinstance(w, int) or w < 1:
                raise GraphError(f"weight of edge {e} must be a positive integer, got {w!r}")
        object.__setattr__(self, "weights", dict(sorted(weights.items())))

    def weight(self, u: int, v: int) -> int:
        return self.weights[edge_key(u, v)]


def parse_edge_list(text: str) -> Union[Graph, WeightedGraph]:
    """Parse ``u v`` / ``u v w`` lines into an interned graph.

    Labels are interned in order of first appearance.  ``#`` starts a comment
    line and blank lines are skipped.
    """
    ids: dict[str, int] = {}
    edges: list[Edge] = []
    weights: dict[Edge, int] = {}
    weighted: bool | None = None
    seen: set[Edge] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(lineno, f"expected 'u v' or 'u v w', got {line!r}")
        has_weight = len(parts) == 3
        if weighted is None:
            weighted = has_weight
        elif weighted != has_weight:
            raise ParseError(lineno, "mixed weighted and unweighted lines")
        a, b = parts[0], parts[1]
        if a == b:
            raise ParseError(lineno, f"self-loop at {a!r}")
        u = ids.setdefault(a, len(ids))
        v = ids.setdefault(b, len(ids))
        e = edge_key(u, v)
        if e in seen:
            raise ParseError(lineno, f"duplicate edge {a} {b}")
        seen.add(e)
        edges.append(e)
        if has_weight:
            try:
                w = int(parts[2])
            except ValueError:
                raise ParseError(lineno, f"weight {parts[2]!r} is not an integer") from None
            if w < 1:
                raise ParseError(lineno, f"weight must be positive, got {w}")
            weights[e] = w
    labels = tuple(ids)
    graph = Graph(tuple(range(len(labels))), frozenset(edges), labels)
    if weighted:
        return WeightedGraph(graph, weights)
    return graph


def format_edge_list(graph: Graph | WeightedGraph) -> str:
    if isinstance(graph, WeightedGraph):
        g = graph.graph
        lines = [f"{g.label(u)} {g.label(v)} {w}" for (u, v), w in graph.weights.items()]
    else:
        g = graph
        lines = [f"{g.label(u)} {g.label(v)}" for u, v in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def _check_sources(g: Graph, sources: Iterable[int]) -> frozenset[int]:
    sources = frozenset(sources)
    if not sources:
        raise GraphError("source set must be non-empty")
    missing = sources.difference(g.nodes)
    if missing:
        raise GraphError(f"sources {sorted(missing)} are not nodes of the graph")
    return sources


def distances(g: Graph, sources: Iterable[int]) -> dict[int, int]:
    """Multi-source BFS distance to every reachable node."""
    sources = _check_sources(g, sources)
    dist = {s: 0 for s in sorted(sources)}
    queue = deque(sorted(sources))
    while queue:
        v = queue.popleft()
        for w in g.neighbours(v):
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def distance_sets(g: Graph, sources: Iterable[int]) -> dict[int, frozenset[int]]:
    layers: dict[int, set[int]] = {}
    for v, d in distances(g, sources).items():
        layers.setdefault(d, set()).add(v)
    return {j: frozenset(layers[j]) for j in sorted(layers)}


def ec_nodes(g: Graph, sources: Iterable[int]) -> frozenset[int]:
    """Nodes with a neighbour at the same distance from the sources."""
    dist = distances(g, sources)
    return frozenset(
        v for v, d in dist.items() if any(dist.get(w) == d for w in g.neighbours(v))
    )


def is_connected(g: Graph) -> bool:
    if not g.nodes:
        return True
    return len(distances(g, [g.nodes[0]])) == len(g.nodes)


def eccentricity(g: Graph, sources: Iterable[int]) -> int:
    dist = distances(g, sources)
    if len(dist) != len(g.nodes):
        raise GraphError("eccentricity undefined: graph is not connected from the sources")
    return max(dist.values())


def diameter(g: Graph) -> int:
    if not g.nodes:
        raise GraphError("diameter of the empty graph is undefined")
    if not is_connected(g):
        raise GraphError("diameter undefined: graph is not connected")
    return max(eccentricity(g, [v]) for v in g.nodes)


def is_bipartite(g: Graph) -> bool:
    colour: dict[int, int] = {}
    for start in g.nodes:
        if start in colour:
            continue
        colour[start] = 0
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in g.neighbours(v):
                if w not in colour:
                    colour[w] = 1 - colour[v]
                    queue.append(w)
                elif colour[w] == colour[v]:
                    return False
    return True


def is_ec_bipartite(g: Graph, sources: Iterable[int]) -> bool:
    return not ec_nodes(g, sources)


# Small named graphs used throughout tests, examples and the CLI.

def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 nodes")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
