"""Exhaustive and randomized search over small flooding instances.

Three jobs: sweep every small graph looking for theorem violations, find
instances where the termination bounds are tight, and find runs that provably
never terminate (fixed edge delays, unranked full-send, edge addition).

Search order is fixed (graph classes in atlas order, then sources, weights,
schedules, selectors lexicographically), so the same limits always return the
same witness.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional, Union

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher
from networkx.generators.atlas import graph_atlas_g

from . import analysis
from .dynamics import AddEdge, MutationSchedule, RemoveEdge, RemoveNode
from .engine import NonTerminating, Terminated, flood, run, verify_certificate
from .graph import Graph, diameter, eccentricity, is_bipartite
from .protocol import (
    HIGHEST,
    LOWEST,
    Initiation,
    InitiationSchedule,
    ScheduleError,
    Selector,
    UnrankedFullSend,
)
from .scenario import Scenario
from .timing import FixedWeights

log = logging.getLogger(__name__)

MAX_N = 8

FIXED_DELAY = "fixed-delay"
UNRANKED = "unranked"
EDGE_ADDITION = "edge-addition"
FAMILIES = (FIXED_DELAY, UNRANKED, EDGE_ADDITION)


class SearchError(ValueError):
    pass


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_N:
        raise SearchError(f"n must be in 1..{MAX_N}, got {n}")


def _pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def _mask_connected(n: int, pairs: list[tuple[int, int]], mask: int) -> bool:
    adj = [0] * n
    for i, (u, v) in enumerate(pairs):
        if mask >> i & 1:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
    seen = frontier = 1
    while frontier:
        nxt = 0
        for v in range(n):
            if frontier >> v & 1:
                nxt |= adj[v]
        frontier = nxt & ~seen
        seen |= nxt
    return seen == (1 << n) - 1


def enumerate_connected_graphs(n: int) -> Iterator[Graph]:
    """Every connected simple graph on labelled nodes ``0..n-1``, once each.

    Edge subsets are visited in increasing bitmask order.  Practical up to
    n = 7; n = 8 has 2**28 subsets.
    """
    _check_n(n)
    pairs = _pairs(n)
    for mask in range(1 << len(pairs)):
        if _mask_connected(n, pairs, mask):
            yield Graph.from_edges(n, [p for i, p in enumerate(pairs) if mask >> i & 1])


def count_connected_graphs(n: int) -> int:
    """Number of connected labelled graphs on ``n`` nodes, by enumeration."""
    return sum(1 for _ in enumerate_connected_graphs(n))


@lru_cache(maxsize=None)
def _atlas_classes() -> dict[int, tuple[nx.Graph, ...]]:
    out: dict[int, list[nx.Graph]] = {}
    for G in graph_atlas_g()[1:]:
        if nx.is_connected(G):
            out.setdefault(G.number_of_nodes(), []).append(G)
    return {n: tuple(gs) for n, gs in out.items()}


@lru_cache(maxsize=None)
def _classes_8() -> tuple[nx.Graph, ...]:
    # Every connected graph has a vertex whose removal leaves it connected, so
    # extending each connected 7-node class by one vertex reaches every class.
    buckets: dict[str, list[nx.Graph]] = {}
    found: list[nx.Graph] = []
    for G in _atlas_classes()[7]:
        for k in range(1, 8):
            for nbrs in itertools.combinations(range(7), k):
                H = G.copy()
                H.add_edges_from((7, v) for v in nbrs)
                key = nx.weisfeiler_lehman_graph_hash(H, iterations=4)
                bucket = buckets.setdefault(key, [])
                if any(nx.is_isomorphic(H, K) for K in bucket):
                    continue
                bucket.append(H)
                found.append(H)
    return tuple(found)


def connected_graph_classes(n: int) -> list[Graph]:
    """One representative per isomorphism class of connected graphs on ``n`` nodes."""
    _check_n(n)
    nx_graphs = _classes_8() if n == 8 else _atlas_classes()[n]
    return [Graph.from_edges(n, G.edges()) for G in nx_graphs]


def automorphism_count(g: Graph) -> int:
    G = nx.Graph()
    G.add_nodes_from(g.nodes)
    G.add_edges_from(g.edges)
    return sum(1 for _ in GraphMatcher(G, G).isomorphisms_iter())


def labelled_count(classes: list[Graph]) -> int:
    """Labelled graphs covered by ``classes``: sum of n!/|Aut(G)|."""
    return sum(math.factorial(len(g)) // automorphism_count(g) for g in classes)


@dataclass(frozen=True)
class SharpInstance:
    graph: Graph
    source: int
    last_round: int
    e: int
    d: int
    kind: str  # "upper": last = e + d + 1; "lower": non-bipartite with last = e + 1


def find_sharp_instances(n: int) -> list[SharpInstance]:
    """Single-source basic runs on ``n``-node graphs that meet a bound exactly."""
    out = []
    for g in connected_graph_classes(n):
        if len(g) < 3:
            continue
        d = diameter(g)
        bip = is_bipartite(g)
        for s in g.nodes:
            verdict, _ = flood(g, [s])
            e = eccentricity(g, [s])
            last = verdict.last_round
            if last == e + d + 1:
                out.append(SharpInstance(g, s, last, e, d, "upper"))
            if not bip and last == e + 1:
                out.append(SharpInstance(g, s, last, e, d, "lower"))
    return out


@dataclass(frozen=True)
class SearchLimits:
    max_n: int = 5
    max_weight: int = 4
    max_edges: int = 8
    max_init_round: int = 3
    max_mutation_round: int = 4
    budget: int = 400


@dataclass
class Witness:
    family: str
    scenario: Scenario
    verdict: NonTerminating

    def reverify(self) -> bool:
        verdict, _ = self.scenario.run()
        s = self.scenario
        return (
            verdict == self.verdict
            and verify_certificate(s.graph, verdict.certificate, s.rule, s.model, s.mutations)
        )


@dataclass(frozen=True)
class NotFound:
    family: str
    limits: SearchLimits
    examined: int


def _fixed_delay(limits: SearchLimits) -> Iterator[tuple[Scenario, int]]:
    for n in range(3, limits.max_n + 1):
        for g in connected_graph_classes(n):
            edges = sorted(g.edges)
            if len(edges) > limits.max_edges:
                continue
            for ws in itertools.product(range(1, limits.max_weight + 1), repeat=len(edges)):
                weights = dict(zip(edges, ws))
                for s in g.nodes:
                    yield Scenario(
                        g,
                        InitiationSchedule.sources([s]),
                        model=FixedWeights(weights),
                        budget=limits.budget,
                        weights=weights,
                    ), 0


def _unranked(limits: SearchLimits) -> Iterator[tuple[Scenario, int]]:
    for n in range(2, limits.max_n + 1):
        for g in connected_graph_classes(n):
            for x0, x1, i1 in itertools.product(g.nodes, g.nodes, range(limits.max_init_round + 1)):
                if (x0, 0) == (x1, i1):
                    continue
                schedule = InitiationSchedule((Initiation(0, x0, 0), Initiation(i1, x1, 1)))
                # nodes choosing the higher message; the rest choose the lower
                for k in range(1, n):
                    for high in itertools.combinations(g.nodes, k):
                        rule = UnrankedFullSend(Selector(LOWEST, {v: HIGHEST for v in high}))
                        yield Scenario(
                            g, schedule, rule, budget=limits.budget, message_labels=("M0", "M1")
                        ), 0


def _edge_addition(limits: SearchLimits) -> Iterator[tuple[Scenario, int]]:
    for n in range(3, limits.max_n + 1):
        for g in connected_graph_classes(n):
            missing = [p for p in _pairs(n) if not g.has_edge(*p)]
            for s, (u, v), r in itertools.product(
                g.nodes, missing, range(1, limits.max_mutation_round + 1)
            ):
                yield Scenario(
                    g,
                    InitiationSchedule.sources([s]),
                    mutations=MutationSchedule(((r, AddEdge(u, v)),)),
                    budget=limits.budget,
                ), 0


_GENERATORS = {FIXED_DELAY: _fixed_delay, UNRANKED: _unranked, EDGE_ADDITION: _edge_addition}


def find_nontermination_witness(
    family: str, limits: SearchLimits = SearchLimits()
) -> Union[Witness, NotFound]:
    """First scenario of ``family`` (in search order) proven never to terminate."""
    if family not in _GENERATORS:
        raise SearchError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if not 1 <= limits.max_n <= MAX_N:
        raise SearchError(f"max_n must be in 1..{MAX_N}")
    examined = 0
    for scenario, _ in _GENERATORS[family](limits):
        examined += 1
        try:
            verdict, _ = scenario.run()
        except ScheduleError:
            continue
        if isinstance(verdict, NonTerminating):
            log.info("%s witness after %d candidates", family, examined)
            return Witness(family, scenario, verdict)
    return NotFound(family, limits, examined)


def falsification_sweep(max_n: int = 7) -> tuple[int, list[dict]]:
    """Check the single-source theorems on every connected graph up to ``max_n`` nodes.

    Returns the number of (graph, source) runs and the counterexamples found.
    Graphs are taken one per isomorphism class; every property checked is
    invariant under relabelling.
    """
    runs = 0
    bad: list[dict] = []
    for n in range(1, max_n + 1):
        for g in connected_graph_classes(n):
            for s in g.nodes:
                runs += 1
                problems = sweep_instance(g, s)
                if problems:
                    bad.append({"edges": sorted(g.edges), "source": s, "problems": problems})
    return runs, bad


def sweep_instance(g: Graph, s: int) -> list[str]:
    verdict, trace = flood(g, [s])
    if not isinstance(verdict, Terminated):
        return [f"verdict {verdict.name}"]
    problems = []
    e = eccentricity(g, [s])
    d = diameter(g)
    last = verdict.last_round
    if not analysis.check_receive_counts(trace).ok:
        problems.append("receive count above 2")
    if is_bipartite(g):
        if last != e:
            problems.append(f"bipartite but last round {last} != e {e}")
    elif not e < last <= e + d + 1:
        problems.append(f"non-bipartite but last round {last} outside ({e}, {e + d + 1}]")
    for check in (
        analysis.check_ec_equivalences,
        analysis.check_second_visit_offsets,
        analysis.check_equidistant_second_visit,
        analysis.check_distance_layers,
    ):
        result = check(g, [s], trace)
        if not result.ok:
            problems.append(f"{result.name}: {result.detail}")
    return problems


# Random instances for property sweeps.

def random_connected_graph(rng: random.Random, n: int, p: Optional[float] = None) -> Graph:
    """Random spanning tree plus independent extra edges with probability ``p``."""
    if p is None:
        p = rng.uniform(0.05, 0.6)
    order = list(range(n))
    rng.shuffle(order)
    edges = {tuple(sorted((order[i], order[rng.randrange(i)]))) for i in range(1, n)}
    for u, v in _pairs(n):
        if (u, v) not in edges and rng.random() < p:
            edges.add((u, v))
    return Graph.from_edges(n, sorted(edges))


def random_non_bipartite_graph(rng: random.Random, n: int) -> Graph:
    while True:
        g = random_connected_graph(rng, n)
        if not is_bipartite(g):
            return g


def random_source_set(rng: random.Random, g: Graph, max_size: Optional[int] = None) -> list[int]:
    k = rng.randint(1, max_size or len(g))
    return sorted(rng.sample(list(g.nodes), min(k, len(g))))


def random_schedule(
    rng: random.Random,
    g: Graph,
    messages: int,
    max_round: int,
    ranked: bool = False,
    per_message: int = 1,
) -> InitiationSchedule:
    """Random initiations of messages ``0..messages-1`` at distinct (node, round) pairs.

    With ``ranked`` the initiation rounds are non-decreasing in message id.
    Whether an initiator is also receiving is only known by running, so callers
    resample on :class:`ScheduleError`.
    """
    while True:
        rounds = sorted(rng.randint(0, max_round) for _ in range(messages))
        if not ranked:
            rng.shuffle(rounds)
        entries = []
        for m, r0 in enumerate(rounds):
            for _ in range(per_message):
                r = r0 if ranked or not entries else rng.randint(0, max_round)
                entries.append(Initiation(r, rng.choice(g.nodes), m))
        if len({(e.node, e.round) for e in entries}) == len(entries):
            return InitiationSchedule(tuple(entries))


def random_removal_schedule(rng: random.Random, g: Graph, max_round: int, count: int) -> MutationSchedule:
    """Monotone removals of random edges and nodes at random positive rounds."""
    nodes, edges = set(g.nodes), set(g.edges)
    entries = []
    for r in sorted(rng.randint(1, max_round) for _ in range(count)):
        if edges and (rng.random() < 0.75 or len(nodes) <= 1):
            e = rng.choice(sorted(edges))
            edges.discard(e)
            entries.append((r, RemoveEdge(*e)))
        elif nodes:
            v = rng.choice(sorted(nodes))
            nodes.discard(v)
            edges = {e for e in edges if v not in e}
            entries.append((r, RemoveNode(v)))
    return MutationSchedule(tuple(entries))
