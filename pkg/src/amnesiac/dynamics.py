"""Time-indexed graph mutations.

Mutations scheduled for round ``r`` take effect before anything is delivered
in round ``r``.  Messages in flight over an edge that has disappeared are
dropped rather than delivered.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .graph import Graph, edge_key


class MutationError(ValueError):
    pass


@dataclass(frozen=True)
class RemoveEdge:
    u: int
    v: int
    op = "remove_edge"


@dataclass(frozen=True)
class RemoveNode:
    v: int
    op = "remove_node"


@dataclass(frozen=True)
class AddEdge:
    u: int
    v: int
    op = "add_edge"


@dataclass(frozen=True)
class AddNode:
    v: int
    op = "add_node"


Mutation = Union[RemoveEdge, RemoveNode, AddEdge, AddNode]


@dataclass(frozen=True)
class MutationSchedule:
    entries: tuple[tuple[int, Mutation], ...] = ()

    def __post_init__(self) -> None:
        for r, _ in self.entries:
            if r < 1:
                raise MutationError(f"mutation rounds must be positive, got {r}")
        # stable sort: same-round mutations keep their listed order
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=lambda e: e[0])))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def last_round(self) -> int:
        return max((r for r, _ in self.entries), default=0)

    def at(self, round: int) -> tuple[Mutation, ...]:
        return tuple(m for r, m in self.entries if r == round)

    def version(self, round: int) -> int:
        """Number of mutations in force at ``round``."""
        return sum(1 for r, _ in self.entries if r <= round)

    def is_monotone_removal(self) -> bool:
        return all(isinstance(m, (RemoveEdge, RemoveNode)) for _, m in self.entries)


def apply_mutation(graph: Graph, mutation: Mutation) -> Graph:
    nodes = set(graph.nodes)
    edges = set(graph.edges)
    if isinstance(mutation, RemoveEdge):
        e = edge_key(mutation.u, mutation.v)
        if e not in edges:
            raise MutationError(f"cannot remove missing edge {e}")
        edges.discard(e)
    elif isinstance(mutation, AddEdge):
        e = edge_key(mutation.u, mutation.v)
        if mutation.u == mutation.v:
            raise MutationError(f"cannot add self-loop at {mutation.u}")
        if mutation.u not in nodes or mutation.v not in nodes:
            raise MutationError(f"cannot add edge {e}: endpoint not present")
        if e in edges:
            raise MutationError(f"cannot add existing edge {e}")
        edges.add(e)
    elif isinstance(mutation, RemoveNode):
        if mutation.v not in nodes:
            raise MutationError(f"cannot remove missing node {mutation.v}")
        nodes.discard(mutation.v)
        edges = {e for e in edges if mutation.v not in e}
    elif isinstance(mutation, AddNode):
        if mutation.v in nodes:
            raise MutationError(f"cannot add existing node {mutation.v}")
        if not 0 <= mutation.v < len(graph.labels):
            raise MutationError(f"node id {mutation.v} has no label")
        nodes.add(mutation.v)
    else:
        raise MutationError(f"unknown mutation {mutation!r}")
    return graph.with_structure(nodes, edges)


def apply_round(graph: Graph, schedule: MutationSchedule, round: int) -> Graph:
    """Apply only the mutations scheduled for ``round``."""
    for m in schedule.at(round):
        try:
            graph = apply_mutation(graph, m)
        except MutationError as exc:
            raise MutationError(f"round {round}: {exc}") from None
    return graph


def apply_mutations(graph: Graph, schedule: MutationSchedule, round: int) -> Graph:
    """The graph in force during ``round``."""
    for r in sorted({r for r, _ in schedule.entries if r <= round}):
        graph = apply_round(graph, schedule, r)
    return graph

