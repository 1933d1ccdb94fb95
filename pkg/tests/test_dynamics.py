import random

import pytest

from amnesiac.dynamics import (
    AddEdge,
    AddNode,
    MutationError,
    MutationSchedule,
    RemoveEdge,
    RemoveNode,
    apply_mutation,
    apply_mutations,
)
from amnesiac.engine import NonTerminating, Terminated, flood, run, verify_certificate
from amnesiac.graph import Graph, cycle_graph, path_graph
from amnesiac.protocol import InitiationSchedule, ScheduleError
from amnesiac.search import random_connected_graph, random_removal_schedule


def test_apply_each_kind():
    g = path_graph(3)
    assert apply_mutation(g, RemoveEdge(1, 0)).edges == {(1, 2)}
    assert apply_mutation(g, AddEdge(2, 0)).edges == {(0, 1), (1, 2), (0, 2)}
    h = apply_mutation(g, RemoveNode(1))
    assert h.nodes == (0, 2) and not h.edges
    assert apply_mutation(h, AddNode(1)).nodes == (0, 1, 2)


@pytest.mark.parametrize(
    "m",
    [RemoveEdge(0, 2), AddEdge(0, 1), AddEdge(1, 1), RemoveNode(5), AddNode(0), AddNode(9)],
)
def test_invalid_mutations(m):
    with pytest.raises(MutationError):
        apply_mutation(path_graph(3), m)


def test_schedule_order_and_versions():
    s = MutationSchedule(((3, AddEdge(0, 2)), (1, RemoveEdge(0, 1)), (3, RemoveEdge(1, 2))))
    assert [r for r, _ in s.entries] == [1, 3, 3]
    assert s.at(3) == (AddEdge(0, 2), RemoveEdge(1, 2))
    assert [s.version(r) for r in range(5)] == [0, 1, 1, 3, 3]
    assert not s.is_monotone_removal()
    assert apply_mutations(path_graph(3), s, 3).edges == {(0, 2)}
    with pytest.raises(MutationError):
        MutationSchedule(((0, RemoveEdge(0, 1)),))


def test_removing_the_carrying_edge_drops_the_message():
    # 0 floods; the send to 1 is due in round 1 but the edge goes first
    verdict, trace = run(path_graph(2), InitiationSchedule.sources([0]),
                         mutations=MutationSchedule(((1, RemoveEdge(0, 1)),)))
    assert verdict == Terminated(0)
    assert trace.round_sets()[1] == set()


def test_empty_schedule_is_static():
    g = cycle_graph(7)
    a = flood(g, [0])
    b = run(g, InitiationSchedule.sources([0]), mutations=MutationSchedule())
    assert a[0] == b[0] and a[1].rounds == b[1].rounds


def test_edge_addition_keeps_flooding_alive():
    # 1 floods on the path 1 - 0 - 2; adding {1, 2} in round 1 closes a triangle
    g = Graph.from_edges(3, [(0, 1), (0, 2)])
    muts = MutationSchedule(((1, AddEdge(1, 2)),))
    verdict, _ = run(g, InitiationSchedule.sources([1]), mutations=muts)
    assert isinstance(verdict, NonTerminating)
    assert verdict.period >= 1
    assert verify_certificate(g, verdict.certificate, mutations=muts)


def test_absent_initiator_rejected():
    g = path_graph(3)
    muts = MutationSchedule(((1, RemoveNode(2)),))
    with pytest.raises(ScheduleError):
        run(g, InitiationSchedule.of((2, 0, 2)), mutations=muts)


def test_added_node_joins_flooding():
    g = Graph((0, 1), frozenset({(0, 1)}), ("0", "1", "2"))
    muts = MutationSchedule(((1, AddNode(2)), (1, AddEdge(1, 2))))
    verdict, trace = run(g, InitiationSchedule.sources([0]), mutations=muts)
    assert verdict == Terminated(2)
    assert trace.round_sets() == [{0}, {1}, {2}]


def test_random_removals_terminate():
    rng = random.Random(11)
    done = 0
    while done < 100:
        g = random_connected_graph(rng, rng.randint(2, 8))
        muts = random_removal_schedule(rng, g, 5, rng.randint(1, 4))
        try:
            verdict, _ = run(g, InitiationSchedule.sources([rng.choice(g.nodes)]), mutations=muts)
        except ScheduleError:
            continue
        done += 1
        assert isinstance(verdict, Terminated)
