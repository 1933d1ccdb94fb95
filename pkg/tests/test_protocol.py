import pytest

from amnesiac.protocol import (
    HIGHEST,
    LOWEST,
    Basic,
    Initiation,
    InitiationSchedule,
    PartialSend,
    ProtocolError,
    RankedFullSend,
    ScheduleError,
    Selector,
    SinkReversal,
    UnrankedFullSend,
    decide_sends,
)

A, B, C, D = 1, 2, 3, 4


def test_basic_forwards_away_from_sender():
    sends = decide_sends(Basic(), 0, 1, {A: {0}}, (), [A, B, C])
    assert sends == {(B, 0), (C, 0)}


def test_basic_sink_sends_nothing():
    assert decide_sends(Basic(), 0, 1, {A: {0}, B: {0}, C: {0}}, (), [A, B, C]) == set()


def test_ranked_returns_higher_message_to_lower_sender():
    sends = decide_sends(RankedFullSend(), 0, 1, {A: {0}, B: {1}}, (), [A, B, C])
    assert sends == {(A, 1), (C, 1)}


def test_partial_sends_only_to_silent_neighbours():
    sends = decide_sends(PartialSend(Selector(LOWEST)), 0, 1, {A: {0}, B: {1}}, (), [A, B, C, D])
    assert sends == {(C, 0), (D, 0)}
    sends = decide_sends(PartialSend(Selector(HIGHEST)), 0, 1, {A: {0}, B: {1}}, (), [A, B, C, D])
    assert sends == {(C, 1), (D, 1)}


def test_unranked_uses_selector_per_node():
    rule = UnrankedFullSend(Selector(LOWEST, {0: HIGHEST}))
    assert decide_sends(rule, 0, 1, {A: {0}, B: {1}}, (), [A, B]) == {(A, 1)}
    assert decide_sends(rule, 9, 1, {A: {0}, B: {1}}, (), [A, B]) == {(B, 0)}


def test_initiator_sends_everywhere():
    assert decide_sends(Basic(), 0, 0, {}, {5}, [A, B]) == {(A, 5), (B, 5)}


def test_initiator_may_not_receive():
    with pytest.raises(ScheduleError):
        decide_sends(Basic(), 0, 2, {A: {0}}, {0}, [A, B])


def test_idle_node_sends_nothing():
    assert decide_sends(RankedFullSend(), 0, 3, {}, (), [A, B]) == set()


def test_basic_rejects_several_messages():
    with pytest.raises(ProtocolError):
        decide_sends(Basic(), 0, 1, {A: {0}, B: {1}}, (), [A, B])


def test_sink_reversal_fires_only_in_its_round():
    rule = SinkReversal(3)
    full = {A: {0}, B: {0}}
    assert decide_sends(rule, 0, 3, full, (), [A, B]) == {(A, 0), (B, 0)}
    assert decide_sends(rule, 0, 4, full, (), [A, B]) == set()
    only = SinkReversal(3, node=7)
    assert decide_sends(only, 0, 3, full, (), [A, B]) == set()
    assert decide_sends(only, 7, 3, full, (), [A, B]) == {(A, 0), (B, 0)}


def test_selector_modes():
    sel = Selector(LOWEST, {4: HIGHEST})
    assert sel(0, 0, [3, 1, 2]) == 1
    assert sel(4, 0, [3, 1, 2]) == 3
    with pytest.raises(ProtocolError):
        Selector("random")
    with pytest.raises(ProtocolError):
        sel(0, 0, [])


def test_schedule_sorted_and_unique():
    s = InitiationSchedule.of((2, 0, 3), (1, 0, 0))
    assert [e.round for e in s] == [0, 3]
    assert s.last_round == 3 and s.messages == (0,)
    assert s.at(3) == (Initiation(3, 2, 0),)
    with pytest.raises(ScheduleError):
        InitiationSchedule.of((1, 0, 0), (1, 1, 0))
    with pytest.raises(ScheduleError):
        InitiationSchedule.of((1, 0, -1))


def test_rank_order():
    InitiationSchedule.of((0, 0, 0), (1, 1, 2), (2, 1, 2)).check_rank_order()
    bad = InitiationSchedule.of((0, 1, 0), (1, 0, 2))
    with pytest.raises(ScheduleError):
        bad.check_rank_order()
    with pytest.raises(ScheduleError):
        bad.validate_for(RankedFullSend())
    bad.validate_for(PartialSend())


def test_single_message_rules_reject_many():
    s = InitiationSchedule.of((0, 0, 0), (1, 1, 0))
    for rule in (Basic(), SinkReversal(1)):
        with pytest.raises(ScheduleError):
            s.validate_for(rule)
