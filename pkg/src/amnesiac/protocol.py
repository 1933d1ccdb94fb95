"""Forwarding rules for amnesiac flooding.

A rule looks only at what a node received in the round just finished (and
whether it initiates a flooding) and decides what it sends next round.
Message ids double as ranks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

LOWEST = "lowest"
HIGHEST = "highest"
_MODES = (LOWEST, HIGHEST)


class ProtocolError(ValueError):
    pass


class ScheduleError(ProtocolError):
    """An initiation schedule breaks one of the initiation rules."""


@dataclass(frozen=True)
class Selector:
    """Deterministic choice of which received message to forward.

    ``default`` applies to every node without an entry in ``overrides``.
    Choices never depend on the round, so a run is time-invariant once its
    schedules are exhausted.
    """

    default: str = LOWEST
    overrides: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for mode in (self.default, *self.overrides.values()):
            if mode not in _MODES:
                raise ProtocolError(f"unknown selector mode {mode!r}")
        object.__setattr__(self, "overrides", dict(sorted(self.overrides.items())))

    def mode(self, node: int) -> str:
        return self.overrides.get(node, self.default)

    def __call__(self, node: int, round: int, received: Iterable[int]) -> int:
        ids = list(received)
        if not ids:
            raise ProtocolError("selector called with nothing received")
        return max(ids) if self.mode(node) == HIGHEST else min(ids)


@dataclass(frozen=True)
class Basic:
    """Single message: forward to every neighbour it did not come from."""

    name = "basic"


@dataclass(frozen=True)
class PartialSend:
    """Forward one chosen message to neighbours that sent nothing at all."""

    selector: Selector = Selector()
    name = "partial"


@dataclass(frozen=True)
class RankedFullSend:
    """Forward the highest-ranked message to neighbours that did not send it."""

    name = "ranked"


@dataclass(frozen=True)
class UnrankedFullSend:
    """Forward a chosen message to neighbours that did not send that message."""

    selector: Selector = Selector()
    name = "unranked"


@dataclass(frozen=True)
class SinkReversal:
    """Basic flooding, except that a sink in ``sink_round`` fires to all neighbours.

    A sink is a node receiving from every one of its neighbours.  With
    ``node`` set only that node may deviate; otherwise every sink of the round
    does.
    """

    sink_round: int
    node: Optional[int] = None
    name = "sink-reversal"


ForwardingRule = Union[Basic, PartialSend, RankedFullSend, UnrankedFullSend, SinkReversal]

SINGLE_MESSAGE_RULES = (Basic, SinkReversal)


@dataclass(frozen=True, order=True)
class Initiation:
    round: int
    node: int
    message: int


@dataclass(frozen=True)
class InitiationSchedule:
    """Floodings started by given nodes in given rounds.

    An initiation in round ``i`` puts the node in round-set ``R_i``; it sends
    to all neighbours in round ``i + 1``.
    """

    entries: tuple[Initiation, ...]

    def __post_init__(self) -> None:
        entries = tuple(sorted(self.entries))
        seen = set()
        for e in entries:
            if e.round < 0 or e.message < 0:
                raise ScheduleError(f"negative round or message id in {e}")
            if (e.node, e.round) in seen:
                raise ScheduleError(f"node {e.node} initiates twice in round {e.round}")
            seen.add((e.node, e.round))
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, *triples: tuple[int, int, int]) -> "InitiationSchedule":
        """Build from ``(node, message, round)`` triples."""
        return cls(tuple(Initiation(r, v, m) for v, m, r in triples))

    @classmethod
    def sources(cls, nodes: Iterable[int], message: int = 0) -> "InitiationSchedule":
        return cls(tuple(Initiation(0, v, message) for v in nodes))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def messages(self) -> tuple[int, ...]:
        return tuple(sorted({e.message for e in self.entries}))

    @property
    def last_round(self) -> int:
        return max((e.round for e in self.entries), default=0)

    def at(self, round: int) -> tuple[Initiation, ...]:
        return tuple(e for e in self.entries if e.round == round)

    def check_rank_order(self) -> None:
        """Higher-ranked messages must not start earlier than lower-ranked ones."""
        first: dict[int, int] = {}
        for e in self.entries:
            first[e.message] = min(first.get(e.message, e.round), e.round)
        last: dict[int, int] = {}
        for e in self.entries:
            last[e.message] = max(last.get(e.message, e.round), e.round)
        ranks = sorted(first)
        for lo, hi in zip(ranks, ranks[1:]):
            if last[lo] > first[hi]:
                raise ScheduleError(
                    f"message {hi} starts in round {first[hi]} before message {lo} "
                    f"(round {last[lo]}); ranks must respect initiation order"
                )

    def validate_for(self, rule: ForwardingRule) -> None:
        if isinstance(rule, SINGLE_MESSAGE_RULES) and len(self.messages) > 1:
            raise ScheduleError(f"{rule.name} flooding carries a single message")
        if isinstance(rule, RankedFullSend):
            self.check_rank_order()


def decide_sends(
    rule: ForwardingRule,
    node: int,
    round: int,
    received: Mapping[int, Iterable[int]],
    initiating: Iterable[int],
    neighbours: Iterable[int],
) -> frozenset[tuple[int, int]]:
    """Sends ``(neighbour, message)`` that ``node`` makes in round ``round + 1``.

    ``received`` maps each neighbour to the message ids it delivered in
    ``round``; ``initiating`` holds the message this node starts flooding.
    """
    neighbours = tuple(neighbours)
    initiating = frozenset(initiating)
    senders = {u: frozenset(ms) for u, ms in received.items() if ms}
    if initiating:
        if senders:
            raise ScheduleError(f"node {node} initiates in round {round} while receiving")
        if len(initiating) > 1:
            raise ScheduleError(f"node {node} initiates several messages in round {round}")
        (m,) = initiating
        return frozenset((v, m) for v in neighbours)
    if not senders:
        return frozenset()

    arrived = frozenset().union(*senders.values())

    if isinstance(rule, (Basic, SinkReversal)):
        if len(arrived) > 1:
            raise ProtocolError(f"{rule.name} flooding received several messages at node {node}")
        (m,) = arrived
        if (
            isinstance(rule, SinkReversal)
            and round == rule.sink_round
            and rule.node in (None, node)
            and all(v in senders for v in neighbours)
        ):
            return frozenset((v, m) for v in neighbours)
        return frozenset((v, m) for v in neighbours if v not in senders)

    if isinstance(rule, PartialSend):
        m = rule.selector(node, round, arrived)
        return frozenset((v, m) for v in neighbours if v not in senders)

    if isinstance(rule, RankedFullSend):
        m = max(arrived)
    elif isinstance(rule, UnrankedFullSend):
        m = rule.selector(node, round, arrived)
    else:
        raise ProtocolError(f"unknown forwarding rule {rule!r}")
    return frozenset((v, m) for v in neighbours if m not in senders.get(v, ()))
