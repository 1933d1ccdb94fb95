"""Delivery-time models.

A send made in round ``s`` is delivered synchronously in round ``s``.  Fixed
edge weights delay it by ``w - 1`` rounds, so weight 1 is the synchronous
case.  Scripted holds model an adversary choosing per-send extra delays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .graph import Edge, Graph, WeightedGraph, edge_key
from .protocol import InitiationSchedule

HoldKey = tuple[int, int, int, int]  # (send round, from, to, message)


class TimingError(ValueError):
    pass


@dataclass(frozen=True)
class Synchronous:
    name = "synchronous"


@dataclass(frozen=True)
class FixedWeights:
    weights: Mapping[Edge, int]
    name = "fixed"

    def __post_init__(self) -> None:
        weights = {edge_key(*e): w for e, w in self.weights.items()}
        for e, w in weights.items():
            if w < 1:
                raise TimingError(f"edge {e} has non-positive weight {w}")
        object.__setattr__(self, "weights", dict(sorted(weights.items())))

    @classmethod
    def of(cls, wg: WeightedGraph) -> "FixedWeights":
        return cls(wg.weights)


@dataclass(frozen=True)
class Scripted:
    """Extra hold rounds per send, keyed ``(send round, from, to, message)``.

    With ``period`` set the send round in each key is taken modulo the period
    and the script repeats forever.
    """

    holds: Mapping[HoldKey, int] = field(default_factory=dict)
    period: Optional[int] = None
    name = "scripted"

    def __post_init__(self) -> None:
        if self.period is not None and self.period < 1:
            raise TimingError("period must be a positive integer")
        for key, hold in self.holds.items():
            if hold < 0:
                raise TimingError(f"negative hold {hold} for {key}")
            if self.period is not None and not 0 <= key[0] < self.period:
                raise TimingError(f"periodic hold key {key} has send round outside [0, period)")
        object.__setattr__(self, "holds", dict(sorted(self.holds.items())))

    def hold(self, send_round: int, sender: int, receiver: int, message: int) -> int:
        if self.period is not None:
            send_round %= self.period
        return self.holds.get((send_round, sender, receiver, message), 0)


DelayModel = Union[Synchronous, FixedWeights, Scripted]

SYNCHRONOUS = Synchronous()


def delivery_round(
    model: DelayModel, send_round: int, sender: int, receiver: int, message: int
) -> int:
    if isinstance(model, Synchronous):
        return send_round
    if isinstance(model, FixedWeights):
        try:
            w = model.weights[edge_key(sender, receiver)]
        except KeyError:
            raise TimingError(f"no weight for edge ({sender}, {receiver})") from None
        return send_round + w - 1
    if isinstance(model, Scripted):
        return send_round + model.hold(send_round, sender, receiver, message)
    raise TimingError(f"unknown delay model {model!r}")


def stationary_from(model: DelayModel) -> int:
    """First send round from which the model repeats (or never changes)."""
    if isinstance(model, Scripted) and model.period is None and model.holds:
        return max(k[0] for k in model.holds) + 1
    return 0


def phase(model: DelayModel, send_round: int) -> Optional[int]:
    if isinstance(model, Scripted) and model.period is not None:
        return send_round % model.period
    return None


def total_delay(model: DelayModel) -> int:
    """Crude size of the model's delays, used to size default budgets."""
    if isinstance(model, FixedWeights):
        return sum(model.weights.values())
    if isinstance(model, Scripted):
        return sum(model.holds.values())
    return 0


def triangle_adversary_scenario() -> tuple[Graph, InitiationSchedule, Scripted]:
    """Triangle ``a, b, c`` where an adversary at ``c`` keeps flooding alive.

    ``b`` floods in round 0.  Each time ``c`` forwards towards ``b`` (send
    rounds 3, 7, ...) or towards ``a`` (send rounds 5, 9, ...) it holds the
    message one extra round.  Rounds 2 and 4 are mirror images with ``a`` and
    ``b`` swapped, so the configuration repeats with period 4.
    """
    a, b, c = 0, 1, 2
    graph = Graph.from_edges(3, [(a, b), (b, c), (a, c)], labels=("a", "b", "c"))
    schedule = InitiationSchedule.of((b, 0, 0))
    model = Scripted({(3, c, b, 0): 1, (1, c, a, 0): 1}, period=4)
    return graph, schedule, model
