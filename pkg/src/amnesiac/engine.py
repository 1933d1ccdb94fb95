"""Round-by-round simulation with termination and cycle detection.

Round ``r`` proceeds as: apply the mutations of round ``r``; deliver every
message due in round ``r``; let each receiving or initiating node decide its
sends for round ``r + 1`` and queue them with their delivery rounds.

Once every schedule (initiations, mutations, scripted delays, sink
deviations) is exhausted or periodic, the state between rounds is a finite
object.  A repeated configuration then proves the run never terminates.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .dynamics import MutationSchedule, apply_mutations, apply_round
from .graph import Graph
from .protocol import (
    Basic,
    ForwardingRule,
    InitiationSchedule,
    ScheduleError,
    SinkReversal,
    decide_sends,
)
from .timing import SYNCHRONOUS, DelayModel, delivery_round, phase, stationary_from, total_delay

Delivery = tuple[int, int, int]  # (from, to, message)


@dataclass(frozen=True, order=True)
class InTransit:
    delivery_round: int
    sender: int
    receiver: int
    message: int


@dataclass(frozen=True)
class RoundState:
    round: int
    delivered: frozenset[Delivery]
    initiated: frozenset[tuple[int, int]] = frozenset()  # (node, message)

    @property
    def round_set(self) -> frozenset[int]:
        return frozenset(t for _, t, _ in self.delivered) | frozenset(v for v, _ in self.initiated)

    def relation(self) -> frozenset[tuple[int, int]]:
        """Directed pairs ``(sender, receiver)`` active this round."""
        return frozenset((s, t) for s, t, _ in self.delivered)


@dataclass(frozen=True)
class Configuration:
    """Simulator state between rounds, with rounds stored relative to now."""

    pending: tuple[tuple[int, int, int, int], ...]  # (rounds until delivery, from, to, msg)
    upcoming: tuple[tuple[int, int, int], ...] = ()  # (rounds until initiation, node, msg)
    graph_version: int = 0
    phase: Optional[int] = None

    @property
    def is_empty(self) -> bool:
        return not self.pending and not self.upcoming

    def canonical(self) -> str:
        return json.dumps(
            [self.pending, self.upcoming, self.graph_version, self.phase], separators=(",", ":")
        )


def fingerprint(config: Configuration) -> str:
    if config.is_empty:
        return TERMINAL_FINGERPRINT
    return hashlib.blake2b(config.canonical().encode(), digest_size=16).hexdigest()


TERMINAL_FINGERPRINT = "0" * 32


@dataclass(frozen=True)
class Certificate:
    """A configuration reached after round ``round`` that recurs ``period`` rounds later."""

    round: int
    period: int
    configuration: Configuration


@dataclass(frozen=True)
class Terminated:
    last_round: int
    name = "terminated"

    def to_json(self) -> dict:
        return {"verdict": self.name, "lastRound": self.last_round}


@dataclass(frozen=True)
class NonTerminating:
    cycle_start: int
    period: int
    certificate: Certificate
    name = "non-terminating"

    def to_json(self) -> dict:
        return {
            "verdict": self.name,
            "cycleStart": self.cycle_start,
            "period": self.period,
            "fingerprint": fingerprint(self.certificate.configuration),
        }


@dataclass(frozen=True)
class BudgetExhausted:
    budget: int
    name = "budget-exhausted"

    def to_json(self) -> dict:
        return {"verdict": self.name, "budget": self.budget}


Verdict = Union[Terminated, NonTerminating, BudgetExhausted]


@dataclass
class Trace:
    rounds: list[RoundState] = field(default_factory=list)
    fingerprints: list[str] = field(default_factory=list)
    rule: ForwardingRule = Basic()
    model: DelayModel = SYNCHRONOUS
    dynamic: bool = False

    def __len__(self) -> int:
        return len(self.rounds)

    def __getitem__(self, i: int) -> RoundState:
        return self.rounds[i]

    def round_sets(self) -> list[frozenset[int]]:
        return [s.round_set for s in self.rounds]

    def last_round(self) -> int:
        return max((s.round for s in self.rounds if s.round_set), default=0)

    def receipt_rounds(self) -> dict[tuple[int, int], list[int]]:
        """Rounds in which each ``(node, message)`` is received or initiated."""
        rounds: dict[tuple[int, int], set[int]] = {}
        for s in self.rounds:
            for _, t, m in s.delivered:
                rounds.setdefault((t, m), set()).add(s.round)
            for v, m in s.initiated:
                rounds.setdefault((v, m), set()).add(s.round)
        return {k: sorted(v) for k, v in sorted(rounds.items())}

    def node_rounds(self) -> dict[int, list[int]]:
        """Round-set memberships per node, ignoring which message was carried."""
        rounds: dict[int, list[int]] = {}
        for s in self.rounds:
            for v in sorted(s.round_set):
                rounds.setdefault(v, []).append(s.round)
        return dict(sorted(rounds.items()))


class Simulation:
    """Mutable stepping state for one run."""

    def __init__(
        self,
        graph: Graph,
        schedule: InitiationSchedule,
        rule: ForwardingRule = Basic(),
        model: DelayModel = SYNCHRONOUS,
        mutations: MutationSchedule = MutationSchedule(),
    ) -> None:
        schedule.validate_for(rule)
        for e in schedule:
            if not 0 <= e.node < len(graph.labels):
                raise ScheduleError(f"initiation at unknown node id {e.node}")
        self.graph = graph
        self.schedule = schedule
        self.rule = rule
        self.model = model
        self.mutations = mutations
        self.round = -1
        self.pending: list[InTransit] = []

    @classmethod
    def resume(
        cls,
        graph: Graph,
        config: Configuration,
        round: int,
        rule: ForwardingRule = Basic(),
        model: DelayModel = SYNCHRONOUS,
    ) -> "Simulation":
        """Continue from ``config`` as reached after ``round``, on a now-static ``graph``."""
        sim = cls(graph, InitiationSchedule(()), rule, model)
        if config.upcoming:
            raise ValueError("can only resume configurations with no pending initiations")
        sim.round = round
        sim.pending = [InTransit(round + d, s, t, m) for d, s, t, m in config.pending]
        return sim

    def step(self) -> RoundState:
        r = self.round + 1
        if self.mutations.entries:
            self.graph = apply_round(self.graph, self.mutations, r)
        graph = self.graph

        due = [t for t in self.pending if t.delivery_round == r]
        self.pending = [t for t in self.pending if t.delivery_round != r]
        delivered = frozenset(
            (t.sender, t.receiver, t.message)
            for t in due
            if graph.has_edge(t.sender, t.receiver)
        )
        received: dict[int, dict[int, set[int]]] = {}
        for s, t, m in delivered:
            received.setdefault(t, {}).setdefault(s, set()).add(m)

        starting = self.schedule.at(r)
        initiating: dict[int, set[int]] = {}
        present = set(graph.nodes)
        for e in starting:
            if e.node not in present:
                raise ScheduleError(f"node {e.node} initiates in round {r} but is not present")
            if e.node in received:
                raise ScheduleError(f"node {e.node} initiates in round {r} while receiving")
            initiating.setdefault(e.node, set()).add(e.message)

        for v in sorted(set(received) | set(initiating)):
            sends = decide_sends(
                self.rule, v, r, received.get(v, {}), initiating.get(v, ()), graph.neighbours(v)
            )
            for w, m in sends:
                d = delivery_round(self.model, r + 1, v, w, m)
                if d < r + 1:
                    raise ValueError(f"delay model delivers before sending: {d} < {r + 1}")
                self.pending.append(InTransit(d, v, w, m))
        self.pending.sort()
        self.round = r
        return RoundState(r, delivered, frozenset((e.node, e.message) for e in starting))

    @property
    def finished(self) -> bool:
        return not self.pending and self.round >= self.schedule.last_round

    @property
    def stationary(self) -> bool:
        """True once nothing scheduled can change how the run evolves."""
        r = self.round
        if r < self.schedule.last_round or r < self.mutations.last_round:
            return False
        if r + 1 < stationary_from(self.model):
            return False
        if isinstance(self.rule, SinkReversal) and r < self.rule.sink_round:
            return False
        return True

    def configuration(self) -> Configuration:
        r = self.round
        return Configuration(
            pending=tuple((t.delivery_round - r, t.sender, t.receiver, t.message) for t in self.pending),
            upcoming=tuple(
                (e.round - r, e.node, e.message) for e in self.schedule if e.round > r
            ),
            graph_version=self.mutations.version(r),
            phase=phase(self.model, r + 1),
        )


def default_budget(
    graph: Graph, schedule: InitiationSchedule, model: DelayModel = SYNCHRONOUS
) -> int:
    return max(2 * len(graph.labels) + schedule.last_round + total_delay(model), 64)


def run(
    graph: Graph,
    schedule: InitiationSchedule,
    rule: ForwardingRule = Basic(),
    model: DelayModel = SYNCHRONOUS,
    mutations: MutationSchedule = MutationSchedule(),
    budget: Optional[int] = None,
) -> tuple[Verdict, Trace]:
    """Simulate until termination, a proven cycle, or ``budget`` rounds."""
    if budget is None:
        budget = default_budget(graph, schedule, model) + mutations.last_round
        if isinstance(rule, SinkReversal):
            budget += rule.sink_round
    if budget < 1:
        raise ValueError("budget must be at least 1")
    sim = Simulation(graph, schedule, rule, model, mutations)
    trace = Trace(rule=rule, model=model, dynamic=bool(mutations.entries))
    seen: dict[str, tuple[int, Configuration]] = {}
    last = 0
    while sim.round < budget:
        state = sim.step()
        trace.rounds.append(state)
        if state.round_set:
            last = state.round
        config = sim.configuration()
        fp = fingerprint(config)
        trace.fingerprints.append(fp)
        if sim.finished:
            return Terminated(last), trace
        if sim.stationary:
            hit = seen.get(fp)
            if hit is not None and hit[1] == config:
                start = hit[0]
                period = state.round - start
                return NonTerminating(start, period, Certificate(start, period, config)), trace
            seen[fp] = (state.round, config)
    return BudgetExhausted(budget), trace


def verify_certificate(
    graph: Graph,
    certificate: Certificate,
    rule: ForwardingRule = Basic(),
    model: DelayModel = SYNCHRONOUS,
    mutations: MutationSchedule = MutationSchedule(),
) -> bool:
    """Re-simulate ``period`` rounds from the certified configuration."""
    g = apply_mutations(graph, mutations, certificate.round)
    sim = Simulation.resume(g, certificate.configuration, certificate.round, rule, model)
    for _ in range(certificate.period):
        sim.step()
        if not sim.pending:
            return False
    again = sim.configuration()
    return again.pending == certificate.configuration.pending and again.phase == certificate.configuration.phase


def flood(graph: Graph, sources: Iterable[int], **kwargs) -> tuple[Verdict, Trace]:
    """Basic single-message flooding from ``sources`` in round 0."""
    return run(graph, InitiationSchedule.sources(sources), **kwargs)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def dump_trace(
    trace: Trace,
    verdict: Verdict,
    labels: Sequence[str],
    message_labels: Sequence[str],
    with_fingerprints: bool = False,
) -> str:
    """One JSON object per round, then the verdict; nodes and messages as labels."""
    lines = []
    for i, s in enumerate(trace.rounds):
        obj = {
            "round": s.round,
            "delivered": [[labels[a], labels[b], message_labels[m]] for a, b, m in sorted(s.delivered)],
            "roundSet": [labels[v] for v in sorted(s.round_set)],
        }
        if s.initiated:
            obj["initiated"] = [[labels[v], message_labels[m]] for v, m in sorted(s.initiated)]
        if with_fingerprints:
            obj["fingerprint"] = trace.fingerprints[i]
        lines.append(_dumps(obj))
    lines.append(_dumps(verdict.to_json()))
    return "\n".join(lines) + "\n"


def load_trace(
    text: str,
    labels: Sequence[str],
    message_labels: Sequence[str],
    rule: ForwardingRule = Basic(),
    model: DelayModel = SYNCHRONOUS,
    dynamic: bool = False,
) -> tuple[Trace, dict]:
    """Inverse of :func:`dump_trace`; returns the trace and the raw verdict object."""
    node = {l: i for i, l in enumerate(labels)}
    msg = {l: i for i, l in enumerate(message_labels)}
    trace = Trace(rule=rule, model=model, dynamic=dynamic)
    verdict: dict = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        if "verdict" in obj:
            verdict = obj
            continue
        trace.rounds.append(
            RoundState(
                obj["round"],
                frozenset((node[a], node[b], msg[m]) for a, b, m in obj["delivered"]),
                frozenset((node[v], msg[m]) for v, m in obj.get("initiated", [])),
            )
        )
        if "fingerprint" in obj:
            trace.fingerprints.append(obj["fingerprint"])
    return trace, verdict
