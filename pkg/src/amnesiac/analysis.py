"""Post-hoc checks of flooding traces against the termination theorems.

Every check recomputes its graph quantities from the graph itself and reads
only the trace's round states, so checks can be run on deserialized traces.
Each check returns a :class:`CheckResult`; failures name the offending node,
round or message in ``detail``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .engine import Trace
from .graph import (
    Graph,
    distances,
    eccentricity,
    ec_nodes,
    diameter,
    is_bipartite,
    is_connected,
    is_ec_bipartite,
)
from .protocol import Basic, InitiationSchedule, RankedFullSend
from .timing import Synchronous

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not-applicable"


class AnalysisError(ValueError):
    """A check was applied outside the setting its theorem covers."""


@dataclass
class CheckResult:
    name: str
    status: str
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def to_json(self) -> dict:
        out = {"check": self.name, "status": self.status}
        if self.detail:
            out["detail"] = self.detail
        return out


def _result(name: str, violation: Optional[dict]) -> CheckResult:
    return CheckResult(name, PASS if violation is None else FAIL, violation or {})


def _require_static_basic(graph: Graph, sources: frozenset[int], trace: Trace) -> None:
    if not isinstance(trace.rule, Basic):
        raise AnalysisError(f"check needs basic flooding, trace uses {trace.rule.name}")
    if not isinstance(trace.model, Synchronous) or trace.dynamic:
        raise AnalysisError("check needs a static synchronous run")
    if not trace.rounds or trace.rounds[0].round_set != sources:
        raise AnalysisError("sources must be exactly the round-0 initiators")
    later = [s.round for s in trace.rounds[1:] if s.initiated]
    if later:
        raise AnalysisError(f"initiation after round 0 (round {later[0]})")
    if not is_connected(graph):
        raise AnalysisError("check needs a connected graph")


def receive_counts(trace: Trace) -> dict[tuple[int, int], int]:
    """Number of distinct round-sets each ``(node, message)`` belongs to."""
    return {k: len(v) for k, v in trace.receipt_rounds().items()}


def check_receive_counts(trace: Trace, limit: int = 2) -> CheckResult:
    for (v, m), n in receive_counts(trace).items():
        if n > limit:
            return _result("receive-counts", {"node": v, "message": m, "count": n})
    return _result("receive-counts", None)


@dataclass
class BoundReport:
    e_I: int
    diameter: int
    last_round: int
    ec_bipartite: bool
    upper_bound: Optional[int]
    status: str
    reason: str

    def to_json(self) -> dict:
        return {
            "eI": self.e_I,
            "diameter": self.diameter,
            "lastRound": self.last_round,
            "ecBipartite": self.ec_bipartite,
            "upperBound": self.upper_bound,
            "status": self.status,
            "reason": self.reason,
        }


def ec_upper_bound(graph: Graph, sources: Iterable[int]) -> Optional[int]:
    """Smallest ``d(I, g) + e(g) + 1`` over ec nodes ``g``; ``None`` without ec nodes."""
    dist = distances(graph, sources)
    ecs = ec_nodes(graph, sources)
    if not ecs:
        return None
    return min(dist[g] + eccentricity(graph, [g]) + 1 for g in ecs)


def check_bounds(graph: Graph, sources: Iterable[int], trace: Trace) -> BoundReport:
    sources = frozenset(sources)
    _require_static_basic(graph, sources, trace)
    e = eccentricity(graph, sources)
    d = diameter(graph)
    last = trace.last_round()
    ecb = is_ec_bipartite(graph, sources)
    bound = ec_upper_bound(graph, sources)
    if ecb:
        ok = last == e
        reason = f"ec-bipartite: last round {last} {'=' if ok else '!='} e(I) {e}"
    else:
        ok = e < last <= bound
        reason = f"not ec-bipartite: need {e} < {last} <= {bound}"
    return BoundReport(e, d, last, ecb, bound, PASS if ok else FAIL, reason)


def check_ec_equivalences(graph: Graph, sources: Iterable[int], trace: Trace) -> CheckResult:
    """With ec nodes every reached node is in exactly two round-sets, else in one."""
    sources = frozenset(sources)
    _require_static_basic(graph, sources, trace)
    want = 2 if ec_nodes(graph, sources) else 1
    reached = distances(graph, sources)
    counts = trace.node_rounds()
    for v in sorted(reached):
        n = len(counts.get(v, ()))
        if n != want:
            return _result("ec-equivalences", {"node": v, "count": n, "expected": want})
    return _result("ec-equivalences", None)


def _second_receipts(trace: Trace) -> dict[int, int]:
    return {v: rs[1] for v, rs in trace.node_rounds().items() if len(rs) >= 2}


def check_second_visit_offsets(graph: Graph, sources: Iterable[int], trace: Trace) -> CheckResult:
    """Neighbours of a node received twice are themselves received twice, within one round."""
    sources = frozenset(sources)
    _require_static_basic(graph, sources, trace)
    second = _second_receipts(trace)
    for h, j in sorted(second.items()):
        for g in graph.neighbours(h):
            k = second.get(g)
            if k is None or abs(k - j) > 1:
                return _result(
                    "second-visit-offsets",
                    {"node": h, "round": j, "neighbour": g, "neighbourSecond": k},
                )
    return _result("second-visit-offsets", None)


def check_equidistant_second_visit(
    graph: Graph, sources: Iterable[int], trace: Trace
) -> CheckResult:
    """ec nodes at distance j are received again in round j + 1, and every
    node at distance j sends to its distance-(j+1) neighbours in round j + 1."""
    sources = frozenset(sources)
    _require_static_basic(graph, sources, trace)
    dist = distances(graph, sources)
    second = _second_receipts(trace)
    for g in sorted(ec_nodes(graph, sources)):
        if second.get(g) != dist[g] + 1:
            return _result(
                "equidistant-second-visit",
                {"node": g, "distance": dist[g], "second": second.get(g)},
            )
    relations = {s.round: s.relation() for s in trace.rounds}
    for g, j in sorted(dist.items()):
        for h in graph.neighbours(g):
            if dist.get(h) == j + 1 and (g, h) not in relations.get(j + 1, ()):
                return _result(
                    "equidistant-second-visit",
                    {"sender": g, "receiver": h, "round": j + 1, "missing": "send"},
                )
    return _result("equidistant-second-visit", None)


def check_distance_layers(graph: Graph, sources: Iterable[int], trace: Trace) -> CheckResult:
    """Distance-j nodes are in round-set j and no round-set j holds a farther node."""
    sources = frozenset(sources)
    dist = distances(graph, sources)
    for s in trace.rounds:
        for v in s.round_set:
            if dist.get(v, s.round + 1) > s.round:
                return _result("distance-layers", {"node": v, "round": s.round})
    sets = {s.round: s.round_set for s in trace.rounds}
    for v, j in dist.items():
        if v not in sets.get(j, ()):
            return _result("distance-layers", {"node": v, "distance": j, "missing": True})
    return _result("distance-layers", None)


def message_round_sets(trace: Trace, schedule: InitiationSchedule) -> dict[int, dict[int, frozenset[int]]]:
    """Per message ``h``: round -> nodes initiating or receiving some message ranked >= h."""
    if not isinstance(trace.rule, RankedFullSend) and len(schedule.messages) > 1:
        raise AnalysisError("per-message round-sets are defined for ranked full-send")
    start = {}
    for e in schedule:
        start[e.message] = min(start.get(e.message, e.round), e.round)
    out: dict[int, dict[int, frozenset[int]]] = {}
    for h, i_h in sorted(start.items()):
        sets = {}
        for s in trace.rounds:
            if s.round < i_h:
                continue
            nodes = {v for v, m in s.initiated if m >= h}
            if s.round > i_h:
                nodes |= {t for _, t, m in s.delivered if m >= h}
            sets[s.round] = frozenset(nodes)
        out[h] = sets
    return out


def check_broadcast_delivery(
    graph: Graph, trace: Trace, schedule: InitiationSchedule
) -> CheckResult:
    """A single broadcaster's ranked stream reaches every node, at most twice each."""
    if not isinstance(trace.rule, RankedFullSend):
        raise AnalysisError("broadcast delivery is guaranteed for ranked full-send only")
    broadcasters = {e.node for e in schedule}
    if len(broadcasters) != 1:
        raise AnalysisError("broadcast delivery needs exactly one broadcasting node")
    rounds = [e.round for e in schedule]
    if any(b <= a for a, b in zip(rounds, rounds[1:])):
        raise AnalysisError("initiation rounds must be strictly increasing")
    messages = [e.message for e in schedule]
    if messages != sorted(messages) or len(set(messages)) != len(messages):
        raise AnalysisError("messages must be distinct and ranked by initiation round")
    (x,) = broadcasters
    reached = distances(graph, [x])
    counts = receive_counts(trace)
    for m in messages:
        for v in sorted(reached):
            n = counts.get((v, m), 0)
            if n not in (1, 2):
                return _result("broadcast-delivery", {"node": v, "message": m, "count": n})
    return _result("broadcast-delivery", None)


def _basic_successor(graph: Graph, relation: frozenset[tuple[int, int]]) -> set[tuple[int, int]]:
    senders: dict[int, set[int]] = {}
    for s, t in relation:
        senders.setdefault(t, set()).add(s)
    return {(g, h) for g, frm in senders.items() for h in graph.neighbours(g) if h not in frm}


def check_reverse_duality(graph: Graph, trace: Trace) -> CheckResult:
    """Reversing every delivery and playing the rounds backwards is again flooding.

    Nodes that were sinks in the forward run (received from all neighbours)
    act as initiators in the reversed run; the reversal must itself stop.
    """
    if not isinstance(trace.rule, Basic) or not isinstance(trace.model, Synchronous) or trace.dynamic:
        raise AnalysisError("duality holds for static synchronous basic flooding")
    states = [s.relation() for s in trace.rounds[1:]]
    if trace.rounds and trace.rounds[-1].delivered and _basic_successor(graph, states[-1]):
        raise AnalysisError("trace has not terminated")
    while states and not states[-1]:
        states.pop()
    if any(s.initiated for s in trace.rounds[1:]):
        raise AnalysisError("duality check needs all initiations in round 0")
    inverse = [frozenset((t, s) for s, t in rel) for rel in reversed(states)]

    def sinks(rel: frozenset[tuple[int, int]]) -> set[int]:
        got: dict[int, set[int]] = {}
        for s, t in rel:
            got.setdefault(t, set()).add(s)
        return {v for v, frm in got.items() if frm == set(graph.neighbours(v))}

    tau = len(states)
    for k in range(len(inverse)):
        forward_round = tau - k  # inverse[k] reverses forward round tau - k
        expect = set()
        if k > 0:
            expect = _basic_successor(graph, inverse[k - 1])
        for g in sinks(states[forward_round - 1]):
            expect |= {(g, h) for h in graph.neighbours(g)}
        if expect != set(inverse[k]):
            return _result(
                "reverse-duality",
                {
                    "reversedStep": k,
                    "forwardRound": forward_round,
                    "extra": sorted(set(inverse[k]) - expect),
                    "missing": sorted(expect - set(inverse[k])),
                },
            )
    if inverse and _basic_successor(graph, inverse[-1]):
        return _result("reverse-duality", {"reversedStep": len(inverse), "missing": "termination"})
    return _result("reverse-duality", None)


def single_round_messages(schedule: InitiationSchedule) -> bool:
    """Each message is initiated in one round only (the receipt-count setting)."""
    rounds: dict[int, set[int]] = {}
    for e in schedule:
        rounds.setdefault(e.message, set()).add(e.round)
    return all(len(r) == 1 for r in rounds.values())


def check_ec_source_bound(graph: Graph, sources: Iterable[int], trace: Trace) -> CheckResult:
    """When sources include ec nodes, flooding ends by min e(g) + 1 over those nodes."""
    sources = frozenset(sources)
    _require_static_basic(graph, sources, trace)
    inside = ec_nodes(graph, sources) & sources
    if not inside:
        return CheckResult("ec-source-bound", NOT_APPLICABLE, {"reason": "no ec node among the sources"})
    e = eccentricity(graph, sources)
    bound = min(eccentricity(graph, [g]) + 1 for g in inside)
    last = trace.last_round()
    if e < last <= bound:
        return _result("ec-source-bound", None)
    return _result("ec-source-bound", {"lastRound": last, "eI": e, "bound": bound})


def check_single_source_bounds(graph: Graph, source: int, trace: Trace) -> CheckResult:
    """Bipartite: last round is e.  Otherwise e < last round <= e + d + 1."""
    _require_static_basic(graph, frozenset([source]), trace)
    e = eccentricity(graph, [source])
    d = diameter(graph)
    last = trace.last_round()
    if is_bipartite(graph):
        ok = last == e
    else:
        ok = e < last <= e + d + 1
    detail = {"lastRound": last, "e": e, "d": d, "bipartite": is_bipartite(graph)}
    return CheckResult("single-source-bounds", PASS if ok else FAIL, {} if ok else detail)


def verify_run(
    graph: Graph,
    schedule: InitiationSchedule,
    trace: Trace,
    verdict,
    mutations=None,
) -> list[CheckResult]:
    """Apply every check whose theorem covers this run; others are not applicable."""
    from .engine import NonTerminating, Terminated, verify_certificate
    from .protocol import PartialSend, SinkReversal

    rule, model = trace.rule, trace.model
    sync = isinstance(model, Synchronous)
    removal_only = mutations is None or mutations.is_monotone_removal()
    static = mutations is None or not mutations.entries
    results: list[CheckResult] = []

    def na(name: str, reason: str) -> None:
        results.append(CheckResult(name, NOT_APPLICABLE, {"reason": reason}))

    covered = sync and removal_only and isinstance(rule, (Basic, PartialSend, RankedFullSend))
    covered = covered or (sync and static and isinstance(rule, SinkReversal))
    if covered:
        ok = isinstance(verdict, Terminated)
        results.append(
            CheckResult("termination", PASS if ok else FAIL, {} if ok else verdict.to_json())
        )
    else:
        na("termination", f"no termination guarantee ({rule.name}, {model.name})")

    if (
        sync
        and removal_only
        and isinstance(rule, (Basic, PartialSend, RankedFullSend))
        and single_round_messages(schedule)
    ):
        results.append(check_receive_counts(trace))
    else:
        na("receive-counts", "no guarantee")

    if isinstance(verdict, NonTerminating):
        ok = verify_certificate(graph, verdict.certificate, rule, model, mutations or _empty())
        results.append(CheckResult("certificate", PASS if ok else FAIL))
    else:
        na("certificate", "run is not non-terminating")

    sources = frozenset(e.node for e in schedule if e.round == 0)
    round0 = (
        isinstance(rule, Basic)
        and sync
        and static
        and schedule.entries
        and all(e.round == 0 for e in schedule)
        and is_connected(graph)
        and isinstance(verdict, Terminated)
    )
    names = (
        "bounds",
        "ec-equivalences",
        "second-visit-offsets",
        "equidistant-second-visit",
        "distance-layers",
        "ec-source-bound",
        "reverse-duality",
    )
    if round0:
        report = check_bounds(graph, sources, trace)
        results.append(CheckResult("bounds", report.status, report.to_json()))
        results.append(check_ec_equivalences(graph, sources, trace))
        results.append(check_second_visit_offsets(graph, sources, trace))
        results.append(check_equidistant_second_visit(graph, sources, trace))
        results.append(check_distance_layers(graph, sources, trace))
        results.append(check_ec_source_bound(graph, sources, trace))
        results.append(check_reverse_duality(graph, trace))
        if len(sources) == 1:
            results.append(check_single_source_bounds(graph, next(iter(sources)), trace))
    else:
        for name in names:
            na(name, "needs static synchronous basic flooding from round 0 on a connected graph")

    try:
        if not (sync and static):
            raise AnalysisError("needs a static synchronous run")
        results.append(check_broadcast_delivery(graph, trace, schedule))
    except AnalysisError as exc:
        na("broadcast-delivery", str(exc))
    return results


def _empty():
    from .dynamics import MutationSchedule

    return MutationSchedule()
