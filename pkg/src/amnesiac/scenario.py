"""JSON scenario files: a graph plus everything needed to run it.

Example::

    {
      "graph": "a b\\nb c\\na c\\n",
      "variant": "basic",
      "initiations": [{"node": "b", "message": "M", "round": 0}],
      "delay": {"model": "scripted", "period": 4,
                "holds": [{"round": 3, "from": "c", "to": "b", "message": "M", "hold": 1}]},
      "mutations": [{"round": 2, "op": "add_edge", "u": "a", "v": "c"}],
      "budget": 200
    }

``graph`` is an inline edge list or ``{"file": path}``.  ``nodes``, when
given, fixes the node id order and may name nodes without edges; ``absent``
lists labels not present until an ``add_node`` mutation.  ``messages``
fixes the rank order of message labels; otherwise messages rank in order of
first appearance in ``initiations``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import jsonschema

from .dynamics import AddEdge, AddNode, MutationSchedule, RemoveEdge, RemoveNode
from .engine import Trace, Verdict, run
from .graph import Graph, GraphError, WeightedGraph, format_edge_list, parse_edge_list
from .protocol import (
    Basic,
    ForwardingRule,
    Initiation,
    InitiationSchedule,
    PartialSend,
    ProtocolError,
    RankedFullSend,
    Selector,
    SinkReversal,
    UnrankedFullSend,
)
from .timing import SYNCHRONOUS, DelayModel, FixedWeights, Scripted, Synchronous, TimingError

VARIANTS = ("basic", "partial", "ranked", "unranked", "sink-reversal")

_label = {"type": "string", "minLength": 1, "pattern": r"^\S+$"}
_round = {"type": "integer", "minimum": 0}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["graph", "initiations"],
    "additionalProperties": False,
    "properties": {
        "graph": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "required": ["file"],
                    "additionalProperties": False,
                    "properties": {"file": {"type": "string"}},
                },
            ]
        },
        "nodes": {"type": "array", "items": _label},
        "absent": {"type": "array", "items": _label},
        "variant": {"enum": list(VARIANTS)},
        "messages": {"type": "array", "items": _label},
        "initiations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["node", "round"],
                "additionalProperties": False,
                "properties": {"node": _label, "message": _label, "round": _round},
            },
        },
        "delay": {
            "type": "object",
            "required": ["model"],
            "additionalProperties": False,
            "properties": {
                "model": {"enum": ["synchronous", "fixed", "scripted"]},
                "period": {"type": "integer", "minimum": 1},
                "holds": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["round", "from", "to", "hold"],
                        "additionalProperties": False,
                        "properties": {
                            "round": _round,
                            "from": _label,
                            "to": _label,
                            "message": _label,
                            "hold": {"type": "integer", "minimum": 0},
                        },
                    },
                },
            },
        },
        "mutations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["round", "op"],
                "additionalProperties": False,
                "properties": {
                    "round": {"type": "integer", "minimum": 1},
                    "op": {"enum": ["remove_edge", "remove_node", "add_edge", "add_node"]},
                    "u": _label,
                    "v": _label,
                },
            },
        },
        "selector": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "default": {"enum": ["lowest", "highest"]},
                "overrides": {
                    "type": "object",
                    "additionalProperties": {"enum": ["lowest", "highest"]},
                },
            },
        },
        "sink": {
            "type": "object",
            "required": ["round"],
            "additionalProperties": False,
            "properties": {"round": _round, "node": _label},
        },
        "budget": {"type": "integer", "minimum": 1},
    },
}

DEFAULT_MESSAGE = "M"


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path or '<root>'}: {message}")
        self.path = path


@dataclass
class Scenario:
    graph: Graph
    schedule: InitiationSchedule
    rule: ForwardingRule = Basic()
    model: DelayModel = SYNCHRONOUS
    mutations: MutationSchedule = MutationSchedule()
    budget: Optional[int] = None
    message_labels: tuple[str, ...] = (DEFAULT_MESSAGE,)
    weights: Optional[dict] = field(default=None, repr=False)

    @property
    def variant(self) -> str:
        return self.rule.name

    def run(self, budget: Optional[int] = None) -> tuple[Verdict, Trace]:
        return run(
            self.graph,
            self.schedule,
            self.rule,
            self.model,
            self.mutations,
            budget if budget is not None else self.budget,
        )

    def to_json(self) -> dict:
        g = self.graph
        lab = g.label
        msg = self.message_labels.__getitem__
        if self.weights:
            text = format_edge_list(WeightedGraph(g, self.weights))
        else:
            text = format_edge_list(g)
        out: dict[str, Any] = {"graph": text, "variant": self.variant, "nodes": list(g.labels)}
        absent = [g.labels[i] for i in range(len(g.labels)) if i not in set(g.nodes)]
        if absent:
            out["absent"] = absent
        out["messages"] = list(self.message_labels)
        out["initiations"] = [
            {"node": lab(e.node), "message": msg(e.message), "round": e.round}
            for e in self.schedule
        ]
        if isinstance(self.model, FixedWeights):
            out["delay"] = {"model": "fixed"}
        elif isinstance(self.model, Scripted):
            d: dict[str, Any] = {
                "model": "scripted",
                "holds": [
                    {"round": r, "from": lab(s), "to": lab(t), "message": msg(m), "hold": h}
                    for (r, s, t, m), h in self.model.holds.items()
                ],
            }
            if self.model.period is not None:
                d["period"] = self.model.period
            out["delay"] = d
        if self.mutations.entries:
            muts = []
            for r, m in self.mutations.entries:
                entry: dict[str, Any] = {"round": r, "op": m.op}
                if isinstance(m, (RemoveEdge, AddEdge)):
                    entry["u"], entry["v"] = lab(m.u), lab(m.v)
                else:
                    entry["v"] = lab(m.v)
                muts.append(entry)
            out["mutations"] = muts
        selector = getattr(self.rule, "selector", None)
        if selector is not None:
            out["selector"] = {
                "default": selector.default,
                "overrides": {lab(v): mode for v, mode in selector.overrides.items()},
            }
        if isinstance(self.rule, SinkReversal):
            sink: dict[str, Any] = {"round": self.rule.sink_round}
            if self.rule.node is not None:
                sink["node"] = lab(self.rule.node)
            out["sink"] = sink
        if self.budget is not None:
            out["budget"] = self.budget
        return out

    def dumps(self) -> str:
        return dumps(self.to_json())


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _schema_path(error: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in error.absolute_path)


def from_json(doc: Any, base: Optional[Path] = None) -> Scenario:
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise ScenarioError(_schema_path(errors[0]), errors[0].message)

    raw = doc["graph"]
    if isinstance(raw, dict):
        path = Path(raw["file"])
        if base is not None and not path.is_absolute():
            path = base / path
        try:
            raw = path.read_text()
        except OSError as exc:
            raise ScenarioError("graph/file", str(exc)) from None
    try:
        parsed = parse_edge_list(raw)
    except GraphError as exc:
        raise ScenarioError("graph", str(exc)) from None
    weights = None
    if isinstance(parsed, WeightedGraph):
        weights = dict(parsed.weights)
        parsed = parsed.graph
    labels = list(dict.fromkeys(doc.get("nodes", [])))
    for l in (*parsed.labels, *doc.get("absent", [])):
        if l not in labels:
            labels.append(l)
    absent = set(doc.get("absent", []))
    ids = {l: i for i, l in enumerate(labels)}
    edges = [(ids[parsed.labels[u]], ids[parsed.labels[v]]) for u, v in parsed.edges]
    if weights:
        weights = {
            (ids[parsed.labels[u]], ids[parsed.labels[v]]): w for (u, v), w in weights.items()
        }
    try:
        graph = Graph.from_edges(len(labels), edges, labels).with_structure(
            [ids[l] for l in labels if l not in absent], edges
        )
    except GraphError as exc:
        raise ScenarioError("absent", str(exc)) from None

    def node(label: str, path: str) -> int:
        if label not in ids:
            raise ScenarioError(path, f"unknown node {label!r}")
        return ids[label]

    messages = list(doc.get("messages", []))
    if len(set(messages)) != len(messages):
        raise ScenarioError("messages", "duplicate message label")
    explicit = bool(messages)
    for i, e in enumerate(doc["initiations"]):
        m = e.get("message", DEFAULT_MESSAGE)
        if m not in messages:
            if explicit:
                raise ScenarioError(f"initiations/{i}/message", f"unknown message {m!r}")
            messages.append(m)
    if not messages:
        messages = [DEFAULT_MESSAGE]
    mid = {m: i for i, m in enumerate(messages)}

    def message(label: Optional[str], path: str) -> int:
        label = label or DEFAULT_MESSAGE
        if label not in mid:
            raise ScenarioError(path, f"unknown message {label!r}")
        return mid[label]

    try:
        schedule = InitiationSchedule(
            tuple(
                Initiation(
                    e["round"],
                    node(e["node"], f"initiations/{i}/node"),
                    message(e.get("message"), f"initiations/{i}/message"),
                )
                for i, e in enumerate(doc["initiations"])
            )
        )
    except ProtocolError as exc:
        raise ScenarioError("initiations", str(exc)) from None

    variant = doc.get("variant", "basic")
    sel_doc = doc.get("selector")
    if sel_doc is not None and variant not in ("partial", "unranked"):
        raise ScenarioError("selector", f"variant {variant} takes no selector")
    selector = Selector()
    if sel_doc is not None:
        selector = Selector(
            sel_doc.get("default", "lowest"),
            {node(l, f"selector/overrides/{l}"): mode for l, mode in sel_doc.get("overrides", {}).items()},
        )
    if ("sink" in doc) != (variant == "sink-reversal"):
        raise ScenarioError("sink", "sink is required for, and only allowed with, sink-reversal")
    rule: ForwardingRule
    if variant == "basic":
        rule = Basic()
    elif variant == "partial":
        rule = PartialSend(selector)
    elif variant == "ranked":
        rule = RankedFullSend()
    elif variant == "unranked":
        rule = UnrankedFullSend(selector)
    else:
        s = doc["sink"]
        rule = SinkReversal(s["round"], node(s["node"], "sink/node") if "node" in s else None)
    try:
        schedule.validate_for(rule)
    except ProtocolError as exc:
        raise ScenarioError("initiations", str(exc)) from None

    delay = doc.get("delay", {"model": "fixed" if weights else "synchronous"})
    model: DelayModel
    if delay["model"] == "synchronous":
        model = Synchronous()
    elif delay["model"] == "fixed":
        if not weights:
            raise ScenarioError("delay/model", "fixed delays need a weighted edge list")
        model = FixedWeights(weights)
    else:
        holds = {}
        period = delay.get("period")
        for i, h in enumerate(delay.get("holds", [])):
            s, t = node(h["from"], f"delay/holds/{i}/from"), node(h["to"], f"delay/holds/{i}/to")
            key = (h["round"], s, t, message(h.get("message"), f"delay/holds/{i}/message"))
            if key in holds:
                raise ScenarioError(f"delay/holds/{i}", "duplicate hold")
            holds[key] = h["hold"]
        try:
            model = Scripted(holds, period)
        except TimingError as exc:
            raise ScenarioError("delay", str(exc)) from None

    entries = []
    for i, mdoc in enumerate(doc.get("mutations", [])):
        op = mdoc["op"]
        need = ("u", "v") if op.endswith("edge") else ("v",)
        for k in need:
            if k not in mdoc:
                raise ScenarioError(f"mutations/{i}/{k}", f"{op} needs {k!r}")
        v = node(mdoc["v"], f"mutations/{i}/v")
        if op == "remove_edge":
            mut = RemoveEdge(node(mdoc["u"], f"mutations/{i}/u"), v)
        elif op == "add_edge":
            mut = AddEdge(node(mdoc["u"], f"mutations/{i}/u"), v)
        elif op == "remove_node":
            mut = RemoveNode(v)
        else:
            mut = AddNode(v)
        entries.append((mdoc["round"], mut))
    mutations = MutationSchedule(tuple(entries))

    return Scenario(
        graph=graph,
        schedule=schedule,
        rule=rule,
        model=model,
        mutations=mutations,
        budget=doc.get("budget"),
        message_labels=tuple(messages),
        weights=weights,
    )


def loads(text: str, base: Optional[Path] = None) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("", f"invalid JSON: {exc}") from None
    return from_json(doc, base)


def load(path: str | Path) -> Scenario:
    path = Path(path)
    return loads(path.read_text(), path.parent)
