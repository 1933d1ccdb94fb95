"""Command-line front end.

    amnesiac run SCENARIO [--budget N] [--fingerprints]
    amnesiac analyze GRAPH (--source NODE | --sources A,B,...)
    amnesiac verify SCENARIO [--budget N]
    amnesiac search {fixed-delay,unranked,edge-addition,sharp,enumerate,sweep,random} ...

``-`` reads the scenario or graph from stdin.  ``run`` exits 0 when flooding
terminates, 20 when it provably never does and 30 when the round budget runs
out.  ``verify`` exits 10 when an applicable check fails.  Bad input exits 1.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import analysis, search
from .dynamics import MutationError
from .engine import NonTerminating, Terminated, dump_trace, run
from .graph import (
    GraphError,
    WeightedGraph,
    diameter,
    ec_nodes,
    eccentricity,
    is_bipartite,
    is_connected,
    is_ec_bipartite,
    parse_edge_list,
)
from .protocol import (
    Basic,
    InitiationSchedule,
    PartialSend,
    ProtocolError,
    RankedFullSend,
    Selector,
)
from .scenario import Scenario, ScenarioError, dumps, load, loads
from .timing import TimingError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_FOUND = 2
EXIT_CHECK_FAILED = 10
EXIT_NONTERMINATING = 20
EXIT_BUDGET = 30

INPUT_ERRORS = (ScenarioError, GraphError, ProtocolError, MutationError, TimingError, OSError)


def _read(path: str) -> tuple[str, Optional[Path]]:
    if path == "-":
        return sys.stdin.read(), None
    p = Path(path)
    return p.read_text(), p.parent


def _scenario(path: str) -> Scenario:
    if path == "-":
        return loads(sys.stdin.read())
    return load(path)


def _exit_code(verdict) -> int:
    if isinstance(verdict, Terminated):
        return EXIT_OK
    if isinstance(verdict, NonTerminating):
        return EXIT_NONTERMINATING
    return EXIT_BUDGET


def cmd_run(args: argparse.Namespace) -> int:
    s = _scenario(args.scenario)
    verdict, trace = s.run(args.budget)
    sys.stdout.write(
        dump_trace(trace, verdict, s.graph.labels, s.message_labels, args.fingerprints)
    )
    return _exit_code(verdict)


def analyze_graph(text: str, sources: Sequence[str]) -> tuple[dict, Optional[str]]:
    """Graph facts relative to ``sources``; a warning when some are undefined."""
    g = parse_edge_list(text)
    if isinstance(g, WeightedGraph):
        g = g.graph
    ids = [g.node_id(s) for s in sources]
    ecs = ec_nodes(g, ids)
    report = {
        "sources": sorted(sources),
        "e": None,
        "d": None,
        "ecNodes": sorted(g.label(v) for v in ecs),
        "bipartite": is_bipartite(g),
        "ecBipartite": is_ec_bipartite(g, ids),
    }
    if not is_connected(g):
        return report, "graph is not connected: e and d are undefined, ec nodes cover the reachable part only"
    report["e"] = eccentricity(g, ids)
    report["d"] = diameter(g)
    return report, None


def cmd_analyze(args: argparse.Namespace) -> int:
    text, _ = _read(args.graph)
    sources = [args.source] if args.source else [s for s in args.sources.split(",") if s]
    if not sources:
        raise ScenarioError("sources", "at least one source is required")
    report, warning = analyze_graph(text, sources)
    if warning:
        print(f"warning: {warning}", file=sys.stderr)
    sys.stdout.write(dumps(report))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    s = _scenario(args.scenario)
    verdict, trace = s.run(args.budget)
    checks = analysis.verify_run(s.graph, s.schedule, trace, verdict, s.mutations)
    ok = all(c.ok for c in checks)
    sys.stdout.write(
        dumps(
            {
                "variant": s.variant,
                "verdict": verdict.to_json(),
                "checks": [c.to_json() for c in checks],
                "ok": ok,
            }
        )
    )
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _write(out: Optional[str], name: str, text: str) -> Optional[str]:
    if out is None:
        return None
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    path = d / name
    path.write_text(text)
    return str(path)


def _search_witness(args: argparse.Namespace) -> int:
    limits = search.SearchLimits(
        max_n=args.max_n or 5, max_weight=args.max_weight, budget=args.budget or 400
    )
    found = search.find_nontermination_witness(args.target, limits)
    if isinstance(found, search.NotFound):
        sys.stdout.write(dumps({"family": args.target, "found": False, "examined": found.examined}))
        return EXIT_NOT_FOUND
    text = found.scenario.dumps()
    path = _write(args.out, f"{args.target}.json", text)
    report = {
        "family": args.target,
        "found": True,
        "verdict": found.verdict.to_json(),
        "reverified": found.reverify(),
    }
    if path:
        report["file"] = path
    else:
        report["scenario"] = found.scenario.to_json()
    sys.stdout.write(dumps(report))
    return EXIT_OK


def _search_sharp(args: argparse.Namespace) -> int:
    first: dict[str, search.SharpInstance] = {}
    for n in range(3, (args.max_n or search.MAX_N) + 1):
        for inst in search.find_sharp_instances(n):
            first.setdefault(inst.kind, inst)
        if len(first) == 2:
            break
    report = {}
    for kind, inst in sorted(first.items()):
        scenario = Scenario(inst.graph, InitiationSchedule.sources([inst.source]))
        entry = {
            "lastRound": inst.last_round,
            "e": inst.e,
            "d": inst.d,
            "source": inst.graph.label(inst.source),
            "edges": [[inst.graph.label(u), inst.graph.label(v)] for u, v in sorted(inst.graph.edges)],
        }
        path = _write(args.out, f"sharp-{kind}.json", scenario.dumps())
        if path:
            entry["file"] = path
        report[kind] = entry
    sys.stdout.write(dumps(report))
    return EXIT_OK if len(first) == 2 else EXIT_NOT_FOUND


def _search_enumerate(args: argparse.Namespace) -> int:
    n = args.n if args.n is not None else (args.max_n or 3)
    classes = search.connected_graph_classes(n)
    report = {"n": n, "classes": len(classes), "labelled": search.labelled_count(classes)}
    if n <= 6:
        report["labelledEnumerated"] = search.count_connected_graphs(n)
    sys.stdout.write(dumps(report))
    return EXIT_OK


def _search_sweep(args: argparse.Namespace) -> int:
    runs, bad = search.falsification_sweep(args.max_n or 7)
    sys.stdout.write(dumps({"runs": runs, "counterexamples": bad}))
    return EXIT_OK if not bad else EXIT_CHECK_FAILED


def _search_random(args: argparse.Namespace) -> int:
    """Random multi-message schedules under a terminating rule; report violations."""
    rng = random.Random(args.seed)
    rule = {"basic": Basic(), "partial": PartialSend(Selector()), "ranked": RankedFullSend()}[args.variant]
    messages = 1 if args.variant == "basic" else 4
    bad, done = [], 0
    while done < args.count:
        g = search.random_connected_graph(rng, rng.randint(2, args.max_n or 10))
        schedule = search.random_schedule(
            rng,
            g,
            rng.randint(1, messages),
            4,
            ranked=args.variant == "ranked",
            per_message=rng.randint(1, 3) if args.variant == "basic" else 1,
        )
        try:
            verdict, trace = run(g, schedule, rule)
        except ProtocolError:
            continue
        done += 1
        counts_ok = not analysis.single_round_messages(schedule) or analysis.check_receive_counts(trace).ok
        if not isinstance(verdict, Terminated) or not counts_ok:
            bad.append(
                {
                    "edges": sorted(g.edges),
                    "initiations": [[e.node, e.message, e.round] for e in schedule],
                }
            )
    sys.stdout.write(dumps({"variant": args.variant, "seed": args.seed, "runs": done, "counterexamples": bad}))
    return EXIT_OK if not bad else EXIT_CHECK_FAILED


def cmd_search(args: argparse.Namespace) -> int:
    if args.max_n is not None and not 1 <= args.max_n <= search.MAX_N and args.target != "random":
        raise search.SearchError(f"--max-n must be in 1..{search.MAX_N}")
    if args.target in search.FAMILIES:
        return _search_witness(args)
    return {
        "sharp": _search_sharp,
        "enumerate": _search_enumerate,
        "sweep": _search_sweep,
        "random": _search_random,
    }[args.target](args)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="amnesiac", description="Amnesiac flooding simulator and checker.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario and print its trace")
    r.add_argument("scenario", help="scenario JSON file, or - for stdin")
    r.add_argument("--budget", type=int, help="override the round budget")
    r.add_argument("--fingerprints", action="store_true", help="add configuration fingerprints")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="distance facts of a graph relative to a source set")
    a.add_argument("graph", help="edge-list file, or - for stdin")
    group = a.add_mutually_exclusive_group(required=True)
    group.add_argument("--source", help="a single source node")
    group.add_argument("--sources", help="comma-separated source nodes")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run a scenario and apply every applicable check")
    v.add_argument("scenario", help="scenario JSON file, or - for stdin")
    v.add_argument("--budget", type=int, help="override the round budget")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", help="search small instances")
    s.add_argument(
        "target", choices=[*search.FAMILIES, "sharp", "enumerate", "sweep", "random"]
    )
    s.add_argument("--max-n", type=int, help="largest graph size to search")
    s.add_argument("--max-weight", type=int, default=4, help="largest edge delay (fixed-delay)")
    s.add_argument("--n", type=int, help="graph size (enumerate)")
    s.add_argument("--budget", type=int, help="round budget per simulation")
    s.add_argument("--out", help="directory for witness scenario files")
    s.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    s.add_argument("--count", type=int, default=1000, help="number of random runs")
    s.add_argument("--variant", choices=["basic", "partial", "ranked"], default="partial")
    s.set_defaults(func=cmd_search)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (*INPUT_ERRORS, search.SearchError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
