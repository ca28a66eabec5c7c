"""Command line entry points.

Subcommands: ``plan``, ``verify``, ``simulate``, ``replay``, ``serve``.
Exit codes: 0 success, 1 unsolvable/invalid/diverged, 2 usage or parse
errors.  Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from clinicbot import data as bundled
from clinicbot.executive.config import SessionConfig
from clinicbot.executive.events import event_line
from clinicbot.executive.session import Phase, Session
from clinicbot.pddl import ground, parse_domain, parse_problem
from clinicbot.pddl.model import PddlError
from clinicbot.planning import (
    BranchedPlan,
    PlanningError,
    Unsolvable,
    dumps_policy,
    loads_policy,
    solve,
    unfold,
    verify_policy,
)
from clinicbot.service.persist import SessionStore
from clinicbot.service.replay import replay_events, state_trajectory
from clinicbot.sim.scenario import Scenario, ScenarioMismatch, SimClock, run_scenario


def _load_task(domain_path: str, problem_path: str):
    domain = parse_domain(Path(domain_path).read_text(encoding="utf-8"))
    problem = parse_problem(Path(problem_path).read_text(encoding="utf-8"))
    return ground(domain, problem)


def _render_tree(plan: BranchedPlan) -> str:
    task = plan.task
    lines: list[str] = []

    def walk(node_id: int, prefix: str, connector: str) -> None:
        node = plan.node(node_id)
        if node.goal:
            lines.append(f"{prefix}{connector}[goal] (node {node.id})")
            return
        name = task.actions[node.action].name if node.action is not None else "(open)"
        lines.append(f"{prefix}{connector}{name} (node {node.id})")
        child_prefix = prefix + ("" if not connector else ("   " if connector.startswith("`") else "|  "))
        for i, edge in enumerate(node.children):
            last = i == len(node.children) - 1
            marker = ("`- " if last else "|- ") + f"[{edge.outcome}] "
            if edge.back:
                lines.append(f"{child_prefix}{marker}retry -> node {edge.target}")
            else:
                walk(edge.target, child_prefix, marker)

    walk(plan.root, "", "")
    return "\n".join(lines)


def cmd_plan(args) -> int:
    task = _load_task(args.domain, args.problem)
    policy = solve(task, args.semantics)
    print(policy.solution_class.value)
    tree = unfold(task, policy)
    print(_render_tree(tree))
    if args.out:
        Path(args.out).write_text(dumps_policy(policy), encoding="utf-8")
        print(f"policy written to {args.out}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    task = _load_task(args.domain, args.problem)
    policy = loads_policy(Path(args.policy).read_text(encoding="utf-8"), task)
    cls = verify_policy(task, policy)
    print(cls.value)
    return 0 if cls.value != "invalid" else 1


def _scenario_inputs(args, doc: dict) -> tuple[str, str, str]:
    base = Path(args.scenario).resolve().parent

    def pick(flag: str | None, key: str, default: str) -> str:
        if flag:
            return Path(flag).read_text(encoding="utf-8")
        if key in doc:
            return (base / doc[key]).read_text(encoding="utf-8")
        return default

    domain_text = pick(args.domain, "domain", bundled.clinic_domain())
    problem_text = pick(args.problem, "problem", bundled.clinic_problem())
    config_text = pick(args.config, "config", bundled.clinic_config())
    return domain_text, problem_text, config_text


def cmd_simulate(args) -> int:
    doc = json.loads(Path(args.scenario).read_text(encoding="utf-8"))
    scenario = Scenario.from_dict(doc)
    if args.seed is not None:
        scenario.seed = args.seed
    domain_text, problem_text, config_text = _scenario_inputs(args, doc)
    task = ground(parse_domain(domain_text), parse_problem(problem_text))
    config = SessionConfig.from_json(config_text)
    clock = SimClock()
    session = Session(task, config, session_id=scenario.name, clock=clock.now)
    session.start()
    events = run_scenario(scenario, session, clock)

    out = Path(args.out) if args.out else Path(f"{scenario.name}.transcript.jsonl")
    out.write_text("".join(event_line(e) + "\n" for e in events), encoding="utf-8")
    sidecar = out.with_suffix(out.suffix + ".inputs.json")
    sidecar.write_text(
        json.dumps(
            {"domain": domain_text, "problem": problem_text, "config": json.loads(config_text)},
            indent=2,
        ),
        encoding="utf-8",
    )
    print(
        f"{scenario.name}: {session.phase.value} after {session.turn} turns;"
        f" transcript -> {out}"
    )
    return 0 if session.phase is Phase.DONE else 1


def cmd_replay(args) -> int:
    transcript = Path(args.transcript)
    events = [
        json.loads(line)
        for line in transcript.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if args.domain and args.problem:
        domain_text = Path(args.domain).read_text(encoding="utf-8")
        problem_text = Path(args.problem).read_text(encoding="utf-8")
        config_doc = (
            json.loads(Path(args.config).read_text(encoding="utf-8"))
            if args.config
            else {}
        )
    else:
        sidecar = transcript.with_suffix(transcript.suffix + ".inputs.json")
        if not sidecar.exists():
            print(f"no inputs sidecar {sidecar}; pass --domain/--problem/--config", file=sys.stderr)
            return 2
        doc = json.loads(sidecar.read_text(encoding="utf-8"))
        domain_text, problem_text, config_doc = doc["domain"], doc["problem"], doc["config"]
    task = ground(parse_domain(domain_text), parse_problem(problem_text))
    config = SessionConfig.from_dict(config_doc)
    result = replay_events(task, config, events)
    original = state_trajectory(events)
    replayed = state_trajectory(result.session.log.events)
    if result.identical and original == replayed:
        print("identical")
        return 0
    print("diverged", file=sys.stderr)
    for diff in result.diffs[:10]:
        print(f"  {diff}", file=sys.stderr)
    return 1


def cmd_serve(args) -> int:
    import uvicorn

    from clinicbot.service.api import create_app

    port = args.port or int(os.environ.get("PORT", "8008"))
    log_dir = args.log_dir or os.environ.get("LOG_DIR", "./sessions")
    store = SessionStore(log_dir)
    static = args.static if args.static and Path(args.static).is_dir() else None
    app = create_app(store=store, static_dir=static)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clinicbot")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve a task and print the branched plan")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("--semantics", choices=["strong", "strong-cyclic"], default="strong-cyclic")
    p.add_argument("--out", help="write the policy JSON here")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("verify", help="classify a stored policy")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("policy")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run a scenario closed-loop, headless")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--domain")
    p.add_argument("--problem")
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="re-execute a transcript and diff")
    p.add_argument("transcript")
    p.add_argument("--domain")
    p.add_argument("--problem")
    p.add_argument("--config")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="start the operator API")
    p.add_argument("--port", type=int)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config")
    p.add_argument("--log-dir")
    p.add_argument("--static", help="directory with the built operator console")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (PddlError, ScenarioMismatch, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (Unsolvable, PlanningError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
