"""Command line entry points.

serve         run the HTTP control API with a wall-clock-paced simulation
run-scenario  headless batch execution of a scenario, nonzero exit on
              invariant violations
submit-intent one-shot intent submission (local system, or --url for a
              running service)
snapshot      fetch a state snapshot from a running service
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
import time
import urllib.request
from pathlib import Path

from .documents import builtin_path, load_document
from .runtime import GridSliceSystem, build_system


def _resolve_scenario_path(name_or_path: str) -> Path:
    path = Path(name_or_path)
    if path.exists():
        return path
    builtin = builtin_path(f"scenarios/{name_or_path}.yaml")
    if builtin.exists():
        return builtin
    print(f"error: no scenario file or builtin scenario named {name_or_path!r}", file=sys.stderr)
    raise SystemExit(2)


def _add_system_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="config document (defaults to packaged)")
    parser.add_argument("--topology", help="topology document (defaults to packaged)")
    parser.add_argument("--catalog", help="requirement catalog document")
    parser.add_argument("--gst-catalog", help="slice template catalog document")
    parser.add_argument("--slas", help="SLA set document")
    parser.add_argument("--seed", type=int, default=None,
                        help="simulation seed (default: the scenario's, else 0)")


def _build(args, log_sink=None, scenario_doc=None) -> GridSliceSystem:
    seed = args.seed
    if seed is None and scenario_doc is not None:
        seed = scenario_doc.get("seed")
    system = build_system(
        config_path=args.config,
        topology_path=args.topology,
        catalog_path=args.catalog,
        gst_path=args.gst_catalog,
        slas_path=args.slas,
        seed=0 if seed is None else int(seed),
        log_sink=log_sink,
    )
    system.model_dir = getattr(args, "model_dir", None)
    return system


def cmd_run_scenario(args) -> int:
    scenario_doc = load_document(_resolve_scenario_path(args.scenario))
    sink = open(args.out, "w", encoding="utf-8") if args.out else None
    try:
        system = _build(args, log_sink=sink, scenario_doc=scenario_doc)
        result = system.execute("load_scenario", {"document": scenario_doc})
        system.run_loaded_scenario()
        problems = system.check_invariants()
        summary = {
            "scenario": result["scenario"],
            "slices": result["slices"],
            "sim_time": system.sim.clock,
            "events": system.log.last_seq,
            "invariants_ok": not problems,
        }
        print(json.dumps(summary, sort_keys=True))
        for problem in problems:
            print(f"invariant violated: {problem}", file=sys.stderr)
        return 1 if problems else 0
    finally:
        if sink:
            sink.close()


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    sink = open(args.out, "w", encoding="utf-8") if args.out else None
    scenario_doc = (
        load_document(_resolve_scenario_path(args.scenario)) if args.scenario else None
    )
    system = _build(args, log_sink=sink, scenario_doc=scenario_doc)
    if scenario_doc is not None:
        system.execute("load_scenario", {"document": scenario_doc})

    serve_cfg = system.inputs.config.get("serve", {})
    tick_wall = args.tick_wall or float(serve_cfg.get("tick_wall_s", 0.25))
    tick_sim = args.sim_per_tick or float(serve_cfg.get("sim_seconds_per_tick", 0.25))
    stop = threading.Event()

    def drive():
        # paces the logical clock against the wall clock
        while not stop.is_set():
            time.sleep(tick_wall)
            horizon = system.scenario.duration_s if system.scenario else None
            target = system.sim.clock + tick_sim
            if horizon is not None:
                target = min(target, horizon)
            if target > system.sim.clock:
                system.execute("advance", {"until": target})

    driver = threading.Thread(target=drive, daemon=True, name="sim-driver")
    driver.start()

    listen = args.listen or serve_cfg.get("listen", "127.0.0.1:8420")
    host, _, port = listen.partition(":")
    app = create_app(system, console_dir=args.console_dir)
    try:
        uvicorn.run(app, host=host, port=int(port or 8420), log_level="warning")
    finally:
        stop.set()
        if sink:
            sink.close()
    return 0


def cmd_submit_intent(args) -> int:
    if args.url:
        body = json.dumps(
            {"stakeholder": args.stakeholder, "text": args.text, "dry_run": args.dry_run}
        ).encode()
        request = urllib.request.Request(
            args.url.rstrip("/") + "/intents",
            data=body,
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(request) as response:
            outcome = json.loads(response.read())
    else:
        system = _build(args)
        outcome = system.submit_intent(args.stakeholder, args.text, dry_run=args.dry_run)
    print(json.dumps(outcome, indent=2, sort_keys=True))
    return 0 if outcome.get("ok") else 1


def cmd_snapshot(args) -> int:
    request = urllib.request.Request(args.url.rstrip("/") + "/snapshot", data=b"{}")
    request.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(request) as response:
        doc = json.loads(response.read())
    Path(args.out).write_text(json.dumps(doc, sort_keys=True, indent=1), encoding="utf-8")
    print(f"snapshot version {doc.get('version')} written to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gridslice")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the control API with a paced simulation")
    _add_system_args(p_serve)
    p_serve.add_argument("--scenario", help="scenario file or builtin name to load")
    p_serve.add_argument("--listen", help="ADDR:PORT (default from config)")
    p_serve.add_argument("--out", help="also append the event log to this file")
    p_serve.add_argument("--console-dir", help="serve the operator console from this directory")
    p_serve.add_argument("--model-dir", help="write emitted service models here")
    p_serve.add_argument("--tick-wall", type=float, help="wall seconds per driver tick")
    p_serve.add_argument("--sim-per-tick", type=float, help="sim seconds advanced per tick")
    p_serve.set_defaults(func=cmd_serve)

    p_run = sub.add_parser("run-scenario", help="headless batch scenario execution")
    p_run.add_argument("scenario", help="scenario file path or builtin name")
    _add_system_args(p_run)
    p_run.add_argument("--out", help="write the event log (JSON lines) to this file")
    p_run.add_argument("--model-dir", help="write emitted service models here")
    p_run.set_defaults(func=cmd_run_scenario)

    p_submit = sub.add_parser("submit-intent", help="submit one intent and print the outcome")
    _add_system_args(p_submit)
    p_submit.add_argument("--as", dest="stakeholder", default="DSO",
                          help="stakeholder (DSO, PROSUMER, DR_AGGREGATOR, CSP)")
    p_submit.add_argument("--dry-run", action="store_true", help="stop after feasibility")
    p_submit.add_argument("--url", help="target a running service instead of a local system")
    p_submit.add_argument("text", help="intent text")
    p_submit.set_defaults(func=cmd_submit_intent)

    p_snap = sub.add_parser("snapshot", help="fetch a snapshot from a running service")
    p_snap.add_argument("--url", default="http://127.0.0.1:8420")
    p_snap.add_argument("--out", required=True)
    p_snap.set_defaults(func=cmd_snapshot)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
