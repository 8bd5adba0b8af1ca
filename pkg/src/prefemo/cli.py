"""Command-line interface.

Exit codes: 0 success, 2 configuration/validation error, 3 partial failure
(some runs failed but the experiment completed).
"""

from __future__ import annotations

import argparse
import json
import sys

from .algorithms import ALGORITHM_KINDS, ConfigError
from .harness import (
    ExperimentError,
    ResultStore,
    export_heatmap,
    preset_config,
    run_experiment,
    scenario_presets,
    session_presets,
    summarize,
)


def _cmd_run(args) -> int:
    if bool(args.config) == bool(args.preset):
        print("error: pass exactly one of --config or --preset", file=sys.stderr)
        return 2
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
            if args.output_dir:
                raw["output_dir"] = args.output_dir
        else:
            raw = preset_config(args.preset, output_dir=args.output_dir)
        done = {"n": 0}

        def progress(record):
            done["n"] += 1
            status = "ok" if record["status"] == "ok" else "FAILED"
            print(f"[{done['n']}] {record['key']}: {status}", flush=True)

        store, failures = run_experiment(raw, jobs=args.jobs, progress=progress)
    except (ExperimentError, ConfigError) as exc:
        for line in getattr(exc, "errors", [str(exc)]):
            print(f"config error: {line}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"store: {store.root} ({len(store.keys())} records, {failures} failed)")
    return 3 if failures else 0


def _cmd_summarize(args) -> int:
    store = ResultStore(args.store)
    if not store.keys():
        print(f"error: no records under {args.store}", file=sys.stderr)
        return 2
    summary = summarize(store, metric=args.metric)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, sort_keys=True, indent=1)
    for cell in summary["cells"]:
        print(f"\n{cell['problem']} / {cell['scenario']} / {cell['metric']}")
        best = cell["best"]
        for algo, stats in sorted(cell["algorithms"].items()):
            med = "degenerate" if stats["median"] is None else f"{stats['median']:.6g}"
            iqr = "-" if stats["iqr"] is None else f"{stats['iqr']:.3g}"
            marks = []
            if algo == best:
                marks.append("best")
            sig = cell["significance_vs_best"].get(algo)
            if sig and sig["significant"]:
                marks.append(f"p={sig['p_value']:.4g}*")
            elif sig:
                marks.append(f"p={sig['p_value']:.4g}")
            extra = f" failed={stats['failed']}" if stats["failed"] else ""
            print(f"  {algo:12s} median={med:>12s} iqr={iqr:>9s}{extra} {' '.join(marks)}")
    return 0


def _cmd_heatmap(args) -> int:
    store = ResultStore(args.store)
    try:
        payload = export_heatmap(store, args.metric, args.out)
    except ExperimentError as exc:
        for line in exc.errors:
            print(f"error: {line}", file=sys.stderr)
        return 2
    print(
        f"wrote {args.out}_ranks.csv, {args.out}_rankfreq.csv, {args.out}.json "
        f"({len(payload['algorithms'])} algorithms x {len(payload['instances'])} instances)"
    )
    return 0


def _cmd_presets(args) -> int:
    experiments = scenario_presets()
    sessions = session_presets()
    if args.action == "list":
        print("experiment presets:")
        for name in sorted(experiments):
            print(f"  {name:20s} {experiments[name].get('description', '')}")
        print("session presets:")
        for name in sorted(sessions):
            print(f"  {name:20s} {sessions[name].get('description', '')}")
        return 0
    name = args.name
    if name in experiments:
        print(json.dumps(preset_config(name), indent=1, sort_keys=True))
        return 0
    if name in sessions:
        print(json.dumps(sessions[name], indent=1, sort_keys=True))
        return 0
    print(f"error: unknown preset {name!r}", file=sys.stderr)
    return 2


def _cmd_serve(args) -> int:
    from .server import SteerServer

    server = SteerServer(
        host=args.host,
        port=args.port,
        journal_dir=args.journal_dir,
        static_dir=args.static,
    )
    host, port = server.address
    print(f"steering service on http://{host}:{port} (Ctrl-C to stop)", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def _cmd_steer(args) -> int:
    import numpy as np

    from .steer import SessionManager, preset_session_args, run_scripted_session

    try:
        preset = preset_session_args(args.preset, args.algorithm)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    manager = SessionManager(journal_dir=args.journal_dir)
    state = run_scripted_session(
        manager,
        preset["problem"],
        preset["algorithm"],
        preset["budget"],
        args.seed,
        preset["script"],
        interaction_period=args.interaction_period,
    )
    print(f"session {state.session_id} finished at generation {state.generation}")
    print(f"elicitations: {[e['generation'] for e in state.elicitations]}")
    if state.r_hv_trajectory:
        tail = state.r_hv_trajectory[-1]
        print(f"final preferred-region hypervolume: {tail['value']:.6g}")
    if args.out:
        session = manager.get(state.session_id)
        with open(args.out, "w", encoding="utf-8") as fh:
            for entry in session.journal:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
        print(f"journal written to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="prefemo",
        description="Preference-based evolutionary multi-objective optimization toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a batch experiment")
    p.add_argument("--config", help="experiment config JSON file")
    p.add_argument("--preset", help="named experiment preset")
    p.add_argument("--output-dir", help="override the store directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument(
        "--resume",
        action="store_true",
        help="accepted for compatibility; completed keys are always skipped",
    )
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("summarize", help="medians, IQRs, and significance per cell")
    p.add_argument("--store", required=True)
    p.add_argument("--metric", help="restrict to one metric id")
    p.add_argument("--out", help="also write the summary as JSON")
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("heatmap", help="export rank matrices for one metric")
    p.add_argument("--store", required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=_cmd_heatmap)

    p = sub.add_parser("presets", help="list or show shipped presets")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?")
    p.set_defaults(func=_cmd_presets)

    p = sub.add_parser("serve", help="start the interactive steering service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8650)
    p.add_argument("--journal-dir", help="persist finished session journals here")
    p.add_argument("--static", help="serve this directory (built frontend) at /")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("steer", help="run a scripted steering session headlessly")
    p.add_argument("--preset", required=True)
    p.add_argument("--algorithm", default="r_nsga2", choices=list(ALGORITHM_KINDS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--interaction-period", type=int)
    p.add_argument("--journal-dir")
    p.add_argument("--out", help="write the session journal to this file")
    p.set_defaults(func=_cmd_steer)

    args = parser.parse_args(argv)
    if args.command == "presets" and args.action == "show" and not args.name:
        parser.error("presets show requires a name")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
