"""Command-line front end: simulate, replay, metrics, compare, gen-fixtures.

Exit codes: 0 on success, 2 on usage/config/format errors, 3 when results
are incomplete (timeouts or unreachable metric events).
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import formats
from .engine import PointerEngine, default_config
from .formats import FormatError, RunManifest, config_hash, write_atomic
from .precision import segmented
from .simulate import ControllerPolicy, FixedPrecision, TremorModel, TwoPhasePrecision, run_controller
from .tasks import (
    IncompleteRun,
    TaskKind,
    TaskResult,
    TrajectoryLog,
    evaluate,
    make_buttons_task,
    make_erase_task,
    make_moving_task,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INCOMPLETE = 3


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_CONFIG


def _safe_evaluate(log: TrajectoryLog, spec) -> TaskResult:
    try:
        return evaluate(log, spec)
    except IncompleteRun:
        n = spec.run_count()
        metric = {
            TaskKind.BUTTONS: ("total_time", "ms"),
            TaskKind.ERASE: ("completion_time", "ms"),
            TaskKind.HIT_MOVING: ("minimal_error", "px"),
            TaskKind.TRACK_MOVING: ("average_error", "px"),
        }[spec.kind]
        return TaskResult(metric[0], metric[1], tuple([None] * n), None, False)


def _run_manifest(manifest: RunManifest):
    """Run every seed of a manifest; returns (results, logs) keyed by seed."""
    cfg, task, policy, tremor = manifest.load()
    chash = config_hash(cfg)
    results = {}
    logs = {}
    for seed in manifest.seeds:
        seeded = TremorModel(amplitude=tremor.amplitude, band=tremor.band, seed=seed)
        log = run_controller(task, cfg, policy, seeded, config_hash=chash)
        qlog = formats.quantize_log(log)
        results[seed] = _safe_evaluate(qlog, task)
        logs[seed] = qlog
    return cfg, task, results, logs


def cmd_simulate(args) -> int:
    try:
        manifest = formats.load_manifest(args.manifest)
        cfg, task, results, logs = _run_manifest(manifest)
    except FormatError as e:
        return _fail(str(e))
    os.makedirs(manifest.output_dir, exist_ok=True)
    aggregates = []
    for seed in manifest.seeds:
        write_atomic(os.path.join(manifest.output_dir, f"log_s{seed}.txt"), formats.dump_log(logs[seed]))
        write_atomic(
            os.path.join(manifest.output_dir, f"result_s{seed}.json"),
            formats.dump_result(results[seed]),
        )
        aggregates.append(results[seed].aggregate)
    complete = [a for a in aggregates if a is not None]
    mean = sum(complete) / len(complete) if complete else None
    sample = next(iter(results.values()))
    summary = TaskResult(sample.metric, sample.units, tuple(aggregates), mean, len(complete) == len(aggregates))
    write_atomic(os.path.join(manifest.output_dir, "summary.json"), formats.dump_result(summary))
    print(f"{cfg.name or 'custom'}: {sample.metric} mean = {mean} {sample.units} over {len(aggregates)} seed(s)")
    print(f"wrote {2 * len(manifest.seeds) + 1} files to {manifest.output_dir}")
    return EXIT_OK if summary.complete else EXIT_INCOMPLETE


def cmd_replay(args) -> int:
    try:
        with open(args.config) as fh:
            cfg = formats.load_config(fh.read())
    except (OSError, FormatError, ValueError) as e:
        return _fail(f"config: {e}")
    try:
        with open(args.samples) as fh:
            samples = formats.load_samples(fh.read())
    except OSError as e:
        return _fail(str(e))
    except FormatError as e:
        return _fail(str(e))
    engine = PointerEngine(cfg)
    log = TrajectoryLog(config_hash=config_hash(cfg), technique=cfg.name or "custom")
    for s in samples:
        log.frames.append(engine.step(s))
    text = formats.dump_log(log)
    if args.output:
        write_atomic(args.output, text)
        print(f"{len(log.frames)} frame(s) -> {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _result_table(rows: list[tuple[str, TaskResult]]) -> str:
    lines = []
    header = f"{'technique':<12} {'metric':<16} {'units':<5} {'aggregate':>12}  per-run"
    lines.append(header)
    lines.append("-" * len(header))
    for name, res in rows:
        agg = f"{res.aggregate:.3f}" if res.aggregate is not None else "incomplete"
        per = " ".join("-" if v is None else f"{v:.3f}" for v in res.per_run)
        lines.append(f"{name:<12} {res.metric:<16} {res.units:<5} {agg:>12}  {per}")
    return "\n".join(lines)


def cmd_metrics(args) -> int:
    try:
        with open(args.log) as fh:
            log = formats.load_log(fh.read())
        with open(args.task) as fh:
            spec = formats.load_task(fh.read())
    except OSError as e:
        return _fail(str(e))
    except FormatError as e:
        return _fail(str(e))
    if log.task_kind and log.task_kind != spec.kind.value:
        return _fail(f"log was recorded under task kind {log.task_kind!r}, not {spec.kind.value!r}")
    try:
        result = evaluate(log, spec)
    except IncompleteRun as e:
        result = _safe_evaluate(log, spec)
        print(f"note: {e}", file=sys.stderr)
    except (ValueError, IndexError) as e:
        return _fail(f"log does not match task: {e}")
    print(_result_table([(log.technique, result)]))
    if args.output:
        write_atomic(args.output, formats.dump_result(result))
    return EXIT_OK if result.complete else EXIT_INCOMPLETE


def cmd_compare(args) -> int:
    if len(args.manifests) < 2:
        return _fail("compare needs at least two manifests")
    loaded = []
    try:
        for path in args.manifests:
            manifest = formats.load_manifest(path)
            loaded.append((path, manifest))
    except FormatError as e:
        return _fail(str(e))
    task_texts = []
    for _, m in loaded:
        with open(m.task_path) as fh:
            task_texts.append(formats.load_task(fh.read()))
    if any(t != task_texts[0] for t in task_texts[1:]):
        return _fail("manifests reference different tasks; comparison undefined")
    if any(m.seeds != loaded[0][1].seeds for _, m in loaded[1:]):
        return _fail("manifests must use identical seed lists for a paired comparison")

    rows = []
    table_obj = {"format": "airpoint-compare/1", "seeds": list(loaded[0][1].seeds), "columns": []}
    incomplete = False
    for path, manifest in loaded:
        try:
            cfg, task, results, _ = _run_manifest(manifest)
        except FormatError as e:
            return _fail(f"{path}: {e}")
        aggs = [results[s].aggregate for s in manifest.seeds]
        good = [a for a in aggs if a is not None]
        mean = sum(good) / len(good) if good else None
        incomplete = incomplete or len(good) != len(aggs)
        sample = next(iter(results.values()))
        name = cfg.name or os.path.basename(path)
        rows.append((name, TaskResult(sample.metric, sample.units, tuple(aggs), mean, len(good) == len(aggs))))
        table_obj["columns"].append(
            {"technique": name, "metric": sample.metric, "units": sample.units, "per_seed": aggs, "mean": mean}
        )
    print(_result_table(rows))
    if args.output:
        import json

        write_atomic(args.output, json.dumps(table_obj, indent=2) + "\n")
    return EXIT_INCOMPLETE if incomplete else EXIT_OK


def cmd_gen_fixtures(args) -> int:
    out = args.output_dir
    os.makedirs(out, exist_ok=True)
    written = []

    def emit(name: str, text: str) -> None:
        write_atomic(os.path.join(out, name), text)
        written.append(name)

    for tech in ("VA", "VR", "HA", "HR"):
        emit(f"config_{tech.lower()}.json", formats.dump_config(default_config(tech)))
    baseline = default_config("HA", scheme=segmented([(0.0, 1.0)]), name="KM")
    emit("config_baseline.json", formats.dump_config(baseline))

    emit("task1_buttons.json", formats.dump_task(make_buttons_task()))
    emit("task2_erase.json", formats.dump_task(make_erase_task()))
    emit("task3_hit.json", formats.dump_task(make_moving_task(TaskKind.HIT_MOVING)))
    emit("task4_track.json", formats.dump_task(make_moving_task(TaskKind.TRACK_MOVING)))

    tremor = TremorModel(amplitude=0.002)
    two_phase = ControllerPolicy(strategy=TwoPhasePrecision(0.05, 0.95, 150.0))
    # relative techniques track at the middle band: the finest band's motor
    # range is too small to follow a moving object without constant clutching
    two_phase_mid = ControllerPolicy(strategy=TwoPhasePrecision(0.05, 0.5, 150.0))
    emit("policy_two_phase.json", formats.dump_policy(two_phase, tremor))
    emit("policy_two_phase_mid.json", formats.dump_policy(two_phase_mid, tremor))
    emit("policy_fixed_coarse.json", formats.dump_policy(ControllerPolicy(strategy=FixedPrecision(0.05)), tremor))
    emit("policy_fixed_fine.json", formats.dump_policy(ControllerPolicy(strategy=FixedPrecision(0.95)), tremor))

    seeds = tuple(range(1, 11))
    for tech, config_file, policy_file in (
        ("ha", "config_ha.json", "policy_two_phase.json"),
        ("hr", "config_hr.json", "policy_two_phase_mid.json"),
        ("baseline", "config_baseline.json", "policy_fixed_coarse.json"),
    ):
        emit(
            f"compare_task3_{tech}.json",
            formats.dump_manifest(
                RunManifest(config_file, "task3_hit.json", policy_file, seeds, f"runs/{tech}_task3")
            ),
        )
    emit(
        "demo.json",
        formats.dump_manifest(
            RunManifest("config_ha.json", "task1_buttons.json", "policy_two_phase.json", (1,), "runs/demo")
        ),
    )
    print(f"wrote {len(written)} fixture files to {out}:")
    for name in written:
        print(f"  {name}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from . import server

    return server.serve(host=args.host, port=args.port, frontend_dir=args.frontend)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="airpoint", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a manifest's simulation and metrics")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("replay", help="re-run a recorded sample stream through the engine")
    s.add_argument("samples")
    s.add_argument("config")
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_replay)

    s = sub.add_parser("metrics", help="evaluate a trajectory log against a task")
    s.add_argument("log")
    s.add_argument("task")
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("compare", help="paired comparison of two or more manifests")
    s.add_argument("manifests", nargs="+")
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("gen-fixtures", help="write the default configs, tasks and manifests")
    s.add_argument("output_dir")
    s.set_defaults(func=cmd_gen_fixtures)

    s = sub.add_parser("serve", help="serve the browser demo backed by the engine")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8750)
    s.add_argument("--frontend", default=None, help="directory with the built demo UI")
    s.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
