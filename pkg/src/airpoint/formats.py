"""Versioned file formats: config, task, policy, samples, log, result.

Configs, tasks, policy and result files are JSON with an explicit format
tag. Sample streams and trajectory logs are newline-delimited text with a
header line, one record per line, numeric fields at 9 significant digits.
Every writer has a parser and parse(serialize(x)) returns x for values the
writer produced.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass

from .engine import (
    Adjustment,
    ClutchParams,
    DisplayGeometry,
    FeedbackState,
    FrameOutput,
    Mapping,
    RingPair,
    TechniqueConfig,
)
from .geometry import CalibrationVolume, HandSample, Point3
from .precision import PrecisionScheme, SchemeKind
from .simulate import ControllerPolicy, FixedPrecision, TremorModel, TwoPhasePrecision
from .tasks import (
    ButtonRun,
    Marker,
    Rect,
    TaskKind,
    TaskResult,
    TaskSpec,
    Track,
    TrajectoryLog,
)

CONFIG_FORMAT = "airpoint-config/1"
TASK_FORMAT = "airpoint-task/1"
POLICY_FORMAT = "airpoint-policy/1"
RESULT_FORMAT = "airpoint-result/1"
MANIFEST_FORMAT = "airpoint-manifest/1"
SAMPLES_HEADER = "#airpoint-samples 1"
LOG_HEADER = "#airpoint-log 1"


class FormatError(ValueError):
    """Malformed or mismatched file content."""


def _f(x: float) -> str:
    """Record-format float field: 9 significant digits."""
    return format(float(x), ".9g")


def write_atomic(path: str, text: str) -> None:
    """Write-then-rename so readers never see a partial file."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _expect_format(obj: dict, expected: str, what: str) -> None:
    got = obj.get("format")
    if got != expected:
        raise FormatError(f"{what}: expected format {expected!r}, got {got!r}")


# --- config ------------------------------------------------------------------


def _scheme_to_obj(s: PrecisionScheme) -> dict:
    return {"kind": s.kind.value, "knots": [list(k) for k in s.knots]}


def _scheme_from_obj(obj: dict) -> PrecisionScheme:
    return PrecisionScheme(SchemeKind(obj["kind"]), tuple((float(h), float(H)) for h, H in obj["knots"]))


def config_to_obj(cfg: TechniqueConfig) -> dict:
    v = cfg.volume
    return {
        "format": CONFIG_FORMAT,
        "name": cfg.name,
        "mapping": cfg.mapping.value,
        "adjustment": cfg.adjustment.value,
        "scheme": _scheme_to_obj(cfg.scheme),
        "volume": {
            "vertical_range": list(v.vertical_range),
            "radial_range": list(v.radial_range),
            "planar_bounds": [list(v.planar_bounds[0]), list(v.planar_bounds[1])],
            "angular_bounds": [list(v.angular_bounds[0]), list(v.angular_bounds[1])],
        },
        "display": {"width": cfg.display.width, "height": cfg.display.height},
        "clutch": {
            "window_n": cfg.clutch.window_n,
            "tau": cfg.clutch.tau,
            "min_pairs": cfg.clutch.min_pairs,
        },
        "gain_base": cfg.gain_base,
        "smoothing_alpha": cfg.smoothing_alpha,
        "prediction_lead": cfg.prediction_lead,
        "speed_threshold": cfg.speed_threshold,
        "circle_radius_base": cfg.circle_radius_base,
        "ring_thickness_per_speed": cfg.ring_thickness_per_speed,
        "hysteresis_margin": cfg.hysteresis_margin,
        "clutch_inequality": cfg.clutch_inequality,
    }


def config_from_obj(obj: dict) -> TechniqueConfig:
    _expect_format(obj, CONFIG_FORMAT, "config")
    try:
        v = obj["volume"]
        volume = CalibrationVolume(
            vertical_range=tuple(v["vertical_range"]),
            radial_range=tuple(v["radial_range"]),
            planar_bounds=(tuple(v["planar_bounds"][0]), tuple(v["planar_bounds"][1])),
            angular_bounds=(tuple(v["angular_bounds"][0]), tuple(v["angular_bounds"][1])),
        )
        return TechniqueConfig(
            mapping=Mapping(obj["mapping"]),
            adjustment=Adjustment(obj["adjustment"]),
            scheme=_scheme_from_obj(obj["scheme"]),
            volume=volume,
            display=DisplayGeometry(obj["display"]["width"], obj["display"]["height"]),
            clutch=ClutchParams(
                obj["clutch"]["window_n"], obj["clutch"]["tau"], obj["clutch"]["min_pairs"]
            ),
            gain_base=obj["gain_base"],
            smoothing_alpha=obj["smoothing_alpha"],
            prediction_lead=obj["prediction_lead"],
            speed_threshold=obj["speed_threshold"],
            circle_radius_base=obj["circle_radius_base"],
            ring_thickness_per_speed=obj["ring_thickness_per_speed"],
            hysteresis_margin=obj["hysteresis_margin"],
            clutch_inequality=obj["clutch_inequality"],
            name=obj.get("name", ""),
        )
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(f"config: {e}") from e


def dump_config(cfg: TechniqueConfig) -> str:
    return json.dumps(config_to_obj(cfg), indent=2) + "\n"


def load_config(text: str) -> TechniqueConfig:
    return config_from_obj(json.loads(text))


def config_hash(cfg: TechniqueConfig) -> str:
    canonical = json.dumps(config_to_obj(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


# --- task ----------------------------------------------------------------


def task_to_obj(spec: TaskSpec) -> dict:
    obj: dict = {"format": TASK_FORMAT, "kind": spec.kind.value}
    if spec.kind is TaskKind.BUTTONS:
        obj["runs"] = [
            {
                "rects": [[r.x, r.y, r.w, r.h] for r in run.rects],
                "target": run.target,
                "initial_cursor": list(run.initial_cursor),
            }
            for run in spec.buttons
        ]
    elif spec.kind is TaskKind.ERASE:
        obj["polylines"] = [[list(p) for p in line] for line in spec.polylines]
        obj["eraser_radius"] = spec.eraser_radius
    else:
        obj["tracks"] = [
            {
                "direction": t.direction,
                "start": list(t.start),
                "end": list(t.end),
                "speed": t.speed,
                "radius": t.radius,
            }
            for t in spec.tracks
        ]
    return obj


def task_from_obj(obj: dict) -> TaskSpec:
    _expect_format(obj, TASK_FORMAT, "task")
    try:
        kind = TaskKind(obj["kind"])
        if kind is TaskKind.BUTTONS:
            runs = tuple(
                ButtonRun(
                    tuple(Rect(*map(float, r)) for r in run["rects"]),
                    int(run["target"]),
                    tuple(map(float, run["initial_cursor"])),
                )
                for run in obj["runs"]
            )
            return TaskSpec(kind, buttons=runs)
        if kind is TaskKind.ERASE:
            lines = tuple(tuple(tuple(map(float, p)) for p in line) for line in obj["polylines"])
            return TaskSpec(kind, polylines=lines, eraser_radius=float(obj["eraser_radius"]))
        tracks = tuple(
            Track(
                t["direction"],
                tuple(map(float, t["start"])),
                tuple(map(float, t["end"])),
                float(t["speed"]),
                float(t["radius"]),
            )
            for t in obj["tracks"]
        )
        return TaskSpec(kind, tracks=tracks)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(f"task: {e}") from e


def dump_task(spec: TaskSpec) -> str:
    return json.dumps(task_to_obj(spec), indent=2) + "\n"


def load_task(text: str) -> TaskSpec:
    return task_from_obj(json.loads(text))


# --- policy --------------------------------------------------------------


def policy_to_obj(policy: ControllerPolicy, tremor: TremorModel) -> dict:
    s = policy.strategy
    if isinstance(s, FixedPrecision):
        strategy = {"kind": "fixed", "h": s.h}
    else:
        strategy = {
            "kind": "two_phase",
            "h_coarse": s.h_coarse,
            "h_fine": s.h_fine,
            "switch_radius_px": s.switch_radius_px,
        }
    return {
        "format": POLICY_FORMAT,
        "approach_gain": policy.approach_gain,
        "correction_gain": policy.correction_gain,
        "strategy": strategy,
        "stop_radius_px": policy.stop_radius_px,
        "tremor": {"amplitude": tremor.amplitude, "band": list(tremor.band)},
    }


def policy_from_obj(obj: dict) -> tuple[ControllerPolicy, TremorModel]:
    _expect_format(obj, POLICY_FORMAT, "policy")
    try:
        s = obj["strategy"]
        if s["kind"] == "fixed":
            strategy = FixedPrecision(float(s["h"]))
        elif s["kind"] == "two_phase":
            strategy = TwoPhasePrecision(
                float(s["h_coarse"]), float(s["h_fine"]), float(s["switch_radius_px"])
            )
        else:
            raise FormatError(f"policy: unknown strategy kind {s['kind']!r}")
        policy = ControllerPolicy(
            approach_gain=float(obj["approach_gain"]),
            correction_gain=float(obj["correction_gain"]),
            strategy=strategy,
            stop_radius_px=float(obj["stop_radius_px"]),
        )
        tr = obj["tremor"]
        tremor = TremorModel(amplitude=float(tr["amplitude"]), band=tuple(tr["band"]))
        return policy, tremor
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(f"policy: {e}") from e


def dump_policy(policy: ControllerPolicy, tremor: TremorModel) -> str:
    return json.dumps(policy_to_obj(policy, tremor), indent=2) + "\n"


def load_policy(text: str) -> tuple[ControllerPolicy, TremorModel]:
    return policy_from_obj(json.loads(text))


# --- result --------------------------------------------------------------


def dump_result(result: TaskResult) -> str:
    obj = {
        "format": RESULT_FORMAT,
        "metric": result.metric,
        "units": result.units,
        "per_run": list(result.per_run),
        "aggregate": result.aggregate,
        "complete": result.complete,
    }
    return json.dumps(obj, indent=2) + "\n"


def load_result(text: str) -> TaskResult:
    obj = json.loads(text)
    _expect_format(obj, RESULT_FORMAT, "result")
    return TaskResult(
        metric=obj["metric"],
        units=obj["units"],
        per_run=tuple(obj["per_run"]),
        aggregate=obj["aggregate"],
        complete=obj["complete"],
    )


# --- sample streams --------------------------------------------------------


def dump_samples(samples: list[HandSample]) -> str:
    lines = [SAMPLES_HEADER]
    for s in samples:
        lines.append(
            " ".join(
                [
                    _f(s.t),
                    _f(s.hand.x),
                    _f(s.hand.y),
                    _f(s.hand.z),
                    _f(s.shoulder.x),
                    _f(s.shoulder.y),
                    _f(s.shoulder.z),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def load_samples(text: str) -> list[HandSample]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != SAMPLES_HEADER:
        raise FormatError(f"samples: missing header {SAMPLES_HEADER!r}")
    out = []
    prev_t = -math.inf
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 7:
            raise FormatError(f"samples line {i}: expected 7 fields, got {len(parts)}")
        try:
            vals = [float(p) for p in parts]
        except ValueError as e:
            raise FormatError(f"samples line {i}: {e}") from e
        if not all(math.isfinite(v) for v in vals):
            raise FormatError(f"samples line {i}: non-finite value")
        if vals[0] <= prev_t:
            raise FormatError(f"samples line {i}: non-monotonic timestamp {vals[0]}")
        prev_t = vals[0]
        hand, shoulder = Point3(*vals[1:4]), Point3(*vals[4:7])
        if (hand - shoulder).norm() <= 1e-6:
            raise FormatError(f"samples line {i}: hand coincides with shoulder")
        out.append(HandSample(vals[0], hand, shoulder))
    return out


# --- trajectory logs --------------------------------------------------------


def _frame_line(f: FrameOutput) -> str:
    fb = f.feedback
    rings = fb.rings
    fields = [
        "F",
        _f(f.t),
        _f(f.pointer[0]),
        _f(f.pointer[1]),
        "1" if f.frozen else "0",
        _f(f.h),
        _f(f.H),
        _f(f.uv[0]),
        _f(f.uv[1]),
        "1" if f.saturated else "0",
        _f(fb.circle_radius),
        "1" if fb.circle_clutching else "0",
        "1" if rings is not None else "0",
        _f(rings.pos_now[0]) if rings else "0",
        _f(rings.pos_now[1]) if rings else "0",
        _f(rings.pos_prev[0]) if rings else "0",
        _f(rings.pos_prev[1]) if rings else "0",
        _f(rings.thickness) if rings else "0",
        _f(fb.prediction_end[0]),
        _f(fb.prediction_end[1]),
    ]
    return " ".join(fields)


def _parse_frame(parts: list[str], lineno: int) -> FrameOutput:
    if len(parts) != 20:
        raise FormatError(f"log line {lineno}: expected 20 fields, got {len(parts)}")
    try:
        v = [float(p) for p in parts[1:]]
    except ValueError as e:
        raise FormatError(f"log line {lineno}: {e}") from e
    rings = None
    if parts[12] == "1":
        rings = RingPair((v[12], v[13]), (v[14], v[15]), v[16])
    fb = FeedbackState(
        circle_radius=v[9],
        circle_clutching=parts[11] == "1",
        rings=rings,
        prediction_end=(v[17], v[18]),
    )
    return FrameOutput(
        t=v[0],
        pointer=(v[1], v[2]),
        frozen=parts[4] == "1",
        h=v[4],
        H=v[5],
        uv=(v[6], v[7]),
        feedback=fb,
        saturated=parts[9] == "1",
    )


_MARKER_ORDER = {"run_start": 0, "select": 2, "timeout": 3, "run_end": 4}
_FRAME_ORDER = 1


def dump_log(log: TrajectoryLog) -> str:
    """Chronological, deterministic rendering of frames and markers."""
    head = f"{LOG_HEADER} {log.config_hash or '-'} {log.technique or '-'} {log.task_kind or '-'}"
    entries: list[tuple[float, int, int, str]] = []
    for i, f in enumerate(log.frames):
        entries.append((f.t, _FRAME_ORDER, i, _frame_line(f)))
    for i, m in enumerate(log.markers):
        line = f"!{m.kind} {_f(m.t)} {m.run}"
        if m.pos is not None:
            line += f" {_f(m.pos[0])} {_f(m.pos[1])}"
        entries.append((m.t, _MARKER_ORDER[m.kind], i, line))
    entries.sort(key=lambda e: (e[0], e[1], e[2]))
    return "\n".join([head] + [e[3] for e in entries]) + "\n"


def load_log(text: str) -> TrajectoryLog:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(LOG_HEADER + " "):
        raise FormatError(f"log: missing header {LOG_HEADER!r}")
    head = lines[0].split()
    if len(head) != 5:
        raise FormatError("log: header needs '<tag> <version> <config-hash> <technique> <task-kind>'")
    log = TrajectoryLog(
        config_hash="" if head[2] == "-" else head[2],
        technique="" if head[3] == "-" else head[3],
        task_kind="" if head[4] == "-" else head[4],
    )
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if parts[0] == "F":
            log.frames.append(_parse_frame(parts, i))
        elif parts[0].startswith("!"):
            kind = parts[0][1:]
            if kind not in _MARKER_ORDER:
                raise FormatError(f"log line {i}: unknown marker {kind!r}")
            try:
                t = float(parts[1])
                run = int(parts[2])
                pos = (float(parts[3]), float(parts[4])) if len(parts) == 5 else None
            except (IndexError, ValueError) as e:
                raise FormatError(f"log line {i}: {e}") from e
            log.markers.append(Marker(kind, t, run, pos))
        else:
            raise FormatError(f"log line {i}: unrecognized record {parts[0]!r}")
    return log


def quantize_log(log: TrajectoryLog) -> TrajectoryLog:
    """Round every numeric field to the file format's 9-digit lattice."""
    return load_log(dump_log(log))


# --- run manifests -----------------------------------------------------------


@dataclass(frozen=True)
class RunManifest:
    """Paths and seeds describing one simulation run."""

    config_path: str
    task_path: str
    policy_path: str
    seeds: tuple[int, ...]
    output_dir: str

    def load(self) -> tuple[TechniqueConfig, TaskSpec, ControllerPolicy, TremorModel]:
        cfg = load_config(_read(self.config_path, "config"))
        task = load_task(_read(self.task_path, "task"))
        policy, tremor = load_policy(_read(self.policy_path, "policy"))
        return cfg, task, policy, tremor


def _read(path: str, what: str) -> str:
    if not os.path.exists(path):
        raise FormatError(f"{what} file not found: {path}")
    with open(path) as fh:
        return fh.read()


def dump_manifest(m: RunManifest) -> str:
    obj = {
        "format": MANIFEST_FORMAT,
        "config": m.config_path,
        "task": m.task_path,
        "policy": m.policy_path,
        "seeds": list(m.seeds),
        "output_dir": m.output_dir,
    }
    return json.dumps(obj, indent=2) + "\n"


def load_manifest(path: str) -> RunManifest:
    obj = json.loads(_read(path, "manifest"))
    _expect_format(obj, MANIFEST_FORMAT, "manifest")
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base, p)

    try:
        m = RunManifest(
            config_path=resolve(obj["config"]),
            task_path=resolve(obj["task"]),
            policy_path=resolve(obj["policy"]),
            seeds=tuple(int(s) for s in obj["seeds"]),
            output_dir=resolve(obj["output_dir"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"manifest: {e}") from e
    if not m.seeds:
        raise FormatError("manifest: seeds must be non-empty")
    for p, what in [(m.config_path, "config"), (m.task_path, "task"), (m.policy_path, "policy")]:
        if not os.path.exists(p):
            raise FormatError(f"manifest references missing {what} file: {p}")
    return m
