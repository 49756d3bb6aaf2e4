"""Task definitions and trajectory metrics.

Four task kinds mirror the evaluation protocol: clicking a designated
button in a layout, erasing a drawn graph, intercepting a moving object,
and tracking a moving object. Metrics are pure functions of a trajectory
log and a task spec.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import FrameOutput


class IncompleteRun(ValueError):
    """A run is missing the event the metric is defined over."""


class TaskKind(enum.Enum):
    BUTTONS = "buttons"
    ERASE = "erase"
    HIT_MOVING = "hit_moving"
    TRACK_MOVING = "track_moving"


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle, top-left anchored, pixels."""

    x: float
    y: float
    w: float
    h: float

    def contains(self, p: tuple[float, float]) -> bool:
        return self.x <= p[0] <= self.x + self.w and self.y <= p[1] <= self.y + self.h

    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)


@dataclass(frozen=True)
class ButtonRun:
    """One button layout; rectangles may overlap, later entries draw on top."""

    rects: tuple[Rect, ...]
    target: int
    initial_cursor: tuple[float, float]

    def __post_init__(self) -> None:
        if not 0 <= self.target < len(self.rects):
            raise ValueError("target index out of range")


DIRECTIONS = ("UD", "DU", "LR", "RL")


@dataclass(frozen=True)
class Track:
    """Straight constant-speed object track."""

    direction: str
    start: tuple[float, float]
    end: tuple[float, float]
    speed: float
    radius: float

    def __post_init__(self) -> None:
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if self.speed <= 0 or self.radius <= 0:
            raise ValueError("speed and radius must be positive")
        if self.start == self.end:
            raise ValueError("track must have nonzero length")

    def length(self) -> float:
        return math.dist(self.start, self.end)

    def duration(self) -> float:
        return self.length() / self.speed

    def unit(self) -> tuple[float, float]:
        n = self.length()
        return ((self.end[0] - self.start[0]) / n, (self.end[1] - self.start[1]) / n)

    def position(self, dt: float) -> tuple[float, float]:
        """Object position dt seconds after the track start (clamped to ends)."""
        s = min(max(dt * self.speed, 0.0), self.length())
        ux, uy = self.unit()
        return (self.start[0] + ux * s, self.start[1] + uy * s)


@dataclass(frozen=True)
class TaskSpec:
    kind: TaskKind
    buttons: tuple[ButtonRun, ...] = ()
    polylines: tuple[tuple[tuple[float, float], ...], ...] = ()
    eraser_radius: float = 0.0
    tracks: tuple[Track, ...] = ()

    def __post_init__(self) -> None:
        if self.kind is TaskKind.BUTTONS and not self.buttons:
            raise ValueError("buttons task needs at least one run")
        if self.kind is TaskKind.ERASE:
            if not self.polylines or self.eraser_radius <= 0:
                raise ValueError("erase task needs polylines and a positive radius")
        if self.kind in (TaskKind.HIT_MOVING, TaskKind.TRACK_MOVING) and not self.tracks:
            raise ValueError("moving-object task needs at least one track")

    def run_count(self) -> int:
        if self.kind is TaskKind.BUTTONS:
            return len(self.buttons)
        if self.kind is TaskKind.ERASE:
            return 1
        return len(self.tracks)


@dataclass(frozen=True)
class Marker:
    """Event in a trajectory log: run boundary, selection attempt or timeout."""

    kind: str
    t: float
    run: int
    pos: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("run_start", "run_end", "select", "timeout"):
            raise ValueError(f"unknown marker kind {self.kind!r}")


@dataclass
class TrajectoryLog:
    config_hash: str
    technique: str
    task_kind: str = ""  # TaskKind value when produced under a task, else empty
    frames: list[FrameOutput] = field(default_factory=list)
    markers: list[Marker] = field(default_factory=list)

    def validate(self) -> None:
        for a, b in zip(self.frames, self.frames[1:]):
            if b.t <= a.t:
                raise ValueError(f"non-increasing frame timestamps at t={b.t}")
        open_run = None
        for m in self.markers:
            if m.kind == "run_start":
                if open_run is not None:
                    raise ValueError(f"run {m.run} starts inside run {open_run}")
                open_run = m.run
            elif m.kind == "run_end":
                if open_run != m.run:
                    raise ValueError(f"run {m.run} ends out of order")
                open_run = None

    def run_spans(self) -> list[tuple[int, float, float]]:
        """(run index, start t, end t) triples; an unclosed run ends at the last frame."""
        spans = []
        start = {}
        for m in self.markers:
            if m.kind == "run_start":
                start[m.run] = m.t
            elif m.kind == "run_end" and m.run in start:
                spans.append((m.run, start.pop(m.run), m.t))
        t_last = self.frames[-1].t if self.frames else 0.0
        for run, t0 in sorted(start.items()):
            spans.append((run, t0, t_last))
        return sorted(spans)

    def frames_between(self, t0: float, t1: float) -> list[FrameOutput]:
        return [f for f in self.frames if t0 <= f.t <= t1]

    def shifted(self, dt: float) -> "TrajectoryLog":
        """Copy with every timestamp moved by dt (metrics must not care)."""
        from dataclasses import replace

        return TrajectoryLog(
            config_hash=self.config_hash,
            technique=self.technique,
            task_kind=self.task_kind,
            frames=[replace(f, t=f.t + dt) for f in self.frames],
            markers=[Marker(m.kind, m.t + dt, m.run, m.pos) for m in self.markers],
        )


@dataclass(frozen=True)
class TaskResult:
    metric: str
    units: str
    per_run: tuple[float | None, ...]
    aggregate: float | None
    complete: bool


def _topmost_hit(run: ButtonRun, pos: tuple[float, float]) -> int | None:
    """Index of the topmost (last listed) rectangle under pos, if any."""
    hit = None
    for i, r in enumerate(run.rects):
        if r.contains(pos):
            hit = i
    return hit


def eval_task1(log: TrajectoryLog, spec: TaskSpec) -> TaskResult:
    """Total time: sum over runs of first valid hit minus run start, ms.

    A selection counts only when the designated button is the topmost
    rectangle under the pointer at the selection instant.
    """
    if spec.kind is not TaskKind.BUTTONS:
        raise ValueError("task spec is not a buttons task")
    spans = log.run_spans()
    per_run: list[float | None] = []
    for run_idx, t0, t1 in spans:
        if run_idx >= len(spec.buttons):
            raise IncompleteRun(f"log has run {run_idx} but spec has {len(spec.buttons)} runs")
        run = spec.buttons[run_idx]
        hit_t = None
        for m in log.markers:
            if m.kind != "select" or m.run != run_idx or m.pos is None:
                continue
            if _topmost_hit(run, m.pos) == run.target:
                hit_t = m.t
                break
        if hit_t is None:
            raise IncompleteRun(f"run {run_idx} has no hit on the designated target")
        per_run.append((hit_t - t0) * 1000.0)
    if len(per_run) < len(spec.buttons):
        raise IncompleteRun(f"log covers {len(per_run)} of {len(spec.buttons)} runs")
    return TaskResult("total_time", "ms", tuple(per_run), sum(per_run), True)


def _discretize(polyline, step: float = 1.0) -> np.ndarray:
    """Vertices along a polyline at most `step` pixels apart."""
    pts = [np.asarray(p, dtype=float) for p in polyline]
    out = [pts[0]]
    for a, b in zip(pts, pts[1:]):
        seg = np.linalg.norm(b - a)
        n = max(1, int(math.ceil(seg / step)))
        for i in range(1, n + 1):
            out.append(a + (b - a) * (i / n))
    return np.vstack(out)


def eval_task2(log: TrajectoryLog, spec: TaskSpec) -> TaskResult:
    """Time to erase the whole graph, ms; incomplete when vertices survive."""
    if spec.kind is not TaskKind.ERASE:
        raise ValueError("task spec is not an erase task")
    verts = np.vstack([_discretize(p) for p in spec.polylines])
    alive = np.ones(len(verts), dtype=bool)
    spans = log.run_spans()
    t0 = spans[0][1] if spans else (log.frames[0].t if log.frames else 0.0)
    r2 = spec.eraser_radius**2
    done_t = None
    for f in log.frames:
        if f.t < t0 or not alive.any():
            continue
        d2 = np.sum((verts[alive] - np.array(f.pointer)) ** 2, axis=1)
        if np.any(d2 <= r2):
            idx = np.flatnonzero(alive)
            alive[idx[d2 <= r2]] = False
            if not alive.any():
                done_t = f.t
                break
    if done_t is None:
        return TaskResult("completion_time", "ms", (None,), None, False)
    dt_ms = (done_t - t0) * 1000.0
    return TaskResult("completion_time", "ms", (dt_ms,), dt_ms, True)


def _track_distances(log: TrajectoryLog, track: Track, t0: float, t1: float, from_behind: bool):
    """(distances, durations) arrays for one track's frames.

    from_behind drops frames where the pointer sits ahead of the object
    along the track direction.
    """
    frames = log.frames_between(t0, t1)
    ux, uy = track.unit()
    dists = []
    durations = []
    for i, f in enumerate(frames):
        obj = track.position(f.t - t0)
        if from_behind:
            proj_ptr = (f.pointer[0] - track.start[0]) * ux + (f.pointer[1] - track.start[1]) * uy
            proj_obj = min(max((f.t - t0) * track.speed, 0.0), track.length())
            if proj_ptr > proj_obj:
                continue
        dists.append(math.dist(f.pointer, obj))
        if i + 1 < len(frames):
            durations.append(frames[i + 1].t - f.t)
        else:
            durations.append(0.0)
    return dists, durations


def eval_task3(log: TrajectoryLog, spec: TaskSpec) -> TaskResult:
    """Minimal pointer-object distance per track (behind-only), mean across tracks."""
    if spec.kind is not TaskKind.HIT_MOVING:
        raise ValueError("task spec is not a hit-moving task")
    per_run: list[float | None] = []
    for run_idx, t0, t1 in log.run_spans():
        if run_idx >= len(spec.tracks):
            raise ValueError(f"log has run {run_idx} but the task defines {len(spec.tracks)} tracks")
        track = spec.tracks[run_idx]
        dists, _ = _track_distances(log, track, t0, t1, from_behind=True)
        per_run.append(min(dists) if dists else None)
    complete = bool(per_run) and all(v is not None for v in per_run)
    agg = sum(per_run) / len(per_run) if complete else None
    return TaskResult("minimal_error", "px", tuple(per_run), agg, complete)


def eval_task4(log: TrajectoryLog, spec: TaskSpec) -> TaskResult:
    """Time-weighted mean pointer-object distance per track, mean across tracks."""
    if spec.kind is not TaskKind.TRACK_MOVING:
        raise ValueError("task spec is not a track-moving task")
    per_run: list[float | None] = []
    for run_idx, t0, t1 in log.run_spans():
        if run_idx >= len(spec.tracks):
            raise ValueError(f"log has run {run_idx} but the task defines {len(spec.tracks)} tracks")
        track = spec.tracks[run_idx]
        dists, durations = _track_distances(log, track, t0, t1, from_behind=False)
        total = sum(durations)
        if not dists or total <= 0:
            per_run.append(None)
            continue
        per_run.append(sum(d * w for d, w in zip(dists, durations)) / total)
    complete = bool(per_run) and all(v is not None for v in per_run)
    agg = sum(per_run) / len(per_run) if complete else None
    return TaskResult("average_error", "px", tuple(per_run), agg, complete)


def evaluate(log: TrajectoryLog, spec: TaskSpec) -> TaskResult:
    """Dispatch to the metric matching the task kind."""
    return {
        TaskKind.BUTTONS: eval_task1,
        TaskKind.ERASE: eval_task2,
        TaskKind.HIT_MOVING: eval_task3,
        TaskKind.TRACK_MOVING: eval_task4,
    }[spec.kind](log, spec)


def fitts_id(distance: float, width: float) -> float:
    """Index of difficulty, bits: log2(distance / width + 1)."""
    if width <= 0:
        raise ValueError("width must be positive")
    if distance < 0:
        raise ValueError("distance must be non-negative")
    return math.log2(distance / width + 1.0)


# --- default fixtures --------------------------------------------------------


def make_buttons_task(
    display_w: int = 3840,
    display_h: int = 1080,
    sizes=(160.0, 96.0, 48.0),
    with_overlap: bool = True,
) -> TaskSpec:
    """Grid button layouts of shrinking sizes, optionally one overlapped pair."""
    runs = []
    cursor = (display_w / 2.0, display_h / 2.0)
    positions = [0.2, 0.5, 0.8]
    for size in sizes:
        for fx in positions:
            rects = []
            for gy in range(2):
                for gx in range(3):
                    rects.append(
                        Rect(
                            display_w * fx - 1.5 * size + gx * (size + 10.0),
                            display_h * 0.3 + gy * (size + 10.0),
                            size,
                            size,
                        )
                    )
            runs.append(ButtonRun(tuple(rects), target=4, initial_cursor=cursor))
    if with_overlap:
        base = Rect(display_w * 0.5 - 100.0, display_h * 0.4, 200.0, 200.0)
        top = Rect(display_w * 0.5 - 40.0, display_h * 0.4 + 60.0, 80.0, 80.0)
        runs.append(ButtonRun((base, top), target=1, initial_cursor=cursor))
    return TaskSpec(TaskKind.BUTTONS, buttons=tuple(runs))


def make_erase_task(display_w: int = 3840, display_h: int = 1080, radius: float = 12.0) -> TaskSpec:
    """A small line-and-curve graph around the display center."""
    cx, cy = display_w / 2.0, display_h / 2.0
    curve = tuple(
        (cx + 300.0 * math.sin(2.0 * math.pi * i / 48), cy + 150.0 * math.sin(4.0 * math.pi * i / 48 + 1.0))
        for i in range(49)
    )
    lines = (
        ((cx - 350.0, cy - 180.0), (cx + 350.0, cy - 180.0)),
        ((cx - 350.0, cy + 180.0), (cx + 350.0, cy - 180.0)),
    )
    return TaskSpec(TaskKind.ERASE, polylines=(curve,) + lines, eraser_radius=radius)


def make_moving_task(
    kind: TaskKind,
    display_w: int = 3840,
    display_h: int = 1080,
    speed: float = 180.0,
    radius: float = 16.0,
) -> TaskSpec:
    """The four standard tracks: down, up, rightward, leftward."""
    if kind not in (TaskKind.HIT_MOVING, TaskKind.TRACK_MOVING):
        raise ValueError("kind must be a moving-object task")
    x_mid, y_lo, y_hi = display_w / 2.0, display_h * 0.25, display_h * 0.75
    y_mid, x_lo, x_hi = display_h / 2.0, display_w * 0.42, display_w * 0.58
    tracks = (
        Track("UD", (x_mid, y_lo), (x_mid, y_hi), speed, radius),
        Track("DU", (x_mid, y_hi), (x_mid, y_lo), speed, radius),
        Track("LR", (x_lo, y_mid), (x_hi, y_mid), speed, radius),
        Track("RL", (x_hi, y_mid), (x_lo, y_mid), speed, radius),
    )
    return TaskSpec(kind, tracks=tracks)
