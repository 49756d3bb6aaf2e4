"""Synthetic hand trajectories: open-loop movement primitives and a
closed-loop scripted controller that drives the engine through the tasks.

Everything here is deterministic given the seeds, so paired comparisons
between techniques see identical tremor.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import Adjustment, Mapping, PointerEngine, TechniqueConfig
from .geometry import HandSample, Point3
from .tasks import Marker, TaskKind, TaskSpec, TrajectoryLog

DEFAULT_FRAME_RATE = 60.0
HAND_SPEED_LIMIT = 2.0  # m/s, brisk arm speed cap
PRECISION_RATE = 0.05  # max h change per frame
DWELL_SELECT_S = 0.25  # pointer must hold inside a button this long
RAIL_MARGIN = 0.06  # uv distance to the calibrated edge that triggers a clutch


class PrimitiveKind(enum.Enum):
    MIN_JERK = "min_jerk"
    HOLD = "hold"
    RADIAL_SHIFT = "radial_shift"
    VERTICAL_SHIFT = "vertical_shift"


@dataclass(frozen=True)
class MotionPrimitive:
    kind: PrimitiveKind
    start: Point3
    end: Point3
    duration: float
    sample_rate: float = DEFAULT_FRAME_RATE
    shoulder: Point3 = Point3(0.0, 1.4, 0.0)

    def __post_init__(self) -> None:
        if self.duration <= 0 or self.sample_rate <= 0:
            raise ValueError("duration and sample_rate must be positive")
        if self.kind is PrimitiveKind.VERTICAL_SHIFT:
            if self.start.x != self.end.x or self.start.z != self.end.z:
                raise ValueError("vertical shift may only change y")
        if self.kind is PrimitiveKind.RADIAL_SHIFT:
            a = self.start - self.shoulder
            b = self.end - self.shoulder
            cross = (
                a.y * b.z - a.z * b.y,
                a.z * b.x - a.x * b.z,
                a.x * b.y - a.y * b.x,
            )
            if math.sqrt(sum(c * c for c in cross)) > 1e-9 * a.norm() * b.norm():
                raise ValueError("radial shift must stay on one shoulder ray")


def min_jerk_profile(tau: float) -> float:
    """Normalized minimum-jerk position: 10 t^3 - 15 t^4 + 6 t^5."""
    return tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau)


def gen_primitive(p: MotionPrimitive, t0: float = 0.0) -> list[HandSample]:
    """Sample the primitive, including both endpoints, starting at t0."""
    n = max(1, int(round(p.duration * p.sample_rate)))
    out = []
    for i in range(n + 1):
        tau = i / n
        if p.kind is PrimitiveKind.HOLD:
            pos = p.start
        else:
            s = min_jerk_profile(tau)
            d = p.end - p.start
            pos = p.start + d.scaled(s)
        out.append(HandSample(t0 + p.duration * tau, pos, p.shoulder))
    return out


def chain_primitives(primitives, t0: float = 0.0) -> list[HandSample]:
    """Concatenate primitives, dropping each duplicated boundary sample."""
    samples: list[HandSample] = []
    t = t0
    for p in primitives:
        seg = gen_primitive(p, t)
        samples.extend(seg if not samples else seg[1:])
        t = seg[-1].t
    return samples


@dataclass(frozen=True)
class TremorModel:
    """Band-limited physiological tremor, reproducible from the seed."""

    amplitude: float = 0.002
    band: tuple[float, float] = (8.0, 12.0)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.band[0] <= 0 or self.band[1] <= self.band[0]:
            raise ValueError("band must be (lo, hi) with 0 < lo < hi")


def tremor_noise(model: TremorModel, n: int, rate: float) -> np.ndarray:
    """(n, 3) array of band-limited noise scaled to the configured RMS.

    RMS is measured on the 3D displacement magnitude over the generated
    block. Zero amplitude returns zeros.
    """
    if model.amplitude == 0.0 or n == 0:
        return np.zeros((n, 3))
    rng = np.random.default_rng(model.seed)
    white = rng.standard_normal((n, 3))
    freqs = np.fft.rfftfreq(n, d=1.0 / rate)
    lo, hi = model.band
    nyquist = rate / 2.0
    if lo >= nyquist:  # band not representable at this rate; keep the top octave
        lo, hi = nyquist / 2.0, nyquist
    mask = (freqs >= lo) & (freqs <= min(hi, nyquist))
    if not mask.any():
        mask[-1] = True
    spec = np.fft.rfft(white, axis=0)
    spec[~mask] = 0.0
    noise = np.fft.irfft(spec, n=n, axis=0)
    rms = math.sqrt(float(np.mean(np.sum(noise**2, axis=1))))
    if rms > 0:
        noise *= model.amplitude / rms
    return noise


def add_tremor(samples: list[HandSample], model: TremorModel) -> list[HandSample]:
    """Add seeded tremor to the hand positions; shoulders stay clean."""
    if not samples:
        return []
    if len(samples) > 1:
        rate = (len(samples) - 1) / (samples[-1].t - samples[0].t)
    else:
        rate = DEFAULT_FRAME_RATE
    noise = tremor_noise(model, len(samples), rate)
    out = []
    for s, (nx, ny, nz) in zip(samples, noise):
        hand = Point3(s.hand.x + nx, s.hand.y + ny, s.hand.z + nz)
        out.append(HandSample(s.t, hand, s.shoulder))
    return out


@dataclass(frozen=True)
class FixedPrecision:
    h: float

    def __post_init__(self) -> None:
        if not 0 <= self.h <= 1:
            raise ValueError("h must be in [0, 1]")


@dataclass(frozen=True)
class TwoPhasePrecision:
    """Coarse far from the target, fine once within switch_radius_px."""

    h_coarse: float
    h_fine: float
    switch_radius_px: float

    def __post_init__(self) -> None:
        for h in (self.h_coarse, self.h_fine):
            if not 0 <= h <= 1:
                raise ValueError("h values must be in [0, 1]")
        if self.switch_radius_px <= 0:
            raise ValueError("switch radius must be positive")


@dataclass(frozen=True)
class ControllerPolicy:
    approach_gain: float = 0.45
    correction_gain: float = 0.3
    strategy: FixedPrecision | TwoPhasePrecision = field(default_factory=lambda: FixedPrecision(0.1))
    stop_radius_px: float = 2.0

    def __post_init__(self) -> None:
        if isinstance(self.strategy, TwoPhasePrecision):
            if self.strategy.switch_radius_px <= self.stop_radius_px:
                raise ValueError("switch radius must exceed stop radius")


class _HandRig:
    """Parameterized hand pose: two pointing coordinates plus the precision
    coordinate, converted to a 3D position per technique."""

    def __init__(self, cfg: TechniqueConfig, shoulder: Point3) -> None:
        self.cfg = cfg
        self.shoulder = shoulder
        self.u = 0.5  # screen-u of the hand within the calibrated range
        self.v = 0.5  # screen-v (top-down), flipped into geometry space
        self.h = 0.0

    def position(self) -> Point3:
        vol = self.cfg.volume
        v_geom = 1.0 - self.v
        if self.cfg.adjustment is Adjustment.VERTICAL:
            (x_lo, x_hi), (z_lo, z_hi) = vol.planar_bounds
            y_lo, y_hi = vol.vertical_range
            return Point3(
                x_lo + self.u * (x_hi - x_lo),
                y_lo + self.h * (y_hi - y_lo),
                z_lo + v_geom * (z_hi - z_lo),
            )
        (az_lo, az_hi), (el_lo, el_hi) = vol.angular_bounds
        r_lo, r_hi = vol.radial_range
        az = az_lo + self.u * (az_hi - az_lo)
        el = el_lo + v_geom * (el_hi - el_lo)
        r = r_lo + self.h * (r_hi - r_lo)
        return Point3(
            self.shoulder.x + r * math.cos(el) * math.sin(az),
            self.shoulder.y + r * math.sin(el),
            self.shoulder.z + r * math.cos(el) * math.cos(az),
        )

    def pointing_extent(self) -> tuple[float, float]:
        """Rough meters spanned by the full u and v ranges (speed limiting)."""
        vol = self.cfg.volume
        if self.cfg.adjustment is Adjustment.VERTICAL:
            (x_lo, x_hi), (z_lo, z_hi) = vol.planar_bounds
            return (x_hi - x_lo, z_hi - z_lo)
        (az_lo, az_hi), (el_lo, el_hi) = vol.angular_bounds
        r = sum(vol.radial_range) / 2.0
        return (r * (az_hi - az_lo), r * (el_hi - el_lo))

    def move(self, du: float, dv: float, dh: float) -> None:
        self.u = min(1.0, max(0.0, self.u + du))
        self.v = min(1.0, max(0.0, self.v + dv))
        self.h = min(1.0, max(0.0, self.h + dh))

    def set(self, u: float, v: float, h: float) -> None:
        self.u, self.v, self.h = u, v, h


def _ramp(a: float, b: float, step: float) -> list[float]:
    """Values from a to b (exclusive of a, inclusive of b) at most step apart."""
    n = max(1, int(math.ceil(abs(b - a) / step)))
    return [a + (b - a) * (i + 1) / n for i in range(n)]


def _clutch_plan_radial(rig: _HandRig, h_restore: float) -> list[tuple[float, float, float]]:
    """Flex in along the current ray, snap to the centered ray at minimum
    reach, stretch back out: every sample pair is radial except the single
    direction change, so the engine keeps the pointer frozen throughout."""
    plan = [(rig.u, rig.v, h) for h in _ramp(rig.h, 0.0, PRECISION_RATE)]
    plan.append((0.5, 0.5, 0.0))
    plan += [(0.5, 0.5, h) for h in _ramp(0.0, h_restore, PRECISION_RATE)]
    return plan


def _clutch_plan_vertical(rig: _HandRig, h_restore: float) -> list[tuple[float, float, float]]:
    """Mostly-vertical strokes that drift the hand back to the plane center,
    like lifting a mouse: the per-pair angle to the vertical stays well under
    the freeze threshold while the planar position re-centers."""
    vol = rig.cfg.volume
    y_range = vol.vertical_range[1] - vol.vertical_range[0]
    (x_lo, x_hi), (z_lo, z_hi) = vol.planar_bounds
    # drift budget per frame keeps each pair at atan(0.4) < pi/6 off vertical
    dy = PRECISION_RATE * y_range
    du_max = 0.4 * dy / (x_hi - x_lo)
    dv_max = 0.4 * dy / (z_hi - z_lo)
    plan: list[tuple[float, float, float]] = []
    u, v, h = rig.u, rig.v, rig.h
    descending = h > 0.5
    for _ in range(400):  # bounded; re-centering takes ~25 frames
        if u == 0.5 and v == 0.5:
            break
        if descending:
            h = max(0.0, h - PRECISION_RATE)
            if h == 0.0:
                descending = False
        else:
            h = min(1.0, h + PRECISION_RATE)
            if h == 1.0:
                descending = True
        u += min(du_max, max(-du_max, 0.5 - u))
        v += min(dv_max, max(-dv_max, 0.5 - v))
        plan.append((u, v, h))
    plan += [(0.5, 0.5, hh) for hh in _ramp(h, h_restore, PRECISION_RATE)]
    return plan


def _px_per_uv(cfg: TechniqueConfig, engine: PointerEngine, h_value: float) -> tuple[float, float]:
    if cfg.mapping is Mapping.ABSOLUTE:
        if engine.area is not None:
            return engine.area.size
        return (cfg.display.width / h_value, cfg.display.height / h_value)
    return (cfg.gain_base / h_value, cfg.gain_base / h_value)


def _pointer_jitter_px(cfg, amplitude, sx, sy, ext_u, ext_v):
    """Tremor amplitude mapped to on-screen pixels at the current scale.

    Corrections below this floor are futile: the controller attenuates its
    gain near it, the way a person stops chasing errors smaller than the
    jitter they can see.
    """
    axis = amplitude / math.sqrt(3.0)
    smooth = math.sqrt(cfg.smoothing_alpha / (2.0 - cfg.smoothing_alpha))
    return math.hypot(axis * smooth / ext_u * sx, axis * smooth / ext_v * sy)


def run_controller(
    task: TaskSpec,
    cfg: TechniqueConfig,
    policy: ControllerPolicy,
    tremor: TremorModel,
    frame_rate: float = DEFAULT_FRAME_RATE,
    timeout_s: float = 30.0,
    config_hash: str = "",
) -> TrajectoryLog:
    """Steer the engine through a task with proportional corrections.

    Each frame the controller reads the engine's pointer, aims at the
    current target, sets the precision coordinate per the policy and emits
    the next hand sample (with tremor). Timeouts are recorded as markers,
    never raised.
    """
    if task.kind is TaskKind.ERASE:
        raise ValueError("erase task is not supported by the scripted controller")
    engine = PointerEngine(cfg)
    shoulder = Point3(0.0, 1.4, 0.0)
    rig = _HandRig(cfg, shoulder)
    if isinstance(policy.strategy, FixedPrecision):
        rig.h = policy.strategy.h
    else:
        rig.h = policy.strategy.h_coarse

    max_frames = int(timeout_s * frame_rate) * task.run_count() + task.run_count()
    noise = tremor_noise(tremor, max_frames + 1, frame_rate)
    log = TrajectoryLog(
        config_hash=config_hash, technique=cfg.name or "custom", task_kind=task.kind.value
    )

    dt = 1.0 / frame_rate
    t = 0.0
    frame_idx = 0
    ext_u, ext_v = rig.pointing_extent()
    max_du = HAND_SPEED_LIMIT * dt / ext_u
    max_dv = HAND_SPEED_LIMIT * dt / ext_v

    clutch_plan: list[tuple[float, float, float]] = []
    for run_idx in range(task.run_count()):
        log.markers.append(Marker("run_start", t, run_idx))
        run_t0 = t
        dwell = 0
        done = False
        timed_out = False
        track = task.tracks[run_idx] if task.tracks else None
        while not done:
            raw = rig.position()
            n = noise[frame_idx]
            hand = Point3(raw.x + n[0], raw.y + n[1], raw.z + n[2])
            out = engine.step(HandSample(t, hand, shoulder))
            log.frames.append(out)

            elapsed = t - run_t0
            vel = (0.0, 0.0)  # target velocity, px per frame
            if task.kind is TaskKind.BUTTONS:
                run = task.buttons[run_idx]
                target_rect = run.rects[run.target]
                target = target_rect.center()
                if target_rect.contains(out.pointer):
                    dwell += 1
                    if dwell >= int(DWELL_SELECT_S * frame_rate):
                        log.markers.append(Marker("select", t, run_idx, out.pointer))
                        done = True
                else:
                    dwell = 0
            else:
                target = track.position(elapsed)
                if elapsed < track.duration():
                    ux, uy = track.unit()
                    vel = (ux * track.speed * dt, uy * track.speed * dt)
                else:
                    done = True

            if not done and elapsed >= timeout_s:
                timed_out = True
                done = True

            err = (target[0] - out.pointer[0], target[1] - out.pointer[1])
            err_norm = math.hypot(*err)
            if isinstance(policy.strategy, TwoPhasePrecision):
                s = policy.strategy
                h_target = s.h_fine if err_norm <= s.switch_radius_px else s.h_coarse
                near = err_norm <= s.switch_radius_px
            else:
                h_target = policy.strategy.h
                near = err_norm <= 4.0 * policy.stop_radius_px
            gain = policy.correction_gain if near else policy.approach_gain
            sx, sy = _px_per_uv(cfg, engine, out.H)
            floor = 2.0 * _pointer_jitter_px(cfg, tremor.amplitude, sx, sy, ext_u, ext_v)
            gain *= err_norm**2 / (err_norm**2 + floor**2) if floor > 0 else 1.0
            # velocity matching plus a proportional correction: zero lag on
            # constant-velocity targets, no lead bias on static ones
            du = min(max_du, max(-max_du, (vel[0] + gain * err[0]) / sx))
            dv = min(max_dv, max(-max_dv, (vel[1] + gain * err[1]) / sy))

            if clutch_plan:
                rig.set(*clutch_plan.pop(0))
            elif cfg.mapping is Mapping.RELATIVE and _railed(rig, du, dv):
                # hand ran out of calibrated range: re-center while frozen
                if cfg.adjustment is Adjustment.HORIZONTAL:
                    clutch_plan = _clutch_plan_radial(rig, h_target)
                else:
                    clutch_plan = _clutch_plan_vertical(rig, h_target)
                rig.set(*clutch_plan.pop(0))
            else:
                dh = min(PRECISION_RATE, max(-PRECISION_RATE, h_target - rig.h))
                rig.move(du, dv, dh)

            t += dt
            frame_idx += 1

        if timed_out:
            log.markers.append(Marker("timeout", log.frames[-1].t, run_idx))
        log.markers.append(Marker("run_end", log.frames[-1].t, run_idx))
        t = log.frames[-1].t + dt

    log.validate()
    return log


def _railed(rig: _HandRig, du: float, dv: float) -> bool:
    """True when the commanded step pushes into a calibrated-range edge."""
    return (
        (rig.u <= RAIL_MARGIN and du < 0)
        or (rig.u >= 1.0 - RAIL_MARGIN and du > 0)
        or (rig.v <= RAIL_MARGIN and dv < 0)
        or (rig.v >= 1.0 - RAIL_MARGIN and dv > 0)
    )
