"""Per-frame pointing state machine.

A PointerEngine consumes timestamped hand samples and emits one frame
output per sample: smoothing, precision lookup, projection, clutch or
rebase handling, pointer update and feedback geometry, in that order.
One engine instance is strictly sequential; independent instances are
safe to run concurrently.

Screen convention: pointer coordinates are continuous pixels with the
origin at the top-left of the display. The (u, v) pair in frame outputs
is the pointer's relative position inside the mapped area, measured from
the area's top-left corner, so raising the hand or pushing it forward
decreases v and moves the pointer toward the top of the screen.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field, replace

from .geometry import (
    CalibrationVolume,
    DegenerateSample,
    GimbalPole,
    HandSample,
    Point3,
    Stationary,
    c_value_hr,
    c_value_vr,
    normalize_radial,
    normalize_vertical,
    project_planar,
    project_spherical,
)
from .precision import (
    PrecisionScheme,
    SchemeKind,
    band_index,
    default_segmented,
    eval_scheme,
    hysteresis_band,
)


class NonMonotonicTimestamp(ValueError):
    """Sample timestamps must strictly increase within a stream."""


class Mapping(enum.Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"


class Adjustment(enum.Enum):
    VERTICAL = "vertical"
    HORIZONTAL = "horizontal"


@dataclass(frozen=True)
class DisplayGeometry:
    width: int = 3840
    height: int = 1080

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("display must be at least 1x1 px")


@dataclass(frozen=True)
class ClutchParams:
    """Freeze detection over a sliding window of N sample pairs."""

    window_n: int = 8
    tau: float = math.pi / 6
    min_pairs: int = 1

    def __post_init__(self) -> None:
        if self.min_pairs < 1 or self.window_n < self.min_pairs:
            raise ValueError("need window_n >= min_pairs >= 1")


@dataclass(frozen=True)
class MappedArea:
    """Display region the hand range currently maps onto (absolute only)."""

    origin: tuple[float, float]
    size: tuple[float, float]

    def __post_init__(self) -> None:
        if self.size[0] <= 0 or self.size[1] <= 0:
            raise ValueError("area size must be positive")

    def at(self, uv: tuple[float, float]) -> tuple[float, float]:
        return (self.origin[0] + uv[0] * self.size[0], self.origin[1] + uv[1] * self.size[1])

    def contains(self, p: tuple[float, float], slack: float = 1e-9) -> bool:
        return (
            self.origin[0] - slack <= p[0] <= self.origin[0] + self.size[0] + slack
            and self.origin[1] - slack <= p[1] <= self.origin[1] + self.size[1] + slack
        )


@dataclass(frozen=True)
class RingPair:
    pos_now: tuple[float, float]
    pos_prev: tuple[float, float]
    thickness: float


@dataclass(frozen=True)
class FeedbackState:
    circle_radius: float
    circle_clutching: bool
    rings: RingPair | None
    prediction_end: tuple[float, float]


@dataclass(frozen=True)
class FrameOutput:
    t: float
    pointer: tuple[float, float]
    frozen: bool
    h: float
    H: float
    uv: tuple[float, float]
    feedback: FeedbackState
    saturated: bool


def default_volume() -> CalibrationVolume:
    """Ergonomic defaults for a standing user in front of the display."""
    return CalibrationVolume(
        vertical_range=(0.8, 1.7),
        radial_range=(0.15, 0.65),
        planar_bounds=((-0.4, 0.4), (0.2, 0.8)),
        angular_bounds=((-math.pi / 3, math.pi / 3), (-math.pi / 6, math.pi / 4)),
    )


@dataclass(frozen=True)
class TechniqueConfig:
    """One cell of the mapping x adjustment matrix plus its tuning."""

    mapping: Mapping
    adjustment: Adjustment
    scheme: PrecisionScheme = field(default_factory=default_segmented)
    volume: CalibrationVolume = field(default_factory=default_volume)
    display: DisplayGeometry = field(default_factory=DisplayGeometry)
    clutch: ClutchParams = field(default_factory=ClutchParams)
    gain_base: float = 2000.0
    smoothing_alpha: float = 0.5
    prediction_lead: float = 1.0
    speed_threshold: float = 400.0
    circle_radius_base: float = 40.0
    ring_thickness_per_speed: float = 0.01
    hysteresis_margin: float = 0.02
    clutch_inequality: str = "below"
    name: str = ""

    def __post_init__(self) -> None:
        if self.gain_base <= 0:
            raise ValueError("gain_base must be positive")
        if not 0 < self.smoothing_alpha <= 1:
            raise ValueError("smoothing_alpha must be in (0, 1]")
        if self.speed_threshold < 0 or self.prediction_lead < 0:
            raise ValueError("speed_threshold and prediction_lead must be >= 0")
        if self.clutch_inequality not in ("below", "above"):
            raise ValueError("clutch_inequality must be 'below' or 'above'")


TECHNIQUES = {
    "VA": (Mapping.ABSOLUTE, Adjustment.VERTICAL),
    "VR": (Mapping.RELATIVE, Adjustment.VERTICAL),
    "HA": (Mapping.ABSOLUTE, Adjustment.HORIZONTAL),
    "HR": (Mapping.RELATIVE, Adjustment.HORIZONTAL),
}


def default_config(technique: str, **overrides) -> TechniqueConfig:
    """Build a TechniqueConfig for one of VA, VR, HA, HR."""
    key = technique.upper()
    if key not in TECHNIQUES:
        raise ValueError(f"unknown technique {technique!r}, expected one of {sorted(TECHNIQUES)}")
    mapping, adjustment = TECHNIQUES[key]
    overrides.setdefault("name", key)
    return TechniqueConfig(mapping=mapping, adjustment=adjustment, **overrides)


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else (hi if v > hi else v)


def _clamp_origin(origin: tuple[float, float], size: tuple[float, float], display: DisplayGeometry) -> tuple[float, float]:
    # Areas larger than the display (H < 1) clamp to cover it instead.
    def axis(o: float, s: float, d: float) -> float:
        if s <= d:
            return _clamp(o, 0.0, d - s)
        return _clamp(o, d - s, 0.0)

    return (axis(origin[0], size[0], display.width), axis(origin[1], size[1], display.height))


def rebase_absolute(
    area: MappedArea,
    uv: tuple[float, float],
    pointer: tuple[float, float],
    h_new: float,
    display: DisplayGeometry,
) -> MappedArea:
    """Resize the mapped area for a new precision, keeping the pointer put.

    The new origin solves origin + uv * size = pointer, so the pointer's
    relative position inside the area is preserved across the precision
    change. The origin is then clamped so the area stays on the display;
    when clamping engages the caller must recompute the pointer from the
    returned area (it stays inside by construction).
    """
    size = (display.width / h_new, display.height / h_new)
    origin = (pointer[0] - uv[0] * size[0], pointer[1] - uv[1] * size[1])
    return MappedArea(_clamp_origin(origin, size, display), size)


def apply_relative(
    pointer: tuple[float, float],
    d_uv: tuple[float, float],
    h_value: float,
    gain_base: float,
    frozen: bool,
    display: DisplayGeometry,
) -> tuple[float, float]:
    """Displace the pointer by a normalized hand delta under a linear gain.

    Frozen frames leave the pointer untouched, exactly. Precision divides
    the gain: doubling H halves the displacement.
    """
    if frozen:
        return pointer
    x = _clamp(pointer[0] + d_uv[0] * gain_base / h_value, 0.0, float(display.width))
    y = _clamp(pointer[1] + d_uv[1] * gain_base / h_value, 0.0, float(display.height))
    return (x, y)


def detect_clutch(
    window,
    params: ClutchParams,
    adjustment: Adjustment,
    previous: bool,
    inequality: str = "below",
) -> bool:
    """Average the pair angles over the window and decide whether to freeze.

    window is the last N+1 smoothed samples, oldest first. Pairs too close
    to carry an angle are skipped; with fewer than min_pairs usable pairs
    the previous decision stands. The default freezes on small average
    angles (motion aligned with the precision axis); inequality='above'
    keeps the opposite reading available.
    """
    thetas = []
    for a, b in zip(window, list(window)[1:]):
        try:
            if adjustment is Adjustment.HORIZONTAL:
                trace = c_value_hr(a.hand, b.hand, b.shoulder)
            else:
                trace = c_value_vr(a.hand, b.hand)
        except Stationary:
            continue
        thetas.append(trace.theta)
    if len(thetas) < params.min_pairs:
        return previous
    avg = sum(thetas) / len(thetas)
    return avg < params.tau if inequality == "below" else avg > params.tau


def compute_feedback(
    prev: FrameOutput | None,
    t: float,
    pointer: tuple[float, float],
    frozen: bool,
    h_value: float,
    cfg: TechniqueConfig,
) -> FeedbackState:
    """Precision circle, speed rings and prediction line for one frame."""
    radius = cfg.circle_radius_base * h_value / cfg.scheme.h_max()
    if prev is None:
        return FeedbackState(radius, frozen, None, pointer)
    dt = t - prev.t
    dx = pointer[0] - prev.pointer[0]
    dy = pointer[1] - prev.pointer[1]
    speed = math.hypot(dx, dy) / dt if dt > 0 else 0.0
    rings = None
    if speed > cfg.speed_threshold:
        rings = RingPair(pointer, prev.pointer, cfg.ring_thickness_per_speed * speed)
    prediction = (pointer[0] + cfg.prediction_lead * dx, pointer[1] + cfg.prediction_lead * dy)
    return FeedbackState(radius, frozen, rings, prediction)


class PointerEngine:
    """Sequential state machine mapping hand samples to pointer frames.

    step() must be called with strictly increasing timestamps. Degenerate
    samples (hand on the shoulder, or at the spherical pole with no prior
    frame) skip the frame and repeat the previous output at the new time.
    """

    def __init__(self, cfg: TechniqueConfig) -> None:
        self.cfg = cfg
        self.reset()

    def reset(self) -> None:
        self._smoothed: Point3 | None = None
        self._window: deque[HandSample] = deque(maxlen=self.cfg.clutch.window_n + 1)
        self._band: int | None = None
        self._h_value: float | None = None
        self._uv: tuple[float, float] | None = None
        self._uv_geom: tuple[float, float] | None = None
        self._frozen = False
        self._area: MappedArea | None = None
        self._pointer: tuple[float, float] | None = None
        self._last: FrameOutput | None = None

    @property
    def area(self) -> MappedArea | None:
        return self._area

    @property
    def last_output(self) -> FrameOutput | None:
        return self._last

    def step(self, sample: HandSample) -> FrameOutput:
        cfg = self.cfg
        if self._last is not None and sample.t <= self._last.t:
            raise NonMonotonicTimestamp(f"t={sample.t} after t={self._last.t}")
        if not (sample.hand.is_finite() and sample.shoulder.is_finite()):
            raise ValueError("non-finite sample coordinates")

        # 1. exponential smoothing of the hand position (alpha = 1 disables)
        a = cfg.smoothing_alpha
        if self._smoothed is None:
            smoothed = sample.hand
        else:
            p = self._smoothed
            smoothed = Point3(
                a * sample.hand.x + (1 - a) * p.x,
                a * sample.hand.y + (1 - a) * p.y,
                a * sample.hand.z + (1 - a) * p.z,
            )
        sm = HandSample(sample.t, smoothed, sample.shoulder)

        # 2-4. precision coordinate, precision value, pointing coordinates
        try:
            h, uv_geom, saturated = self._normalize(sm)
        except DegenerateSample:
            if self._last is None:
                raise
            out = replace(self._last, t=sample.t)
            self._last = out
            return out
        self._smoothed = smoothed
        self._uv_geom = uv_geom

        h_value, band = self._precision(h)
        uv = (uv_geom[0], 1.0 - uv_geom[1])

        # 5-6. clutch or rebase, then the pointer update
        if cfg.mapping is Mapping.RELATIVE:
            self._window.append(sm)
            frozen = detect_clutch(
                self._window, cfg.clutch, cfg.adjustment, self._frozen, cfg.clutch_inequality
            )
            prev_uv = self._uv if self._uv is not None else uv
            d_uv = (uv[0] - prev_uv[0], uv[1] - prev_uv[1])
            pointer = self._pointer
            if pointer is None:
                pointer = (cfg.display.width / 2.0, cfg.display.height / 2.0)
            pointer = apply_relative(pointer, d_uv, h_value, cfg.gain_base, frozen, cfg.display)
        else:
            frozen = False
            pointer = self._absolute_pointer(uv, h_value)

        feedback = compute_feedback(self._last, sample.t, pointer, frozen, h_value, cfg)
        out = FrameOutput(
            t=sample.t,
            pointer=pointer,
            frozen=frozen,
            h=h,
            H=h_value,
            uv=uv,
            feedback=feedback,
            saturated=saturated,
        )
        self._band = band
        self._h_value = h_value
        self._uv = uv
        self._frozen = frozen
        self._pointer = pointer
        self._last = out
        return out

    def _normalize(self, sm: HandSample) -> tuple[float, tuple[float, float], bool]:
        cfg = self.cfg
        if cfg.adjustment is Adjustment.VERTICAL:
            h, sat_h = normalize_vertical(sm, cfg.volume)
            uv_geom, sat_uv = project_planar(sm, cfg.volume)
        else:
            h, sat_h = normalize_radial(sm, cfg.volume)
            try:
                uv_geom, sat_uv = project_spherical(sm, cfg.volume)
            except GimbalPole:
                if self._uv_geom is None:
                    raise DegenerateSample("spherical pole on first frame")
                uv_geom, sat_uv = self._uv_geom, True
        return h, uv_geom, sat_h or sat_uv

    def _precision(self, h: float) -> tuple[float, int | None]:
        scheme = self.cfg.scheme
        if scheme.kind is SchemeKind.SEGMENTED:
            if self._band is None:
                band = band_index(scheme, h)
            else:
                band = hysteresis_band(scheme, h, self._band, self.cfg.hysteresis_margin)
            return scheme.knots[band][1], band
        return eval_scheme(scheme, h).H, None

    def _absolute_pointer(self, uv: tuple[float, float], h_value: float) -> tuple[float, float]:
        cfg = self.cfg
        if self._area is None:
            size = (cfg.display.width / h_value, cfg.display.height / h_value)
            origin = ((cfg.display.width - size[0]) / 2.0, (cfg.display.height - size[1]) / 2.0)
            self._area = MappedArea(_clamp_origin(origin, size, cfg.display), size)
            pointer = self._area.at(uv)
        elif self._h_value is not None and h_value != self._h_value:
            # Precision changed: re-anchor the area around the previous
            # pointer at its previous in-area position, then move by the
            # pointing component only. Pure precision-axis motion leaves
            # the pointer exactly in place.
            prev_uv = self._uv if self._uv is not None else uv
            prev_pointer = self._pointer if self._pointer is not None else self._area.at(prev_uv)
            size = (cfg.display.width / h_value, cfg.display.height / h_value)
            raw_origin = (prev_pointer[0] - prev_uv[0] * size[0], prev_pointer[1] - prev_uv[1] * size[1])
            clamped = _clamp_origin(raw_origin, size, cfg.display)
            self._area = MappedArea(clamped, size)
            if clamped == raw_origin:
                pointer = (
                    prev_pointer[0] + (uv[0] - prev_uv[0]) * size[0],
                    prev_pointer[1] + (uv[1] - prev_uv[1]) * size[1],
                )
            else:
                pointer = self._area.at(uv)
        else:
            pointer = self._area.at(uv)
        return (
            _clamp(pointer[0], 0.0, float(cfg.display.width)),
            _clamp(pointer[1], 0.0, float(cfg.display.height)),
        )
