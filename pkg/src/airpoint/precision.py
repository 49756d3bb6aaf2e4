"""Precision schemes: the mapping from normalized hand position h to the
precision parameter H.

Three scheme kinds are supported. Segmented holds H constant on bands of
h, linear interpolates between two knots, and the nonlinear kind runs a
monotone piecewise-cubic (Fritsch-Carlson) interpolant through three or
more knots. Larger H always means finer pointer motion.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

DEFAULT_HYSTERESIS_MARGIN = 0.02


class InvalidScheme(ValueError):
    """Scheme knots violate the construction invariants."""


class WrongSchemeKind(TypeError):
    """Operation applies to a different scheme kind."""


class SchemeKind(enum.Enum):
    SEGMENTED = "segmented"
    LINEAR = "linear"
    NONLINEAR = "nonlinear"


@dataclass(frozen=True)
class PrecisionValue:
    H: float
    band_index: int | None = None


@dataclass(frozen=True)
class PrecisionScheme:
    """Immutable h -> H mapping.

    knots holds (h, H) pairs. For the segmented kind each knot is the
    left edge of a band (the first edge must be 0); for the other kinds
    knots are interpolation points.
    """

    kind: SchemeKind
    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.knots) < 1:
            raise InvalidScheme("scheme needs at least one knot")
        hs = [h for h, _ in self.knots]
        Hs = [H for _, H in self.knots]
        if any(not (H > 0 and math.isfinite(H)) for H in Hs):
            raise InvalidScheme("H values must be positive and finite")
        if any(b <= a for a, b in zip(hs, hs[1:])):
            raise InvalidScheme("knot positions must be strictly increasing")
        if any(h < 0 or h > 1 for h in hs):
            raise InvalidScheme("knot positions must lie in [0, 1]")
        if self.kind is SchemeKind.SEGMENTED:
            if hs[0] != 0.0:
                raise InvalidScheme("first band must start at h = 0")
        elif self.kind is SchemeKind.LINEAR:
            if len(self.knots) != 2:
                raise InvalidScheme("linear scheme takes exactly two knots")
        elif self.kind is SchemeKind.NONLINEAR:
            if len(self.knots) < 2:
                raise InvalidScheme("nonlinear scheme needs at least two knots")
            if any(b < a for a, b in zip(Hs, Hs[1:])):
                raise InvalidScheme("nonlinear H values must be non-decreasing")

    def h_max(self) -> float:
        return max(H for _, H in self.knots)

    def h_min(self) -> float:
        return min(H for _, H in self.knots)


def segmented(bands) -> PrecisionScheme:
    return PrecisionScheme(SchemeKind.SEGMENTED, tuple((float(h), float(H)) for h, H in bands))


def linear(k0, k1) -> PrecisionScheme:
    return PrecisionScheme(SchemeKind.LINEAR, (tuple(map(float, k0)), tuple(map(float, k1))))


def nonlinear(knots) -> PrecisionScheme:
    return PrecisionScheme(SchemeKind.NONLINEAR, tuple((float(h), float(H)) for h, H in knots))


def default_segmented() -> PrecisionScheme:
    return segmented([(0.0, 1.0), (1.0 / 3.0, 4.0), (2.0 / 3.0, 16.0)])


def default_linear() -> PrecisionScheme:
    return linear((0.0, 1.0), (1.0, 16.0))


def default_nonlinear() -> PrecisionScheme:
    return nonlinear([(0.0, 1.0), (0.5, 2.0), (1.0, 16.0)])


def band_index(scheme: PrecisionScheme, h: float) -> int:
    """Index of the band containing h (bands are right-open, last is closed)."""
    if scheme.kind is not SchemeKind.SEGMENTED:
        raise WrongSchemeKind(f"band lookup on {scheme.kind.value} scheme")
    idx = 0
    for i, (edge, _) in enumerate(scheme.knots):
        if h >= edge:
            idx = i
        else:
            break
    return idx


def hysteresis_band(
    scheme: PrecisionScheme,
    h: float,
    prev_band: int,
    margin: float = DEFAULT_HYSTERESIS_MARGIN,
) -> int:
    """Band lookup with switching hysteresis.

    Keeps prev_band until h moves past a band edge by more than margin,
    which stops tremor from flickering the precision at edges. margin = 0
    degenerates to the plain lookup.
    """
    if scheme.kind is not SchemeKind.SEGMENTED:
        raise WrongSchemeKind(f"hysteresis on {scheme.kind.value} scheme")
    if margin < 0:
        raise ValueError("margin must be non-negative")
    if not 0 <= prev_band < len(scheme.knots):
        raise ValueError(f"prev_band {prev_band} out of range")
    raw = band_index(scheme, h)
    if raw == prev_band:
        return prev_band
    if raw > prev_band:
        return max(prev_band, band_index(scheme, max(0.0, h - margin)))
    return min(prev_band, band_index(scheme, min(1.0, h + margin)))


@functools.lru_cache(maxsize=64)
def _cached_slopes(knots: tuple[tuple[float, float], ...]) -> tuple[float, ...]:
    return tuple(_pchip_slopes([k[0] for k in knots], [k[1] for k in knots]))


def _pchip_slopes(hs: list[float], Hs: list[float]) -> list[float]:
    """Fritsch-Carlson shape-preserving knot slopes.

    Interior slopes use the weighted harmonic mean of adjacent secants
    (zero across sign changes or flat secants); endpoint slopes use the
    one-sided three-point estimate, clipped to preserve shape.
    """
    n = len(hs)
    dx = [hs[i + 1] - hs[i] for i in range(n - 1)]
    sec = [(Hs[i + 1] - Hs[i]) / dx[i] for i in range(n - 1)]
    if n == 2:
        return [sec[0], sec[0]]

    def edge(h0: float, h1: float, m0: float, m1: float) -> float:
        d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1)
        if d == 0.0 or m0 == 0.0 or (d > 0) != (m0 > 0):
            return 0.0
        if ((m0 > 0) != (m1 > 0) or m1 == 0.0) and abs(d) > 3.0 * abs(m0):
            return 3.0 * m0
        return d

    slopes = [0.0] * n
    slopes[0] = edge(dx[0], dx[1], sec[0], sec[1])
    slopes[-1] = edge(dx[-1], dx[-2], sec[-1], sec[-2])
    for i in range(1, n - 1):
        m0, m1 = sec[i - 1], sec[i]
        if m0 == 0.0 or m1 == 0.0 or (m0 > 0) != (m1 > 0):
            continue
        w1 = 2.0 * dx[i] + dx[i - 1]
        w2 = dx[i] + 2.0 * dx[i - 1]
        slopes[i] = (w1 + w2) / (w1 / m0 + w2 / m1)
    return slopes


def _hermite(t: float, y0: float, y1: float, m0: float, m1: float, dx: float) -> float:
    t2 = t * t
    t3 = t2 * t
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + t
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return y0 * h00 + dx * m0 * h10 + y1 * h01 + dx * m1 * h11


def eval_scheme(scheme: PrecisionScheme, h: float) -> PrecisionValue:
    """Evaluate the scheme at h in [0, 1]; total for every valid scheme."""
    if scheme.kind is SchemeKind.SEGMENTED:
        idx = band_index(scheme, h)
        return PrecisionValue(H=scheme.knots[idx][1], band_index=idx)

    hs = [k[0] for k in scheme.knots]
    Hs = [k[1] for k in scheme.knots]
    if scheme.kind is SchemeKind.LINEAR:
        (h0, H0), (h1, H1) = scheme.knots
        value = H0 + (H1 - H0) * (h - h0) / (h1 - h0)
        lo, hi = min(H0, H1), max(H0, H1)
        return PrecisionValue(H=max(lo, min(hi, value)))

    # nonlinear: clamp outside the knot range, monotone cubic inside
    if h <= hs[0]:
        return PrecisionValue(H=Hs[0])
    if h >= hs[-1]:
        return PrecisionValue(H=Hs[-1])
    slopes = _cached_slopes(scheme.knots)
    i = 0
    while i < len(hs) - 2 and h >= hs[i + 1]:
        i += 1
    dx = hs[i + 1] - hs[i]
    t = (h - hs[i]) / dx
    return PrecisionValue(H=_hermite(t, Hs[i], Hs[i + 1], slopes[i], slopes[i + 1], dx))
