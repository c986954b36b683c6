"""Sampled functions with decay metadata and lossless CSV/JSON IO."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import AccuracyError, DomainError

SPACE = "space"
SPECTRAL = "spectral"


@dataclass(frozen=True)
class Compact:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"support radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Gaussian:
    """|h(x)| <= M exp(-rate x^2 - shift |x|) up to polynomial factors."""

    rate: float
    shift: float = 0.0

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError(f"Gaussian rate must be positive, got {self.rate}")

    def scaled(self, c: float) -> "Gaussian":
        return Gaussian(self.rate * c * c, self.shift * c)


@dataclass(frozen=True)
class Generic:
    pass


Decay = Union[Compact, Gaussian, Generic]


def decay_to_dict(d: Decay) -> dict:
    if isinstance(d, Compact):
        return {"kind": "compact", "radius": d.radius}
    if isinstance(d, Gaussian):
        return {"kind": "gaussian", "rate": d.rate, "shift": d.shift}
    return {"kind": "generic"}


def decay_from_dict(d: dict) -> Decay:
    kind = d.get("kind", "generic")
    if kind == "compact":
        return Compact(float(d["radius"]))
    if kind == "gaussian":
        return Gaussian(float(d["rate"]), float(d.get("shift", 0.0)))
    if kind == "generic":
        return Generic()
    raise DomainError(f"unknown decay class {kind!r}")


def fmt(v: float) -> str:
    """Float at 17 significant digits (round-trips every double)."""
    return format(float(v), ".17g")


@dataclass(eq=False)
class SampledFunction:
    """Complex samples on a strictly increasing grid.

    ``evaluator`` (optional) gives exact values off the grid; without it the
    function is a cubic spline of the samples, zero outside the grid for
    Compact decay.  ``breakpoints`` lists points where the function is not
    smooth, for quadrature panel placement.
    """

    grid: np.ndarray
    values: np.ndarray
    decay: Decay = field(default_factory=Generic)
    side: str = SPACE
    evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = None
    breakpoints: tuple = ()
    label: str = ""

    def __post_init__(self):
        self.grid = np.ascontiguousarray(np.asarray(self.grid, dtype=float))
        self.values = np.ascontiguousarray(np.asarray(self.values, dtype=complex))
        if self.grid.ndim != 1 or self.grid.shape != self.values.shape:
            raise DomainError("grid and values must be 1-D of equal length")
        if self.grid.size < 1 or np.any(np.diff(self.grid) <= 0):
            raise DomainError("grid must be nonempty and strictly increasing")
        if not (np.all(np.isfinite(self.grid)) and np.all(np.isfinite(self.values))):
            raise DomainError("grid and values must be finite")
        if self.side not in (SPACE, SPECTRAL):
            raise DomainError(f"side must be {SPACE!r} or {SPECTRAL!r}")
        if isinstance(self.decay, Compact):
            outside = np.abs(self.grid) > self.decay.radius * (1 + 1e-12)
            if np.any(self.values[outside] != 0):
                raise DomainError("nonzero samples outside the compact support")
        self.breakpoints = tuple(float(b) for b in self.breakpoints)
        self._spline = None

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.evaluator is not None:
            return np.asarray(self.evaluator(pts), dtype=complex)
        return self.interpolate(pts)

    def interpolate(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        inside = (pts >= self.grid[0]) & (pts <= self.grid[-1])
        if not np.all(inside) and not isinstance(self.decay, Compact):
            raise DomainError("evaluation outside the sampled grid")
        if self.grid.size < 2:
            raise DomainError("spline interpolation needs at least 2 samples")
        if self._spline is None:
            self._spline = (CubicSpline(self.grid, self.values.real),
                            CubicSpline(self.grid, self.values.imag))
        out = np.zeros(pts.shape, dtype=complex)
        p = pts[inside]
        out[inside] = self._spline[0](p) + 1j * self._spline[1](p)
        if isinstance(self.decay, Compact):
            out[np.abs(pts) > self.decay.radius] = 0
        return out

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    def with_values(self, values, evaluator=None, label=None) -> "SampledFunction":
        return SampledFunction(self.grid, values, self.decay, self.side, evaluator,
                               self.breakpoints, self.label if label is None else label)

    def scaled_by(self, c: complex) -> "SampledFunction":
        """c * h, keeping the evaluator."""
        ev = None if self.evaluator is None else (lambda p, e=self.evaluator: c * e(p))
        return self.with_values(c * self.values, ev, self.label)

    # --- serialization -------------------------------------------------
    def to_json(self) -> str:
        doc = {
            "label": self.label,
            "side": self.side,
            "decay": decay_to_dict(self.decay),
            "breakpoints": [fmt(b) for b in self.breakpoints],
            "grid": [fmt(v) for v in self.grid],
            "re": [fmt(v) for v in self.values.real],
            "im": [fmt(v) for v in self.values.imag],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "SampledFunction":
        d = json.loads(text)
        re = np.array([float(v) for v in d["re"]])
        im = np.array([float(v) for v in d.get("im", [0.0] * len(re))])
        return cls(np.array([float(v) for v in d["grid"]]), re + 1j * im,
                   decay_from_dict(d.get("decay", {})), d.get("side", SPACE), None,
                   tuple(float(b) for b in d.get("breakpoints", [])), d.get("label", ""))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["grid", "re", "im"])
        for x, v in zip(self.grid, self.values):
            w.writerow([fmt(x), fmt(v.real), fmt(v.imag)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, decay: Decay | None = None, side: str = SPACE,
                 label: str = "") -> "SampledFunction":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] and rows[0][0] == "grid":
            rows = rows[1:]
        grid = np.array([float(r[0]) for r in rows])
        re = np.array([float(r[1]) for r in rows])
        im = np.array([float(r[2]) if len(r) > 2 else 0.0 for r in rows])
        return cls(grid, re + 1j * im, decay or Generic(), side, None, (), label)


def default_space_grid(radius: float = 8.0, points: int = 1025) -> np.ndarray:
    return np.linspace(-radius, radius, points)


def default_spectral_grid(radius: float = 40.0, points: int = 2049) -> np.ndarray:
    return np.linspace(-radius, radius, points)


def tail_radius(decay: Decay, growth: float, tail: float, power: float = 2.0,
                cap: float = 400.0) -> float:
    """Smallest R with exp(growth R) (1+R)^power * profile(R) <= tail.

    Compact returns its support radius; Generic has no bound and raises.
    """
    if isinstance(decay, Compact):
        return decay.radius
    if isinstance(decay, Generic):
        raise DomainError("Generic decay needs an explicit Fixed truncation radius")
    rate, shift = decay.rate, decay.shift
    target = math.log(tail)

    def log_bound(r):
        return -rate * r * r + (growth - shift) * r + power * math.log1p(r)

    r = 1.0
    while log_bound(r) > target or r < (growth - shift) / (2 * rate):
        r *= 1.25
        if r > cap:
            raise AccuracyError(f"tail target {tail:g} unreachable within radius {cap:g}")
    lo, hi = r / 1.25, r
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if log_bound(mid) > target:
            lo = mid
        else:
            hi = mid
    return hi
