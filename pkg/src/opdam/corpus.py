"""Test-function families: heat kernels, Gaussians, smoothstep bumps, and dilations."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, GenerationError
from .functions import (SPACE, Compact, Gaussian as GaussianDecay, SampledFunction,
                        default_space_grid, default_spectral_grid)
from .measure import MeasureSide
from .quadrature import QuadratureSpec
from .specfun import Parameters
from .transform import heat_kernel, weighted_norm


@dataclass(frozen=True)
class Heat:
    t: float

    def __post_init__(self):
        _positive("heat time", self.t)

    @property
    def label(self) -> str:
        return f"heat(t={self.t:g})"


@dataclass(frozen=True)
class Gaussian:
    rate: float

    def __post_init__(self):
        _positive("Gaussian rate", self.rate)

    @property
    def label(self) -> str:
        return f"gaussian(rate={self.rate:g})"


@dataclass(frozen=True)
class Bump:
    """1 - S(|x - center|/width) on |x - center| <= width, S the quintic smoothstep."""

    center: float
    width: float

    def __post_init__(self):
        _positive("bump width", self.width)
        if not math.isfinite(self.center):
            raise DomainError("bump center must be finite")

    @property
    def label(self) -> str:
        return f"bump(center={self.center:g},width={self.width:g})"


Family = Union[Heat, Gaussian, Bump]


def _positive(what, v):
    if not (v > 0 and math.isfinite(v)):
        raise DomainError(f"{what} must be positive, got {v}")


@dataclass(frozen=True)
class Grids:
    space: np.ndarray = field(default_factory=default_space_grid)
    spectral: np.ndarray = field(default_factory=default_spectral_grid)


def smoothstep(u):
    """6u^5 - 15u^4 + 10u^3 clipped to [0, 1]."""
    u = np.clip(u, 0.0, 1.0)
    return u ** 3 * (10 - 15 * u + 6 * u * u)


def _bump_eval(center, width):
    def ev(x):
        u = np.abs(np.asarray(x, dtype=float) - center) / width
        return (1.0 - smoothstep(u)).astype(complex)
    return ev


def _gauss_eval(rate):
    return lambda x: np.exp(-rate * np.asarray(x, dtype=float) ** 2).astype(complex)


def make_function(family: Family, params: Parameters, grids: Grids | None = None,
                  quad: QuadratureSpec | None = None) -> SampledFunction:
    grids = grids or Grids()
    quad = quad or QuadratureSpec()
    xs = grids.space
    if isinstance(family, Heat):
        e = heat_kernel(params, family.t, xs, quad)
        e.label = family.label
        return e
    if isinstance(family, Gaussian):
        ev = _gauss_eval(family.rate)
        return SampledFunction(xs, ev(xs), GaussianDecay(family.rate), SPACE, ev, (),
                               family.label)
    if isinstance(family, Bump):
        c, w = family.center, family.width
        ev = _bump_eval(c, w)
        return SampledFunction(xs, ev(xs), Compact(abs(c) + w), SPACE, ev,
                               (c - w, c, c + w), family.label)
    raise DomainError(f"unknown family {family!r}")


def scale(f: SampledFunction, c: float) -> SampledFunction:
    """f_c(x) = f(cx) on the grid divided by c."""
    if not (c > 0 and math.isfinite(c)):
        raise DomainError(f"scale factor must be positive, got {c}")
    if c == 1:
        return f
    if isinstance(f.decay, Compact):
        decay = Compact(f.decay.radius / c)
    elif isinstance(f.decay, GaussianDecay):
        decay = f.decay.scaled(c)
    else:
        decay = f.decay
    ev = None if f.evaluator is None else (lambda p, e=f.evaluator: e(c * np.asarray(p)))
    return SampledFunction(f.grid / c, f.values, decay, f.side, ev,
                           tuple(b / c for b in f.breakpoints), f.label)


@dataclass(frozen=True)
class CorpusSpec:
    """Families to expand.

    ``heat``, ``gaussian`` list the parameters of one-parameter families;
    bump centers and widths are paired.  ``jitter`` perturbs bump centers and
    widths by up to that relative amount, drawn from ``seed``.
    """

    heat: tuple = (0.5, 1.0, 2.0)
    gaussian: tuple = (0.5, 1.0, 2.0)
    bump_centers: tuple = (0.0, 1.0, 1.5)
    bump_widths: tuple = (1.0, 0.5, 1.0)
    scale_factors: tuple = (1.0, 2.0)
    seed: int = 0
    jitter: float = 0.0

    def __post_init__(self):
        if len(self.bump_centers) != len(self.bump_widths):
            raise DomainError("bump centers and widths must pair up")
        for c in self.scale_factors:
            _positive("scale factor", c)
        if not 0 <= self.jitter < 1:
            raise DomainError(f"jitter must be in [0, 1), got {self.jitter}")

    def families(self) -> list:
        out: list = [Heat(float(t)) for t in self.heat]
        out += [Gaussian(float(r)) for r in self.gaussian]
        rng = np.random.default_rng(self.seed)
        for c, w in zip(self.bump_centers, self.bump_widths):
            if self.jitter:
                dc, dw = rng.uniform(-self.jitter, self.jitter, 2)
                c, w = c + dc * w, w * (1 + dw)
            out.append(Bump(float(c), float(w)))
        return out

    def to_dict(self) -> dict:
        return {"families": {"heat": list(self.heat), "gaussian": list(self.gaussian),
                             "bump": {"centers": list(self.bump_centers),
                                      "widths": list(self.bump_widths)}},
                "scale_factors": list(self.scale_factors), "seed": self.seed,
                "jitter": self.jitter}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusSpec":
        fam = d.get("families", {})
        bump = fam.get("bump", {"centers": [], "widths": []})
        return cls(tuple(float(t) for t in fam.get("heat", [])),
                   tuple(float(r) for r in fam.get("gaussian", [])),
                   tuple(float(c) for c in bump.get("centers", [])),
                   tuple(float(w) for w in bump.get("widths", [])),
                   tuple(float(c) for c in d.get("scale_factors", [1.0])),
                   int(d.get("seed", 0)), float(d.get("jitter", 0.0)))

    @classmethod
    def from_json(cls, text: str) -> "CorpusSpec":
        return cls.from_dict(json.loads(text))


SCREEN = ((1.0, 0.0), (2.0, 0.0), (1.0, 4.0), (2.0, 4.0))


def screen(f: SampledFunction, params: Parameters, quad: QuadratureSpec) -> None:
    """Raise GenerationError unless ||f||_1, ||f||_2 and || |x|^4 f ||_{1,2} are finite."""
    for p, a in SCREEN:
        try:
            v = weighted_norm(f, params, p, a, MeasureSide.SPACE_WEIGHT, quad)
        except (ArithmeticError, ValueError) as exc:
            raise GenerationError(f.label, f"norm (p={p:g}, a={a:g}): {exc}") from exc
        if not math.isfinite(v):
            raise GenerationError(f.label, f"norm (p={p:g}, a={a:g}) is not finite")


def generate_corpus(spec: CorpusSpec, params: Parameters, grids: Grids | None = None,
                    quad: QuadratureSpec | None = None, check: bool = True
                    ) -> list[SampledFunction]:
    """Members in family order, each followed by its dilations."""
    grids = grids or Grids()
    quad = quad or QuadratureSpec()
    out = []
    for fam in spec.families():
        try:
            base = make_function(fam, params, grids, quad)
        except (ArithmeticError, ValueError) as exc:
            raise GenerationError(fam.label, str(exc)) from exc
        for c in spec.scale_factors:
            f = scale(base, c)
            if f is base:
                f = SampledFunction(base.grid, base.values, base.decay, base.side,
                                    base.evaluator, base.breakpoints, base.label)
            f.label = f"{fam.label}@c={c:g}"
            if check:
                screen(f, params, quad)
            out.append(f)
    return out


def corpus_hash(members: Sequence[SampledFunction]) -> str:
    h = hashlib.sha256()
    for f in members:
        h.update(f.to_json().encode())
    return h.hexdigest()
