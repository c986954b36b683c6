"""Space weight, Plancherel measure, c-function fits and measure estimates.

The Plancherel density uses the c-function normalized as
c(lam) = 2^{-i lam} Gamma(alpha+1) Gamma(i lam) / (Gamma((rho+i lam)/2) Gamma((alpha-beta+1+i lam)/2)),
i.e. ``harish_chandra_c / 2**rho``.  With the weight A(x) below this is the
normalization under which the inversion formula reproduces f exactly.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from functools import partial
from typing import Callable

import numpy as np
from scipy.special import gamma as _gamma

from .errors import AccuracyError, DomainError, FitError, PoleError
from .functions import SPACE, SampledFunction, fmt
from .quadrature import NODES, KRONROD_WEIGHTS, QuadratureSpec, integrate, panel_edges
from .specfun import Parameters, _is_nonpositive_integer, gauss_2f1, ln_gamma_complex


class MeasureSide(enum.Enum):
    SPACE_WEIGHT = "SpaceWeight"
    PLANCHEREL_ABS = "PlancherelAbs"


class DensityKind(enum.Enum):
    SIGNED = "Signed"
    ABS = "Abs"


def weight_a(params: Parameters, x):
    """A(x) = sinh|x|^{2 alpha+1} cosh|x|^{2 beta+1}."""
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.sinh(ax) ** (2 * params.alpha + 1) * np.cosh(ax) ** (2 * params.beta + 1)
    return float(out) if np.ndim(out) == 0 else out


def _log_c(params: Parameters, lam: np.ndarray) -> np.ndarray:
    """log of harish_chandra_c without the 2^rho factor; -inf where a denominator pole sits."""
    il = 1j * lam
    a, b, rho = params.alpha, params.beta, params.rho
    d1 = (rho + il) / 2
    d2 = (a - b + 1 + il) / 2
    out = np.full(lam.shape, -np.inf, dtype=complex)
    ok = ~(_is_nonpositive_integer(d1) | _is_nonpositive_integer(d2))
    if ok.any():
        out[ok] = (-il[ok] * math.log(2.0) + ln_gamma_complex(a + 1.0 + 0j)
                   + ln_gamma_complex(il[ok]) - ln_gamma_complex(d1[ok])
                   - ln_gamma_complex(d2[ok]))
    return out


def harish_chandra_c(params: Parameters, lam):
    """C(lam) = 2^{rho - i lam} Gamma(alpha+1) Gamma(i lam) / (Gamma((rho+i lam)/2) Gamma((alpha-beta+1+i lam)/2)).

    Raises
    ------
    PoleError
        For lam in i N (including 0).
    """
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if np.any(_is_nonpositive_integer(1j * lam)):
        raise PoleError("c-function pole: lambda in iN")
    out = np.exp(_log_c(params, lam) + params.rho * math.log(2.0))
    return out[0] if scalar else out


def plancherel_c(params: Parameters, lam):
    """Plancherel-normalized c-function, harish_chandra_c / 2^rho."""
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if np.any(_is_nonpositive_integer(1j * lam)):
        raise PoleError("c-function pole: lambda in iN")
    out = np.exp(_log_c(params, lam))
    return out[0] if scalar else out


def inverse_c_squared(params: Parameters, lam) -> np.ndarray:
    """|c(lam)|^{-2} of the normalized c-function for real lam; 0 at lam = 0."""
    lam = np.asarray(lam, dtype=float)
    flat = np.atleast_1d(lam)
    out = np.zeros(flat.shape)
    nz = flat != 0
    if nz.any():
        out[nz] = np.exp(-2.0 * _log_c(params, flat[nz].astype(complex)).real)
    return out.reshape(lam.shape) if lam.ndim else float(out[0])


def plancherel_density(params: Parameters, lam, kind: DensityKind | str = DensityKind.ABS):
    """Density of the Plancherel measure against d lam.

    Signed: (1 + i rho/lam) |c|^{-2} / (8 pi); Abs: its modulus.  Both are 0 at lam = 0.
    """
    kind = DensityKind(kind) if not isinstance(kind, DensityKind) else kind
    lam = np.asarray(lam, dtype=float)
    flat = np.atleast_1d(lam)
    base = inverse_c_squared(params, flat) / (8 * math.pi)
    safe = np.where(flat == 0, 1.0, flat)
    rho = params.rho
    if kind is DensityKind.ABS:
        out = np.where(flat == 0, 0.0, np.sqrt(1 + (rho / safe) ** 2) * base)
    else:
        out = np.where(flat == 0, 0.0, (1 + 1j * rho / safe) * base)
    return out.reshape(lam.shape) if lam.ndim else out[0].item()


def measure_density(params: Parameters, side: MeasureSide, pts) -> np.ndarray:
    if side is MeasureSide.SPACE_WEIGHT:
        return weight_a(params, np.asarray(pts, dtype=float))
    return plancherel_density(params, np.asarray(pts, dtype=float), DensityKind.ABS)


def _half_line_edges(r: float, width: float = 1.0) -> np.ndarray:
    return panel_edges([0.0, r], width)


def ball_measure(params: Parameters, r: float, side: MeasureSide,
                 quad: QuadratureSpec | None = None) -> float:
    """Measure of B_r = {|x| <= r} under A(x)dx or d|sigma|."""
    quad = quad or QuadratureSpec()
    if r < 0:
        raise DomainError(f"radius must be nonnegative, got {r}")
    if r == 0:
        return 0.0
    res = integrate(lambda x: measure_density(params, side, x), _half_line_edges(r),
                    quad, what="ball measure")
    return 2.0 * float(res.value.real)


def cumulative_measure(params: Parameters, side: MeasureSide, pts) -> np.ndarray:
    """M(x) = mu([0, x]) (odd in x), evaluated by panelwise Kronrod sums.

    On the space side the first piece [0, min(x, 1/2)] uses the closed form
    sinh^{2a+2}(x) / (2(a+1)) 2F1(-beta, alpha+1; alpha+2; -sinh^2 x).
    """
    pts = np.asarray(pts, dtype=float)
    flat = np.atleast_1d(pts)
    ax, inv = np.unique(np.abs(flat), return_inverse=True)
    cum = np.zeros(ax.size)
    prev, acc = 0.0, 0.0
    x_small = 0.5
    a, b = params.alpha, params.beta
    for i, x in enumerate(ax.tolist()):
        if x == 0:
            continue
        start = prev
        if side is MeasureSide.SPACE_WEIGHT and prev < x_small:
            # closed form up to min(x, 1/2), then quadrature for the remainder
            xe = min(x, x_small)
            u = math.sinh(xe) ** 2
            acc = (u ** (a + 1) / (2 * (a + 1))
                   * gauss_2f1(-b, a + 1, a + 2, -u).real)
            start = xe
        if x > start:
            k = max(1, int(math.ceil((x - start) / 0.125)))
            e = np.linspace(start, x, k + 1)
            mid, half = 0.5 * (e[:-1] + e[1:]), 0.5 * (e[1:] - e[:-1])
            nodes = mid[:, None] + half[:, None] * NODES[None, :]
            vals = measure_density(params, side, nodes.ravel()).reshape(nodes.shape)
            acc += float(np.sum(vals @ KRONROD_WEIGHTS * half))
        cum[i] = acc
        prev = x
    out = np.sign(flat) * cum[inv]
    return out.reshape(pts.shape) if pts.ndim else float(out[0])


def young_canonical(params: Parameters, x):
    """Young function phi(x) = A(B_|x|), the cumulative weight of the ball."""
    x = np.asarray(x, dtype=float)
    out = 2.0 * np.abs(cumulative_measure(params, MeasureSide.SPACE_WEIGHT, x))
    return out if x.ndim else float(out)


def young_inverse(params: Parameters, t: float, tol: float = 1e-15) -> float:
    """x >= 0 with young_canonical(x) = t, by bisection."""
    if t <= 0:
        return 0.0
    hi = 1.0
    while young_canonical(params, hi) < t:
        hi *= 2
    lo = 0.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if young_canonical(params, mid) < t:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ConstantsFit:
    """Fitted bounds k1 |lam|^{2a+2} <= |c(lam)|^{-2} <= k2 |lam|^{2a+2} for |lam| in [bigN, lambda_max]."""

    alpha: float
    beta: float
    k1: float
    k2: float
    bigN: float
    lambda_max: float
    samples: int

    def __post_init__(self):
        if not (0 < self.k1 <= self.k2):
            raise FitError(f"need 0 < k1 <= k2, got {self.k1}, {self.k2}")
        if self.bigN < 1:
            raise FitError(f"bigN must be >= 1, got {self.bigN}")

    @property
    def params(self) -> Parameters:
        return Parameters(self.alpha, self.beta)

    @property
    def c_gamma(self) -> float:
        return self.k2 / (4 * math.pi) * math.sqrt(1 + self.params.rho ** 2)

    @property
    def c_sigma(self) -> float:
        return self.c_gamma * (1 + 1 / (2 * self.alpha + 3))

    def d_gamma(self, q: float) -> float:
        e = self.alpha + 1.5
        return self.c_gamma * math.gamma(e) / (2 * q ** e)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["C_sigma"] = self.c_sigma
        d["C_gamma"] = self.c_gamma
        return d

    def to_json(self) -> str:
        d = self.to_dict()
        return json.dumps({k: (fmt(v) if isinstance(v, float) else v) for k, v in d.items()},
                          indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ConstantsFit":
        return cls(float(d["alpha"]), float(d["beta"]), float(d["k1"]), float(d["k2"]),
                   float(d["bigN"]), float(d["lambda_max"]), int(d["samples"]))

    @classmethod
    def from_json(cls, text: str) -> "ConstantsFit":
        return cls.from_dict(json.loads(text))


def c_ratio(params: Parameters, lam) -> np.ndarray:
    """|c(lam)|^{-2} / |lam|^{2 alpha + 2}."""
    lam = np.asarray(lam, dtype=float)
    return inverse_c_squared(params, lam) / np.abs(lam) ** (2 * params.alpha + 2)


def fit_c_constants(params: Parameters, bigN: float = 2.0, lambda_max: float = 100.0,
                    samples: int = 200) -> ConstantsFit:
    """k1 = min, k2 = max of |c|^{-2}/|lam|^{2a+2} on log-spaced samples in [bigN, lambda_max]."""
    if not (1 <= bigN < lambda_max) or not math.isfinite(lambda_max):
        raise FitError(f"empty or invalid fit window [{bigN}, {lambda_max}]")
    if samples < 10:
        raise FitError(f"need at least 10 samples, got {samples}")
    lam = np.geomspace(bigN, lambda_max, samples)
    vals = []
    for v in lam:
        try:
            r = float(c_ratio(params, np.array([v]))[0])
        except PoleError:
            continue
        if math.isfinite(r) and r > 0:
            vals.append(r)
    if not vals:
        raise FitError("no usable samples in the fit window")
    return ConstantsFit(params.alpha, params.beta, min(vals), max(vals), float(bigN),
                        float(lambda_max), int(samples))


def _spectral_radius(rate: float, power: float, tail: float = 1e-17) -> float:
    r = 1.0
    while -rate * r * r + power * math.log1p(r) > math.log(tail):
        r *= 1.1
    return r


def gamma_t_norm(params: Parameters, t: float, q: float,
                 quad: QuadratureSpec | None = None) -> float:
    """||exp(-t lam^2)||_{L^q(|sigma|)}."""
    quad = quad or QuadratureSpec()
    if not t > 0 or not q >= 1:
        raise DomainError("need t > 0 and q >= 1")
    lmax = _spectral_radius(q * t, 2 * params.alpha + 3)
    res = integrate(lambda l: np.exp(-q * t * l * l) * plancherel_density(params, l),
                    _half_line_edges(lmax, 0.5), quad, what="gamma_t norm")
    return float(2.0 * res.value.real) ** (1.0 / q)


def weighted_indicator_norm(params: Parameters, r: float, a: float, q: float,
                            quad: QuadratureSpec | None = None) -> float:
    """|| |x|^{-a} chi_{B_r} ||_{L^q(A)}."""
    quad = quad or QuadratureSpec()
    if not q >= 2:
        raise DomainError(f"need q >= 2, got {q}")
    if not 0 < a < 1 / q:
        raise DomainError(f"need 0 < a < 1/q, got a={a}, q={q}")
    if not r > 1:
        raise DomainError(f"need r > 1, got {r}")
    edges = np.concatenate([[0.0], np.geomspace(1e-8, 1.0, 9), _half_line_edges(r)[2:]])
    res = integrate(lambda x: np.where(x > 0, np.abs(x) ** (-a * q), 0.0) * weight_a(params, x),
                    np.unique(edges), quad, what="weighted indicator norm")
    return float(2.0 * res.value.real) ** (1.0 / q)


def indicator_constant(params: Parameters, a: float, q: float) -> float:
    """(2 A(1)/(1 - a q) + 2)^{1/q}."""
    return (2 * weight_a(params, 1.0) / (1 - a * q) + 2) ** (1.0 / q)


# --- norms of sampled functions -------------------------------------------

def function_edges(h: SampledFunction, radius: float, width: float) -> np.ndarray:
    """Panel edges on [-radius, radius] with 0 and the function's breakpoints."""
    pts = [-radius, 0.0, radius] + [b for b in h.breakpoints if abs(b) < radius]
    return panel_edges(pts, width)


def orlicz_norm(f: SampledFunction, params: Parameters, q: float,
                phi: Callable | None = None, quad: QuadratureSpec | None = None,
                radius: float | None = None) -> float:
    """(int |f|^q |phi|^{q-2} A dx)^{1/q}; phi defaults to young_canonical."""
    from .transform import space_radius

    quad = quad or QuadratureSpec()
    if not q > 2:
        raise DomainError(f"need q > 2, got {q}")
    phi = phi or partial(young_canonical, params)
    r = radius if radius is not None else space_radius(f, params, quad)

    def integrand(x):
        return np.abs(f(x)) ** q * np.abs(phi(x)) ** (q - 2) * weight_a(params, x)

    res = integrate(integrand, function_edges(f, r, 0.5), quad, what="Orlicz norm")
    val = float(res.value.real)
    if not math.isfinite(val):
        raise AccuracyError("Orlicz norm diverges")
    return val ** (1.0 / q)


def weak_threshold_grid(top: float, count: int = 400) -> np.ndarray:
    """``count`` geometric thresholds spanning [1e-8, 1e4] * top; exact at top."""
    k = np.arange(count)
    expo = (12.0 * k - 8.0 * (count - 1)) / (count - 1)
    return top * 10.0 ** expo


def weak_lp_norm(g: SampledFunction, params: Parameters, p: float, side: MeasureSide,
                 quad: QuadratureSpec | None = None, radius: float | None = None,
                 points: int = 2049) -> float:
    """sup_s s * mu({|g| >= s})^{1/p} over the geometric threshold grid.

    Superlevel sets are unions of intervals located on a dense grid (the
    samples of g, its breakpoints and ``points`` uniform nodes) and closed
    off by linear interpolation of |g|.
    """
    from .transform import spectral_radius, space_radius

    quad = quad or QuadratureSpec()
    if not p >= 1:
        raise DomainError(f"need p >= 1, got {p}")
    if radius is None:
        radius = space_radius(g, params, quad) if side is MeasureSide.SPACE_WEIGHT \
            else spectral_radius(g, params, quad)
    xs = np.unique(np.concatenate([np.linspace(-radius, radius, points),
                                   g.grid[np.abs(g.grid) <= radius],
                                   [b for b in g.breakpoints if abs(b) <= radius], [0.0]]))
    mag = np.abs(g(xs))
    top = float(mag.max())
    if top == 0:
        return 0.0
    cum = cumulative_measure(params, side, xs)
    dens = measure_density(params, side, xs)
    best = 0.0
    for s in weak_threshold_grid(top):
        inside = mag >= s
        if not inside.any():
            continue
        mu = _superlevel_measure(xs, mag, inside, s, cum, dens)
        best = max(best, s * mu ** (1.0 / p))
    return best


def _superlevel_measure(xs, mag, inside, s, cum, dens) -> float:
    d = np.diff(inside.astype(np.int8))
    starts = list(np.nonzero(d == 1)[0] + 1)
    ends = list(np.nonzero(d == -1)[0])
    if inside[0]:
        starts.insert(0, 0)
    if inside[-1]:
        ends.append(xs.size - 1)
    total = 0.0
    for i0, i1 in zip(starts, ends):
        lo = cum[i0]
        if i0 > 0:
            # extend left into the cell where |g| crosses s
            fr = (mag[i0] - s) / (mag[i0] - mag[i0 - 1])
            lo -= fr * (xs[i0] - xs[i0 - 1]) * 0.5 * (dens[i0] + dens[i0 - 1])
        hi = cum[i1]
        if i1 < xs.size - 1:
            fr = (mag[i1] - s) / (mag[i1] - mag[i1 + 1])
            hi += fr * (xs[i1 + 1] - xs[i1]) * 0.5 * (dens[i1] + dens[i1 + 1])
        total += hi - lo
    return total
