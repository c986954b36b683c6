"""Forward and inverse transform, heat kernel, weighted norms, Plancherel check.

All integrals use the adaptive Gauss-Kronrod driver.  Transform integrands
are contracted panel by panel against cached Jacobi-function tables, so the
full (lambda, x) kernel matrix is never formed.
"""
from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DomainError, SpectralTailError
from .functions import (SPACE, SPECTRAL, Compact, Gaussian, Generic, SampledFunction,
                        tail_radius)
from .measure import (DensityKind, MeasureSide, _log_c, function_edges, inverse_c_squared,
                      measure_density, plancherel_density, weight_a)
from .quadrature import (GAUSS_WEIGHTS, KRONROD_WEIGHTS, Auto, Fixed, QuadratureSpec,
                         gk_nodes, integrate, integrate_panels, panel_edges)
from .specfun import KernelTable, Parameters, harish_chandra_phi

_RULES = (KRONROD_WEIGHTS, GAUSS_WEIGHTS)
_X_CHUNK = 768
_HEAT_SWITCH = 1.0
# relative tail targets (norms, Plancherel) and radius cap in grid extents for
# spectral functions of Generic decay
NORM_TAIL = 1e-3
PLANCHEREL_TAIL = 1e-7
SPECTRAL_CAP = 8


class _TableRegistry:
    """LRU store of KernelTables keyed by (params, lambda nodes), bounded in bytes."""

    def __init__(self, budget: int = 1_200_000_000):
        self.budget = budget
        self._tables: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, params: Parameters, lambdas: np.ndarray) -> KernelTable:
        lam = np.ascontiguousarray(lambdas)
        key = (params.alpha, params.beta, lam.dtype.str, lam.tobytes())
        with self._lock:
            table = self._tables.get(key)
            if table is None:
                table = KernelTable(params, lam)
                # lambda and -lambda share Jacobi columns: reuse a mirrored table's store
                if not table.complex:
                    mirror = np.ascontiguousarray(-lam[::-1] + 0.0)  # + 0.0 folds -0.0
                    twin = self._tables.get((params.alpha, params.beta, mirror.dtype.str,
                                             mirror.tobytes()))
                    if twin is not None and np.array_equal(twin.unique, table.unique):
                        table = KernelTable(params, lam, twin.store)
                self._tables[key] = table
            self._tables.move_to_end(key)
            self._evict()
        return table

    def _nbytes(self) -> int:
        return sum(s.nbytes for s in {id(t.store): t.store for t in self._tables.values()}.values())

    def _evict(self):
        while self._nbytes() > self.budget and len(self._tables) > 1:
            self._tables.popitem(last=False)

    def clear(self):
        with self._lock:
            self._tables.clear()


TABLES = _TableRegistry()


class _Memo:
    """Value cache keyed by the exact float node."""

    def __init__(self):
        self.store: dict[float, complex] = {}

    def lookup(self, pts, compute) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        keys = pts.ravel().tolist()
        store = self.store
        missing = sorted({k for k in keys if k not in store})
        if missing:
            vals = np.asarray(compute(np.array(missing)), dtype=complex)
            store.update(zip(missing, vals.tolist()))
        out = np.fromiter((store[k] for k in keys), dtype=complex, count=len(keys))
        return out.reshape(pts.shape)


def _dyadic_width(limit: float, cap: float = 0.5) -> float:
    w = cap
    while w > limit:
        w /= 2
    return w


def _round_up(r: float, h: float) -> float:
    return math.ceil(r / h - 1e-9) * h


def space_radius(h: SampledFunction, params: Parameters, quad: QuadratureSpec,
                 growth: float | None = None) -> float:
    """Truncation radius on the space side.

    Auto uses the decay class against exp(growth |x|), growth = 2 rho by
    default (the weight A grows like e^{2 rho |x|}).
    """
    if isinstance(quad.truncation, Fixed):
        return quad.truncation.radius
    if isinstance(h.decay, Generic):
        raise DomainError("Generic decay with Auto truncation needs a Fixed radius")
    g = 2 * params.rho if growth is None else growth
    r = tail_radius(h.decay, g, quad.truncation.tail, power=4.0)
    if h.evaluator is None:
        r = min(r, float(np.max(np.abs(h.grid))))
    return r


def spectral_radius(h: SampledFunction, params: Parameters, quad: QuadratureSpec) -> float:
    """Truncation radius on the spectral side (grid extent unless Gaussian decay)."""
    if isinstance(quad.truncation, Fixed):
        return quad.truncation.radius
    extent = float(np.max(np.abs(h.grid)))
    if isinstance(h.decay, Gaussian):
        r = tail_radius(h.decay, 0.0, quad.truncation.tail, power=2 * params.alpha + 11)
        return r if h.evaluator is not None else min(r, extent)
    return extent


def spectral_decay(f: SampledFunction, params: Parameters):
    """Decay class of Hf.

    Only the heat profile, Gaussian(rate) with shift rho, has a transform of
    Gaussian class.  Other Gaussian-class functions (plain or dilated
    Gaussians) have transforms decaying merely exponentially, so they count
    as Generic and their spectral integrals are checked for tails.
    """
    if isinstance(f.decay, Gaussian) and f.decay.shift == params.rho:
        return Gaussian(1.0 / (4.0 * f.decay.rate))
    return Generic()


def _spectral_tail(integrand, r0: float, total, quad: QuadratureSpec, what: str,
                   target: float):
    """Integral of ``integrand`` over r0 < |lam| <= R by doubling annuli.

    Stops when the last annulus, or the geometric estimate of the remainder
    from the last two, is below ``target`` times the running total.  Raises
    SpectralTailError if that has not happened by SPECTRAL_CAP * r0.
    """
    extra, prev, r = 0.0, None, r0
    scale0 = float(np.max(np.abs(total)))
    # each annulus is only needed to a small fraction of the target; the
    # absolute tolerance is proportional to the total, so scaling f is exact
    loose = QuadratureSpec(1e-3, 1e-2 * target * scale0 if scale0 > 0 else quad.abs_tol,
                           quad.max_panels, quad.truncation)
    while r < SPECTRAL_CAP * r0:
        edges = panel_edges([r, 2 * r], r / 16)
        a = sum(integrate(integrand, side, loose, what=what).value
                for side in (edges, -edges[::-1]))
        extra = extra + a
        r *= 2
        mag = float(np.max(np.abs(a)))
        scale = float(np.max(np.abs(total + extra)))
        if prev is None:
            rest = mag
        else:
            q = mag / prev if prev > 0 else 0.0
            rest = mag * q / (1 - q) if q < 1 else math.inf
        if rest <= target * scale:
            return extra
        prev = mag
    raise SpectralTailError(f"{what}: spectral tail above {target:g} of the total at "
                            f"|lambda| = {r:g} (slow decay or divergence)", total + extra)


def reflect(f: SampledFunction) -> SampledFunction:
    """f-check(x) = f(-x)."""
    ev = None if f.evaluator is None else (lambda p, e=f.evaluator: e(-np.asarray(p)))
    return SampledFunction(-f.grid[::-1], f.values[::-1], f.decay, f.side, ev,
                           tuple(-b for b in f.breakpoints), f"{f.label}^v")


# --- forward transform -------------------------------------------------------

def _forward_values(f: SampledFunction, params: Parameters, lams: np.ndarray,
                    quad: QuadratureSpec, radius: float) -> np.ndarray:
    table = TABLES.get(params, lams)
    lmax = max(1.0, float(np.max(np.abs(lams))))
    h0 = _dyadic_width(5.0 / lmax)
    r = radius if isinstance(f.decay, Compact) else _round_up(radius, h0)
    edges = function_edges(f, r, h0)
    kappa = table.kappa()
    inv = table.inverse
    nu = table.unique.size

    def sums(a, b):
        p = a.size
        x = gk_nodes(a, b).ravel()
        w = np.asarray(f(x), dtype=complex) * weight_a(params, x)
        ws = w * np.sinh(2 * x)
        p1, p2 = table.pair_unique(x)
        p1 = p1.reshape(nu, p, 21)
        p2 = p2.reshape(nu, p, 21)
        half = (0.5 * (b - a))[:, None]
        out = []
        for rule in _RULES:
            c = w.reshape(p, 21) * rule[None, :] * half
            cs = ws.reshape(p, 21) * rule[None, :] * half
            s1 = _contract(p1, c)
            s2 = _contract(p2, cs)
            out.append(s1[:, inv] - kappa[None, :] * s2[:, inv])
        return out

    return integrate_panels(sums, edges, quad, what="forward transform").value


def _contract(tab: np.ndarray, c: np.ndarray) -> np.ndarray:
    """sum_n tab[u, p, n] c[p, n] -> (p, u), splitting complex weights for real tables."""
    if np.iscomplexobj(tab):
        return np.einsum("upn,pn->pu", tab, c)
    return np.einsum("upn,pn->pu", tab, c.real) + 1j * np.einsum("upn,pn->pu", tab, c.imag)


class ForwardEvaluator:
    """Hf at arbitrary real lambda, memoized per node."""

    def __init__(self, f: SampledFunction, params: Parameters, quad: QuadratureSpec):
        if f.side != SPACE:
            raise DomainError("forward transform needs a space-side function")
        self.f, self.params, self.quad = f, params, quad
        self.radius = space_radius(f, params, quad, growth=params.rho)
        self._memo = _Memo()

    def __call__(self, lams) -> np.ndarray:
        return self._memo.lookup(lams, lambda l: _forward_values(
            self.f, self.params, l, self.quad, self.radius))


def forward(f: SampledFunction, params: Parameters, lambdas, quad: QuadratureSpec | None = None,
            evaluator: "ForwardEvaluator | None" = None) -> SampledFunction:
    """Hf(lam) = int f(x) G_lam(-x) A(x) dx on the lambda grid (evaluator attached)."""
    quad = quad or QuadratureSpec()
    ev = evaluator or ForwardEvaluator(f, params, quad)
    lam = np.asarray(lambdas, dtype=float)
    return SampledFunction(lam, ev(lam), spectral_decay(f, params), SPECTRAL, ev, (0.0,),
                           f"H[{f.label}]")


# --- inverse transform --------------------------------------------------------

def _inverse_values(g: SampledFunction, params: Parameters, xs: np.ndarray,
                    quad: QuadratureSpec, radius: float) -> np.ndarray:
    xmax = max(1.0, float(np.max(np.abs(xs))))
    h0 = _dyadic_width(5.0 / xmax)
    lam_r = _round_up(radius, h0)
    edges = panel_edges([-lam_r, 0.0, lam_r] + [b for b in g.breakpoints if abs(b) < lam_r], h0)
    out = np.empty(xs.size, dtype=complex)
    for i0 in range(0, xs.size, _X_CHUNK):
        xc = xs[i0:i0 + _X_CHUNK]
        sh = np.sinh(2 * xc)

        def sums(a, b):
            p = a.size
            lam = gk_nodes(a, b).ravel()
            table = TABLES.get(params, lam)
            p1, p2 = table.pair(xc)
            gv = np.asarray(g(lam), dtype=complex) * plancherel_density(params, lam,
                                                                        DensityKind.SIGNED)
            gk = gv * table.kappa()
            half = (0.5 * (b - a))[:, None]
            res = []
            for rule in _RULES:
                c = gv.reshape(p, 21) * rule[None, :] * half
                ck = gk.reshape(p, 21) * rule[None, :] * half
                s1 = _contract(p1.T.reshape(xc.size, p, 21), c)
                s2 = _contract(p2.T.reshape(xc.size, p, 21), ck)
                res.append(s1 + s2 * sh[None, :])
            return res

        out[i0:i0 + _X_CHUNK] = integrate_panels(sums, edges, quad,
                                                 what="inverse transform").value
    return out


class InverseEvaluator:
    def __init__(self, g: SampledFunction, params: Parameters, quad: QuadratureSpec):
        if g.side != SPECTRAL:
            raise DomainError("inverse transform needs a spectral-side function")
        self.g, self.params, self.quad = g, params, quad
        self.radius = spectral_radius(g, params, quad)
        self._memo = _Memo()

    def __call__(self, xs) -> np.ndarray:
        return self._memo.lookup(xs, lambda x: _inverse_values(
            self.g, self.params, x, self.quad, self.radius))


def inverse(g: SampledFunction, params: Parameters, xs, quad: QuadratureSpec | None = None
            ) -> SampledFunction:
    """H^{-1}g(x) = int g(lam) G_lam(x) d sigma(lam) with the signed density."""
    quad = quad or QuadratureSpec()
    ev = InverseEvaluator(g, params, quad)
    x = np.asarray(xs, dtype=float)
    return SampledFunction(x, ev(x), Generic(), SPACE, ev, (), f"Hinv[{g.label}]")


# --- heat kernel --------------------------------------------------------------

def _gauss_cutoff(rate: float, power: float, tail: float = 1e-18) -> float:
    return tail_radius(Gaussian(rate), 0.0, tail, power=power)


class HeatEvaluator:
    """E_t(x) = H^{-1}(exp(-t lam^2))(x), even and real.

    For |x| < 1 the spectral integral (1/4pi) int_0^inf e^{-t lam^2} phi_lam(x) |c|^{-2} dlam
    is summed directly.  For |x| >= 1 the integral is moved to the line
    Im lam = |x|/(2t) through the Harish-Chandra expansion
    E_t(x) = (2^rho/4pi) int e^{-t lam^2} Phi_lam(x) / c(-lam) dlam,
    which keeps full relative accuracy where E_t is exponentially small.
    """

    def __init__(self, params: Parameters, t: float, quad: QuadratureSpec):
        if not t > 0:
            raise DomainError(f"heat time must be positive, got {t}")
        self.params, self.t, self.quad = params, float(t), quad
        self.cutoff = _gauss_cutoff(self.t, 2 * params.alpha + 3)
        self._memo = _Memo()

    def __call__(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return self._memo.lookup(np.abs(xs), self._compute)

    def _compute(self, ax: np.ndarray) -> np.ndarray:
        out = np.empty(ax.size, dtype=complex)
        near = ax < _HEAT_SWITCH
        if near.any():
            out[near] = self._near(ax[near])
        if (~near).any():
            out[~near] = self._far(ax[~near])
        return out.real.astype(complex)

    def _near(self, ax):
        params, t = self.params, self.t
        edges = panel_edges([0.0, _round_up(self.cutoff, 0.5)], 0.5)

        def sums(a, b):
            p = a.size
            lam = gk_nodes(a, b).ravel()
            p1, _ = TABLES.get(params, lam).pair(ax)
            wv = np.exp(-t * lam * lam) * inverse_c_squared(params, lam) / (4 * math.pi)
            half = (0.5 * (b - a))[:, None]
            return [_contract(p1.T.reshape(ax.size, p, 21), wv.reshape(p, 21) * r[None, :] * half)
                    for r in _RULES]

        return integrate_panels(sums, edges, self.quad, what="heat kernel").value

    def _far(self, ax):
        params, t = self.params, self.t
        m = _round_up(self.cutoff, 0.5)
        edges = panel_edges([-m, 0.0, m], 0.5)
        pref = math.log(2.0) * params.rho - math.log(4 * math.pi)
        out = np.empty(ax.size, dtype=complex)
        for i0 in range(0, ax.size, _X_CHUNK):
            xc = ax[i0:i0 + _X_CHUNK]
            eta = xc / (2 * t)

            def sums(a, b):
                p = a.size
                mu = gk_nodes(a, b).ravel()
                lam = mu[:, None] + 1j * eta[None, :]
                vals = np.exp(-t * lam * lam - _log_c(params, -lam) + pref) \
                    * harish_chandra_phi(params, lam, xc[None, :])
                vals = vals.reshape(p, 21, xc.size)
                half = (0.5 * (b - a))[:, None]
                return [np.einsum("pnx,n->px", vals, r) * half for r in _RULES]

            out[i0:i0 + _X_CHUNK] = integrate_panels(sums, edges, self.quad,
                                                     what="heat kernel").value
        return out


def heat_kernel(params: Parameters, t: float, xs, quad: QuadratureSpec | None = None
                ) -> SampledFunction:
    quad = quad or QuadratureSpec()
    ev = HeatEvaluator(params, t, quad)
    x = np.asarray(xs, dtype=float)
    return SampledFunction(x, ev(x), Gaussian(1.0 / (4.0 * t), params.rho), SPACE, ev,
                           (0.0,), f"E_{t:g}")


# --- norms --------------------------------------------------------------------

def weighted_norm(h: SampledFunction, params: Parameters, p: float, a: float,
                  side: MeasureSide, quad: QuadratureSpec | None = None,
                  radius: float | None = None) -> float:
    """(int (|x|^a |h|)^p d mu)^{1/p}; p = inf gives the max over the grid."""
    quad = quad or QuadratureSpec()
    if a < 0:
        raise DomainError(f"weight exponent must be >= 0, got {a}")
    if not p >= 1:
        raise DomainError(f"need p >= 1, got {p}")
    if math.isinf(p):
        return float(np.max(np.abs(h.grid) ** a * np.abs(h.values)))
    tail = False
    if radius is None:
        if side is MeasureSide.SPACE_WEIGHT:
            radius = space_radius(h, params, quad)
        else:
            radius = spectral_radius(h, params, quad)
            tail = _needs_spectral_tail(h, quad)

    def integrand(x):
        return (np.abs(x) ** a * np.abs(h(x))) ** p * measure_density(params, side, x)

    res = integrate(integrand, function_edges(h, radius, 0.5), quad, what="weighted norm")
    total = float(res.value.real)
    if tail:
        try:
            total += float(np.real(_spectral_tail(integrand, radius, total, quad,
                                                  "weighted norm", NORM_TAIL)))
        except SpectralTailError as exc:
            exc.partial = float(np.real(exc.partial)) ** (1.0 / p)
            raise
    return total ** (1.0 / p)


def _needs_spectral_tail(h: SampledFunction, quad: QuadratureSpec) -> bool:
    """Generic-class spectral function that can be evaluated past its grid."""
    return (h.side == SPECTRAL and h.evaluator is not None and isinstance(h.decay, Generic)
            and isinstance(quad.truncation, Auto))


@dataclass(frozen=True)
class PlancherelResult:
    residual: float
    lhs: float
    rhs: complex
    simplified_ratio: float

    def __float__(self):
        return self.residual


def plancherel_residual(f: SampledFunction, params: Parameters,
                        quad: QuadratureSpec | None = None,
                        hf: SampledFunction | None = None) -> PlancherelResult:
    """|LHS - RHS|/LHS for int |f|^2 A = int Hf(lam) conj(H fcheck(-lam)) d sigma(lam).

    Also returns ||Hf||_{L^2(|sigma|)} / ||f||_{L^2(A)}.
    """
    quad = quad or QuadratureSpec()
    lhs = weighted_norm(f, params, 2, 0, MeasureSide.SPACE_WEIGHT, quad) ** 2
    if lhs == 0:
        raise DegenerateInput("Plancherel residual undefined for f = 0")
    ev = hf.evaluator if hf is not None and hf.evaluator is not None \
        else ForwardEvaluator(f, params, quad)
    evc = ForwardEvaluator(reflect(f), params, quad)
    extent = 40.0 if hf is None else float(np.max(np.abs(hf.grid)))
    probe = SampledFunction(np.array([-extent, extent]), np.zeros(2),
                            spectral_decay(f, params), SPECTRAL, ev)
    lam_r = spectral_radius(probe, params, quad)

    def integrand(lam):
        h1 = ev(lam)
        h2 = evc(-lam)
        signed = h1 * np.conj(h2) * plancherel_density(params, lam, DensityKind.SIGNED)
        absd = np.abs(h1) ** 2 * plancherel_density(params, lam, DensityKind.ABS)
        return np.stack([signed, absd], axis=1)

    res = integrate(integrand, panel_edges([-lam_r, 0.0, lam_r], 0.5), quad,
                    what="Plancherel")
    value = res.value
    if _needs_spectral_tail(probe, quad):
        value = value + _spectral_tail(integrand, lam_r, value, quad, "Plancherel",
                                       PLANCHEREL_TAIL)
    rhs = complex(value[0])
    ratio = math.sqrt(float(value[1].real) / lhs)
    return PlancherelResult(abs(lhs - rhs) / lhs, lhs, rhs, ratio)
