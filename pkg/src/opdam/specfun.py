"""Special functions: complex log-Gamma, Gauss 2F1, Jacobi functions, Opdam kernel.

Jacobi functions are evaluated in two regimes.  Close to the origin the
Pfaff-transformed hypergeometric series converges fast.  Further out the
Liouville normal form u = sqrt(A) * phi of the Jacobi equation is integrated
with an explicit high-order Runge-Kutta scheme, vectorized over lambda, and
continued analytically once the potential is below double precision.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import loggamma

from .errors import AccuracyError, DomainError, PoleError

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Parameters:
    """Admissible pair (alpha, beta) together with rho = alpha + beta + 1."""

    alpha: float
    beta: float
    rho: float = field(init=False)

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"non-finite parameters alpha={a}, beta={b}")
        if not (a >= b >= -0.5 and a > -0.5):
            raise DomainError(
                f"need alpha >= beta >= -1/2 and alpha > -1/2, got alpha={a}, beta={b}"
            )
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "rho", a + b + 1.0)
        assert self.rho > 0

    def shifted(self, k: int = 1) -> "Parameters":
        return Parameters(self.alpha + k, self.beta + k)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta}


def _is_nonpositive_integer(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def ln_gamma_complex(z):
    """Principal branch of log Gamma for complex (array) input.

    Raises
    ------
    PoleError
        If any entry is a nonpositive integer.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(np.isfinite(z)):
        raise DomainError("ln_gamma_complex needs finite input")
    if np.any(_is_nonpositive_integer(z)):
        raise PoleError("log-Gamma pole at a nonpositive integer")
    out = loggamma(z)
    return out[0] if scalar else out


def _series_limit(a, b, c, w, rel_tol, max_terms):
    """Sum of the 2F1 power series in w, broadcast over all arguments.

    Returns the sum and the largest term modulus seen (for a cancellation estimate).
    """
    a, b, c, w = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a, b, c, w)))
    term = np.ones(a.shape, dtype=complex)
    total = term.copy()
    peak = np.ones(a.shape)
    aw = np.abs(w)
    for n in range(max_terms):
        term = term * ((a + n) * (b + n) / ((n + 1.0) * (c + n))) * w
        total += term
        mag = np.abs(term)
        np.maximum(peak, mag, out=peak)
        ratio = np.abs((a + n + 1) * (b + n + 1) / ((n + 2.0) * (c + n + 1))) * aw
        with np.errstate(over="ignore"):  # a diverging series just never finishes
            done = (mag == 0) | ((ratio < 1) & (mag * ratio / np.maximum(1 - ratio, 1e-300)
                                                  <= rel_tol * np.abs(total)))
        if np.all(done):
            return total, peak, n + 1
    raise AccuracyError(f"2F1 series did not converge within {max_terms} terms")


def gauss_2f1(a: complex, b: complex, c: complex, z: float, *,
              rel_tol: float = 1e-12, max_terms: int = 20000) -> complex:
    """Gauss hypergeometric function for real z <= 0.

    Uses the Pfaff map w = z/(z-1) in [0, 1), so the series argument is
    always contractive.

    Raises
    ------
    PoleError
        If c is a nonpositive integer.
    AccuracyError
        If the series needs more than ``max_terms`` terms or loses more
        accuracy to cancellation than ``rel_tol`` allows.
    """
    z = float(z)
    if _is_nonpositive_integer(c):
        raise PoleError(f"2F1 undefined for c={c}")
    if not z <= 0:
        raise DomainError(f"gauss_2f1 requires z <= 0, got {z}")
    if z == 0:
        return 1.0 + 0.0j
    w = z / (z - 1.0)
    best = None
    for p, q, pref in ((a, c - b, a), (c - a, b, b)):
        s, peak, nterms = _series_limit(p, q, c, w, _EPS, max_terms)
        s, peak = complex(s), float(peak)
        if s == 0:
            continue
        err = 4 * _EPS * peak * math.sqrt(nterms) / abs(s)
        value = complex(np.exp(-complex(pref) * math.log1p(-z)) * s)
        if err <= rel_tol:
            return value
        if best is None or err < best[0]:
            best = (err, value)
    if best is None:
        return 0.0j
    raise AccuracyError(f"2F1 lost accuracy to cancellation (estimated {best[0]:.2e})")


def _jacobi_series(alpha: float, beta: float, lam: np.ndarray, x: np.ndarray) -> np.ndarray:
    """phi^{alpha,beta}_lam(x) on the outer product lam x x through the Pfaff series."""
    rho = alpha + beta + 1.0
    lam = np.asarray(lam, dtype=complex)[:, None]
    x = np.asarray(x, dtype=float)[None, :]
    a = (rho + 1j * lam) / 2
    bp = (alpha - beta + 1 + 1j * lam) / 2
    s, _, _ = _series_limit(a, bp, alpha + 1.0, np.tanh(x) ** 2, _EPS, 2000)
    return np.exp(-2.0 * a * np.log(np.cosh(x))) * s


def _log_weight(alpha: float, beta: float, x):
    """log A(x) for x > 0, stable for large x."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-2.0 * x)
    log_sinh = x + np.log1p(-e) - math.log(2.0)
    log_cosh = x + np.log1p(e) - math.log(2.0)
    return (2 * alpha + 1) * log_sinh + (2 * beta + 1) * log_cosh


def _potential(alpha: float, beta: float, x: float) -> float:
    rho = alpha + beta + 1.0
    t = math.tanh(x)
    p = (2 * alpha + 1) / t + (2 * beta + 1) * t
    dp = -(2 * alpha + 1) / math.sinh(x) ** 2 + (2 * beta + 1) / math.cosh(x) ** 2
    return rho * rho - 0.25 * p * p - 0.5 * dp


def _free_start(alpha: float, beta: float) -> float:
    # the potential of the shifted equation decays like 4|(a+1)^2-(b+1)^2| e^{-2x}
    amp = max(1.0, 4.0 * abs((alpha - beta) * (alpha + beta + 2.0)))
    return max(20.0, 0.5 * math.log(1e18 * amp))


def _phi_ode(alpha: float, beta: float, lam: np.ndarray, x0: float, xs: np.ndarray):
    """phi and phi^{+} at sorted points xs > x0 by integrating the Liouville form."""
    n = lam.size
    cplx = np.iscomplexobj(lam)
    dtype = complex if cplx else float
    lam2 = lam * lam

    def start(a, b):
        r = a + b + 1
        ph = _jacobi_series(a, b, lam, [x0])[:, 0]
        php = _jacobi_series(a + 1, b + 1, lam, [x0])[:, 0]
        if not cplx:
            ph, php = ph.real, php.real
        dph = -(lam2 + r * r) / (4 * (a + 1)) * math.sinh(2 * x0) * php
        sa = math.exp(0.5 * float(_log_weight(a, b, x0)))
        p = (2 * a + 1) / math.tanh(x0) + (2 * b + 1) * math.tanh(x0)
        return sa * ph, sa * (dph + 0.5 * p * ph)

    u0, du0 = start(alpha, beta)
    v0, dv0 = start(alpha + 1, beta + 1)
    y0 = np.concatenate([u0, du0, v0, dv0]).astype(dtype)
    out = np.empty(4 * n, dtype=dtype)

    def rhs(x, y):
        qa = _potential(alpha, beta, x)
        qb = _potential(alpha + 1, beta + 1, x)
        out[:n] = y[n:2 * n]
        np.multiply(-(lam2 + qa), y[:n], out=out[n:2 * n])
        out[2 * n:3 * n] = y[3 * n:]
        np.multiply(-(lam2 + qb), y[2 * n:3 * n], out=out[3 * n:])
        return out.copy()

    xfree = _free_start(alpha, beta)
    inner = xs[xs <= xfree]
    need_free = xs.size > inner.size
    t_eval = inner if not need_free else np.append(inner, xfree)
    t_end = float(t_eval[-1])
    scale = max(1e-300, float(np.max(np.abs(y0))))
    # The span is always (x0, xfree) and the run stops by event just past the
    # last node, so the step sequence, and thus every value, does not depend
    # on which other nodes share the batch.
    events = None
    if t_end < xfree:
        stop = min(xfree, t_end * (1 + 1e-9) + 1e-12)

        def events(x, y):
            return x - stop
        events.terminal = True
    sol = solve_ivp(rhs, (x0, xfree), y0, method="DOP853", t_eval=t_eval,
                    rtol=1e-12, atol=1e-15 * scale, events=events)
    if not sol.success:
        raise AccuracyError(f"Jacobi ODE integration failed: {sol.message}")
    y = sol.y
    if need_free:
        yf = y[:, -1]
        y = y[:, :-1]
        far = xs[xs > xfree]
        d = far - xfree
        lam_col = lam[:, None]
        c = np.cos(lam_col * d[None, :])
        s = d[None, :] * np.sinc(lam_col * d[None, :] / np.pi)
        u = yf[:n, None] * c + yf[n:2 * n, None] * s
        v = yf[2 * n:3 * n, None] * c + yf[3 * n:, None] * s
        y_far = (u, v)
    u_in, v_in = y[:n], y[2 * n:3 * n]
    if need_free:
        u_in = np.concatenate([u_in, y_far[0]], axis=1)
        v_in = np.concatenate([v_in, y_far[1]], axis=1)
    isa = np.exp(-0.5 * _log_weight(alpha, beta, xs))
    isb = np.exp(-0.5 * _log_weight(alpha + 1, beta + 1, xs))
    return u_in * isa[None, :], v_in * isb[None, :]


def jacobi_pair(params: Parameters, lam, ax) -> tuple[np.ndarray, np.ndarray]:
    """phi_lam and phi^{alpha+1,beta+1}_lam on the outer product of lam and ax.

    ``ax`` must be sorted, unique and nonnegative.  Real ``lam`` yields real
    arrays.
    """
    lam = np.atleast_1d(np.asarray(lam))
    cplx = np.iscomplexobj(lam) and np.any(lam.imag != 0)
    lam = lam.astype(complex) if cplx else lam.real.astype(float)
    ax = np.atleast_1d(np.asarray(ax, dtype=float))
    dtype = complex if cplx else float
    phi = np.empty((lam.size, ax.size), dtype=dtype)
    php = np.empty_like(phi)
    if ax.size == 0 or lam.size == 0:
        return phi, php
    a, b = params.alpha, params.beta
    x0 = min(0.5, 0.75 / max(1.0, float(np.max(np.abs(lam)))))
    small = ax <= x0
    if small.any():
        s1 = _jacobi_series(a, b, lam, ax[small])
        s2 = _jacobi_series(a + 1, b + 1, lam, ax[small])
        phi[:, small] = s1 if cplx else s1.real
        php[:, small] = s2 if cplx else s2.real
    if (~small).any():
        p1, p2 = _phi_ode(a, b, lam, x0, ax[~small])
        phi[:, ~small] = p1
        php[:, ~small] = p2
    return phi, php


class _Columns:
    """Growable (phi, phi^{+}) columns per node |x| for fixed row lambdas.

    Inserts are serialized by a lock; lookups of cached nodes never write.
    """

    def __init__(self, params: Parameters, unique: np.ndarray):
        self.params, self.unique = params, unique
        dtype = complex if np.iscomplexobj(unique) else float
        self.cols: dict[float, int] = {}
        self.p1 = np.empty((unique.size, 0), dtype=dtype)
        self.p2 = np.empty_like(self.p1)
        self.n = 0
        self._lock = threading.Lock()

    @property
    def nbytes(self) -> int:
        return int(self.p1.nbytes + self.p2.nbytes)

    def ensure(self, ax: np.ndarray) -> np.ndarray:
        cols = self.cols
        keys = ax.tolist()
        if any(v not in cols for v in keys):
            with self._lock:
                missing = np.unique(np.array([v for v in keys if v not in cols]))
                if missing.size:
                    p1, p2 = jacobi_pair(self.params, self.unique, missing)
                    need = self.n + missing.size
                    if need > self.p1.shape[1]:
                        cap = max(need, 2 * self.p1.shape[1])
                        for name in ("p1", "p2"):
                            old = getattr(self, name)
                            new = np.empty((old.shape[0], cap), dtype=old.dtype)
                            new[:, :self.n] = old[:, :self.n]
                            setattr(self, name, new)
                    self.p1[:, self.n:need] = p1
                    self.p2[:, self.n:need] = p2
                    for j, v in enumerate(missing.tolist()):
                        cols[v] = self.n + j
                    self.n = need
        return np.fromiter((cols[v] for v in keys), dtype=int, count=len(keys))


class KernelTable:
    """Jacobi functions for a fixed lambda set, cached per node |x|.

    Real lambdas share the columns of lambda and -lambda, so the stored
    arrays are indexed by the unique values |lambda| (``unique``) and
    expanded with ``inverse``.  Tables whose lambdas agree up to sign may
    share one ``store``.
    """

    def __init__(self, params: Parameters, lambdas, store: "_Columns | None" = None):
        lam = np.atleast_1d(np.asarray(lambdas))
        self.params = params
        self.complex = bool(np.iscomplexobj(lam) and np.any(lam.imag != 0))
        if self.complex:
            self.lambdas = lam.astype(complex)
            self.unique = self.lambdas
            self.inverse = np.arange(lam.size)
        else:
            self.lambdas = lam.real.astype(float)
            self.unique, self.inverse = np.unique(np.abs(self.lambdas), return_inverse=True)
        if store is None:
            store = _Columns(params, self.unique)
        elif not np.array_equal(store.unique, self.unique):
            raise ValueError("shared columns need the same |lambda| set")
        self.store = store

    @property
    def nbytes(self) -> int:
        return self.store.nbytes

    def pair_unique(self, ax) -> tuple[np.ndarray, np.ndarray]:
        """(phi, phi^{+}) at |x|, rows indexed by ``unique``."""
        ax = np.abs(np.atleast_1d(np.asarray(ax, dtype=float)))
        s = self.store
        idx = s.ensure(ax)
        return s.p1[:, idx], s.p2[:, idx]

    def pair(self, ax) -> tuple[np.ndarray, np.ndarray]:
        p1, p2 = self.pair_unique(ax)
        return p1[self.inverse], p2[self.inverse]

    def kappa(self) -> np.ndarray:
        return (self.params.rho + 1j * self.lambdas) / (4 * (self.params.alpha + 1))

    def kernel(self, x) -> np.ndarray:
        """G_lam(x), shape (n_lambda, n_x)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        p1, p2 = self.pair(x)
        return p1 + self.kappa()[:, None] * np.sinh(2 * x)[None, :] * p2

    def kernel_weighted(self, x, reflect: bool = True) -> np.ndarray:
        """G_lam(-x) A(x) if ``reflect`` else G_lam(x) A(x)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        g = self.kernel(-x if reflect else x)
        return g * _weight(self.params, x)[None, :]


def _weight(params: Parameters, x) -> np.ndarray:
    ax = np.abs(np.asarray(x, dtype=float))
    return np.sinh(ax) ** (2 * params.alpha + 1) * np.cosh(ax) ** (2 * params.beta + 1)


def jacobi_phi(params: Parameters, lam: complex, x):
    """Jacobi function phi^{alpha,beta}_lam(x); even in x, equal to 1 at x=0."""
    scalar = np.ndim(x) == 0
    xa = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    uniq, inv = np.unique(xa, return_inverse=True)
    phi, _ = jacobi_pair(params, np.array([lam]), uniq)
    out = phi[0, inv].astype(complex)
    return out[0] if scalar else out


def opdam_kernel(params: Parameters, lam: complex, x):
    """Opdam kernel G_lam(x) = phi_lam(x) + (rho+i lam)/(4(alpha+1)) sinh(2x) phi^{+}_lam(x)."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    uniq, inv = np.unique(np.abs(x), return_inverse=True)
    phi, php = jacobi_pair(params, np.array([lam]), uniq)
    kappa = (params.rho + 1j * complex(lam)) / (4 * (params.alpha + 1))
    out = phi[0, inv] + kappa * np.sinh(2 * x) * php[0, inv]
    out = np.asarray(out, dtype=complex)
    return out[0] if scalar else out


def cherednik_apply(f: Callable, params: Parameters, x):
    """Jacobi-Cherednik operator T f(x) = f' + P(x)(f(x)-f(-x))/2 - rho f(-x).

    ``f`` is any vectorized callable (a SampledFunction qualifies).  The
    derivative uses Richardson-extrapolated central differences.  For
    |x| < 1e-4 the odd quotient (f(x)-f(-x))/(2x) is replaced by f'(0),
    which reproduces the limit T f(0) = (2 alpha + 2) f'(0) - rho f(0).
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = _EPS ** (1.0 / 3.0) * np.maximum(1.0, np.abs(x))
    near = np.abs(x) < 1e-4
    pts = np.concatenate([x, -x, x + h, x - h, x + h / 2, x - h / 2,
                          h[near], -h[near], h[near] / 2, -h[near] / 2])
    try:
        vals = np.asarray(f(pts), dtype=complex)
    except DomainError:
        raise
    except (ValueError, IndexError) as exc:
        raise DomainError(f"function not evaluable near x: {exc}") from exc
    if vals.shape != pts.shape or not np.all(np.isfinite(vals)):
        raise DomainError("function not evaluable in the derivative stencil")
    n, m = x.size, int(near.sum())
    fx, fm, fp1, fm1, fp2, fm2 = (vals[k * n:(k + 1) * n] for k in range(6))
    d1 = (fp1 - fm1) / (2 * h)
    d2 = (fp2 - fm2) / h
    deriv = (4 * d2 - d1) / 3
    a, b, rho = params.alpha, params.beta, params.rho
    out = np.empty(n, dtype=complex)
    far = ~near
    xf = x[far]
    p = (2 * a + 1) / np.tanh(xf) + (2 * b + 1) * np.tanh(xf)
    out[far] = deriv[far] + p * (fx[far] - fm[far]) / 2 - rho * fm[far]
    if m:
        tail = vals[6 * n:]
        hp, hm, hp2, hm2 = (tail[k * m:(k + 1) * m] for k in range(4))
        hn = h[near]
        d0 = (4 * (hp2 - hm2) / hn - (hp - hm) / (2 * hn)) / 3
        xn = x[near]
        xcoth = np.where(xn == 0, 1.0, xn / np.tanh(np.where(xn == 0, 1.0, xn)))
        xtanh = xn * np.tanh(xn)
        out[near] = deriv[near] + ((2 * a + 1) * xcoth + (2 * b + 1) * xtanh) * d0 \
            - rho * fm[near]
    return out[0] if scalar else out


def harish_chandra_phi(params: Parameters, lam, x) -> np.ndarray:
    """Harish-Chandra function Phi_lam(x) ~ e^{(i lam - rho) x} for x > 0.

    Phi_lam(x) = (2 cosh x)^{i lam - rho} 2F1((rho - i lam)/2, (alpha-beta+1 - i lam)/2;
    1 - i lam; sech^2 x), broadcast over lam and x.  Intended for x >= 1 and
    lam off the poles -iN.
    """
    lam, x = np.broadcast_arrays(np.asarray(lam, dtype=complex), np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise DomainError("harish_chandra_phi needs x > 0")
    a, b, rho = params.alpha, params.beta, params.rho
    il = 1j * lam
    z = 1.0 / np.cosh(x) ** 2
    s, _, _ = _series_limit((rho - il) / 2, (a - b + 1 - il) / 2, 1 - il, z, _EPS, 5000)
    return np.exp((il - rho) * (x + np.log1p(np.exp(-2 * x)))) * s
