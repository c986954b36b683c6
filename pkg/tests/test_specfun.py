import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opdam.errors import AccuracyError, DomainError, PoleError
from opdam.specfun import (Parameters, cherednik_apply, gauss_2f1, harish_chandra_phi,
                           jacobi_phi, ln_gamma_complex, opdam_kernel)

from helpers import PARAMS, PARAM_IDS


# --- Parameters -------------------------------------------------------------------

def test_parameters_rho():
    assert Parameters(1.0, 0.0).rho == 2.0


@pytest.mark.parametrize("a,b", [(-0.5, -0.5), (0.0, 0.5), (0.0, -0.6), (math.nan, 0.0)])
def test_parameters_rejected(a, b):
    with pytest.raises(DomainError):
        Parameters(a, b)


# --- log-Gamma --------------------------------------------------------------------

def test_ln_gamma_one():
    assert ln_gamma_complex(1.0) == pytest.approx(0.0, abs=1e-15)


def test_ln_gamma_half():
    assert ln_gamma_complex(0.5).real == pytest.approx(0.5723649429247001, rel=1e-14)


def test_ln_gamma_frozen_oracle():
    # mpmath.loggamma(2+3j) at 30 digits
    ref = complex(-2.09285175309273334956418862503, 2.30239654346686762615370761779)
    assert abs(ln_gamma_complex(2 + 3j) - ref) < 1e-13


@pytest.mark.parametrize("z", [0, -1, -7, -3 + 0j])
def test_ln_gamma_poles(z):
    with pytest.raises(PoleError):
        ln_gamma_complex(z)


@settings(max_examples=60, deadline=None)
@given(st.floats(-30, 30), st.floats(-40, 40))
def test_ln_gamma_matches_mpmath(re, im):
    z = complex(re, im)
    if abs(z - round(re)) < 1e-6 and round(re) <= 0:
        return
    ref = complex(mp.loggamma(mp.mpc(re, im)))
    got = ln_gamma_complex(z)
    # branches may differ by 2 pi i on the cut along the negative axis
    d = got - ref
    d = complex(d.real, math.remainder(d.imag, 2 * math.pi))
    assert abs(d) <= 1e-12 * max(1.0, abs(ref))


# --- 2F1 --------------------------------------------------------------------------

def test_2f1_zero_argument():
    assert gauss_2f1(1.3 + 2j, -0.7, 2.5, 0.0) == 1


def test_2f1_log2():
    assert gauss_2f1(1, 1, 2, -1.0) == pytest.approx(math.log(2), rel=1e-14)


@pytest.mark.parametrize("z", [-0.1, -3.0, -1e3])
def test_2f1_a_zero(z):
    assert gauss_2f1(0.0, 2.5 + 1j, 1.5, z) == pytest.approx(1.0, abs=1e-15)


def test_2f1_c_pole():
    with pytest.raises(PoleError):
        gauss_2f1(1, 1, -2, -0.5)


def test_2f1_positive_argument_rejected():
    with pytest.raises(DomainError):
        gauss_2f1(1, 1, 2, 0.5)


def test_2f1_budget():
    with pytest.raises(AccuracyError):
        gauss_2f1(0.5, 200.5, 1.5, -1e6, max_terms=5)


# mpmath.hyp2f1 at 30 digits
FROZEN_2F1 = [
    ((0.5, 1.5, 2.25, -0.5), 0.869359081113714831009124987915),
    ((1 + 2j, 1 - 2j, 1.5, -3.0), -0.0613194431391087729681469761115),
    ((-0.5, 1, 2, -10.0), 2.36552484626062655601761734023),
]


def test_2f1_refuses_catastrophic_cancellation():
    # true value -3.97430847792465229126658301095e-8 (mpmath) sits far below the
    # O(1) series terms, so a double-precision sum cannot resolve it
    with pytest.raises(AccuracyError):
        gauss_2f1(3 + 15j, 3 - 15j, 2, -50.0)


@pytest.mark.parametrize("args,ref", FROZEN_2F1)
def test_2f1_frozen_oracle(args, ref):
    assert abs(gauss_2f1(*args) - ref) <= 1e-11 * max(abs(ref), 1e-3)


def _direct_series(a, b, c, z, terms=400):
    total, term = 1 + 0j, 1 + 0j
    for n in range(terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
    return total


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.5, 4),
       st.floats(-0.5, 0))
def test_2f1_matches_direct_series(ar, ai, b, c, z):
    a = complex(ar, ai)
    ref = _direct_series(a, b, c, z)
    assert abs(gauss_2f1(a, b, c, z) - ref) <= 1e-10 * max(1.0, abs(ref))


# --- Jacobi function and kernel ---------------------------------------------------

@pytest.mark.parametrize("p", PARAMS, ids=PARAM_IDS)
def test_phi_at_origin(p):
    assert jacobi_phi(p, 3.7, 0.0) == 1


@pytest.mark.parametrize("p", PARAMS, ids=PARAM_IDS)
def test_phi_trivial_at_i_rho(p):
    vals = jacobi_phi(p, 1j * p.rho, np.array([0.3, 1.0, 2.5]))
    assert np.allclose(vals, 1.0, rtol=0, atol=1e-10)


def test_phi_pfaff_series_oracle():
    # phi = (1-z)^{-a} sum_n (a)_n (c-b)_n / ((c)_n n!) w^n, w = z/(z-1), z = -sinh^2 1
    a, b, c = 0.5 + 0.5j, 0.5 - 0.5j, 1.0
    z = -math.sinh(1.0) ** 2
    w = z / (z - 1)
    ref = (1 - z) ** (-a) * _direct_series(a, c - b, c, w, terms=200)
    assert abs(ref - 0.615055374971018175290474951078) < 1e-13
    assert abs(jacobi_phi(Parameters(0, 0), 1.0, 1.0) - ref) < 1e-11


@pytest.mark.parametrize("p", PARAMS, ids=PARAM_IDS)
def test_phi_even_exactly(p):
    x = np.linspace(0.01, 4, 37)
    np.testing.assert_array_equal(jacobi_phi(p, 2.3, x), jacobi_phi(p, 2.3, -x))


def test_kernel_at_origin_exact():
    for p in PARAMS:
        for lam in (0.0, 1.0, -7.5, 2 + 0.5j):
            assert opdam_kernel(p, lam, 0.0) == 1


def test_kernel_i_rho():
    assert abs(opdam_kernel(Parameters(0, 0), 1j, 1.0) - 1) < 1e-12


# G via mpmath hyp2f1 at 30 digits: (alpha, beta, lambda, x, value)
FROZEN_G = [
    (0, 0, 2, 0.7, 0.729919216432789665203945165409 + 0.437608775528995206355273266803j),
    (0.5, -0.5, 3.5, 1.3, -0.173369498579575216769834644024 - 0.025743984959408843040323502218j),
    (1, 0, 1.5, -2.0, -0.00777855517650415009574088907336 - 0.0383918319791741014822738300119j),
    (1, 0, 10, 0.4, 0.00157663164495584563910701010926 + 0.160655876642195945824766301091j),
    (0, 0, 0.5 + 0.25j, 2.5, 0.408589852078838628198312456765 - 0.0381215934040087390938541515198j),
]


@pytest.mark.parametrize("a,b,lam,x,ref", FROZEN_G)
def test_kernel_frozen_oracle(a, b, lam, x, ref):
    assert abs(opdam_kernel(Parameters(a, b), lam, x) - ref) < 1e-10 * max(1, abs(ref))


@pytest.mark.parametrize("p", PARAMS, ids=PARAM_IDS)
@pytest.mark.parametrize("lam", [0.5, 3.0, 12.0])
def test_kernel_bound_stable_under_refinement(p, lam):
    def sup(n):
        x = np.linspace(-8, 8, n)
        return np.max(np.abs(opdam_kernel(p, lam, x)) * np.exp(p.rho * np.abs(x)))
    s1, s2 = sup(801), sup(1601)
    assert np.isfinite(s1) and abs(s2 / s1 - 1) < 0.01


def test_kernel_bound_complex_lambda():
    p = Parameters(0.5, -0.5)
    lam = 1.5 + 0.4j
    x = np.linspace(-8, 8, 1601)
    scaled = np.abs(opdam_kernel(p, lam, x)) * np.exp(-(abs(lam.imag) - p.rho) * np.abs(x))
    assert np.all(np.isfinite(scaled)) and scaled.max() < 10


def test_harish_chandra_asymptotics():
    p = Parameters(1, 0)
    lam = np.array([0.7, 3.0])
    x = 12.0
    ratio = harish_chandra_phi(p, lam, x) / np.exp((1j * lam - p.rho) * x)
    assert np.allclose(ratio, 1, atol=1e-9)


# --- Jacobi-Cherednik operator ----------------------------------------------------

def test_cherednik_constant():
    assert cherednik_apply(lambda x: np.ones_like(x), Parameters(0, 0), 1.0) == \
        pytest.approx(-1.0, abs=1e-9)


@pytest.mark.parametrize("p", PARAMS, ids=PARAM_IDS)
@pytest.mark.parametrize("x", [0.0, 3e-5, -2e-5])
def test_cherednik_odd_limit(p, x):
    # T sinh = (2a+2) cosh x + (2b+1) sinh x tanh x + rho sinh x, which tends to 2a+2
    got = cherednik_apply(np.sinh, p, x)
    exact = ((2 * p.alpha + 2) * math.cosh(x) + (2 * p.beta + 1) * math.sinh(x) * math.tanh(x)
             + p.rho * math.sinh(x))
    assert got == pytest.approx(exact, abs=1e-7)
    assert abs(got - (2 * p.alpha + 2)) < 1e-4


@pytest.mark.parametrize("p", PARAMS, ids=PARAM_IDS)
@pytest.mark.parametrize("lam", [0.5, 2.0, 7.0])
def test_kernel_eigen_equation(p, lam):
    x = np.linspace(-4, 4, 81)
    g = lambda y: opdam_kernel(p, lam, y)
    res = cherednik_apply(g, p, x) - 1j * lam * g(x)
    assert np.max(np.abs(res)) <= 1e-6 * (1 + lam)


def test_cherednik_rejects_nonfinite():
    with pytest.raises(DomainError):
        cherednik_apply(lambda x: np.log(np.asarray(x) - 1.0 + 0j) * np.nan, Parameters(0, 0),
                        0.5)
