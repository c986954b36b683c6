"""Shared, cached fixtures for the test modules."""
from functools import lru_cache

import numpy as np

from opdam.corpus import CorpusSpec, generate_corpus
from opdam.functions import SPACE, Compact, Gaussian, SampledFunction
from opdam.inequalities import estimate_lambda_min
from opdam.measure import fit_c_constants
from opdam.quadrature import QuadratureSpec
from opdam.specfun import Parameters

PARAMS = (Parameters(0.0, 0.0), Parameters(0.5, -0.5), Parameters(1.0, 0.0))
PARAM_IDS = ("a0b0", "a.5b-.5", "a1b0")
QUAD = QuadratureSpec()
ACCEPTANCE_LINES: list = []


@lru_cache(maxsize=None)
def corpus(p: Parameters) -> tuple:
    return tuple(generate_corpus(CorpusSpec(), p, quad=QUAD))


@lru_cache(maxsize=None)
def constants(p: Parameters):
    return fit_c_constants(p)


@lru_cache(maxsize=None)
def rayleigh(p: Parameters):
    return estimate_lambda_min(list(corpus(p)), p, QUAD)


def member(p: Parameters, prefix: str) -> SampledFunction:
    for f in corpus(p):
        if f.label.startswith(prefix):
            return f
    raise KeyError(prefix)


def gaussian(rate=1.0, skew=0.0, grid=None) -> SampledFunction:
    xs = np.linspace(-8, 8, 1025) if grid is None else grid
    ev = lambda x: np.exp(-rate * np.asarray(x) ** 2) * (1 + skew * np.asarray(x)) + 0j
    return SampledFunction(xs, ev(xs), Gaussian(rate), SPACE, ev, (), f"gauss{rate:g}")


def indicator(r: float) -> SampledFunction:
    xs = np.linspace(-r, r, 201)
    ev = lambda x: (np.abs(np.asarray(x)) <= r).astype(complex)
    return SampledFunction(xs, ev(xs), Compact(r), SPACE, ev, (-r, r), f"chi{r:g}")


@lru_cache(maxsize=None)
def suite(p: Parameters) -> tuple:
    """Full default suite on the default corpus, lambda_min from the same corpus."""
    from opdam.inequalities import run_suite
    return tuple(run_suite(list(corpus(p)), p, constants(p), rayleigh(p).value, QUAD))


FINE_QUAD = QUAD.refined()


@lru_cache(maxsize=None)
def refined_corpus(p: Parameters) -> tuple:
    """The default corpus on doubled space and spectral grids with halved tolerances."""
    from opdam.corpus import Grids
    from opdam.functions import default_space_grid, default_spectral_grid
    from opdam.inequalities import analysis
    grids = Grids(default_space_grid(points=2049), default_spectral_grid(points=4097))
    members = tuple(generate_corpus(CorpusSpec(), p, grids, FINE_QUAD))
    for f in members:
        analysis(f, p, FINE_QUAD, grids.spectral)
    return members
