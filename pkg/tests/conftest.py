"""Shared fixtures for the selfdecomp test suite."""

import io

import pytest

from charfn import (
    BesselKModel, BesselKParams, GammaModel, GammaParams, LevyModel, LevyParams,
    LogGammaModel, LogGammaParams, SymStable1Model, SymStable1Params,
)
from quadrature import DEFAULT_QUAD
from samplers import RngStream


@pytest.fixture
def quad():
    return DEFAULT_QUAD


@pytest.fixture
def stream():
    """Factory for independent streams under one test seed"""
    def make(stream_id=0, seed=2024):
        return RngStream(seed, stream_id)
    return make


CATALOG = {
    "gamma": GammaModel(GammaParams(2.0, 1.0)),
    "loggamma": LogGammaModel(LogGammaParams(1.5, 2.0)),
    "levy": LevyModel(LevyParams(0.5, 2.0)),
    "stable1": SymStable1Model(SymStable1Params(1.0)),
    "besselk": BesselKModel(BesselKParams(1.0, 1.0)),
}


@pytest.fixture(params=sorted(CATALOG))
def catalog_model(request):
    return CATALOG[request.param]


@pytest.fixture
def run_cli():
    """Run cli.main with captured standard output; returns (exit code, text)"""
    from cli import main

    def run(*argv):
        out = io.StringIO()
        code = main(list(argv), stdout=out)
        return code, out.getvalue()
    return run
