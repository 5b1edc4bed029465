"""Shared fixtures: the instance suite and its (expensive) pipeline results.

Sandwich reports and norm estimates are session-scoped because several test
modules and most acceptance criteria consume the same six instances; their
construction time feeds the acceptance runtime budgets.
"""

import time

import numpy as np
import pytest

from hardybox.bounds import optimize_sandwich
from hardybox.ops import estimate_norm
from hardybox.suite import oracle_configs, pk_suite_configs, suite_configs


@pytest.fixture(scope="session")
def hsuite():
    return suite_configs()


@pytest.fixture(scope="session")
def pksuite():
    return pk_suite_configs()


@pytest.fixture(scope="session")
def osuite():
    return oracle_configs()


@pytest.fixture(scope="session")
def pipeline_timings():
    return {}


@pytest.fixture(scope="session")
def sandwich_reports(hsuite, pipeline_timings):
    t0 = time.monotonic()
    out = {name: optimize_sandwich(cfg, "hardy_thm1", s_grid=9) for name, cfg in hsuite.items()}
    pipeline_timings["sandwich_reports"] = time.monotonic() - t0
    return out


@pytest.fixture(scope="session")
def norm_estimates(hsuite, pipeline_timings):
    t0 = time.monotonic()
    out = {
        name: estimate_norm(cfg, grid_resolution=64, restarts=6, max_iters=150, seed=0)
        for name, cfg in hsuite.items()
    }
    pipeline_timings["norm_estimates"] = time.monotonic() - t0
    return out


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
