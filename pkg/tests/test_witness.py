import math

import numpy as np
import pytest

from hardybox.charf import Exponents, ProblemConfig, ScalePoint
from hardybox.errors import DomainError
from hardybox.funcspace import SearchPoint, Weight2D
from hardybox.ops import rayleigh_ratio
from hardybox.suite import hardy_config, pk_suite_configs, suite_configs
from hardybox.witness import (
    WitnessSpec,
    lemma2_witness,
    pk_witness,
    thm1_witness,
    witness_bound_check,
)

S = ScalePoint(1.5, 1.5)


@pytest.fixture(scope="module")
def h1():
    return suite_configs()["h1-unit-r2-pq22"]


@pytest.fixture(scope="module")
def anchor():
    return SearchPoint(t1=1.0, t2=1.0, x1=1.6, x2=1.6)


def test_thm1_witness_plateau_and_support(h1, anchor):
    spec = WitnessSpec(kind="thm1_hardy", s=S, anchor=anchor)
    f = thm1_witness(h1, spec)
    # support equals the moving box at (x1, x2)
    (lo1, hi1), (lo2, hi2) = f.support
    assert np.isclose(lo1, 0.5 * anchor.x1) and np.isclose(hi1, anchor.x1)
    assert np.isclose(lo2, 0.5 * anchor.x2) and np.isclose(hi2, anchor.x2)
    # unit weights, V = id: plateau value is prod (p/(p-s)) (b(t)-a(x))^(-s/p)
    plateau = ((2.0 / 0.5) * (1.0 - 0.8) ** -0.75) ** 2
    assert np.isclose(f.values[0, 0], plateau, rtol=1e-12)
    assert np.all(f.values >= 0.0)


def test_thm1_witness_rejects_inadmissible(h1):
    bad = SearchPoint(t1=1.0, t2=1.0, x1=5.0, x2=1.5)  # a(x1) >= b(t1)
    with pytest.raises(DomainError):
        thm1_witness(h1, WitnessSpec(kind="thm1_hardy", s=S, anchor=bad))


def test_witness_spec_validation(anchor):
    with pytest.raises(DomainError):
        WitnessSpec(kind="bogus", s=S, anchor=anchor)
    with pytest.raises(DomainError):
        WitnessSpec(kind="lemma2_corner", s=S, anchor=anchor)  # missing rect
    with pytest.raises(DomainError):
        WitnessSpec(kind="lemma2_corner", s=S, anchor=anchor, rect=((1.0, 0.5), (0.0, 1.0)))


def test_lemma2_witness_region_value():
    cfg = hardy_config(2.0, 2.0, 0.0, 0.5, window=(1e-4, 1e4))
    spec = WitnessSpec(kind="lemma2_corner", s=S,
                       anchor=SearchPoint(t1=0.5, t2=0.5, x1=0.75, x2=0.75),
                       rect=((0.0, 1.0), (0.0, 1.0)))
    g = lemma2_witness(cfg, spec)
    # region (c1, t1) x (t2, d2): 16^2 * (1/2)^(-1.5) * (1/2)^(-1.5) = 2048
    assert np.isclose(g.values[0, -1], 2048.0, rtol=1e-12)
    assert np.all(g.values >= 0.0)
    (lo1, hi1), (lo2, hi2) = g.support
    assert lo1 == 0.0 and np.isclose(hi1, 1.0) and lo2 == 0.0 and np.isclose(hi2, 1.0)


def test_pk_witness_region_value():
    cfg = pk_suite_configs()["pk1-unit-r2-pq22"]
    spec = WitnessSpec(kind="thm2_pk", s=S, anchor=SearchPoint(1.0, 1.0, 1.5, 1.5))
    g = pk_witness(cfg, spec)
    assert np.isclose(g.values[0, 0], 64.0, rtol=1e-12)  # (1 - 0.75)^(-1.5) squared
    assert np.all(g.values >= 0.0)
    (lo1, hi1), _ = g.support
    assert np.isclose(lo1, 0.75) and np.isclose(hi1, 1.5)


@pytest.mark.parametrize("name", ["h1-unit-r2-pq22", "h5-sqrt-r2-pq22", "h3-unit-r2-pq23"])
def test_thm1_chain_holds(name):
    cfg = suite_configs()[name]
    anchors = [
        SearchPoint(t1=0.5, t2=2.0, x1=0.8, x2=3.0),
        SearchPoint(t1=10.0, t2=10.0, x1=14.0, x2=16.0),
    ]
    for anchor in anchors:
        chk = witness_bound_check(cfg, WitnessSpec("thm1_hardy", S, anchor), tol=1e-3)
        assert chk.passed, (name, anchor, chk.margins)
        # the operator-side chain is an exact identity up to quadrature
        assert abs(chk.margins["operator_lower"]) < 5e-3


def test_thm1_chain_zero_weight(h1):
    cfg = ProblemConfig(exps=h1.exps, u=Weight2D.zero(), boundaries=h1.boundaries,
                        v1=h1.v1, v2=h1.v2, window=h1.window)
    chk = witness_bound_check(cfg, WitnessSpec("thm1_hardy", S, SearchPoint(1, 1, 1.6, 1.6)))
    assert chk.passed


def test_ratio_consequence_detail(h1, anchor):
    chk = witness_bound_check(h1, WitnessSpec("thm1_hardy", S, anchor))
    assert chk.passed
    details = chk.details
    assert details["rayleigh_ratio"] >= details["ratio_bound"] * (1 - 1e-3)
    # the witness ratio is a genuine lower bound certificate
    f = thm1_witness(h1, WitnessSpec("thm1_hardy", S, anchor))
    assert np.isclose(rayleigh_ratio(f, h1), details["rayleigh_ratio"], rtol=1e-12)


def test_pk_chain_holds():
    cfg = pk_suite_configs()["pk1-unit-r2-pq22"]
    for anchor in (SearchPoint(1.0, 1.0, 1.5, 1.5), SearchPoint(0.2, 5.0, 0.33, 8.0)):
        chk = witness_bound_check(cfg, WitnessSpec("thm2_pk", S, anchor), tol=1e-3)
        assert chk.passed, chk.margins
        assert chk.details["best_constant_lower_consequence"] > 0


def test_lemma2_chain_holds():
    cfg = hardy_config(2.0, 2.0, 0.0, 0.5, window=(1e-4, 1e4))
    spec = WitnessSpec(kind="lemma2_corner", s=S,
                       anchor=SearchPoint(t1=0.4, t2=0.6, x1=0.7, x2=0.9),
                       rect=((0.05, 1.0), (0.05, 1.0)))
    chk = witness_bound_check(cfg, spec, tol=1e-3)
    assert chk.passed, chk.margins


def test_witness_check_serialization(h1, anchor):
    chk = witness_bound_check(h1, WitnessSpec("thm1_hardy", S, anchor))
    doc = chk.to_dict()
    assert doc["kind"] == "thm1_hardy" and "margins" in doc


def test_witness_ratio_below_upper_bound(h1, sandwich_reports):
    rep = sandwich_reports["h1-unit-r2-pq22"]
    for anchor in (SearchPoint(1, 1, 1.6, 1.6), SearchPoint(0.01, 3.0, 0.017, 5.0)):
        f = thm1_witness(h1, WitnessSpec("thm1_hardy", S, anchor))
        assert rayleigh_ratio(f, h1) <= rep.upper_bound * (1 + 1e-6)
