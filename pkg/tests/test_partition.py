import math

import numpy as np
import pytest

from hardybox.charf import ProblemConfig
from hardybox.errors import CoverageError, DomainError
from hardybox.funcspace import BoundaryFn, BoundaryPair, Weight2D
from hardybox.ops import GridFn
from hardybox.partition import (
    build_sequence,
    quadrant_decompose,
    transformed_weight,
    transformed_weight2d,
)
from hardybox.suite import hardy_config, suite_configs

WINDOW = (1e-4, 1e4)


@pytest.fixture(scope="module")
def half_pair():
    return BoundaryPair(BoundaryFn.linear(0.5), BoundaryFn.linear(1.0))


def test_sequence_closed_form_doubling(half_pair):
    seq = build_sequence(half_pair, 1.0, k_range=(-10, 10), window=(1e-6, 1e6))
    assert not seq.truncated
    for k in seq.ks:
        assert np.isclose(seq.mk(k), 2.0**k, rtol=1e-12)
    # abutment a(m^(k+1)) = b(m^k)
    gaps = np.abs(half_pair.a(seq.m[1:]) - seq.b_k[:-1])
    assert gaps.max() <= 1e-10 * max(1.0, seq.b_k[:-1].max())


def test_sequence_closed_form_three_halves():
    pair = BoundaryPair(BoundaryFn.linear(1.0 / 3.0), BoundaryFn.linear(0.5))
    seq = build_sequence(pair, 1.0, k_range=(-5, 5), window=(1e-6, 1e6))
    for k in seq.ks:
        assert np.isclose(seq.mk(k), 1.5**k, rtol=1e-12)


def test_sequence_coverage_is_gap_free(half_pair):
    seq = build_sequence(half_pair, 1.0, window=WINDOW)
    # consecutive image intervals [a^k, a^(k+1)) abut exactly
    assert np.allclose(seq.a_k[1:], seq.b_k[:-1], rtol=1e-12)
    assert seq.b_k[0] <= WINDOW[0] or seq.truncated is False
    assert seq.a_k[-1] >= WINDOW[1] * 0.5


def test_sequence_truncation_flag(half_pair):
    seq = build_sequence(half_pair, 1.0, k_range=(-500, 500), window=(1e-2, 1e2))
    assert seq.truncated


def test_sequence_requires_m0_in_window(half_pair):
    with pytest.raises(DomainError):
        build_sequence(half_pair, 1e9, window=WINDOW)


def test_transformed_weight_examples(half_pair):
    boundaries = (half_pair, half_pair)
    # linear a = x/2: (a^-1)'(y) = 2 per axis
    assert np.isclose(transformed_weight(Weight2D.unit(), boundaries, "aa", (1.0, 1.0)), 4.0)
    u = Weight2D.power_pair(-1.0, 0.0)
    got = transformed_weight(u, boundaries, "aa", (3.0, 5.0))
    assert np.isclose(got, 4.0 * (2 * 3.0) ** -1.0, rtol=1e-12)
    # identity-like b = x leaves u unchanged
    assert np.isclose(transformed_weight(u, boundaries, "bb", (3.0, 5.0)), u(3.0, 5.0))
    # mixed transform: one inverse-derivative factor
    got = transformed_weight(Weight2D.unit(), boundaries, "ab", (1.0, 1.0))
    assert np.isclose(got, 2.0)


def test_transformed_weight_unknown_tag(half_pair):
    with pytest.raises(DomainError):
        transformed_weight2d(Weight2D.unit(), (half_pair, half_pair), "cc")


@pytest.fixture(scope="module")
def cfg():
    return hardy_config(2.0, 2.0, 0.0, 0.5, window=WINDOW)


def grids_for(lo, hi, n=33):
    return np.geomspace(lo, hi, n)


def test_quadrant_zero_function(cfg, half_pair):
    g = grids_for(0.5, 8.0)
    f = GridFn.constant(0.0, g, g)
    seqs = (build_sequence(half_pair, 0.4, window=WINDOW),
            build_sequence(half_pair, 0.4, window=WINDOW))
    dec = quadrant_decompose(f, cfg, seqs)
    assert dec.sum_II == 0.0 and dec.total_lhs == 0.0


@pytest.mark.parametrize("shape", ["uniform", "bump", "tilted"])
def test_quadrant_splitting_inequality(cfg, half_pair, shape, rng):
    g = grids_for(0.5, 8.0)
    if shape == "uniform":
        f = GridFn.constant(1.0, g, g)
    elif shape == "bump":
        f = GridFn.from_callable(
            lambda a, b: np.exp(-np.log(a / 2.0) ** 2 - np.log(b / 2.0) ** 2), g, g)
    else:
        f = GridFn.from_callable(lambda a, b: (a / (a + b)) + 0.05, g, g)
    seqs = (build_sequence(half_pair, 0.4, window=WINDOW),
            build_sequence(half_pair, 0.4, window=WINDOW))
    dec = quadrant_decompose(f, cfg, seqs)
    assert dec.total_lhs <= dec.sum_II * (1 + 1e-3)
    # for unit inner weights the g-norm coincides with the f-norm
    assert np.isclose(dec.lhs_g, dec.total_lhs, rtol=1e-12)


def test_quadrant_single_cell_bookkeeping(cfg, half_pair):
    seq = build_sequence(half_pair, 0.4, window=WINDOW)
    seqs = (seq, seq)
    # f supported inside the k = 3 image cell (a^3, b^3) on both axes
    k = 3
    lo, hi = seq.ak(k), seq.bk(k)
    g = np.linspace(lo * 1.001, hi * 0.999, 17)
    f = GridFn.constant(1.0, g, g)
    dec = quadrant_decompose(f, cfg, seqs)
    # II1 terms live at (k, k); the shifted sums touch only neighbors k-1, k
    assert all(k1 == k and k2 == k for (k1, k2) in dec.terms["II1"])
    assert all(k1 == k and k2 in (k - 1, k) for (k1, k2) in dec.terms["II2"])
    assert all(k1 in (k - 1, k) and k2 == k for (k1, k2) in dec.terms["II3"])
    assert all(k1 in (k - 1, k) and k2 in (k - 1, k) for (k1, k2) in dec.terms["II4"])
    assert dec.total_lhs <= dec.sum_II * (1 + 1e-3)


def test_quadrant_coverage_error(cfg, half_pair):
    g = grids_for(0.5, 8.0)
    f = GridFn.constant(1.0, g, g)
    short = build_sequence(half_pair, 0.4, k_range=(0, 1), window=WINDOW)
    with pytest.raises(CoverageError):
        quadrant_decompose(f, cfg, (short, short))


def test_quadrant_nonunit_v_reports_g_norm():
    cfg = suite_configs()["h5-sqrt-r2-pq22"]
    pair = cfg.boundaries[0]
    g = grids_for(0.5, 8.0)
    f = GridFn.constant(1.0, g, g)
    seqs = (build_sequence(pair, 0.4, window=cfg.window[0]),
            build_sequence(pair, 0.4, window=cfg.window[1]))
    dec = quadrant_decompose(f, cfg, seqs)
    # the Minkowski splitting bounds the g-side norm
    assert dec.lhs_g <= dec.sum_II * (1 + 1e-3)
    assert dec.lhs_g != dec.total_lhs
