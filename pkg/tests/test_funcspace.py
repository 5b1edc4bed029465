import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardybox.errors import DomainError, RangeError
from hardybox.funcspace import (
    BoundaryFn,
    BoundaryPair,
    SearchPoint,
    Weight1D,
    Weight2D,
    eval_boundary,
    eval_weight1d,
    invert_boundary,
)

INV_TOL = 1e-12


def test_power_weight_examples():
    assert eval_weight1d(Weight1D.power(0.0), 7.3) == 1.0
    assert eval_weight1d(Weight1D.power(2.0), 3.0) == 9.0
    # high-precision reference for a fractional power
    import mpmath

    mpmath.mp.dps = 50
    expected = float(mpmath.mpf(4.0) ** mpmath.mpf(-0.5))
    assert abs(eval_weight1d(Weight1D.power(-0.5), 4.0) - expected) < 1e-15


def test_exp_scaled_weight():
    w = Weight1D.exp_scaled(1.0, -0.5)
    assert np.isclose(w(2.0), 2.0 * np.exp(-1.0))


def test_sampled_weight_log_linear_and_window():
    grid = np.geomspace(0.1, 10, 30)
    w = Weight1D.sampled(grid, grid**2)
    x = 0.7345
    assert np.isclose(w(x), x**2, rtol=1e-12)  # log-linear is exact on powers
    with pytest.raises(DomainError):
        w(1e-3)
    with pytest.raises(DomainError):
        w(100.0)


def test_weight_validation_errors():
    with pytest.raises(DomainError):
        Weight1D.sampled([1.0, 2.0], [1.0, -3.0])
    with pytest.raises(DomainError):
        Weight1D.sampled([2.0, 1.0], [1.0, 1.0])
    with pytest.raises(DomainError):
        Weight1D.power(2.0)(0.0)


def test_weight2d_separable_is_exact_product():
    w1, w2 = Weight1D.power(1.3), Weight1D.exp_scaled(0.2, -0.1)
    w = Weight2D.separable(w1, w2)
    xs = np.geomspace(0.01, 100, 17)
    assert np.array_equal(w(xs[:, None], xs[None, :]), w1(xs)[:, None] * w2(xs)[None, :])


def test_weight2d_kinds():
    assert Weight2D.power_pair(-2.0, 1.0)(2.0, 3.0) == 2.0**-2 * 3.0
    assert Weight2D.zero().is_zero
    assert Weight2D.zero()(5.0, 5.0) == 0.0
    assert Weight2D.scaled(Weight2D.unit(), np.e)(9.0, 0.1) == np.e


def test_boundary_eval_examples():
    assert eval_boundary(BoundaryFn.linear(0.5), 3.0) == 1.5
    assert eval_boundary(BoundaryFn.power(1.0, 2.0), 3.0) == 9.0
    ident = BoundaryFn.linear(1.0)
    for x0 in (0.2, 1.0, 55.0):
        assert eval_boundary(ident, x0) == x0


def test_invert_examples():
    assert invert_boundary(BoundaryFn.linear(0.5), 3.0) == 6.0
    assert np.isclose(invert_boundary(BoundaryFn.power(1.0, 2.0), 9.0), 3.0, rtol=1e-14)


def test_invert_sampled_against_analytic_inverse():
    grid = np.geomspace(1e-6, 1e6, 400)
    f = BoundaryFn.sampled(grid, 0.5 * grid)
    y = 3.0
    x = invert_boundary(f, y, tol=INV_TOL)
    assert abs(f(x) - y) <= INV_TOL * max(1.0, y)
    assert abs(x - 2.0 * y) <= 1e-6  # analytic inverse of x/2


def test_invert_range_error():
    grid = np.geomspace(1.0, 10.0, 20)
    f = BoundaryFn.sampled(grid, grid)
    with pytest.raises(RangeError):
        f.inverse(100.0)


@settings(max_examples=80, deadline=None)
@given(
    kind=st.sampled_from(["linear", "power"]),
    c=st.floats(min_value=0.1, max_value=5.0),
    r=st.floats(min_value=0.3, max_value=3.0),
    x=st.floats(min_value=1e-5, max_value=1e5),
)
def test_monotone_round_trip(kind, c, r, x):
    f = BoundaryFn.linear(c) if kind == "linear" else BoundaryFn.power(c, r)
    x_back = invert_boundary(f, eval_boundary(f, x), tol=INV_TOL)
    assert abs(x_back - x) <= 10.0 * INV_TOL * max(1.0, x) * max(1.0, 1.0 / min(c, 1.0))


def test_order_preservation_thousand_pairs(rng):
    for f in (BoundaryFn.linear(0.7), BoundaryFn.power(2.0, 0.5),
              BoundaryFn.sampled(np.geomspace(1e-6, 1e6, 300), 3 * np.geomspace(1e-6, 1e6, 300) ** 1.1)):
        lo = f.grid[0] if f.kind == "sampled" else 1e-6
        hi = f.grid[-1] if f.kind == "sampled" else 1e6
        pairs = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(1000, 2)))
        x = pairs.min(axis=1)
        y = pairs.max(axis=1) * (1 + 1e-9)
        assert np.all(f(x) < f(y))


def test_pair_consistency_thousand_points(rng):
    pairs = [
        BoundaryPair(BoundaryFn.linear(0.5), BoundaryFn.linear(1.0)),
        BoundaryPair(BoundaryFn.linear(2.0 / 3.0), BoundaryFn.linear(1.0)),
        BoundaryPair(BoundaryFn.power(0.5, 1.1), BoundaryFn.power(1.0, 1.1)),
    ]
    for pair in pairs:
        x = np.exp(rng.uniform(np.log(1e-6), np.log(1e6), size=1000))
        assert np.all(pair.a(x) < pair.b(x))


def test_pair_rejects_crossing_and_flags_thin():
    with pytest.raises(DomainError):
        BoundaryPair(BoundaryFn.linear(2.0), BoundaryFn.linear(1.0))
    thin = BoundaryPair(BoundaryFn.linear(0.9999999), BoundaryFn.linear(1.0))
    assert thin.thin
    assert not BoundaryPair(BoundaryFn.linear(0.5), BoundaryFn.linear(1.0)).thin


def test_searchpoint_admissibility_matches_direct_evaluation(rng):
    boundaries = (
        BoundaryPair(BoundaryFn.linear(0.5), BoundaryFn.linear(1.0)),
        BoundaryPair(BoundaryFn.power(0.5, 1.2), BoundaryFn.power(1.0, 1.2)),
    )
    for _ in range(300):
        t1, t2 = np.exp(rng.uniform(-3, 3, size=2))
        x1, x2 = t1 * rng.uniform(0.5, 4.0), t2 * rng.uniform(0.5, 4.0)
        pt = SearchPoint(t1=t1, t2=t2, x1=x1, x2=x2)
        direct = (
            0 < t1 < x1
            and 0 < t2 < x2
            and boundaries[0].a(x1) < boundaries[0].b(t1)
            and boundaries[1].a(x2) < boundaries[1].b(t2)
        )
        assert pt.is_admissible(boundaries) == direct


def test_require_admissible_raises():
    boundaries = (
        BoundaryPair(BoundaryFn.linear(0.5), BoundaryFn.linear(1.0)),
        BoundaryPair(BoundaryFn.linear(0.5), BoundaryFn.linear(1.0)),
    )
    with pytest.raises(DomainError):
        SearchPoint(t1=1.0, t2=1.0, x1=5.0, x2=1.5).require_admissible(boundaries)


def test_x_cap_is_admissibility_edge():
    pair = BoundaryPair(BoundaryFn.linear(0.5), BoundaryFn.linear(1.0))
    assert pair.x_cap(1.0) == 2.0
    assert pair.x_cap(1.0, hi=1.5) == 1.5


def test_inverse_deriv():
    assert BoundaryFn.linear(0.5).inverse_deriv(3.0) == 2.0
    f = BoundaryFn.power(1.0, 2.0)  # inverse sqrt(y), derivative 1/(2 sqrt(y))
    assert np.isclose(f.inverse_deriv(4.0), 0.25, rtol=1e-12)
    g = np.geomspace(1e-3, 1e3, 500)
    fs = BoundaryFn.sampled(g, 0.5 * g)
    assert np.isclose(fs.inverse_deriv(1.0), 2.0, rtol=1e-4)
