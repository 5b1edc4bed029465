import numpy as np
import pytest

from hardybox.errors import AccuracyError, DomainError, IntegrabilityError
from hardybox.funcspace import Weight1D
from hardybox.quad import QuadResult, V_diff, build_V, integrate_1d, integrate_2d

WINDOW = (1e-6, 1e6)


def test_integrate_1d_constant():
    r = integrate_1d(lambda x: np.ones_like(x), 0.0, 1.0)
    assert abs(r.value - 1.0) < 1e-12
    assert r.evaluations > 0


def test_integrate_1d_integrable_singularity():
    r = integrate_1d(lambda x: x**-0.5, 0.0, 1.0)
    assert abs(r.value - 2.0) < 1e-8


def test_integrate_1d_divergent_endpoint():
    with pytest.raises(AccuracyError) as exc:
        integrate_1d(lambda x: 1.0 / x, 0.0, 1.0)
    assert exc.value.best_estimate is not None


def test_integrate_1d_additivity(rng):
    def g(x):
        return np.exp(-x) * (1.0 + np.sin(x) ** 2)

    for _ in range(10):
        a, b, c = np.sort(rng.uniform(0.1, 10.0, size=3))
        if b - a < 1e-3 or c - b < 1e-3:
            continue
        full = integrate_1d(g, a, c)
        left = integrate_1d(g, a, b)
        right = integrate_1d(g, b, c)
        budget = 3.0 * (full.error_estimate + left.error_estimate + right.error_estimate)
        assert abs(full.value - (left.value + right.value)) <= budget + 1e-12


def test_integrate_2d_examples():
    assert abs(integrate_2d(lambda x, y: np.ones_like(x * y), ((0, 1), (0, 1))).value - 1.0) < 1e-10
    assert abs(integrate_2d(lambda x, y: x * y, ((0, 1), (0, 1))).value - 0.25) < 1e-10
    r = integrate_2d(lambda x, y: x**-0.5 * y**-0.5, ((0, 1), (0, 1)))
    assert abs(r.value - 4.0) < 4e-6


def test_integrate_2d_separable_matches_product():
    def g1(x):
        return np.exp(-0.3 * x) * x**0.25

    def g2(y):
        return 1.0 / (1.0 + y)

    r2 = integrate_2d(lambda x, y: g1(x) * g2(y), ((0.1, 3.0), (0.5, 7.0)), tol=1e-9)
    p1 = integrate_1d(g1, 0.1, 3.0, tol=1e-10)
    p2 = integrate_1d(g2, 0.5, 7.0, tol=1e-10)
    combined = abs(p1.value * p2.value) * 1e-8 + r2.error_estimate + 1e-12
    assert abs(r2.value - p1.value * p2.value) <= combined * 10


def test_quadresult_validation():
    with pytest.raises(DomainError):
        QuadResult(1.0, -1e-3, 10)


def test_build_V_unit_weight():
    V = build_V(Weight1D.unit(), 2.0, WINDOW)
    assert abs(V(3.0) - 3.0) < 1e-10
    assert abs(V_diff(V, 1.0, 3.0) - 2.0) < 1e-10


def test_build_V_sqrt_weight_closed_form():
    V = build_V(Weight1D.power(0.5), 2.0, WINDOW)
    assert abs(V(4.0) - 4.0) < 1e-8
    assert abs(V_diff(V, 1.0, 4.0) - 2.0) < 1e-8


def test_build_V_divergent_named_error():
    with pytest.raises(IntegrabilityError) as exc:
        build_V(Weight1D.power(1.0), 2.0, WINDOW)
    msg = str(exc.value)
    assert "alpha*(1-p')" in msg and "-1" in msg


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("alpha_frac", [-0.6, 0.0, 0.5, 0.9])
def test_power_weight_exactness_at_all_knots(p, alpha_frac):
    # alpha chosen inside the integrable range: alpha < p - 1.
    alpha = alpha_frac * (p - 1.0)
    sigma = alpha * (1.0 - p / (p - 1.0))
    V = build_V(Weight1D.power(alpha), p, WINDOW, knot_count=512)
    expected = V.knots ** (sigma + 1.0) / (sigma + 1.0)
    rel = np.abs(V.cumvals - expected) / expected
    assert rel.max() < 1e-8


def test_V_head_extrapolation_below_knots():
    V = build_V(Weight1D.power(0.5), 2.0, (1e-3, 1e3))
    t = 1e-5  # below the first knot
    assert np.isclose(V(t), 2.0 * np.sqrt(t), rtol=1e-6)
    assert V(0.0) == 0.0


def test_V_monotone_and_additive(rng):
    V = build_V(Weight1D.power(0.3), 2.5, WINDOW)
    pts = np.exp(rng.uniform(np.log(1e-5), np.log(1e5), size=(200, 3)))
    pts.sort(axis=1)
    c, d, e = pts[:, 0], pts[:, 1], pts[:, 2]
    d1 = V_diff(V, c, d)
    d2 = V_diff(V, d, e)
    d3 = V_diff(V, c, e)
    assert np.all(d1 >= 0) and np.all(d2 >= 0)
    rel = np.abs(d1 + d2 - d3) / np.maximum(d3, 1e-300)
    assert rel.max() < 1e-12


def test_V_diff_degenerate_and_domain():
    V = build_V(Weight1D.unit(), 2.0, WINDOW)
    assert V_diff(V, 5.0, 5.0) == 0.0
    with pytest.raises(DomainError):
        V_diff(V, 3.0, 1.0)
    with pytest.raises(DomainError):
        V(1e9)


def test_build_V_requires_p_above_one():
    with pytest.raises(DomainError):
        build_V(Weight1D.unit(), 1.0, WINDOW)


def test_build_V_sampled_weight_matches_power():
    grid = np.geomspace(1e-7, 1e7, 800)
    v = Weight1D.sampled(grid, grid**0.5)
    V = build_V(v, 2.0, (1e-6, 1e6))
    assert np.isclose(V(4.0), 4.0, rtol=1e-6)


def test_build_V_sampled_divergent_rejected():
    grid = np.geomspace(1e-7, 1e7, 800)
    v = Weight1D.sampled(grid, grid)  # integrand ~ 1/x for p = 2
    with pytest.raises(IntegrabilityError):
        build_V(v, 2.0, (1e-6, 1e6))


def test_integrate_2d_with_breaks_is_exact_on_pieces():
    # Piecewise-constant integrand: exact once the breaks are panel edges.
    def g(x, y):
        return np.where((x < 0.5) & (y < 0.5), 2.0, 1.0)

    r = integrate_2d(g, ((0.0, 1.0), (0.0, 1.0)), breaks=([0.5], [0.5]))
    assert abs(r.value - (0.25 * 2.0 + 0.75 * 1.0)) < 1e-12
