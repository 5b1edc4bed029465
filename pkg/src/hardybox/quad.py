"""Graded-mesh quadrature and the cumulative dual-weight transform V.

Integrands here are positive with at most an integrable power blow-up at the
lower endpoint (x^sigma with sigma > -1), so composite Gauss panels on
geometrically graded meshes converge fast.  Refinement doubles the panel
count and deepens the grading; failure to converge raises
:class:`AccuracyError` carrying the best estimate, which doubles as the
divergence detector for non-integrable endpoints.

V(t) is the cumulative integral of v^(1-p') from 0.  It is tabulated at
geometric knots and interpolated monotonically in log-log coordinates, which
keeps V nondecreasing (so V-differences never go negative) and reproduces
pure power laws exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._prefix import panel_nodes
from .errors import AccuracyError, DomainError, IntegrabilityError
from .funcspace import Weight1D

DEFAULT_TOL_1D = 1e-8
DEFAULT_TOL_2D = 1e-6
DEFAULT_KNOTS = 512


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.error_estimate < 0:
            raise DomainError("error estimate must be nonnegative")


def _graded_edges(lo: float, hi: float, per_decade: int, depth_decades: float,
                  min_panels: int = 8) -> np.ndarray:
    """Panel edges on [lo, hi], geometric toward a (possibly singular) lo.

    When lo == 0 the mesh grades down to hi * 10^-depth and a single stub
    panel [0, hi * 10^-depth] is prepended; the stub mass vanishes with depth
    for any integrable power singularity.  ``min_panels`` must grow across
    refinement levels so successive meshes always differ.
    """
    if lo < 0 or hi <= lo:
        raise DomainError(f"bad interval [{lo}, {hi}]")
    if lo == 0.0:
        lo_eff = hi * 10.0 ** (-depth_decades)
        n = max(min_panels, int(per_decade * depth_decades))
        return np.concatenate([[0.0], np.geomspace(lo_eff, hi, n + 1)])
    ratio = hi / lo
    if ratio > 30.0:
        n = max(min_panels, int(per_decade * np.log10(ratio)))
        return np.geomspace(lo, hi, n + 1)
    return np.linspace(lo, hi, max(min_panels, per_decade) + 1)


def _vectorized(g):
    """Accept scalar-only integrands without penalizing vectorized ones."""

    def wrapped(x):
        try:
            out = np.asarray(g(x), dtype=float)
            if out.shape == np.shape(x):
                return out
        except (TypeError, ValueError):
            pass
        return np.array([g(float(xi)) for xi in np.ravel(x)]).reshape(np.shape(x))

    return wrapped


def integrate_1d(g, lo: float, hi: float, tol: float = DEFAULT_TOL_1D,
                 max_refine: int = 9, gauss: int = 8) -> QuadResult:
    """Adaptive composite Gauss on a graded mesh.

    Supports integrands with an integrable power blow-up at ``lo`` (including
    lo == 0).  Raises AccuracyError when the refinement budget is exhausted,
    which is the expected outcome for divergent endpoints such as 1/x.
    """
    gv = _vectorized(g)
    per_decade, depth, min_panels = 6, 8.0, 16
    prev = None
    evals = 0
    deltas: list[float] = []
    best = np.nan
    for level in range(max_refine):
        edges = _graded_edges(lo, hi, per_decade, depth, min_panels)
        nodes, wts = panel_nodes(edges, gauss)
        vals = gv(nodes)
        if not np.all(np.isfinite(vals)):
            raise AccuracyError("integrand not finite at quadrature nodes", best_estimate=None)
        value = float(np.dot(vals, wts))
        evals += nodes.size
        best = value
        if prev is not None:
            delta = abs(value - prev)
            deltas.append(delta)
            if delta <= tol * max(1.0, abs(value)):
                return QuadResult(value, delta, evals)
            if len(deltas) >= 3 and deltas[-1] >= 0.99 * deltas[-2] and deltas[-2] >= 0.99 * deltas[-3]:
                raise AccuracyError(
                    f"integral did not converge on [{lo:g}, {hi:g}]: successive refinements "
                    f"keep adding ~{deltas[-1]:.3g}; the integrand is likely divergent",
                    best_estimate=value,
                )
        prev = value
        per_decade *= 2
        min_panels *= 2
        depth = depth * 1.7 + 2.0
    raise AccuracyError(
        f"integral on [{lo:g}, {hi:g}] did not reach tol={tol:g} "
        f"(best estimate {best:.12g})",
        best_estimate=best,
    )


def integrate_2d(g, rect, tol: float = DEFAULT_TOL_2D, max_refine: int = 7,
                 gauss: int = 4, breaks=(None, None)) -> QuadResult:
    """Tensorized adaptive Gauss over a rectangle.

    ``breaks`` optionally supplies known per-axis discontinuity locations
    (e.g. cell edges of piecewise-constant integrands); they are merged into
    the panel edges so such integrands are integrated exactly.
    """
    (lo1, hi1), (lo2, hi2) = rect
    if not (hi1 > lo1 and hi2 > lo2):
        raise DomainError(f"degenerate rectangle {rect}")
    per_decade, depth, min_panels = 4, 6.0, 12
    prev = None
    evals = 0
    deltas: list[float] = []
    best = np.nan
    for level in range(max_refine):
        e1 = _graded_edges(lo1, hi1, per_decade, depth, min_panels)
        e2 = _graded_edges(lo2, hi2, per_decade, depth, min_panels)
        if breaks[0] is not None:
            e1 = np.unique(np.concatenate([e1, np.clip(np.asarray(breaks[0], float), lo1, hi1)]))
        if breaks[1] is not None:
            e2 = np.unique(np.concatenate([e2, np.clip(np.asarray(breaks[1], float), lo2, hi2)]))
        n1, w1 = panel_nodes(e1, gauss)
        n2, w2 = panel_nodes(e2, gauss)
        vals = np.asarray(g(n1[:, None], n2[None, :]), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise AccuracyError("integrand not finite at quadrature nodes", best_estimate=None)
        value = float(w1 @ vals @ w2)
        evals += n1.size * n2.size
        best = value
        if prev is not None:
            delta = abs(value - prev)
            deltas.append(delta)
            if delta <= tol * max(1.0, abs(value)):
                return QuadResult(value, delta, evals)
            if len(deltas) >= 3 and deltas[-1] >= 0.99 * deltas[-2] and deltas[-2] >= 0.99 * deltas[-3]:
                raise AccuracyError(
                    "2D integral keeps growing under refinement; likely divergent",
                    best_estimate=value,
                )
        prev = value
        per_decade *= 2
        min_panels *= 2
        depth = depth * 1.5 + 2.0
    raise AccuracyError(
        f"2D integral did not reach tol={tol:g} (best {best:.12g})", best_estimate=best
    )


@dataclass(eq=False)
class VFunction:
    """V(t) = integral of v^(1-p') from 0 to t, tabulated and interpolated.

    ``head_exponent`` is the local power sigma+1 governing V below the first
    knot, so evaluation extends smoothly down to 0 (V(0) = 0).  Evaluation
    above the last knot is a domain error: the builder is responsible for
    covering the range the boundary maps can reach.
    """

    p: float
    source: Weight1D
    knots: np.ndarray
    cumvals: np.ndarray
    head_exponent: float
    _interp: PchipInterpolator = field(repr=False, default=None)

    def __post_init__(self):
        if np.any(np.diff(self.cumvals) < 0):
            raise DomainError("cumulative V values must be nondecreasing")
        self._logx = np.log(self.knots)
        self._interp = PchipInterpolator(self._logx, np.log(self.cumvals))
        self._coef = self._interp.c  # (4, nknots-1) piecewise-cubic coefficients

    def at(self, t: float) -> float:
        """Scalar evaluation on a python fast path (hot inside searches)."""
        if t <= 0.0:
            if t < 0.0:
                raise DomainError("V is defined on [0, inf)")
            return 0.0
        if t < self.knots[0]:
            return float(self.cumvals[0]) * (t / self.knots[0]) ** self.head_exponent
        if t > self.knots[-1] * (1 + 1e-12):
            raise DomainError(
                f"V evaluated at {t:g}, above its tabulated range {self.knots[-1]:g}"
            )
        lt = math.log(min(t, self.knots[-1]))
        lx = self._logx
        i = min(max(int(np.searchsorted(lx, lt, side="right")) - 1, 0), len(lx) - 2)
        dt = lt - lx[i]
        c = self._coef
        return math.exp(((c[0, i] * dt + c[1, i]) * dt + c[2, i]) * dt + c[3, i])

    def __call__(self, t):
        ta = np.asarray(t, dtype=float)
        if np.any(ta < 0):
            raise DomainError("V is defined on [0, inf)")
        if np.any(ta > self.knots[-1] * (1 + 1e-12)):
            raise DomainError(
                f"V evaluated at {np.max(ta):g}, above its tabulated range "
                f"{self.knots[-1]:g}"
            )
        ta = np.minimum(ta, self.knots[-1])
        out = np.zeros_like(ta)
        low = (ta > 0) & (ta < self.knots[0])
        mid = ta >= self.knots[0]
        if np.any(low):
            out[low] = self.cumvals[0] * (ta[low] / self.knots[0]) ** self.head_exponent
        if np.any(mid):
            out[mid] = np.exp(self._interp(np.log(ta[mid])))
        return out if np.ndim(t) else float(out)

    def diff(self, c, d):
        """V(d) - V(c), clamped at 0 against interpolation round-off."""
        return V_diff(self, c, d)

    @property
    def window(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])


def _dual_exponent(p: float) -> float:
    """The exponent 1 - p' = -1/(p-1) applied to v inside V."""
    return -1.0 / (p - 1.0)


def _head_integral(integrand, lo: float, what: str):
    """Integral over (0, lo] by geometric halving panels with tail extrapolation.

    Returns (value, decay_ratio).  A per-halving mass ratio rho >= 1 means the
    local power is <= -1 and the integral diverges.
    """
    masses = []
    hi = lo
    total = 0.0
    for k in range(60):
        low = hi * 0.5
        nodes, wts = panel_nodes(np.array([low, hi]), 6)
        m = float(np.dot(integrand(nodes), wts))
        masses.append(m)
        total += m
        hi = low
    tail_ratios = [masses[i + 1] / masses[i] for i in range(len(masses) - 10, len(masses) - 1) if masses[i] > 0]
    rho = float(np.median(tail_ratios)) if tail_ratios else 0.0
    if rho >= 1.0 - 1e-9:
        sigma = -1.0 - np.log2(max(rho, 1.0))
        raise IntegrabilityError(
            f"{what} behaves like x^{sigma:.4g} near 0 (per-halving mass ratio "
            f"{rho:.6g} >= 1): integral from 0 diverges"
        )
    tail = masses[-1] * rho / (1.0 - rho)
    return total + tail, rho


def build_V(v: Weight1D, p: float, window: tuple[float, float],
            knot_count: int = DEFAULT_KNOTS) -> VFunction:
    """Tabulate V(t) = int_0^t v^(1-p') on geometric knots spanning ``window``.

    For analytic weight families integrability at 0 is checked from the
    exponent: power(alpha) needs alpha * (1 - p') > -1.  Sampled weights are
    extended below their table by the fitted power law and probed by window
    shrinking: if extending the lower end [eps -> eps/4] moves the total by
    more than 5% the integral is flagged divergent.
    """
    if p <= 1.0:
        raise DomainError(f"p must exceed 1 (got p={p:g})")
    lo, hi = float(window[0]), float(window[1])
    if not (0.0 < lo < hi):
        raise DomainError(f"bad window [{lo:g}, {hi:g}]")
    expo = _dual_exponent(p)

    if v.kind in ("power", "exp_scaled"):
        sigma = v.alpha * expo
        if sigma <= -1.0:
            raise IntegrabilityError(
                f"v^(1-p') ~ x^{sigma:g} near 0 is not integrable: "
                f"alpha*(1-p') = {sigma:g} <= -1 (alpha={v.alpha:g}, p={p:g})"
            )

    slope = v.log_extrapolation_slope()

    def integrand(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        if v.kind == "sampled":
            below = x < v.grid[0]
            if np.any(below):
                out[below] = (v.values[0] * (x[below] / v.grid[0]) ** slope) ** expo
            if np.any(~below):
                out[~below] = v(x[~below]) ** expo
        else:
            out = v(x) ** expo
        return out

    head, rho = _head_integral(integrand, lo, f"v^(1-p') (p={p:g})")
    sigma_emp = -np.log2(rho) - 1.0 if rho > 0 else max(slope * expo, 0.0)
    if v.kind in ("power", "exp_scaled"):
        head_exponent = v.alpha * expo + 1.0
    else:
        head_exponent = max(sigma_emp + 1.0, 1e-3)
        # Window-shrinking probe: extend the lower end by 4x and compare.
        extra, _ = _head_integral(integrand, lo / 4.0, "probe")
        probe_shift = head - (extra + _panel_mass(integrand, lo / 4.0, lo))
        rel = abs(probe_shift) / max(head, 1e-300)
        if rel > 0.05:
            raise IntegrabilityError(
                f"sampled weight: window-shrinking estimate moved the head "
                f"integral by {rel:.1%} (> 5%), likely divergent at 0"
            )

    knots = np.geomspace(lo, hi, knot_count)
    nodes, wts = panel_nodes(knots, 5)
    masses = (integrand(nodes) * wts).reshape(knot_count - 1, 5).sum(axis=1)
    cumvals = head + np.concatenate([[0.0], np.cumsum(masses)])
    return VFunction(p=p, source=v, knots=knots, cumvals=cumvals, head_exponent=head_exponent)


def _panel_mass(integrand, lo: float, hi: float) -> float:
    nodes, wts = panel_nodes(np.geomspace(lo, hi, 9), 6)
    return float(np.dot(integrand(nodes), wts))


def V_diff(V: VFunction, c, d):
    """V(d) - V(c) >= 0 for c <= d inside the tabulated window."""
    ca = np.asarray(c, dtype=float)
    da = np.asarray(d, dtype=float)
    if np.any(da < ca):
        raise DomainError("V_diff requires c <= d")
    out = np.maximum(V(da) - V(ca), 0.0)
    return out if (np.ndim(c) or np.ndim(d)) else float(out)
