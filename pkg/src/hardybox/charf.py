"""Characterization functionals for the moving-box operators.

The boundedness of the box Hardy operator between weighted Lebesgue norms is
equivalent to finiteness of a two-parameter supremum functional: an inner
double integral of the outer weight u against powers of the V-differences
V_i(b_i(y)) - V_i(a_i(y)), times a prefactor power of V_i(b_i(t_i)) -
V_i(a_i(x_i)), with the supremum constrained to 0 < t_i < x_i and
a_i(x_i) < b_i(t_i).  The geometric-mean (Polya-Knopp) analogue replaces the
V-differences by plain box widths b_i - a_i acting on a derived weight w.

Numerically, each functional evaluation proceeds in three stages:

1. compile: tabulate the inner integrand on a graded tensor mesh over the
   truncation window and store per-cell masses behind a prefix-sum table, so
   any (t, x) box integral is an O(log n) lookup;
2. search: a log-uniform grid over t crossed with a per-t log-uniform grid
   over x in (t, a^-1(b(t))) -- the constraint holds by construction -- then
   coordinate-wise golden-section polish from the best grid points;
3. re-evaluate the winning supremand by direct adaptive quadrature at a
   tighter tolerance, so the reported value does not inherit the prefix
   table's cell-resolution bias.

Finiteness is decided empirically: if doubling the truncation window grows
the supremum by more than 10% twice in a row the functional is reported as
the +inf sentinel with diagnostics attached.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._prefix import Prefix1D, Prefix2D, golden_max, panel_nodes
from .errors import DomainError, ExtrapolationError
from .funcspace import BoundaryPair, SearchPoint, Weight1D, Weight2D
from .quad import VFunction, build_V, integrate_1d, integrate_2d

INF = math.inf

# Window growth factor that flags divergence when seen twice in a row.
_DIVERGENCE_GROWTH = 1.10


@dataclass(frozen=True)
class Exponents:
    """The Lebesgue exponents 1 < p <= q < infinity (0 < p for the PK side)."""

    p: float
    q: float

    def __post_init__(self):
        if not (0.0 < self.p <= self.q < INF):
            raise DomainError(f"need 0 < p <= q < inf, got p={self.p}, q={self.q}")

    @property
    def pprime(self) -> float:
        if self.p <= 1.0:
            raise DomainError("p' requires p > 1")
        return self.p / (self.p - 1.0)

    def require_hardy(self) -> "Exponents":
        if self.p <= 1.0:
            raise DomainError(f"p must exceed 1 (got p={self.p:g})")
        return self


@dataclass(frozen=True)
class ScalePoint:
    """A pair (s1, s2) of scale parameters."""

    s1: float
    s2: float

    def validate_hardy(self, p: float) -> "ScalePoint":
        for s in (self.s1, self.s2):
            if not (1.0 < s < p):
                raise DomainError(f"scale parameter s={s:g} outside (1, {p:g})")
        return self

    def validate_pk(self) -> "ScalePoint":
        for s in (self.s1, self.s2):
            if not s > 1.0:
                raise DomainError(f"scale parameter s={s:g} must exceed 1")
        return self

    def __iter__(self):
        return iter((self.s1, self.s2))


@dataclass(frozen=True)
class Tolerances:
    """Quadrature and search knobs; defaults per the project's design choices."""

    quad_1d: float = 1e-8
    quad_2d: float = 1e-6
    search_inner: float = 1e-5
    final_inner: float = 1e-7
    v_knots: int = 512
    quad_cells: int = 256
    gauss_per_cell: int = 3
    t_grid: int = 24
    x_grid: int = 16
    s_grid: int = 9
    golden_log_tol: float = 1e-4
    refine_starts: int = 5
    refine_sweeps: int = 2
    search_rel_tol: float = 1e-4


@dataclass(frozen=True, eq=False)
class ProblemConfig:
    """A full inequality instance.

    Hardy mode carries the 1D weights v1, v2; PK mode carries the 2D weight
    v2d under the geometric mean.  The truncation window is per axis.
    """

    exps: Exponents
    u: Weight2D
    boundaries: tuple[BoundaryPair, BoundaryPair]
    v1: Weight1D | None = None
    v2: Weight1D | None = None
    v2d: Weight2D | None = None
    window: tuple[tuple[float, float], tuple[float, float]] = ((1e-6, 1e6), (1e-6, 1e6))
    tols: Tolerances = field(default_factory=Tolerances)
    label: str = ""

    def __post_init__(self):
        for lo, hi in self.window:
            if not (0.0 < lo < hi):
                raise DomainError(f"bad window [{lo:g}, {hi:g}]")
        if self.v2d is None:
            if self.v1 is None or self.v2 is None:
                raise DomainError("hardy mode needs v1 and v2 (or supply v2d for PK mode)")
            self.exps.require_hardy()

    @property
    def mode(self) -> str:
        return "pk" if self.v2d is not None else "hardy"

    def axis(self, i: int) -> "Problem1D":
        """The 1D restriction along axis i (0 or 1); u must factor."""
        if self.mode != "hardy":
            raise DomainError("1D restriction is defined for hardy-mode configs")
        if self.u.kind == "power_pair":
            u1 = Weight1D.power(self.u.beta if i == 0 else self.u.gamma)
        elif self.u.kind == "separable":
            u1 = self.u.w1 if i == 0 else self.u.w2
        elif self.u.is_zero:
            u1 = None
        else:
            raise DomainError("u does not factor; no 1D restriction exists")
        return Problem1D(
            exps=self.exps,
            u=u1,
            v=(self.v1, self.v2)[i],
            boundary=self.boundaries[i],
            window=self.window[i],
            tols=self.tols,
        )


@dataclass(frozen=True, eq=False)
class Problem1D:
    """A single-axis inequality instance (u may be None for the zero weight)."""

    exps: Exponents
    u: Weight1D | None
    v: Weight1D
    boundary: BoundaryPair
    window: tuple[float, float]
    tols: Tolerances = field(default_factory=Tolerances)


@dataclass
class CharacterizationValue:
    """A computed functional value with its optimizer and bookkeeping."""

    value: float
    argmax: SearchPoint
    evaluations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# compiled problems


def _extended_v_window(window, pair: BoundaryPair):
    lo, hi = window
    lo_ext = min(lo, pair.a(lo), pair.b(lo))
    hi_ext = max(hi, pair.a(hi), pair.b(hi))
    return lo_ext, hi_ext


class _AxisData:
    def __init__(self, window, pair: BoundaryPair, v: Weight1D | None, p: float, tols: Tolerances):
        self.window = window
        self.pair = pair
        lo, hi = window
        self.edges = np.geomspace(lo, hi, tols.quad_cells + 1)
        self.nodes, self.wts = panel_nodes(self.edges, tols.gauss_per_cell)
        self.V: VFunction | None = None
        if v is not None:
            self.V = build_V(v, p, _extended_v_window(window, pair), tols.v_knots)
        self.a_nodes = pair.a(self.nodes)
        self.b_nodes = pair.b(self.nodes)
        self.ba = self.b_nodes - self.a_nodes
        if self.V is not None:
            self.dv = np.maximum(self.V(self.b_nodes) - self.V(self.a_nodes), 0.0)

    def t_grid(self, n: int) -> np.ndarray:
        lo, hi = self.window
        return np.geomspace(lo * 1.01, hi * 0.5, n)

    def tx_pairs(self, n_t: int, n_x: int):
        """Flattened (t, x) candidates honoring x in (t, min(a^-1(b(t)), X))."""
        t = self.t_grid(n_t)
        cap = np.minimum(self.pair.x_cap(t), self.window[1])
        theta = (np.arange(n_x) + 0.5) / n_x
        X = t[:, None] * (cap / t)[:, None] ** theta[None, :]
        T = np.broadcast_to(t[:, None], X.shape)
        return T.ravel(), X.ravel()


class _Compiled:
    """Per-config tabulation shared by every functional evaluation."""

    def __init__(self, cfg: ProblemConfig, scale: float = 1.0):
        self.cfg = cfg
        window = tuple((lo / scale, hi * scale) for lo, hi in cfg.window)
        self.window = window
        p_for_v = cfg.exps.p if cfg.mode == "hardy" else 2.0
        vpair = (cfg.v1, cfg.v2) if cfg.mode == "hardy" else (None, None)
        self.axes = tuple(
            _AxisData(window[i], cfg.boundaries[i], vpair[i], p_for_v, cfg.tols)
            for i in (0, 1)
        )
        n1, n2 = self.axes[0].nodes, self.axes[1].nodes
        w_outer = np.outer(self.axes[0].wts, self.axes[1].wts)
        if cfg.mode == "hardy":
            self.density = cfg.u(n1[:, None], n2[None, :])
        else:
            w = pk_weight_w(cfg.u, cfg.v2d, cfg.exps, cfg.boundaries, window=window)
            self.pk_w = w
            self.density = w(n1[:, None], n2[None, :])
        self.weighted = self.density * w_outer
        self._mass_cache: dict = {}

    def prefix(self, s: ScalePoint, kind: str) -> Prefix2D:
        key = (kind, round(s.s1, 14), round(s.s2, 14))
        hit = self._mass_cache.get(key)
        if hit is not None:
            return hit
        exps = self.cfg.exps
        if kind == "hardy":
            e1 = exps.q * (exps.p - s.s1) / exps.p
            e2 = exps.q * (exps.p - s.s2) / exps.p
            f1 = self.axes[0].dv**e1
            f2 = self.axes[1].dv**e2
        else:
            e1 = -exps.q * s.s1 / exps.p
            e2 = -exps.q * s.s2 / exps.p
            f1 = self.axes[0].ba**e1
            f2 = self.axes[1].ba**e2
        masses = self.weighted * f1[:, None] * f2[None, :]
        k = self.cfg.tols.gauss_per_cell
        n_1 = self.axes[0].edges.size - 1
        n_2 = self.axes[1].edges.size - 1
        cells = masses.reshape(n_1, k, n_2, k).sum(axis=(1, 3))
        pre = Prefix2D(self.axes[0].edges, self.axes[1].edges, cells)
        if len(self._mass_cache) > 512:
            self._mass_cache.clear()
        self._mass_cache[key] = pre
        return pre


_COMPILE_CACHE: "weakref.WeakKeyDictionary[ProblemConfig, dict]" = weakref.WeakKeyDictionary()


def _compiled(cfg: ProblemConfig, scale: float = 1.0) -> _Compiled:
    per_cfg = _COMPILE_CACHE.setdefault(cfg, {})
    hit = per_cfg.get(scale)
    if hit is None:
        hit = per_cfg[scale] = _Compiled(cfg, scale)
    return hit


# --------------------------------------------------------------------------
# supremum search shared by B2 and D2


def _prefactor_fns(comp: _Compiled, s: ScalePoint, kind: str):
    exps = comp.cfg.exps
    g1 = (s.s1 - 1.0) / exps.p
    g2 = (s.s2 - 1.0) / exps.p

    if kind == "hardy":
        V1, V2 = comp.axes[0].V, comp.axes[1].V

        def pref(axis, t, x):
            pair = comp.cfg.boundaries[axis]
            V = (V1, V2)[axis]
            d = np.maximum(V(pair.b(t)) - V(pair.a(x)), 0.0)
            return d ** (g1 if axis == 0 else g2)

    else:

        def pref(axis, t, x):
            pair = comp.cfg.boundaries[axis]
            d = np.maximum(pair.b(t) - pair.a(x), 0.0)
            return d ** (g1 if axis == 0 else g2)

    return pref


def _sup_search(comp: _Compiled, s: ScalePoint, kind: str):
    """Grid search + golden polish; returns (value_grid, point, evaluations)."""
    tols = comp.cfg.tols
    exps = comp.cfg.exps
    pre = comp.prefix(s, kind)
    pref = _prefactor_fns(comp, s, kind)

    T1, X1 = comp.axes[0].tx_pairs(tols.t_grid, tols.x_grid)
    T2, X2 = comp.axes[1].tx_pairs(tols.t_grid, tols.x_grid)
    inner = pre.box_outer(T1, X1, T2, X2)
    np.maximum(inner, 0.0, out=inner)
    p1 = pref(0, T1, X1)
    p2 = pref(1, T2, X2)
    vals = inner ** (1.0 / exps.q) * p1[:, None] * p2[None, :]
    evals = vals.size

    if not np.any(vals > 0.0):
        pt = SearchPoint(T1[0], T2[0], X1[0], X2[0])
        return 0.0, pt, evals

    flat = vals.ravel()
    k = min(tols.refine_starts, flat.size)
    top = np.argpartition(flat, -k)[-k:]
    top = top[np.argsort(flat[top])[::-1]]

    # Scalar fast paths for the golden polish.
    from .funcspace import scalar_eval_fn, scalar_inverse_fn

    a_s = [scalar_eval_fn(comp.cfg.boundaries[i].a) for i in (0, 1)]
    b_s = [scalar_eval_fn(comp.cfg.boundaries[i].b) for i in (0, 1)]
    ainv_s = [scalar_inverse_fn(comp.cfg.boundaries[i].a) for i in (0, 1)]
    binv_s = [scalar_inverse_fn(comp.cfg.boundaries[i].b) for i in (0, 1)]
    qinv = 1.0 / exps.q
    g1 = (s.s1 - 1.0) / exps.p
    g2 = (s.s2 - 1.0) / exps.p
    if kind == "hardy":
        vat = [comp.axes[0].V.at, comp.axes[1].V.at]

        def dpref(axis, t, x):
            return vat[axis](b_s[axis](t)) - vat[axis](a_s[axis](x))

    else:

        def dpref(axis, t, x):
            return b_s[axis](t) - a_s[axis](x)

    def supremand(t1, x1, t2, x2):
        iv = pre.box_scalar(t1, x1, t2, x2)
        if iv <= 0.0:
            return 0.0
        d1 = dpref(0, t1, x1)
        d2 = dpref(1, t2, x2)
        if d1 <= 0.0 or d2 <= 0.0:
            return 0.0
        return iv**qinv * d1**g1 * d2**g2

    best_val = -1.0
    best_pt = None
    n2 = len(T2)
    gamma = 1e-9
    for idx in top:
        i, j = divmod(int(idx), n2)
        pt = [float(T1[i]), float(X1[i]), float(T2[j]), float(X2[j])]
        val = float(flat[idx])
        for _ in range(tols.refine_sweeps):
            for coord in (1, 3, 0, 2):
                axis = 0 if coord in (0, 1) else 1
                t_c, x_c = pt[2 * axis], pt[2 * axis + 1]
                win = comp.window[axis]
                if coord in (1, 3):  # x coordinate
                    lo = math.log(t_c) + gamma
                    hi = math.log(min(ainv_s[axis](b_s[axis](t_c)), win[1])) - gamma
                else:  # t coordinate
                    lo = math.log(max(win[0], binv_s[axis](a_s[axis](x_c)))) + gamma
                    hi = math.log(x_c) - gamma
                if hi <= lo:
                    continue

                def line(u, coord=coord, pt=pt):
                    q = list(pt)
                    q[coord] = math.exp(u)
                    return supremand(*q)

                u_best, v_best, ev = golden_max(line, lo, hi, tols.golden_log_tol)
                evals += ev
                if v_best >= val:
                    pt[coord] = math.exp(u_best)
                    val = v_best
        if val > best_val:
            best_val = val
            best_pt = SearchPoint(t1=pt[0], x1=pt[1], t2=pt[2], x2=pt[3])
    return best_val, best_pt, evals


def _direct_supremand_fn(cfg: ProblemConfig, s: ScalePoint, kind: str,
                         panels: int = 14, gauss: int = 4):
    """A fixed-rule evaluator of the true supremand (no prefix bias).

    Used to polish the search result: the prefix surrogate carries a
    cell-resolution bias of ~1e-3 that varies point to point, which is too
    coarse for the equality-type cross checks; a fixed composite Gauss rule
    over the (t, x) box is accurate on the smooth integrand and still cheap
    enough for a short coordinate descent.
    """
    comp = _compiled(cfg)
    exps = cfg.exps
    pair1, pair2 = cfg.boundaries
    if kind == "hardy":
        V1, V2 = comp.axes[0].V, comp.axes[1].V
        e1 = exps.q * (exps.p - s.s1) / exps.p
        e2 = exps.q * (exps.p - s.s2) / exps.p

        def f1(y):
            return np.maximum(V1(pair1.b(y)) - V1(pair1.a(y)), 0.0) ** e1

        def f2(y):
            return np.maximum(V2(pair2.b(y)) - V2(pair2.a(y)), 0.0) ** e2

        vat = (V1.at, V2.at)

        def dpref(axis, t, x):
            pair = (pair1, pair2)[axis]
            return vat[axis](pair.b(t)) - vat[axis](pair.a(x))

        density = cfg.u
    else:
        e1 = -exps.q * s.s1 / exps.p
        e2 = -exps.q * s.s2 / exps.p

        def f1(y):
            return (pair1.b(y) - pair1.a(y)) ** e1

        def f2(y):
            return (pair2.b(y) - pair2.a(y)) ** e2

        def dpref(axis, t, x):
            pair = (pair1, pair2)[axis]
            return pair.b(t) - pair.a(x)

        density = comp.pk_w

    qinv = 1.0 / exps.q
    g1 = (s.s1 - 1.0) / exps.p
    g2 = (s.s2 - 1.0) / exps.p

    def supremand(t1, x1, t2, x2):
        if not (0.0 < t1 < x1 and 0.0 < t2 < x2):
            return 0.0
        d1 = dpref(0, t1, x1)
        d2 = dpref(1, t2, x2)
        if d1 <= 0.0 or d2 <= 0.0:
            return 0.0
        n1, w1 = panel_nodes(np.geomspace(t1, x1, panels + 1), gauss)
        n2, w2 = panel_nodes(np.geomspace(t2, x2, panels + 1), gauss)
        M = density(n1[:, None], n2[None, :])
        inner = float((w1 * f1(n1)) @ M @ (w2 * f2(n2)))
        if inner <= 0.0:
            return 0.0
        return inner**qinv * d1**g1 * d2**g2

    return supremand


def _polish_direct(cfg: ProblemConfig, s: ScalePoint, pt: SearchPoint, kind: str):
    """Coordinate golden descent on the fixed-rule supremand from ``pt``."""
    from .funcspace import scalar_eval_fn, scalar_inverse_fn

    tols = cfg.tols
    supremand = _direct_supremand_fn(cfg, s, kind)
    a_s = [scalar_eval_fn(cfg.boundaries[i].a) for i in (0, 1)]
    b_s = [scalar_eval_fn(cfg.boundaries[i].b) for i in (0, 1)]
    ainv_s = [scalar_inverse_fn(cfg.boundaries[i].a) for i in (0, 1)]
    binv_s = [scalar_inverse_fn(cfg.boundaries[i].b) for i in (0, 1)]
    coords = [pt.t1, pt.x1, pt.t2, pt.x2]
    val = supremand(*coords)
    evals = 1
    gamma = 1e-9
    for _ in range(2):
        for coord in (1, 3, 0, 2):
            axis = 0 if coord in (0, 1) else 1
            t_c, x_c = coords[2 * axis], coords[2 * axis + 1]
            win = _compiled(cfg).window[axis]
            if coord in (1, 3):
                lo = math.log(t_c) + gamma
                hi = math.log(min(ainv_s[axis](b_s[axis](t_c)), win[1])) - gamma
            else:
                lo = math.log(max(win[0], binv_s[axis](a_s[axis](x_c)))) + gamma
                hi = math.log(x_c) - gamma
            if hi <= lo:
                continue

            def line(u, coord=coord):
                q = list(coords)
                q[coord] = math.exp(u)
                return supremand(*q)

            u_best, v_best, ev = golden_max(line, lo, hi, tols.golden_log_tol)
            evals += ev
            if v_best >= val:
                coords[coord] = math.exp(u_best)
                val = v_best
    return SearchPoint(t1=coords[0], x1=coords[1], t2=coords[2], x2=coords[3]), val, evals


def _supremand_direct(cfg: ProblemConfig, s: ScalePoint, pt: SearchPoint,
                      kind: str, tol: float) -> float:
    """Direct adaptive-quadrature evaluation of the supremand at one point."""
    comp = _compiled(cfg)
    exps = cfg.exps
    pair1, pair2 = cfg.boundaries

    if kind == "hardy":
        V1, V2 = comp.axes[0].V, comp.axes[1].V
        e1 = exps.q * (exps.p - s.s1) / exps.p
        e2 = exps.q * (exps.p - s.s2) / exps.p

        def f1(y):
            return np.maximum(V1(pair1.b(y)) - V1(pair1.a(y)), 0.0) ** e1

        def f2(y):
            return np.maximum(V2(pair2.b(y)) - V2(pair2.a(y)), 0.0) ** e2

        density = comp.cfg.u
        d1 = max(V1(pair1.b(pt.t1)) - V1(pair1.a(pt.x1)), 0.0)
        d2 = max(V2(pair2.b(pt.t2)) - V2(pair2.a(pt.x2)), 0.0)
    else:
        e1 = -exps.q * s.s1 / exps.p
        e2 = -exps.q * s.s2 / exps.p

        def f1(y):
            return (pair1.b(y) - pair1.a(y)) ** e1

        def f2(y):
            return (pair2.b(y) - pair2.a(y)) ** e2

        density = comp.pk_w
        d1 = max(pair1.b(pt.t1) - pair1.a(pt.x1), 0.0)
        d2 = max(pair2.b(pt.t2) - pair2.a(pt.x2), 0.0)

    if d1 == 0.0 or d2 == 0.0:
        return 0.0

    def integrand(y1, y2):
        return density(y1, y2) * f1(y1) * f2(y2)

    inner = integrate_2d(integrand, ((pt.t1, pt.x1), (pt.t2, pt.x2)), tol=tol).value
    inner = max(inner, 0.0)
    g1 = (s.s1 - 1.0) / exps.p
    g2 = (s.s2 - 1.0) / exps.p
    return inner ** (1.0 / exps.q) * d1**g1 * d2**g2


def _sup_with_divergence(cfg: ProblemConfig, s: ScalePoint, kind: str,
                         divergence_check: bool) -> CharacterizationValue:
    if cfg.u.is_zero:
        lo1, lo2 = cfg.window[0][0], cfg.window[1][0]
        pt = SearchPoint(lo1 * 2, lo2 * 2, lo1 * 3, lo2 * 3)
        return CharacterizationValue(0.0, pt, 0, True, {"zero_weight": True})

    comp = _compiled(cfg)
    val, pt, evals = _sup_search(comp, s, kind)
    if val == 0.0:
        return CharacterizationValue(0.0, pt, evals, False, {"empty_or_zero": True})
    pt, _, ev2 = _polish_direct(cfg, s, pt, kind)
    evals += ev2
    value = _supremand_direct(cfg, s, pt, kind, cfg.tols.final_inner)
    diag: dict = {"grid_value": val}

    if divergence_check:
        grown = []
        prev = val
        for scale in (2.0, 4.0):
            v_s, _, ev = _sup_search(_compiled(cfg, scale), s, kind)
            evals += ev
            grown.append(v_s / prev if prev > 0 else INF)
            prev = v_s
        diag["window_growth"] = grown
        if all(g > _DIVERGENCE_GROWTH for g in grown):
            return CharacterizationValue(INF, pt, evals, False, diag | {"divergent": True})

    return CharacterizationValue(value, pt, evals, True, diag)


# --------------------------------------------------------------------------
# public functionals


def B2(cfg: ProblemConfig, s: ScalePoint, divergence_check: bool = True) -> CharacterizationValue:
    """The 2D characterization supremum for the box Hardy operator."""
    if cfg.mode != "hardy":
        raise DomainError("B2 needs a hardy-mode config (v1, v2 present)")
    s.validate_hardy(cfg.exps.p)
    return _sup_with_divergence(cfg, s, "hardy", divergence_check)


def b2_supremand(cfg: ProblemConfig, s: ScalePoint, pt: SearchPoint,
                 tol: float = 1e-9) -> float:
    """The B2 supremand at a fixed admissible point, by direct quadrature."""
    pt.require_admissible(cfg.boundaries)
    return _supremand_direct(cfg, s, pt, "hardy", tol)


def d2_supremand(cfg: ProblemConfig, s: ScalePoint, pt: SearchPoint,
                 tol: float = 1e-9) -> float:
    """The D2 supremand at a fixed admissible point, by direct quadrature."""
    pt.require_admissible(cfg.boundaries)
    return _supremand_direct(cfg, s, pt, "pk", tol)


def D2(cfg: ProblemConfig, s: ScalePoint, divergence_check: bool = True) -> CharacterizationValue:
    """The PK characterization supremum over the derived weight w."""
    if cfg.mode != "pk":
        raise DomainError("D2 needs a PK-mode config (v2d present)")
    s.validate_pk()
    return _sup_with_divergence(cfg, s, "pk", divergence_check)


# --------------------------------------------------------------------------
# 1D functional and the limiting condition


class _Compiled1D:
    def __init__(self, prob: Problem1D, scale: float = 1.0):
        self.prob = prob
        lo, hi = prob.window
        self.window = (lo / scale, hi * scale)
        tols = prob.tols
        self.axis = _AxisData(self.window, prob.boundary, prob.v, prob.exps.p, tols)
        u_nodes = prob.u(self.axis.nodes) if prob.u is not None else np.zeros_like(self.axis.nodes)
        self.weighted = u_nodes * self.axis.wts
        self._cache: dict = {}

    def prefix(self, s: float) -> Prefix1D:
        key = round(s, 14)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        exps = self.prob.exps
        e = exps.q * (exps.p - s) / exps.p
        masses = self.weighted * self.axis.dv**e
        k = self.prob.tols.gauss_per_cell
        cells = masses.reshape(self.axis.edges.size - 1, k).sum(axis=1)
        pre = Prefix1D(self.axis.edges, cells)
        self._cache[key] = pre
        return pre


_COMPILE1D_CACHE: "weakref.WeakKeyDictionary[Problem1D, dict]" = weakref.WeakKeyDictionary()


def _compiled1d(prob: Problem1D, scale: float = 1.0) -> _Compiled1D:
    per = _COMPILE1D_CACHE.setdefault(prob, {})
    hit = per.get(scale)
    if hit is None:
        hit = per[scale] = _Compiled1D(prob, scale)
    return hit


def _sup_search_1d(comp: _Compiled1D, s: float):
    prob = comp.prob
    tols = prob.tols
    exps = prob.exps
    pre = comp.prefix(s)
    V = comp.axis.V
    pair = prob.boundary
    g = (s - 1.0) / exps.p

    T, X = comp.axis.tx_pairs(tols.t_grid, tols.x_grid)
    inner = np.maximum(pre.interval(T, X), 0.0)
    prefv = np.maximum(V(pair.b(T)) - V(pair.a(X)), 0.0) ** g
    vals = inner ** (1.0 / exps.q) * prefv
    evals = vals.size
    if not np.any(vals > 0.0):
        return 0.0, (T[0], X[0]), evals

    from .funcspace import scalar_eval_fn, scalar_inverse_fn

    a_s, b_s = scalar_eval_fn(pair.a), scalar_eval_fn(pair.b)
    ainv_s, binv_s = scalar_inverse_fn(pair.a), scalar_inverse_fn(pair.b)
    vat = V.at
    qinv = 1.0 / exps.q

    def supremand(t, x):
        iv = pre.interval_scalar(t, x)
        if iv <= 0.0:
            return 0.0
        d = vat(b_s(t)) - vat(a_s(x))
        if d <= 0.0:
            return 0.0
        return iv**qinv * d**g

    order = np.argsort(vals)[::-1][: tols.refine_starts]
    best_val, best_pt = -1.0, None
    gamma = 1e-9
    for idx in order:
        t, x = float(T[idx]), float(X[idx])
        val = float(vals[idx])
        for _ in range(tols.refine_sweeps):
            lo = math.log(t) + gamma
            hi = math.log(min(ainv_s(b_s(t)), comp.window[1])) - gamma
            if hi > lo:
                u_b, v_b, ev = golden_max(lambda u: supremand(t, math.exp(u)), lo, hi, tols.golden_log_tol)
                evals += ev
                if v_b >= val:
                    x, val = math.exp(u_b), v_b
            lo = math.log(max(comp.window[0], binv_s(a_s(x)))) + gamma
            hi = math.log(x) - gamma
            if hi > lo:
                u_b, v_b, ev = golden_max(lambda u: supremand(math.exp(u), x), lo, hi, tols.golden_log_tol)
                evals += ev
                if v_b >= val:
                    t, val = math.exp(u_b), v_b
        if val > best_val:
            best_val, best_pt = val, (t, x)
    return best_val, best_pt, evals


def _b1_direct(prob: Problem1D, s: float, t: float, x: float, tol: float) -> float:
    comp = _compiled1d(prob)
    V = comp.axis.V
    pair = prob.boundary
    exps = prob.exps
    e = exps.q * (exps.p - s) / exps.p

    def integrand(y):
        return prob.u(y) * np.maximum(V(pair.b(y)) - V(pair.a(y)), 0.0) ** e

    inner = max(integrate_1d(integrand, t, x, tol=tol).value, 0.0)
    d = max(float(V(pair.b(t)) - V(pair.a(x))), 0.0)
    return inner ** (1.0 / exps.q) * d ** ((s - 1.0) / exps.p)


def _polish_direct_1d(prob: Problem1D, s: float, t: float, x: float,
                      panels: int = 14, gauss: int = 4):
    """Coordinate golden descent on a fixed-rule 1D supremand (same role and
    panel layout as the 2D polish, so separable instances stay consistent)."""
    from .funcspace import scalar_eval_fn, scalar_inverse_fn

    comp = _compiled1d(prob)
    V = comp.axis.V
    pair = prob.boundary
    exps = prob.exps
    e = exps.q * (exps.p - s) / exps.p
    g = (s - 1.0) / exps.p
    qinv = 1.0 / exps.q
    a_s, b_s = scalar_eval_fn(pair.a), scalar_eval_fn(pair.b)
    ainv_s, binv_s = scalar_inverse_fn(pair.a), scalar_inverse_fn(pair.b)

    def supremand(tt, xx):
        if not 0.0 < tt < xx:
            return 0.0
        d = V.at(b_s(tt)) - V.at(a_s(xx))
        if d <= 0.0:
            return 0.0
        n, w = panel_nodes(np.geomspace(tt, xx, panels + 1), gauss)
        inner = float(np.dot(prob.u(n) * np.maximum(V(pair.b(n)) - V(pair.a(n)), 0.0) ** e, w))
        if inner <= 0.0:
            return 0.0
        return inner**qinv * d**g

    val = supremand(t, x)
    evals = 1
    gamma = 1e-9
    for _ in range(2):
        lo = math.log(t) + gamma
        hi = math.log(min(ainv_s(b_s(t)), comp.window[1])) - gamma
        if hi > lo:
            u_b, v_b, ev = golden_max(lambda u: supremand(t, math.exp(u)), lo, hi,
                                      prob.tols.golden_log_tol)
            evals += ev
            if v_b >= val:
                x, val = math.exp(u_b), v_b
        lo = math.log(max(comp.window[0], binv_s(a_s(x)))) + gamma
        hi = math.log(x) - gamma
        if hi > lo:
            u_b, v_b, ev = golden_max(lambda u: supremand(math.exp(u), x), lo, hi,
                                      prob.tols.golden_log_tol)
            evals += ev
            if v_b >= val:
                t, val = math.exp(u_b), v_b
    return t, x, val, evals


def B1(prob: Problem1D, s: float, divergence_check: bool = True) -> CharacterizationValue:
    """The 1D characterization supremum with the same constraint structure."""
    if not (1.0 < s < prob.exps.p):
        raise DomainError(f"scale parameter s={s:g} outside (1, {prob.exps.p:g})")
    if prob.u is None:
        lo = prob.window[0]
        return CharacterizationValue(0.0, SearchPoint(lo * 2, lo * 2, lo * 3, lo * 3), 0, True,
                                     {"zero_weight": True})
    comp = _compiled1d(prob)
    val, pt, evals = _sup_search_1d(comp, s)
    if val == 0.0:
        sp = SearchPoint(pt[0], pt[0], pt[1], pt[1])
        return CharacterizationValue(0.0, sp, evals, False, {"empty_or_zero": True})
    t, x, _, ev2 = _polish_direct_1d(prob, s, pt[0], pt[1])
    evals += ev2
    value = _b1_direct(prob, s, t, x, prob.tols.final_inner * 1e-1)
    diag = {"grid_value": val}
    if divergence_check:
        grown, prev = [], val
        for scale in (2.0, 4.0):
            v_s, _, ev = _sup_search_1d(_compiled1d(prob, scale), s)
            evals += ev
            grown.append(v_s / prev if prev > 0 else INF)
            prev = v_s
        diag["window_growth"] = grown
        if all(gg > _DIVERGENCE_GROWTH for gg in grown):
            return CharacterizationValue(INF, SearchPoint(t, t, x, x), evals, False,
                                         diag | {"divergent": True})
    return CharacterizationValue(value, SearchPoint(t, t, x, x), evals, True, diag)


def A_limit(prob: Problem1D, delta_sequence=None) -> CharacterizationValue:
    """The limiting condition A = lim_{s->p} B(s), by Richardson extrapolation.

    B is sampled at s = p - delta_k for a halving delta sequence; first-order
    Richardson combines consecutive samples and the last-two-extrapolant
    spread is reported as the error proxy.
    """
    p = prob.exps.p
    if delta_sequence is None:
        d0 = 0.1 * (p - 1.0)
        delta_sequence = [d0 * 2.0**-k for k in range(4)]
    deltas = [float(d) for d in delta_sequence]
    if any(d <= 0 or d >= p - 1 for d in deltas):
        raise DomainError("delta sequence must lie in (0, p-1)")
    if sorted(deltas, reverse=True) != deltas:
        raise DomainError("delta sequence must be decreasing")

    raw = []
    evals = 0
    last = None
    for d in deltas:
        cv = B1(prob, p - d, divergence_check=False)
        evals += cv.evaluations
        if not math.isfinite(cv.value):
            raise ExtrapolationError(
                f"B({p - d:g}) is not finite; cannot extrapolate", raw_values=raw
            )
        raw.append(cv.value)
        last = cv

    diffs = np.diff(raw)
    scale = max(abs(v) for v in raw)
    if scale == 0.0:
        return CharacterizationValue(0.0, last.argmax, evals, True,
                                     {"raw": raw, "spread": 0.0, "deltas": deltas})
    signif = np.abs(diffs) > 1e-10 * scale
    if np.any(signif):
        signs = np.sign(diffs[signif])
        if not (np.all(signs > 0) or np.all(signs < 0)):
            raise ExtrapolationError(
                "B(p - delta) sequence is non-monotone; extrapolation unsafe",
                raw_values=raw,
            )
        mags = np.abs(diffs)
        if np.any(mags[1:] >= mags[:-1] * (1.0 + 1e-9)):
            raise ExtrapolationError(
                "B(p - delta) increments are not decaying; sequence diverges",
                raw_values=raw,
            )
    extrap = [2.0 * raw[i + 1] - raw[i] for i in range(len(raw) - 1)]
    if len(extrap) >= 2:
        spread = abs(extrap[-1] - extrap[-2])
    else:
        spread = abs(float(diffs[-1])) if len(diffs) else 0.0
    value = extrap[-1] if extrap else raw[-1]
    return CharacterizationValue(value, last.argmax, evals, True,
                                 {"raw": raw, "spread": spread, "deltas": deltas})


# --------------------------------------------------------------------------
# the derived PK weight and the reduction to the hardy pipeline


def _separable_parts(v: Weight2D):
    """Decompose v as factor * v1(x1) * v2(x2) when possible, else None."""
    if v.kind == "separable":
        return 1.0, v.w1, v.w2
    if v.kind == "power_pair":
        return 1.0, Weight1D.power(v.beta), Weight1D.power(v.gamma)
    if v.kind == "scaled":
        inner = _separable_parts(v.base)
        if inner is None:
            return None
        f, w1, w2 = inner
        return f * v.factor, w1, w2
    return None


class _CumLog:
    """Cumulative integral of ln(1/v) for a 1D weight.

    Analytic weight families get the closed-form antiderivative
    (-alpha (t ln t - t) - beta t^2 / 2); sampled tables are integrated by
    Gauss panels and pchip-interpolated.  Only differences are consumed, so
    the integration constant is irrelevant.
    """

    def __init__(self, v: Weight1D, lo: float, hi: float, knots: int = 512):
        self.lo, self.hi = lo, hi
        self.analytic = v.kind in ("power", "exp_scaled")
        if self.analytic:
            self.alpha = v.alpha
            self.beta = v.beta if v.kind == "exp_scaled" else 0.0
            self._interp = None
        else:
            self.knots = np.geomspace(lo, hi, knots)
            nodes, wts = panel_nodes(self.knots, 5)
            vals = -v.log_eval(nodes)
            masses = (vals * wts).reshape(knots - 1, 5).sum(axis=1)
            cum = np.concatenate([[0.0], np.cumsum(masses)])
            self._interp = PchipInterpolator(np.log(self.knots), cum)

    def __call__(self, t):
        ta = np.asarray(t, dtype=float)
        if np.any(ta < self.lo * (1 - 1e-12)) or np.any(ta > self.hi * (1 + 1e-12)):
            raise DomainError("cumulative log-weight evaluated outside its range")
        if self.analytic:
            return -self.alpha * (ta * np.log(ta) - ta) - 0.5 * self.beta * ta**2
        return self._interp(np.log(np.clip(ta, self.lo, self.hi)))


def pk_weight_w(u: Weight2D, v: Weight2D, exps: Exponents,
                boundaries: tuple[BoundaryPair, BoundaryPair],
                window=((1e-6, 1e6), (1e-6, 1e6))) -> Weight2D:
    """The derived weight w = exp((q/p) * boxmean(ln(1/v))) * u.

    The box is [a1(x1), b1(x1)] x [a2(x2), b2(x2)].  For separable v the box
    mean splits into two cached 1D cumulative transforms, so evaluation on
    quadrature meshes stays cheap; non-separable sampled weights fall back to
    per-box 2D quadrature (slow path, memoized).
    """
    qp = exps.q / exps.p
    parts = _separable_parts(v)
    if parts is not None:
        factor, v1, v2 = parts
        cums = []
        for i, vi in enumerate((v1, v2)):
            lo, hi = _extended_v_window(window[i], boundaries[i])
            cums.append(_CumLog(vi, lo, hi))
        logf = math.log(factor)

        def mean_axis(i, x):
            pair = boundaries[i]
            av, bv = pair.a(x), pair.b(x)
            return (cums[i](bv) - cums[i](av)) / (bv - av)

        def fn(x1, x2):
            m = mean_axis(0, np.asarray(x1, float)) + mean_axis(1, np.asarray(x2, float)) - logf
            return np.exp(qp * m) * u(x1, x2)

        return Weight2D.derived(fn, label="pk-derived")

    cache: dict = {}

    def fn_slow(x1, x2):
        x1a = np.asarray(x1, float)
        x2a = np.asarray(x2, float)
        shape = np.broadcast_shapes(x1a.shape, x2a.shape)
        x1b = np.broadcast_to(x1a, shape).ravel()
        x2b = np.broadcast_to(x2a, shape).ravel()
        out = np.empty(x1b.shape)
        for idx, (c1, c2) in enumerate(zip(x1b, x2b)):
            key = (round(float(c1), 12), round(float(c2), 12))
            m = cache.get(key)
            if m is None:
                a1, b1 = boundaries[0].a(c1), boundaries[0].b(c1)
                a2, b2 = boundaries[1].a(c2), boundaries[1].b(c2)
                ig = integrate_2d(lambda y1, y2: -np.log(v(y1, y2)), ((a1, b1), (a2, b2)), tol=1e-7)
                m = ig.value / ((b1 - a1) * (b2 - a2))
                cache[key] = m
            out[idx] = m
        return np.exp(qp * out.reshape(shape)) * u(x1, x2)

    return Weight2D.derived(fn_slow, label="pk-derived-slow")


def pk_transformed_config(cfg: ProblemConfig) -> ProblemConfig:
    """The hardy-mode config whose B2 equals D2 of a PK config.

    v1 = v2 = 1 (so V is the identity) and the outer weight becomes
    w * prod_i (b_i - a_i)^(-q).
    """
    if cfg.mode != "pk":
        raise DomainError("expected a PK-mode config")
    cfg.exps.require_hardy()
    w = pk_weight_w(cfg.u, cfg.v2d, cfg.exps, cfg.boundaries, window=cfg.window)
    q = cfg.exps.q
    pair1, pair2 = cfg.boundaries

    def fn(x1, x2):
        ba1 = pair1.b(x1) - pair1.a(x1)
        ba2 = pair2.b(x2) - pair2.a(x2)
        return w(x1, x2) * ba1**-q * ba2**-q

    u_prime = Weight2D.derived(fn, label="pk-transformed")
    return ProblemConfig(
        exps=cfg.exps,
        u=u_prime,
        boundaries=cfg.boundaries,
        v1=Weight1D.unit(),
        v2=Weight1D.unit(),
        window=cfg.window,
        tols=cfg.tols,
        label=(cfg.label + "-as-hardy") if cfg.label else "pk-as-hardy",
    )


# --------------------------------------------------------------------------
# rectangle-corner functionals

_CORNER_VARIANTS = ("AW", "AWstar", "AWtilde", "AWtilde_star")


def rect_corner(variant: str, rect, cfg: ProblemConfig, s: ScalePoint) -> CharacterizationValue:
    """Corner characterization functionals on a rectangle [c1,d1] x [c2,d2].

    The four variants differ in which corner the inner operator accumulates
    from; per axis the inner V-power factor is anchored at c (ascending) or d
    (descending) and the prefactor uses the matching V-difference at t.  The
    descending variant uses V_i(d_i) - V_i(x_i) inside the integral: the
    printed source formula degenerates to an identically-zero factor there,
    an evident typo, and this is the unique reading consistent with the
    ascending case under the corner-reflection duality (the CLI report
    records the corrected form).
    """
    if variant not in _CORNER_VARIANTS:
        raise DomainError(f"unknown corner variant {variant!r}")
    if cfg.mode != "hardy":
        raise DomainError("corner functionals need a hardy-mode config")
    s.validate_hardy(cfg.exps.p)
    (c1, d1), (c2, d2) = rect
    if not (0.0 <= c1 and 0.0 <= c2):
        raise DomainError("rectangle corners must be nonnegative")
    if c1 >= d1 or c2 >= d2:
        lo = max(c1, cfg.window[0][0])
        pt = SearchPoint(lo, lo, lo * 2, lo * 2)
        return CharacterizationValue(0.0, pt, 0, True, {"degenerate_rect": True})

    comp = _compiled(cfg)
    exps = cfg.exps
    tols = cfg.tols
    V1, V2 = comp.axes[0].V, comp.axes[1].V
    e = (exps.q * (exps.p - s.s1) / exps.p, exps.q * (exps.p - s.s2) / exps.p)
    g = ((s.s1 - 1.0) / exps.p, (s.s2 - 1.0) / exps.p)

    # Per-axis orientation: True = anchored at c (ascending factors).
    ascending = {
        "AW": (True, True),
        "AWstar": (True, False),
        "AWtilde": (False, False),
        "AWtilde_star": (False, True),
    }[variant]

    axes_edges = []
    axes_nodes = []
    axes_wts = []
    factors = []
    Vs = (V1, V2)
    for i, (c, d) in enumerate(((c1, d1), (c2, d2))):
        lo = max(c, d * 1e-9, comp.window[i][0] * 1e-3)
        edges = np.geomspace(lo, d, tols.quad_cells + 1)
        nodes, wts = panel_nodes(edges, tols.gauss_per_cell)
        V = Vs[i]
        vc, vd = V(max(c, 0.0)) if c > 0 else 0.0, V(d)
        if ascending[i]:
            fac = np.maximum(V(nodes) - vc, 0.0) ** e[i]
        else:
            fac = np.maximum(vd - V(nodes), 0.0) ** e[i]
        axes_edges.append(edges)
        axes_nodes.append(nodes)
        axes_wts.append(wts)
        factors.append(fac)

    dens = cfg.u(axes_nodes[0][:, None], axes_nodes[1][None, :])
    masses = dens * np.outer(axes_wts[0], axes_wts[1]) * factors[0][:, None] * factors[1][None, :]
    k = tols.gauss_per_cell
    cells = masses.reshape(tols.quad_cells, k, tols.quad_cells, k).sum(axis=(1, 3))
    pre = Prefix2D(axes_edges[0], axes_edges[1], cells)

    vc = (V1(max(c1, 0.0)) if c1 > 0 else 0.0, V2(max(c2, 0.0)) if c2 > 0 else 0.0)
    vd = (V1(d1), V2(d2))

    def box_for(t1, t2):
        # Ascending axes integrate over [t, d]; descending over [c-side, t].
        x0 = t1 if ascending[0] else axes_edges[0][0]
        x1 = d1 if ascending[0] else t1
        y0 = t2 if ascending[1] else axes_edges[1][0]
        y1 = d2 if ascending[1] else t2
        return x0, x1, y0, y1

    vat = (V1.at, V2.at)
    qinv = 1.0 / exps.q

    def prefactor(t1, t2):
        out = 1.0
        for i, t in enumerate((t1, t2)):
            if ascending[i]:
                dV = max(vat[i](t) - vc[i], 0.0)
            else:
                dV = max(vd[i] - vat[i](t), 0.0)
            out *= dV ** g[i]
        return out

    def supremand(t1, t2):
        iv = pre.box_scalar(*box_for(t1, t2))
        if iv <= 0.0:
            return 0.0
        return iv**qinv * prefactor(t1, t2)

    n_t = tols.t_grid
    tg1 = np.geomspace(axes_edges[0][0] * 1.01, d1 * 0.999, n_t)
    tg2 = np.geomspace(axes_edges[1][0] * 1.01, d2 * 0.999, n_t)
    vals = np.array([[supremand(t1, t2) for t2 in tg2] for t1 in tg1])
    evals = vals.size
    if not np.any(vals > 0.0):
        return CharacterizationValue(0.0, SearchPoint(tg1[0], tg2[0], d1, d2), evals, True,
                                     {"zero_on_rect": True})

    flat = vals.ravel()
    order = np.argsort(flat)[::-1][: tols.refine_starts]
    best_val, best_t = -1.0, None
    for idx in order:
        i, j = divmod(int(idx), n_t)
        t1, t2 = float(tg1[i]), float(tg2[j])
        val = float(flat[idx])
        for _ in range(tols.refine_sweeps):
            lo, hi = math.log(axes_edges[0][0]) + 1e-9, math.log(d1) - 1e-12
            u_b, v_b, ev = golden_max(lambda u: supremand(math.exp(u), t2), lo, hi, tols.golden_log_tol)
            evals += ev
            if v_b >= val:
                t1, val = math.exp(u_b), v_b
            lo, hi = math.log(axes_edges[1][0]) + 1e-9, math.log(d2) - 1e-12
            u_b, v_b, ev = golden_max(lambda u: supremand(t1, math.exp(u)), lo, hi, tols.golden_log_tol)
            evals += ev
            if v_b >= val:
                t2, val = math.exp(u_b), v_b
        if val > best_val:
            best_val, best_t = val, (t1, t2)

    t1, t2 = best_t
    pt = SearchPoint(t1=t1, t2=t2, x1=d1, x2=d2)
    return CharacterizationValue(best_val, pt, evals, True, {"variant": variant})
