"""Grid functions, the box operators, weighted norms, and norm estimation.

Candidate functions are nonnegative and piecewise constant on a rectangular
cell grid, so applying the box Hardy operator is exact rectangle-overlap
arithmetic (prefix sums with fractional edge cells) rather than quadrature.
The geometric-mean operator uses the same machinery on ln f; any zero-valued
cell inside the box sends the log-mean to -infinity and the operator value
to 0, which keeps the arithmetic-geometric mean comparison assertable.

The best-constant estimate maximizes the Rayleigh-type ratio
||H2 f||_{q,u} / ||f||_{p,v1 v2} over nonnegative grid functions by a
multiplicative fixed-point ascent: at a stationary point the q-norm
sensitivity must align with the p-norm sensitivity, so cells are updated
toward (sensitivity / cell p-weight)^(1/(p-1)) under geometric damping,
which preserves nonnegativity without projection.  Every iterate yields a
certified lower bound on the true constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._prefix import Prefix2D, panel_nodes
from .charf import ProblemConfig, ScalePoint
from .errors import DomainError
from .funcspace import BoundaryPair, SearchPoint, Weight2D

_ZERO_AREA_TOL = 1e-12


@dataclass(eq=False)
class GridFn:
    """A nonnegative function, constant on the cells of a rectangular grid.

    ``grid1``/``grid2`` are the cell edges (strictly increasing); ``values``
    has shape (len(grid1)-1, len(grid2)-1).  Instances are treated as
    immutable after construction; derived prefix tables are cached.
    """

    grid1: np.ndarray
    grid2: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.grid1 = np.asarray(self.grid1, dtype=float)
        self.grid2 = np.asarray(self.grid2, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        for g, name in ((self.grid1, "grid1"), (self.grid2, "grid2")):
            if g.ndim != 1 or len(g) < 2 or not np.all(np.diff(g) > 0):
                raise DomainError(f"{name} must be strictly increasing cell edges")
        n1, n2 = len(self.grid1) - 1, len(self.grid2) - 1
        if self.values.shape != (n1, n2):
            raise DomainError(f"values shape {self.values.shape} != cells ({n1}, {n2})")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise DomainError("cell values must be nonnegative and finite")

    @classmethod
    def constant(cls, c: float, grid1, grid2) -> "GridFn":
        g1, g2 = np.asarray(grid1, float), np.asarray(grid2, float)
        return cls(g1, g2, np.full((len(g1) - 1, len(g2) - 1), float(c)))

    @classmethod
    def from_callable(cls, fn, grid1, grid2) -> "GridFn":
        """Sample a function at cell midpoints."""
        g1, g2 = np.asarray(grid1, float), np.asarray(grid2, float)
        m1 = 0.5 * (g1[:-1] + g1[1:])
        m2 = 0.5 * (g2[:-1] + g2[1:])
        return cls(g1, g2, np.asarray(fn(m1[:, None], m2[None, :]), dtype=float))

    @classmethod
    def indicator(cls, rect, grid1, grid2) -> "GridFn":
        """Indicator of a rectangle, sampled at cell midpoints."""
        (x0, x1), (y0, y1) = rect
        return cls.from_callable(
            lambda a, b: ((a > x0) & (a < x1) & (b > y0) & (b < y1)).astype(float),
            grid1, grid2,
        )

    @cached_property
    def _areas(self) -> np.ndarray:
        return np.outer(np.diff(self.grid1), np.diff(self.grid2))

    @cached_property
    def _prefix(self) -> Prefix2D:
        return Prefix2D(self.grid1, self.grid2, self.values * self._areas)

    @cached_property
    def _log_prefix(self) -> tuple[Prefix2D, Prefix2D]:
        """Prefixes of ln(f) over positive cells, and of zero-cell area."""
        pos = self.values > 0.0
        logs = np.where(pos, np.log(np.where(pos, self.values, 1.0)), 0.0)
        zero_area = np.where(pos, 0.0, 1.0) * self._areas
        return (
            Prefix2D(self.grid1, self.grid2, logs * self._areas),
            Prefix2D(self.grid1, self.grid2, zero_area),
        )

    @property
    def support(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Bounding rectangle of the positive cells."""
        pos = self.values > 0.0
        if not pos.any():
            g1, g2 = self.grid1, self.grid2
            return (g1[0], g1[0]), (g2[0], g2[0])
        rows = np.nonzero(pos.any(axis=1))[0]
        cols = np.nonzero(pos.any(axis=0))[0]
        return (
            (float(self.grid1[rows[0]]), float(self.grid1[rows[-1] + 1])),
            (float(self.grid2[cols[0]]), float(self.grid2[cols[-1] + 1])),
        )

    def integral(self) -> float:
        return float(self._prefix.P[-1, -1])

    def box_integral(self, x0, x1, y0, y1):
        """Exact integral of f over [x0,x1] x [y0,y1] (0 outside the grid)."""
        return self._prefix.box(x0, x1, y0, y1)

    def box_log_integral(self, x0, x1, y0, y1):
        """(integral of ln f over the box within the grid, uncovered+zero area)."""
        logp, zerop = self._log_prefix
        lval = logp.box(x0, x1, y0, y1)
        zarea = zerop.box(x0, x1, y0, y1)
        # Parts of the box outside the grid hold f = 0.
        cx0 = np.clip(x0, self.grid1[0], self.grid1[-1])
        cx1 = np.clip(x1, self.grid1[0], self.grid1[-1])
        cy0 = np.clip(y0, self.grid2[0], self.grid2[-1])
        cy1 = np.clip(y1, self.grid2[0], self.grid2[-1])
        box_area = np.maximum(x1 - x0, 0.0) * np.maximum(y1 - y0, 0.0)
        covered = np.maximum(cx1 - cx0, 0.0) * np.maximum(cy1 - cy0, 0.0)
        return lval, zarea + (box_area - covered)

    def resample(self, grid1, grid2) -> "GridFn":
        """Area-weighted projection onto another grid (exact local averaging)."""
        g1, g2 = np.asarray(grid1, float), np.asarray(grid2, float)
        vals = self._prefix.box(
            g1[:-1, None], g1[1:, None], g2[None, :-1], g2[None, 1:]
        ) / np.outer(np.diff(g1), np.diff(g2))
        return GridFn(g1, g2, np.maximum(vals, 0.0))

    def to_dict(self) -> dict:
        """Serialize for report reproducibility (cell edges + values)."""
        return {
            "grid1": self.grid1.tolist(),
            "grid2": self.grid2.tolist(),
            "values": self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GridFn":
        return cls(np.asarray(doc["grid1"], float), np.asarray(doc["grid2"], float),
                   np.asarray(doc["values"], float))


def _box_of(boundaries: tuple[BoundaryPair, BoundaryPair], x1, x2):
    pair1, pair2 = boundaries
    return pair1.a(x1), pair1.b(x1), pair2.a(x2), pair2.b(x2)


def apply_H2(f: GridFn, boundaries, x1, x2):
    """The box Hardy operator: integral of f over the moving box at (x1, x2)."""
    a1, b1, a2, b2 = _box_of(boundaries, x1, x2)
    out = f.box_integral(a1, b1, a2, b2)
    return out if (np.ndim(x1) or np.ndim(x2)) else float(out)


def apply_G2(f: GridFn, boundaries, x1, x2) -> float:
    """The geometric-mean operator: exp of the box average of ln f.

    Returns 0 when f vanishes on a positive-measure part of the box (the
    limiting value); a degenerate box is a domain error.
    """
    a1, b1, a2, b2 = _box_of(boundaries, x1, x2)
    area = (b1 - a1) * (b2 - a2)
    if area <= 0:
        raise DomainError("degenerate box for the geometric-mean operator")
    lval, zarea = f.box_log_integral(a1, b1, a2, b2)
    if zarea > _ZERO_AREA_TOL * area:
        return 0.0
    return float(np.exp(lval / area))


def cell_weight_integrals(w: Weight2D, grid1, grid2, domain=None, gauss: int = 3) -> np.ndarray:
    """Per-cell integrals of a weight over cells (clipped to ``domain``)."""
    g1, g2 = np.asarray(grid1, float), np.asarray(grid2, float)
    if domain is not None:
        (dx0, dx1), (dy0, dy1) = domain
        g1c = np.clip(g1, dx0, dx1)
        g2c = np.clip(g2, dy0, dy1)
    else:
        g1c, g2c = g1, g2
    out = np.zeros((len(g1) - 1, len(g2) - 1))
    ok1 = np.diff(g1c) > 0
    ok2 = np.diff(g2c) > 0
    if not (ok1.any() and ok2.any()):
        return out
    e1 = np.concatenate([g1c[:-1][ok1], [g1c[1:][ok1][-1]]])
    e2 = np.concatenate([g2c[:-1][ok2], [g2c[1:][ok2][-1]]])
    n1, w1 = panel_nodes(e1, gauss)
    n2, w2 = panel_nodes(e2, gauss)
    vals = w(n1[:, None], n2[None, :]) * np.outer(w1, w2)
    cells = vals.reshape(ok1.sum(), gauss, ok2.sum(), gauss).sum(axis=(1, 3))
    out[np.ix_(ok1, ok2)] = cells
    return out


def weighted_norm(f: GridFn, w: Weight2D, r: float, domain=None) -> float:
    """(integral of f^r * w over domain)^(1/r), cell-exact in f."""
    if r <= 0:
        raise DomainError("norm exponent must be positive")
    W = cell_weight_integrals(w, f.grid1, f.grid2, domain)
    total = float(np.sum(f.values**r * W))
    return total ** (1.0 / r)


# --------------------------------------------------------------------------
# the Rayleigh-type ratio and its ascent


def _z_rect(cfg: ProblemConfig, f_support):
    """Per-axis range of x where the moving box can meet the support of f."""
    out = []
    for i, (slo, shi) in enumerate(f_support):
        pair = cfg.boundaries[i]
        wlo, whi = cfg.window[i]
        if shi <= slo:
            return None
        zlo = max(wlo, float(pair.b.inverse(slo))) if slo > 0 else wlo
        zhi = min(whi, float(pair.a.inverse(shi)))
        if zhi <= zlo:
            return None
        out.append((zlo, zhi))
    return out


def _h2_qnorm_nodes(cfg: ProblemConfig, f_support, panels: int = 48, gauss: int = 4):
    rect = _z_rect(cfg, f_support)
    if rect is None:
        return None
    nodes, wts = [], []
    for lo, hi in rect:
        e = np.geomspace(lo, hi, panels + 1)
        n, w = panel_nodes(e, gauss)
        nodes.append(n)
        wts.append(w)
    u_vals = cfg.u(nodes[0][:, None], nodes[1][None, :])
    return nodes, wts, u_vals


def h2_weighted_qnorm(f: GridFn, cfg: ProblemConfig, panels: int = 48) -> float:
    """|| H2 f ||_{L^q(u)} over the truncation window."""
    pack = _h2_qnorm_nodes(cfg, f.support, panels)
    if pack is None:
        return 0.0
    nodes, wts, u_vals = pack
    h = apply_H2(f, cfg.boundaries, nodes[0][:, None], nodes[1][None, :])
    q = cfg.exps.q
    total = float(wts[0] @ (u_vals * h**q) @ wts[1])
    return max(total, 0.0) ** (1.0 / q)


def rayleigh_ratio(f: GridFn, cfg: ProblemConfig) -> float:
    """||H2 f||_{q,u} / ||f||_{p, v1 v2}; a lower bound on the best constant."""
    if cfg.mode != "hardy":
        raise DomainError("the ratio is defined for hardy-mode configs")
    denom = weighted_norm(f, Weight2D.separable(cfg.v1, cfg.v2), cfg.exps.p)
    if denom <= 0.0:
        raise DomainError("zero denominator: f vanishes in L^p(v1 v2)")
    return h2_weighted_qnorm(f, cfg) / denom


@dataclass
class NormEstimate:
    """Best ratio found, with the witnessing grid function."""

    value: float
    iterations: int
    best_f: GridFn
    converged: bool
    diagnostics: dict = field(default_factory=dict)


def _default_anchors(cfg: ProblemConfig, n: int = 4):
    anchors = []
    for i in range(n):
        frac = (i + 1) / (n + 1)
        pts = []
        for ax in (0, 1):
            lo, hi = cfg.window[ax]
            t = lo * (hi / lo) ** (0.25 + 0.5 * frac)
            cap = min(cfg.boundaries[ax].x_cap(t), hi)
            x = t * (cap / t) ** (0.4 + 0.2 * frac)
            pts.append((t, x))
        anchors.append(SearchPoint(t1=pts[0][0], t2=pts[1][0], x1=pts[0][1], x2=pts[1][1]))
    return [a for a in anchors if a.is_admissible(cfg.boundaries)]


def estimate_norm(cfg: ProblemConfig, grid_resolution: int = 64, restarts: int = 6,
                  max_iters: int = 200, seed: int = 0, extra_starts=()) -> NormEstimate:
    """Maximize the Rayleigh ratio over nonnegative grid functions.

    Multi-started from the uniform function, the main witness function at
    four admissible anchors, and random positive fields; the grid is a
    geometric subdivision of the window so power-of-two refinements nest.
    """
    if cfg.mode != "hardy":
        raise DomainError("estimate_norm needs a hardy-mode config")
    if grid_resolution < 8:
        raise DomainError("resolution must be at least 8 cells per axis")
    if cfg.u.is_zero:
        g1 = np.geomspace(*cfg.window[0], grid_resolution + 1)
        g2 = np.geomspace(*cfg.window[1], grid_resolution + 1)
        f0 = GridFn.constant(1.0, g1, g2)
        return NormEstimate(0.0, 0, f0, True, {"zero_weight": True})

    exps = cfg.exps
    p, q = exps.p, exps.q
    g1 = np.geomspace(*cfg.window[0], grid_resolution + 1)
    g2 = np.geomspace(*cfg.window[1], grid_resolution + 1)

    pack = _h2_qnorm_nodes(cfg, (tuple(cfg.window[0]), tuple(cfg.window[1])))
    nodes, wts, u_vals = pack
    uw = u_vals * np.outer(wts[0], wts[1])

    # Per-axis overlap of each cell with the moving box at each node.
    def overlap(axis, grid):
        pair = cfg.boundaries[axis]
        av, bv = pair.a(nodes[axis]), pair.b(nodes[axis])
        lo = np.maximum(av[:, None], grid[:-1][None, :])
        hi = np.minimum(bv[:, None], grid[1:][None, :])
        return np.maximum(hi - lo, 0.0)

    OX = overlap(0, g1)
    OY = overlap(1, g2)
    Wv = cell_weight_integrals(Weight2D.separable(cfg.v1, cfg.v2), g1, g2)
    Wv = np.maximum(Wv, 1e-300)

    def ratio_and_grad(F):
        H = OX @ F @ OY.T
        I = float(np.sum(uw * H**q))
        D = float(np.sum(F**p * Wv)) ** (1.0 / p)
        R = I ** (1.0 / q) / D
        G = OX.T @ (uw * np.maximum(H, 1e-300) ** (q - 1.0)) @ OY
        return R, G

    def normalize(F):
        nrm = float(np.sum(F**p * Wv)) ** (1.0 / p)
        return F / nrm

    rng = np.random.default_rng(seed)
    extra = list(extra_starts)
    starts = [("uniform", GridFn.constant(1.0, g1, g2))]
    from .witness import WitnessSpec, thm1_witness  # deferred: witness builds GridFns

    s_mid = ScalePoint(1.0 + 0.5 * (p - 1.0), 1.0 + 0.5 * (p - 1.0))
    for k, anchor in enumerate(_default_anchors(cfg)):
        try:
            wfn = thm1_witness(cfg, WitnessSpec(kind="thm1_hardy", s=s_mid, anchor=anchor))
            starts.append((f"witness{k}", wfn.resample(g1, g2)))
        except DomainError:
            continue
    for e, fstart in enumerate(extra):
        starts.append((f"extra{e}", fstart.resample(g1, g2)))
    while len(starts) < restarts + len(extra):
        vals = rng.lognormal(mean=0.0, sigma=1.0, size=(grid_resolution, grid_resolution))
        starts.append((f"random{len(starts)}", GridFn(g1, g2, vals)))
    starts = starts[: restarts + len(extra)]

    floor = 1e-12
    best_R, best_F, best_tag = -1.0, None, ""
    total_iters = 0
    improved_any = False
    plateaued = False
    for tag, f0 in starts:
        F = np.maximum(f0.values.astype(float), floor * max(float(f0.values.max()), 1.0))
        F = normalize(F)
        R, G = ratio_and_grad(F)
        run_start, run_best, run_bestF = R, R, F
        eta, stagnant = 1.0, 0
        for _ in range(max_iters):
            total_iters += 1
            target = (G / Wv) ** (1.0 / max(p - 1.0, 1e-9))
            target = normalize(np.maximum(target, 1e-300))
            Fnew = normalize(F ** (1.0 - eta) * target**eta)
            Rnew, Gnew = ratio_and_grad(Fnew)
            gain = Rnew / run_best - 1.0 if run_best > 0 else 1.0
            if gain > 0.0:
                run_best, run_bestF = Rnew, Fnew
                F, G = Fnew, Gnew
            else:
                eta = max(eta * 0.5, 1e-4)
            if gain > 1e-9:
                stagnant = 0
            else:
                stagnant += 1
                if stagnant >= 50:
                    plateaued = True
                    break
        if run_best > run_start * (1.0 + 1e-12):
            improved_any = True
        if run_best > best_R:
            best_R, best_F, best_tag = run_best, run_bestF, tag

    best = GridFn(g1, g2, best_F)
    value = rayleigh_ratio(best, cfg)
    return NormEstimate(
        value=value,
        iterations=total_iters,
        best_f=best,
        converged=improved_any and best_R > 0,
        diagnostics={"best_start": best_tag, "internal_ratio": best_R, "plateaued": plateaued},
    )
