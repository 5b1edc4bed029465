"""Independent brute-force references for validating the optimized pipeline.

Everything here is deliberately primitive: trapezoid quadrature on a fixed
fine mesh, cumulative transforms by trapezoid + linear interpolation, and
exhaustive dense-grid suprema with no refinement heuristics.  The point is
that none of the production machinery (Gauss panels, prefix tables, pchip
interpolation, golden search) is shared, so agreement is evidence rather
than tautology.  Oracles run on a reduced window and are slow by design;
they are single-threaded and deterministic so golden files reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charf import Problem1D, ProblemConfig, ScalePoint
from .errors import DomainError
from .funcspace import BoundaryPair


@dataclass(frozen=True)
class OracleConfig:
    """Dense-grid resolutions; defaults exceed 4x the production density
    per decade on the reduced window."""

    window: tuple[float, float] = (1e-2, 1e2)
    quad_points: int = 1025
    t_points: int = 48
    x_points: int = 32
    exhaustive: bool = True


def _cum_trapz(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


def _oracle_V(v, p: float, window: tuple[float, float], n: int):
    """Cumulative dual-weight transform by trapezoid on a deep dense mesh."""
    lo, hi = window
    mesh = np.geomspace(lo * 1e-8, hi, n * 4)
    expo = -1.0 / (p - 1.0)
    cum = _cum_trapz(v(mesh) ** expo, mesh)
    return mesh, cum


def _interp(mesh, cum, x):
    return np.interp(x, mesh, cum)


def oracle_B1(prob: Problem1D, s: float, ocfg: OracleConfig | None = None) -> float:
    """Exhaustive dense-grid 1D characterization supremum."""
    ocfg = ocfg or OracleConfig()
    lo, hi = ocfg.window
    p, q = prob.exps.p, prob.exps.q
    pair = prob.boundary
    if prob.u is None:
        return 0.0

    knots = np.geomspace(lo, hi, ocfg.quad_points)
    vmesh, vcum = _oracle_V(prob.v, p, (min(lo, pair.a(lo)), max(hi, pair.b(hi))), ocfg.quad_points)
    dv = np.maximum(_interp(vmesh, vcum, pair.b(knots)) - _interp(vmesh, vcum, pair.a(knots)), 0.0)
    integrand = prob.u(knots) * dv ** (q * (p - s) / p)
    prefix = _cum_trapz(integrand, knots)

    t_idx = np.unique(np.linspace(0, len(knots) - 2, ocfg.t_points).astype(int))
    best = 0.0
    for it in t_idx:
        t = knots[it]
        cap = min(float(pair.a.inverse(pair.b(t))), hi)
        xs = knots[(knots > t) & (knots < cap)]
        if len(xs) > ocfg.x_points:
            xs = xs[np.unique(np.linspace(0, len(xs) - 1, ocfg.x_points).astype(int))]
        if len(xs) == 0:
            continue
        inner = np.interp(xs, knots, prefix) - np.interp(t, knots, prefix)
        dvtx = np.maximum(
            _interp(vmesh, vcum, pair.b(t)) - _interp(vmesh, vcum, pair.a(xs)), 0.0
        )
        vals = np.maximum(inner, 0.0) ** (1.0 / q) * dvtx ** ((s - 1.0) / p)
        best = max(best, float(vals.max()))
    return best


def oracle_B2(cfg: ProblemConfig, s: ScalePoint, ocfg: OracleConfig | None = None) -> float:
    """Exhaustive dense-grid 2D characterization supremum on a reduced window."""
    ocfg = ocfg or OracleConfig()
    if cfg.mode != "hardy":
        raise DomainError("oracle_B2 needs a hardy-mode config")
    if cfg.u.is_zero:
        return 0.0
    lo, hi = ocfg.window
    p, q = cfg.exps.p, cfg.exps.q

    knots = np.geomspace(lo, hi, ocfg.quad_points)
    axis = []
    for i, v in enumerate((cfg.v1, cfg.v2)):
        pair = cfg.boundaries[i]
        vmesh, vcum = _oracle_V(v, p, (min(lo, pair.a(lo)), max(hi, pair.b(hi))), ocfg.quad_points)
        si = (s.s1, s.s2)[i]
        dv = np.maximum(
            _interp(vmesh, vcum, pair.b(knots)) - _interp(vmesh, vcum, pair.a(knots)), 0.0
        )
        axis.append({
            "pair": pair,
            "vmesh": vmesh,
            "vcum": vcum,
            "phi": dv ** (q * (p - si) / p),
            "s": si,
        })

    dens = cfg.u(knots[:, None], knots[None, :]) * axis[0]["phi"][:, None] * axis[1]["phi"][None, :]
    # 2D trapezoid prefix on the knot lattice.
    w = np.diff(knots)
    P = np.zeros((len(knots), len(knots)))
    mid = 0.25 * (dens[:-1, :-1] + dens[1:, :-1] + dens[:-1, 1:] + dens[1:, 1:])
    P[1:, 1:] = np.cumsum(np.cumsum(mid * np.outer(w, w), axis=0), axis=1)

    t_idx = np.unique(np.linspace(0, len(knots) - 2, ocfg.t_points).astype(int))

    def candidates(i):
        pair = axis[i]["pair"]
        pairs = []
        for it in t_idx:
            t = knots[it]
            cap = min(float(pair.a.inverse(pair.b(t))), hi)
            ix = np.nonzero((knots > t) & (knots < cap))[0]
            if len(ix) > ocfg.x_points:
                ix = ix[np.unique(np.linspace(0, len(ix) - 1, ocfg.x_points).astype(int))]
            for j in ix:
                pairs.append((it, int(j)))
        return pairs

    cand1 = candidates(0)
    cand2 = candidates(1)
    if not cand1 or not cand2:
        return 0.0

    def prefs(i, pairs):
        pair = axis[i]["pair"]
        vmesh, vcum = axis[i]["vmesh"], axis[i]["vcum"]
        si = axis[i]["s"]
        t = knots[[a for a, _ in pairs]]
        x = knots[[b for _, b in pairs]]
        d = np.maximum(_interp(vmesh, vcum, pair.b(t)) - _interp(vmesh, vcum, pair.a(x)), 0.0)
        return d ** ((si - 1.0) / p)

    pref1 = prefs(0, cand1)
    pref2 = prefs(1, cand2)
    i1 = np.array([a for a, _ in cand1])
    j1 = np.array([b for _, b in cand1])
    i2 = np.array([a for a, _ in cand2])
    j2 = np.array([b for _, b in cand2])

    best = 0.0
    chunk = 4096
    for start in range(0, len(cand1), chunk):
        sl = slice(start, start + chunk)
        inner = (
            P[np.ix_(j1[sl], j2)] - P[np.ix_(i1[sl], j2)]
            - P[np.ix_(j1[sl], i2)] + P[np.ix_(i1[sl], i2)]
        )
        vals = np.maximum(inner, 0.0) ** (1.0 / q) * pref1[sl][:, None] * pref2[None, :]
        best = max(best, float(vals.max()))
    return best


def oracle_ratio_search(cfg: ProblemConfig, resolution: int = 16,
                        seed: int = 0, max_rounds: int = 40,
                        restarts: int = 3) -> float:
    """Hill climbing with exhaustive single-cell perturbations.

    A naive reference for the production ratio ascent: the ratio itself is
    evaluated by midpoint Riemann sums on a fixed mesh with its own
    cumulative-sum box queries.
    """
    if resolution > 32:
        raise DomainError("oracle resolution is capped at 32 cells per axis")
    if cfg.u.is_zero:
        return 0.0
    p, q = cfg.exps.p, cfg.exps.q
    (lo1, hi1), (lo2, hi2) = cfg.window
    g1 = np.geomspace(lo1, hi1, resolution + 1)
    g2 = np.geomspace(lo2, hi2, resolution + 1)
    areas = np.outer(np.diff(g1), np.diff(g2))
    mid1 = np.sqrt(g1[:-1] * g1[1:])
    mid2 = np.sqrt(g2[:-1] * g2[1:])
    vw = np.outer(cfg.v1(mid1), cfg.v2(mid2)) * areas

    nz = 96
    pair1, pair2 = cfg.boundaries
    z1 = np.geomspace(max(lo1, float(pair1.b.inverse(lo1))), min(hi1, float(pair1.a.inverse(hi1))), nz)
    z2 = np.geomspace(max(lo2, float(pair2.b.inverse(lo2))), min(hi2, float(pair2.a.inverse(hi2))), nz)
    zm1 = np.sqrt(z1[:-1] * z1[1:])
    zm2 = np.sqrt(z2[:-1] * z2[1:])
    zw = np.outer(np.diff(z1), np.diff(z2))
    uz = cfg.u(zm1[:, None], zm2[None, :])

    def ov(zmid, pair, grid):
        av, bv = pair.a(zmid), pair.b(zmid)
        lo = np.maximum(av[:, None], grid[:-1][None, :])
        hi = np.minimum(bv[:, None], grid[1:][None, :])
        return np.maximum(hi - lo, 0.0)

    O1 = ov(zm1, pair1, g1)
    O2 = ov(zm2, pair2, g2)

    def ratio(F):
        H = O1 @ F @ O2.T
        num = float(np.sum(zw * uz * H**q)) ** (1.0 / q)
        den = float(np.sum(F**p * vw)) ** (1.0 / p)
        return num / den if den > 0 else 0.0

    rng = np.random.default_rng(seed)
    best = 0.0
    for restart in range(restarts):
        if restart == 0:
            F = np.ones((resolution, resolution))
        else:
            F = rng.lognormal(0.0, 1.0, size=(resolution, resolution))
        r = ratio(F)
        for _ in range(max_rounds):
            improved = False
            best_gain, best_move = 0.0, None
            for factor in (2.0, 0.5):
                for i in range(resolution):
                    for j in range(resolution):
                        old = F[i, j]
                        F[i, j] = old * factor
                        r_new = ratio(F)
                        F[i, j] = old
                        if r_new > r + best_gain:
                            best_gain = r_new - r
                            best_move = (i, j, factor)
            if best_move is not None and best_gain > 1e-12 * max(r, 1e-300):
                i, j, factor = best_move
                F[i, j] *= factor
                r += best_gain
                improved = True
            if not improved:
                break
        best = max(best, r)
    return best
