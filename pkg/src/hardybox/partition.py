"""Constructive machinery of the sufficiency argument.

The recursion m^(k+1) = a^-1(b(m^k)) tiles (0, inf) into intervals whose
boundary images abut exactly: a(m^(k+1)) = b(m^k).  Over that tiling the
moving-box operator splits, per axis, into a part reaching below the shared
image point and a part reaching above it; Minkowski's inequality then bounds
the weighted norm by four corner-type double sums over transformed weights
(the outer variable is substituted through a or b, which pulls in the
inverse-derivative factors).

This module builds the sequences, the transformed weights, and evaluates the
four sums as a diagnostic.  The decomposition validates the proof's
splitting numerically; it takes no part in computing bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._prefix import panel_nodes
from .charf import ProblemConfig
from .errors import CoverageError, DomainError, RangeError
from .funcspace import BoundaryPair, Weight2D
from .ops import GridFn, h2_weighted_qnorm


@dataclass(eq=False)
class LimitSequence:
    """The tiling sequence m^k with its boundary images a^k, b^k.

    a(m^(k+1)) = b(m^k) holds to inverse-evaluation tolerance, so the image
    intervals [a^k, a^(k+1)) abut exactly.  ``truncated`` flags a recursion
    that left the working window before exhausting the requested k-range.
    """

    axis: int
    m0: float
    k_min: int
    k_max: int
    m: np.ndarray
    a_k: np.ndarray
    b_k: np.ndarray
    truncated: bool = False

    def mk(self, k: int) -> float:
        return float(self.m[k - self.k_min])

    def ak(self, k: int) -> float:
        return float(self.a_k[k - self.k_min])

    def bk(self, k: int) -> float:
        return float(self.b_k[k - self.k_min])

    @property
    def ks(self) -> range:
        return range(self.k_min, self.k_max + 1)


def build_sequence(pair: BoundaryPair, m0: float, k_range=None,
                   window: tuple[float, float] = (1e-6, 1e6), axis: int = 1) -> LimitSequence:
    """Run the abutment recursion from m^0 = m0 over ``k_range``.

    ``k_range=None`` picks the smallest range whose image intervals cover the
    window.  The recursion truncates (with a flag) if it exits the window or
    an inverse becomes unreachable.
    """
    lo, hi = window
    if not (lo <= m0 <= hi):
        raise DomainError(f"m0={m0:g} outside window [{lo:g}, {hi:g}]")

    auto = k_range is None
    if auto:
        k_lo, k_hi = -10**6, 10**6
    else:
        k_lo, k_hi = int(k_range[0]), int(k_range[1])
        if k_lo > 0 or k_hi < 0:
            raise DomainError("k_range must contain 0")

    fwd = [m0]
    truncated = False
    k = 0
    hi_guard = hi * (1e6 if auto else 1e2)
    while k < k_hi:
        try:
            nxt = float(pair.a.inverse(pair.b(fwd[-1])))
        except RangeError:
            truncated = True
            break
        if nxt > hi_guard:
            truncated = True
            break
        fwd.append(nxt)
        k += 1
        if auto and pair.a(nxt) >= hi:
            break
    bwd = [m0]
    k = 0
    lo_guard = lo * (1e-6 if auto else 1e-2)
    while k > k_lo:
        try:
            prv = float(pair.b.inverse(pair.a(bwd[-1])))
        except RangeError:
            truncated = True
            break
        if prv < lo_guard:
            truncated = True
            break
        bwd.append(prv)
        k -= 1
        if auto and pair.b(prv) <= lo:
            break

    if not auto:
        if len(fwd) - 1 < k_hi or len(bwd) - 1 < -k_lo:
            truncated = True

    ms = np.array(bwd[:0:-1] + fwd)
    k_min = -(len(bwd) - 1)
    k_max = len(fwd) - 1
    return LimitSequence(
        axis=axis,
        m0=m0,
        k_min=k_min,
        k_max=k_max,
        m=ms,
        a_k=pair.a(ms),
        b_k=pair.b(ms),
        truncated=truncated,
    )


_WHICH = {"aa": (0, 0), "bb": (1, 1), "ab": (0, 1), "ba": (1, 0)}


def transformed_weight2d(u: Weight2D, boundaries: tuple[BoundaryPair, BoundaryPair],
                         which: str) -> Weight2D:
    """u composed with per-axis inverse boundary maps times inverse derivatives."""
    if which not in _WHICH:
        raise DomainError(f"unknown transform {which!r} (want aa/bb/ab/ba)")
    picks = _WHICH[which]
    fns = tuple(
        (boundaries[i].a if picks[i] == 0 else boundaries[i].b) for i in (0, 1)
    )

    def fn(y1, y2):
        z1 = fns[0].inverse(np.asarray(y1, float))
        z2 = fns[1].inverse(np.asarray(y2, float))
        return u(z1, z2) * fns[0].inverse_deriv(y1) * fns[1].inverse_deriv(y2)

    return Weight2D.derived(fn, label=f"u_{which}")


def transformed_weight(u: Weight2D, boundaries, which: str, point) -> float:
    """Pointwise evaluation of the transformed weight at (y1, y2)."""
    y1, y2 = point
    return float(transformed_weight2d(u, boundaries, which)(y1, y2))


@dataclass
class QuadrantDecomposition:
    """The four corner sums, the true norm, and per-cell bookkeeping."""

    II: tuple[float, float, float, float]
    total_lhs: float
    lhs_g: float
    terms: dict
    k_ranges: tuple[range, range]

    @property
    def sum_II(self) -> float:
        return float(sum(self.II))


def _resample_g(f: GridFn, cfg: ProblemConfig) -> GridFn:
    """g = f * v1^(1-p') * v2^(1-p'), midpoint-sampled on f's grid."""
    expo = -1.0 / (cfg.exps.p - 1.0)
    m1 = 0.5 * (f.grid1[:-1] + f.grid1[1:])
    m2 = 0.5 * (f.grid2[:-1] + f.grid2[1:])
    w1 = cfg.v1(m1) ** expo
    w2 = cfg.v2(m2) ** expo
    return GridFn(f.grid1, f.grid2, f.values * np.outer(w1, w2))


def quadrant_decompose(f: GridFn, cfg: ProblemConfig,
                       seqs: tuple[LimitSequence, LimitSequence],
                       panels_per_cell: int = 10, gauss: int = 4) -> QuadrantDecomposition:
    """Evaluate the four-corner splitting sums against the true norm.

    The sums are taken with g = f * v1^(1-p') * v2^(1-p'); ``total_lhs`` is
    the norm of H2 f and ``lhs_g`` the norm of H2 g (they coincide for unit
    inner weights, which is where the splitting inequality
    total_lhs <= II1+II2+II3+II4 is asserted).
    """
    if cfg.mode != "hardy":
        raise DomainError("quadrant decomposition needs a hardy-mode config")
    q = cfg.exps.q
    seq1, seq2 = seqs
    g = _resample_g(f, cfg)

    sup1, sup2 = f.support
    for seq, (slo, shi), name in ((seq1, sup1, "axis1"), (seq2, sup2, "axis2")):
        if seq.b_k[0] > slo * (1 + 1e-9) or seq.a_k[-1] < shi * (1 - 1e-9):
            raise CoverageError(
                f"{name}: sequence images [{seq.b_k[0]:g}, {seq.a_k[-1]:g}] do not "
                f"cover the support [{slo:g}, {shi:g}] of f"
            )

    uts = {w: transformed_weight2d(cfg.u, cfg.boundaries, w) for w in _WHICH}

    def outer_nodes(lo, hi):
        edges = np.geomspace(lo, hi, panels_per_cell + 1)
        return panel_nodes(edges, gauss)

    # Inner-box corner builders per sum: given outer nodes (y1, y2) and the
    # cell images, return the g-integration box.
    def boxes(which, y1, y2, lo1, hi1, lo2, hi2):
        if which == "II1":
            return y1, np.full_like(y1, hi1), y2, np.full_like(y2, hi2)
        if which == "II2":
            return y1, np.full_like(y1, hi1), np.full_like(y2, lo2), y2
        if which == "II3":
            return np.full_like(y1, lo1), y1, y2, np.full_like(y2, hi2)
        return np.full_like(y1, lo1), y1, np.full_like(y2, lo2), y2

    specs = {
        # name: (weight tag, axis1 uses shifted cell, axis2 uses shifted cell)
        "II1": ("aa", 0, 0),
        "II2": ("ab", 0, 1),
        "II3": ("ba", 1, 0),
        "II4": ("bb", 1, 1),
    }

    terms: dict[str, dict] = {name: {} for name in specs}
    sums = {}
    ks1 = list(seq1.ks)[:-1]
    ks2 = list(seq2.ks)[:-1]
    for name, (wtag, sh1, sh2) in specs.items():
        ut = uts[wtag]
        total = 0.0
        for k1 in ks1:
            c1lo, c1hi = seq1.ak(k1 + sh1), seq1.bk(k1 + sh1)
            n1, w1 = outer_nodes(c1lo, c1hi)
            for k2 in ks2:
                c2lo, c2hi = seq2.ak(k2 + sh2), seq2.bk(k2 + sh2)
                # Skip cells whose inner boxes cannot meet the support of g.
                if name == "II1" and (c1hi < sup1[0] or c2hi < sup2[0] or c1lo > sup1[1] or c2lo > sup2[1]):
                    continue
                n2, w2 = outer_nodes(c2lo, c2hi)
                x0, x1, y0, y1 = boxes(name, n1[:, None], n2[None, :], c1lo, c1hi, c2lo, c2hi)
                inner = g.box_integral(x0, x1, y0, y1)
                if not np.any(inner > 0.0):
                    continue
                uv = ut(n1[:, None], n2[None, :])
                term = float(w1 @ (uv * inner**q) @ w2)
                if term > 0.0:
                    terms[name][(k1, k2)] = term
                    total += term
        sums[name] = total ** (1.0 / q) if total > 0 else 0.0

    total_lhs = h2_weighted_qnorm(f, cfg)
    lhs_g = h2_weighted_qnorm(g, cfg)
    return QuadrantDecomposition(
        II=(sums["II1"], sums["II2"], sums["II3"], sums["II4"]),
        total_lhs=total_lhs,
        lhs_g=lhs_g,
        terms=terms,
        k_ranges=(seq1.ks, seq2.ks),
    )
