"""Closed-form sandwich factors and the scale-parameter optimization.

The best constant C of each inequality is bracketed by

    sup_s  F(s) * lower_factor(s)   <=   C   <=   multiplier * inf_s F(s) * upper_factor(s)

where F is the matching characterization functional.  The multiplier is 4
for the two full theorems, 2 for the 1D inequality, and 1 for the four
rectangle-corner lemmas.  The s-optimization runs a uniform grid over the
open admissible square followed by golden-section polish around both optima;
grid nesting makes refinement monotone, which the tests assert rather than
assume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._prefix import golden_max
from .charf import (
    B1,
    B2,
    D2,
    CharacterizationValue,
    Problem1D,
    ProblemConfig,
    ScalePoint,
    rect_corner,
)
from .errors import DomainError

THEOREMS = ("hardy_thm1", "pk_thm2", "lemmaA", "lemma2", "lemma3", "lemma4", "hardy_1d")

MULTIPLIERS = {
    "hardy_thm1": 4.0,
    "pk_thm2": 4.0,
    "lemmaA": 1.0,
    "lemma2": 1.0,
    "lemma3": 1.0,
    "lemma4": 1.0,
    "hardy_1d": 2.0,
}

_CORNER_OF = {"lemmaA": "AW", "lemma2": "AWstar", "lemma3": "AWtilde", "lemma4": "AWtilde_star"}


def _axis_lower_factor(p: float, s: float) -> float:
    t = (p / (p - s)) ** p
    return (t / (t + 1.0 / (s - 1.0))) ** (1.0 / p)


def lower_factor(p: float, s: ScalePoint) -> float:
    """prod_i ((p/(p-s_i))^p / ((p/(p-s_i))^p + 1/(s_i-1)))^(1/p), in (0, 1)."""
    for si in s:
        if not (1.0 < si < p):
            raise DomainError(f"lower_factor needs 1 < s < p, got s={si:g}, p={p:g}")
    return _axis_lower_factor(p, s.s1) * _axis_lower_factor(p, s.s2)


def upper_factor(p: float, s: ScalePoint) -> float:
    """prod_i ((p-1)/(p-s_i))^(1/p'); >= 1 and increasing in each s_i."""
    pprime = p / (p - 1.0)
    out = 1.0
    for si in s:
        if not (1.0 < si < p):
            raise DomainError(f"upper_factor needs 1 < s < p, got s={si:g}, p={p:g}")
        out *= ((p - 1.0) / (p - si)) ** (1.0 / pprime)
    return out


def pk_lower_factor(p: float, s: ScalePoint) -> float:
    """prod_i (e^s (s-1) / (e^s (s-1) + 1))^(1/p) for s_i > 1, p > 0.

    Evaluated as (s-1)/((s-1) + e^-s) per axis so large s cannot overflow.
    """
    if p <= 0:
        raise DomainError("p must be positive")
    out = 1.0
    for si in s:
        if si <= 1.0:
            raise DomainError(f"pk_lower_factor needs s > 1, got s={si:g}")
        out *= ((si - 1.0) / ((si - 1.0) + math.exp(-si))) ** (1.0 / p)
    return out


@dataclass
class SandwichReport:
    """Two-sided certified bracket for a best constant."""

    lower_bound: float
    upper_bound: float
    s_at_lower: ScalePoint
    s_at_upper: ScalePoint
    functional_values: dict
    theorem: str
    multiplier: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "multiplier": self.multiplier,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "s_at_lower": list(self.s_at_lower),
            "s_at_upper": list(self.s_at_upper),
            "functional_values": {
                f"{k[0]:.6g},{k[1]:.6g}": (v.value if math.isfinite(v.value) else "+inf")
                for k, v in self.functional_values.items()
            },
            "diagnostics": self.diagnostics,
        }


def _s_grid(p: float, n: int) -> np.ndarray:
    h = (p - 1.0) / 40.0
    return np.linspace(1.0 + h, p - h, n)


def _pk_lower_grid(p: float, n: int) -> np.ndarray:
    h = (p - 1.0) / 40.0 if p > 1 else 0.025
    return np.linspace(1.0 + h, 1.0 + 10.0 * max(p - 1.0, h), n)


def optimize_sandwich(cfg, theorem: str, s_grid: int | None = None, rect=None,
                      refine: bool = True) -> SandwichReport:
    """Optimize functional * factor over the scale square for one theorem.

    ``cfg`` is a ProblemConfig (or a Problem1D for ``hardy_1d``); corner
    lemmas additionally need ``rect``.  Functional evaluations on the grid
    skip the window-doubling divergence probe; the two optima are re-checked
    with it, so divergent instances still surface as unbounded reports.
    """
    if theorem not in THEOREMS:
        raise DomainError(f"unknown theorem {theorem!r}")
    multiplier = MULTIPLIERS[theorem]

    if theorem == "hardy_1d":
        if not isinstance(cfg, Problem1D):
            raise DomainError("hardy_1d expects a Problem1D")
        p = cfg.exps.p
        n = s_grid or cfg.tols.s_grid

        def ev(s1, s2, check=False):
            return B1(cfg, s1, divergence_check=check)

        pairwise = False
    else:
        p = cfg.exps.p
        n = s_grid or cfg.tols.s_grid
        pairwise = True
        if theorem == "hardy_thm1":

            def ev(s1, s2, check=False):
                return B2(cfg, ScalePoint(s1, s2), divergence_check=check)

        elif theorem == "pk_thm2":

            def ev(s1, s2, check=False):
                return D2(cfg, ScalePoint(s1, s2), divergence_check=check)

        else:
            if rect is None:
                raise DomainError(f"{theorem} needs a rectangle")
            variant = _CORNER_OF[theorem]

            def ev(s1, s2, check=False):
                return rect_corner(variant, rect, cfg, ScalePoint(s1, s2))

    values: dict[tuple[float, float], CharacterizationValue] = {}

    def lf(s1, s2):
        if theorem == "pk_thm2":
            return pk_lower_factor(p, ScalePoint(s1, s2))
        if pairwise:
            return lower_factor(p, ScalePoint(s1, s2))
        return _axis_lower_factor(p, s1)

    def uf(s1, s2):
        if pairwise:
            return upper_factor(p, ScalePoint(s1, s2))
        return ((p - 1.0) / (p - s1)) ** ((p - 1.0) / p)

    def cached(s1, s2):
        key = (round(float(s1), 12), round(float(s2), 12))
        hit = values.get(key)
        if hit is None:
            hit = values[key] = ev(s1, s2)
        return hit

    upper_grid = _s_grid(p, n) if p > 1 else np.array([])
    lower_grid = _pk_lower_grid(p, n) if theorem == "pk_thm2" else upper_grid

    def scan(grid, objective, better):
        best, best_s = None, None
        for s1 in grid:
            for s2 in grid if pairwise else [s1]:
                cv = cached(s1, s2)
                if not math.isfinite(cv.value):
                    continue
                cand = objective(cv.value, s1, s2)
                if best is None or better(cand, best):
                    best, best_s = cand, (float(s1), float(s2))
        return best, best_s

    lower, s_lo = scan(lower_grid, lambda v, s1, s2: v * lf(s1, s2), lambda a, b: a > b)
    upper, s_up = (None, None)
    if len(upper_grid):
        upper, s_up = scan(upper_grid, lambda v, s1, s2: multiplier * v * uf(s1, s2),
                           lambda a, b: a < b)

    if lower is None and upper is None:
        mid = ScalePoint(1.0 + (p - 1.0) / 2.0, 1.0 + (p - 1.0) / 2.0) if p > 1 else ScalePoint(2.0, 2.0)
        return SandwichReport(math.inf, math.inf, mid, mid, values, theorem, multiplier,
                              {"unbounded": True})

    def polish(s_start, objective, sign, grid):
        """Coordinate golden polish; sign=+1 maximizes, -1 minimizes."""
        s1, s2 = s_start
        val = sign * objective(cached(s1, s2).value, s1, s2)
        glo, ghi = float(grid[0]), float(grid[-1])
        coords = (0, 1) if pairwise else (0,)
        for _ in range(1):
            for c in coords:
                def line(x):
                    a, b = (x, s2) if c == 0 else (s1, x)
                    cv = cached(a, b)
                    if not math.isfinite(cv.value):
                        return -math.inf
                    return sign * objective(cv.value, a, b)

                x0, v0, _ = golden_max(line, glo, ghi, (ghi - glo) * 1e-3)
                if v0 > val:
                    val = v0
                    if c == 0:
                        s1 = x0
                    else:
                        s2 = x0
            if not pairwise:
                s2 = s1
        return sign * val, (s1, s2)

    if refine:
        if lower is not None:
            lower, s_lo = polish(s_lo, lambda v, s1, s2: v * lf(s1, s2), +1.0, lower_grid)
        if upper is not None:
            upper, s_up = polish(s_up, lambda v, s1, s2: multiplier * v * uf(s1, s2), -1.0,
                                 upper_grid)

    diagnostics = {}
    # Re-check the optima with the window-doubling divergence probe.
    for tag, s_opt in (("lower", s_lo), ("upper", s_up)):
        if s_opt is None:
            continue
        cv = ev(s_opt[0], s_opt[1], check=True)
        if not math.isfinite(cv.value):
            diagnostics[f"{tag}_divergent"] = True
            if tag == "lower":
                lower = math.inf
            else:
                upper = math.inf

    if theorem == "pk_thm2":
        restricted = [
            (v.value * lf(k[0], k[1]), k)
            for k, v in values.items()
            if k[0] < p and k[1] < p and math.isfinite(v.value)
        ]
        if restricted:
            diagnostics["lower_restricted_to_(1,p)"] = max(r[0] for r in restricted)
        diagnostics["lower_wide_range"] = lower

    if lower is None:
        lower = 0.0
        s_lo = s_up
    if upper is None:
        upper = math.inf
        s_up = s_lo
        diagnostics["upper_unavailable"] = "no admissible s in (1, p)"

    return SandwichReport(
        lower_bound=float(lower),
        upper_bound=float(upper),
        s_at_lower=ScalePoint(*s_lo),
        s_at_upper=ScalePoint(*s_up),
        functional_values=values,
        theorem=theorem,
        multiplier=multiplier,
        diagnostics=diagnostics,
    )
