"""Named example instances used by the verification suite and the CLI.

The hardy instances pair power outer weights with linear boundary pairs and
tune the outer exponent so the supremand is scale-free: with v = x^alpha the
cumulative transform grows like t^kappa, kappa = alpha (1 - p') + 1, and the
supremand is invariant under (t, x) -> (lambda t, lambda x) exactly when
beta = -1 - kappa q (p - 1) / p.  Scale-free instances have window-stable
functionals, which keeps the certification checks meaningful on a truncated
window.
"""

from __future__ import annotations

from .charf import Exponents, ProblemConfig, Tolerances
from .funcspace import BoundaryFn, BoundaryPair, Weight1D, Weight2D

DEFAULT_WINDOW = (1e-4, 1e4)
ORACLE_WINDOW = (1e-2, 1e2)


def balanced_exponent(p: float, q: float, v_alpha: float) -> float:
    """Outer power making the hardy supremand scale-free for v = x^v_alpha."""
    kappa = v_alpha * (1.0 - p / (p - 1.0)) + 1.0
    return -1.0 - kappa * q * (p - 1.0) / p


def hardy_config(p: float, q: float, v_alpha: float, slope_a: float,
                 slope_b: float = 1.0, window=DEFAULT_WINDOW, label: str = "",
                 tols: Tolerances | None = None) -> ProblemConfig:
    beta = balanced_exponent(p, q, v_alpha)
    pair = BoundaryPair(BoundaryFn.linear(slope_a), BoundaryFn.linear(slope_b))
    return ProblemConfig(
        exps=Exponents(p, q),
        u=Weight2D.power_pair(beta, beta),
        boundaries=(pair, pair),
        v1=Weight1D.power(v_alpha),
        v2=Weight1D.power(v_alpha),
        window=(tuple(window), tuple(window)),
        tols=tols or Tolerances(),
        label=label,
    )


def pk_config(p: float, q: float, u_beta: float, slope_a: float,
              slope_b: float = 1.0, v2d: Weight2D | None = None,
              window=DEFAULT_WINDOW, label: str = "") -> ProblemConfig:
    pair = BoundaryPair(BoundaryFn.linear(slope_a), BoundaryFn.linear(slope_b))
    return ProblemConfig(
        exps=Exponents(p, q),
        u=Weight2D.power_pair(u_beta, u_beta),
        boundaries=(pair, pair),
        v2d=v2d or Weight2D.unit(),
        window=(tuple(window), tuple(window)),
        label=label,
    )


def suite_configs() -> dict[str, ProblemConfig]:
    """Six hardy instances: unit/power v, slope ratios 2 and 3/2, both (p, q)."""
    return {
        "h1-unit-r2-pq22": hardy_config(2.0, 2.0, 0.0, 0.5, label="h1-unit-r2-pq22"),
        "h2-unit-r32-pq22": hardy_config(2.0, 2.0, 0.0, 2.0 / 3.0, label="h2-unit-r32-pq22"),
        "h3-unit-r2-pq23": hardy_config(2.0, 3.0, 0.0, 0.5, label="h3-unit-r2-pq23"),
        "h4-unit-r32-pq23": hardy_config(2.0, 3.0, 0.0, 2.0 / 3.0, label="h4-unit-r32-pq23"),
        "h5-sqrt-r2-pq22": hardy_config(2.0, 2.0, 0.5, 0.5, label="h5-sqrt-r2-pq22"),
        "h6-sqrt-r32-pq23": hardy_config(2.0, 3.0, 0.5, 2.0 / 3.0, label="h6-sqrt-r32-pq23"),
    }


def pk_suite_configs() -> dict[str, ProblemConfig]:
    """PK instances whose D-functional is scale-free (u_beta = -1 + q/p)."""
    return {
        "pk1-unit-r2-pq22": pk_config(2.0, 2.0, 0.0, 0.5, label="pk1-unit-r2-pq22"),
        "pk2-half-r32-pq23": pk_config(2.0, 3.0, 0.5, 2.0 / 3.0, label="pk2-half-r32-pq23"),
    }


def oracle_configs() -> dict[str, ProblemConfig]:
    """Reduced-window variants cross-checked against the dense-grid oracle."""
    return {
        "o1-unit-r2-pq22": hardy_config(2.0, 2.0, 0.0, 0.5, window=ORACLE_WINDOW,
                                        label="o1-unit-r2-pq22"),
        "o2-unit-r2-pq23": hardy_config(2.0, 3.0, 0.0, 0.5, window=ORACLE_WINDOW,
                                        label="o2-unit-r2-pq23"),
        "o3-sqrt-r32-pq22": hardy_config(2.0, 2.0, 0.5, 2.0 / 3.0, window=ORACLE_WINDOW,
                                         label="o3-sqrt-r32-pq22"),
    }
