"""Weight functions and moving-limit boundary pairs on (0, infinity).

The operators under study integrate over boxes whose per-axis edges are a
strictly increasing pair a < b with a(0) = b(0) = 0 and a, b unbounded.  This
module provides the enumerated analytic families (power, exp-scaled, linear)
plus sampled tables, pointwise evaluation, inverse evaluation by bisection,
and the admissibility predicate for supremum-search points.

All types are immutable after construction and evaluation is pure, so
instances may be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RangeError

_BISECT_MAX_ITER = 200
_DEFAULT_INV_TOL = 1e-12


def _as_positive_array(x, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0.0)):
        raise DomainError(f"{what} must be positive and finite")
    return arr


def _check_strictly_increasing(grid: np.ndarray, what: str) -> None:
    if grid.ndim != 1 or len(grid) < 2:
        raise DomainError(f"{what} needs at least two points")
    if not np.all(np.diff(grid) > 0):
        raise DomainError(f"{what} must be strictly increasing")


@dataclass(frozen=True, eq=False)
class Weight1D:
    """A positive weight on (0, inf): x^alpha, x^alpha * e^(beta x), or a table.

    Sampled tables interpolate log-linearly between abscissas, which preserves
    positivity; evaluation outside the sampled window is a domain error.
    """

    kind: str
    alpha: float = 0.0
    beta: float = 0.0
    grid: np.ndarray | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("power", "exp_scaled", "sampled"):
            raise DomainError(f"unknown Weight1D kind {self.kind!r}")
        if self.kind == "sampled":
            grid = np.asarray(self.grid, dtype=float)
            vals = _as_positive_array(self.values, "sampled weight values")
            _check_strictly_increasing(grid, "sampled weight abscissas")
            if grid[0] <= 0:
                raise DomainError("sampled weight abscissas must be positive")
            if vals.shape != grid.shape:
                raise DomainError("sampled weight grid/values length mismatch")
            object.__setattr__(self, "grid", grid)
            object.__setattr__(self, "values", vals)

    @classmethod
    def power(cls, alpha: float) -> "Weight1D":
        return cls(kind="power", alpha=float(alpha))

    @classmethod
    def exp_scaled(cls, alpha: float, beta: float) -> "Weight1D":
        return cls(kind="exp_scaled", alpha=float(alpha), beta=float(beta))

    @classmethod
    def sampled(cls, grid, values) -> "Weight1D":
        return cls(kind="sampled", grid=np.asarray(grid, float), values=np.asarray(values, float))

    @classmethod
    def unit(cls) -> "Weight1D":
        return cls.power(0.0)

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        if np.any(xa <= 0.0):
            raise DomainError("weight evaluation requires x > 0")
        if self.kind == "power":
            out = xa**self.alpha
        elif self.kind == "exp_scaled":
            out = xa**self.alpha * np.exp(self.beta * xa)
        else:
            if np.any(xa < self.grid[0]) or np.any(xa > self.grid[-1]):
                raise DomainError(
                    f"sampled weight evaluated outside window "
                    f"[{self.grid[0]:g}, {self.grid[-1]:g}]"
                )
            out = np.exp(np.interp(np.log(xa), np.log(self.grid), np.log(self.values)))
        return out if np.ndim(x) else float(out)

    def log_extrapolation_slope(self) -> float:
        """Power-law slope used to extend the weight below its definition range."""
        if self.kind in ("power", "exp_scaled"):
            return self.alpha
        g, v = self.grid, self.values
        return float((np.log(v[1]) - np.log(v[0])) / (np.log(g[1]) - np.log(g[0])))

    def log_eval(self, x):
        """ln w(x), computed without overflow for exp-scaled weights."""
        xa = np.asarray(x, dtype=float)
        if np.any(xa <= 0.0):
            raise DomainError("weight evaluation requires x > 0")
        if self.kind == "power":
            return self.alpha * np.log(xa)
        if self.kind == "exp_scaled":
            return self.alpha * np.log(xa) + self.beta * xa
        if np.any(xa < self.grid[0]) or np.any(xa > self.grid[-1]):
            raise DomainError("sampled weight evaluated outside window")
        return np.interp(np.log(xa), np.log(self.grid), np.log(self.values))


@dataclass(frozen=True, eq=False)
class Weight2D:
    """A positive weight on (0, inf)^2.

    Kinds: ``separable`` (product of two Weight1D), ``power_pair``
    (x1^beta * x2^gamma), ``sampled`` (log-bilinear table), ``derived``
    (a positive callable, used for the geometric-mean-derived weight),
    ``scaled`` (constant multiple of another weight) and ``zero`` (the
    identically-zero weight, admitted only as the outer weight u so trivial
    instances are expressible).
    """

    kind: str
    w1: "Weight1D | None" = None
    w2: "Weight1D | None" = None
    beta: float = 0.0
    gamma: float = 0.0
    grid1: np.ndarray | None = None
    grid2: np.ndarray | None = None
    values: np.ndarray | None = None
    fn: object | None = field(default=None, repr=False)
    base: "Weight2D | None" = None
    factor: float = 1.0
    label: str = ""

    def __post_init__(self):
        kinds = ("separable", "power_pair", "sampled", "derived", "scaled", "zero")
        if self.kind not in kinds:
            raise DomainError(f"unknown Weight2D kind {self.kind!r}")
        if self.kind == "sampled":
            g1 = np.asarray(self.grid1, float)
            g2 = np.asarray(self.grid2, float)
            vals = _as_positive_array(self.values, "sampled weight matrix")
            _check_strictly_increasing(g1, "sampled grid1")
            _check_strictly_increasing(g2, "sampled grid2")
            if vals.shape != (len(g1), len(g2)):
                raise DomainError("sampled weight matrix shape mismatch")
            object.__setattr__(self, "grid1", g1)
            object.__setattr__(self, "grid2", g2)
            object.__setattr__(self, "values", vals)
        if self.kind == "scaled" and self.factor <= 0:
            raise DomainError("scale factor must be positive")

    @classmethod
    def separable(cls, w1: Weight1D, w2: Weight1D) -> "Weight2D":
        return cls(kind="separable", w1=w1, w2=w2)

    @classmethod
    def power_pair(cls, beta: float, gamma: float) -> "Weight2D":
        return cls(kind="power_pair", beta=float(beta), gamma=float(gamma))

    @classmethod
    def sampled(cls, grid1, grid2, values) -> "Weight2D":
        return cls(kind="sampled", grid1=grid1, grid2=grid2, values=np.asarray(values, float))

    @classmethod
    def derived(cls, fn, label: str = "") -> "Weight2D":
        return cls(kind="derived", fn=fn, label=label)

    @classmethod
    def scaled(cls, base: "Weight2D", factor: float) -> "Weight2D":
        return cls(kind="scaled", base=base, factor=float(factor))

    @classmethod
    def zero(cls) -> "Weight2D":
        return cls(kind="zero")

    @classmethod
    def unit(cls) -> "Weight2D":
        return cls.power_pair(0.0, 0.0)

    def __call__(self, x1, x2):
        a1 = np.asarray(x1, dtype=float)
        a2 = np.asarray(x2, dtype=float)
        if self.kind == "zero":
            out = np.zeros(np.broadcast_shapes(a1.shape, a2.shape))
        elif self.kind == "separable":
            out = self.w1(a1) * self.w2(a2)
        elif self.kind == "power_pair":
            out = a1**self.beta * a2**self.gamma
        elif self.kind == "scaled":
            out = self.factor * self.base(a1, a2)
        elif self.kind == "derived":
            out = self.fn(a1, a2)
        else:
            for a, g in ((a1, self.grid1), (a2, self.grid2)):
                if np.any(a < g[0]) or np.any(a > g[-1]):
                    raise DomainError("sampled 2D weight evaluated outside window")
            lv = np.log(self.values)
            f1 = np.interp(np.log(a1), np.log(self.grid1), np.arange(len(self.grid1), dtype=float))
            f2 = np.interp(np.log(a2), np.log(self.grid2), np.arange(len(self.grid2), dtype=float))
            i1 = np.clip(f1.astype(int), 0, len(self.grid1) - 2)
            i2 = np.clip(f2.astype(int), 0, len(self.grid2) - 2)
            t1 = f1 - i1
            t2 = f2 - i2
            out = np.exp(
                (1 - t1) * (1 - t2) * lv[i1, i2]
                + t1 * (1 - t2) * lv[i1 + 1, i2]
                + (1 - t1) * t2 * lv[i1, i2 + 1]
                + t1 * t2 * lv[i1 + 1, i2 + 1]
            )
        return out if (np.ndim(x1) or np.ndim(x2)) else float(out)

    @property
    def is_zero(self) -> bool:
        if self.kind == "zero":
            return True
        if self.kind == "scaled":
            return self.base.is_zero
        return False


def eval_weight1d(w: Weight1D, x) -> float:
    """Evaluate a 1D weight; domain error outside a sampled window."""
    return w(x)


@dataclass(frozen=True, eq=False)
class BoundaryFn:
    """A strictly increasing function on (0, inf) vanishing at 0.

    Families: ``linear`` c*x (c > 0), ``power`` c*x^r (c, r > 0), and
    ``sampled`` monotone tables (linear interpolation, bisection inverse).
    """

    kind: str
    c: float = 1.0
    r: float = 1.0
    grid: np.ndarray | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "power", "sampled"):
            raise DomainError(f"unknown boundary kind {self.kind!r}")
        if self.kind in ("linear", "power") and self.c <= 0:
            raise DomainError("boundary coefficient must be positive")
        if self.kind == "power" and self.r <= 0:
            raise DomainError("boundary power must be positive")
        if self.kind == "sampled":
            grid = np.asarray(self.grid, float)
            vals = np.asarray(self.values, float)
            _check_strictly_increasing(grid, "sampled boundary abscissas")
            _check_strictly_increasing(vals, "sampled boundary values")
            if grid[0] <= 0 or vals[0] <= 0:
                raise DomainError("sampled boundary must be positive")
            object.__setattr__(self, "grid", grid)
            object.__setattr__(self, "values", vals)

    @classmethod
    def linear(cls, c: float) -> "BoundaryFn":
        return cls(kind="linear", c=float(c))

    @classmethod
    def power(cls, c: float, r: float) -> "BoundaryFn":
        return cls(kind="power", c=float(c), r=float(r))

    @classmethod
    def sampled(cls, grid, values) -> "BoundaryFn":
        return cls(kind="sampled", grid=np.asarray(grid, float), values=np.asarray(values, float))

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        if np.any(xa <= 0.0):
            raise DomainError("boundary evaluation requires x > 0")
        if self.kind == "linear":
            out = self.c * xa
        elif self.kind == "power":
            out = self.c * xa**self.r
        else:
            if np.any(xa < self.grid[0]) or np.any(xa > self.grid[-1]):
                raise DomainError(
                    f"sampled boundary evaluated outside window "
                    f"[{self.grid[0]:g}, {self.grid[-1]:g}]"
                )
            out = np.interp(xa, self.grid, self.values)
        return out if np.ndim(x) else float(out)

    def inverse(self, y, tol: float = _DEFAULT_INV_TOL):
        """Solve f(x) = y to |f(x) - y| <= tol * max(1, y)."""
        ya = np.asarray(y, dtype=float)
        if np.any(ya <= 0.0):
            raise RangeError("inverse evaluation requires y > 0")
        if self.kind == "linear":
            out = ya / self.c
        elif self.kind == "power":
            out = (ya / self.c) ** (1.0 / self.r)
        else:
            out = _bisect_many(self, ya, tol)
        return out if np.ndim(y) else float(out)

    def inverse_deriv(self, y):
        """(f^-1)'(y): analytic for linear/power, central difference otherwise."""
        ya = np.asarray(y, dtype=float)
        if self.kind == "linear":
            out = np.full_like(ya, 1.0 / self.c)
        elif self.kind == "power":
            out = (1.0 / (self.r * self.c)) * (ya / self.c) ** (1.0 / self.r - 1.0)
        else:
            h = 1e-6 * np.maximum(1.0, ya)
            out = (self.inverse(ya + h) - self.inverse(np.maximum(ya - h, self.values[0]))) / (
                ya + h - np.maximum(ya - h, self.values[0])
            )
        return out if np.ndim(y) else float(out)


def _bisect_many(f: BoundaryFn, y: np.ndarray, tol: float) -> np.ndarray:
    lo_x, hi_x = f.grid[0], f.grid[-1]
    lo_y, hi_y = f.values[0], f.values[-1]
    ya = np.atleast_1d(y)
    if np.any(ya < lo_y) or np.any(ya > hi_y):
        raise RangeError(
            f"inverse target outside achievable range [{lo_y:g}, {hi_y:g}] "
            f"on the sampled window"
        )
    lo = np.full_like(ya, lo_x)
    hi = np.full_like(ya, hi_x)
    mid = 0.5 * (lo + hi)
    for _ in range(_BISECT_MAX_ITER):
        fm = f(mid)
        if np.all(np.abs(fm - ya) <= tol * np.maximum(1.0, ya)):
            break
        high = fm > ya
        hi = np.where(high, mid, hi)
        lo = np.where(high, lo, mid)
        mid = 0.5 * (lo + hi)
    return mid.reshape(np.shape(y))


def scalar_eval_fn(f: BoundaryFn):
    """A scalar fast-path evaluator (closed forms for analytic kinds)."""
    if f.kind == "linear":
        c = f.c
        return lambda x: c * x
    if f.kind == "power":
        c, r = f.c, f.r
        return lambda x: c * x**r
    return lambda x: float(f(x))


def scalar_inverse_fn(f: BoundaryFn):
    """A scalar fast-path inverse evaluator."""
    if f.kind == "linear":
        c = f.c
        return lambda y: y / c
    if f.kind == "power":
        c, rinv = f.c, 1.0 / f.r
        return lambda y: (y / c) ** rinv
    return lambda y: float(f.inverse(y))


def eval_boundary(f: BoundaryFn, x) -> float:
    """Evaluate a monotone boundary descriptor."""
    return f(x)


def invert_boundary(f: BoundaryFn, y, tol: float = _DEFAULT_INV_TOL) -> float:
    """Invert a monotone boundary descriptor to relative tolerance ``tol``."""
    return f.inverse(y, tol=tol)


@dataclass(frozen=True, eq=False)
class BoundaryPair:
    """An ordered pair of boundaries a < b sharing the moving-box structure.

    Construction probes the pair on a geometric sample: a must stay strictly
    below b, both must be strictly increasing with limits 0 and infinity.
    Pairs whose ratio a/b approaches 1 are accepted but flagged ``thin``
    because the admissible search region a(x) < b(t) collapses.
    """

    a: BoundaryFn
    b: BoundaryFn
    thin: bool = field(default=False, compare=False)

    def __post_init__(self):
        lo, hi = 1e-6, 1e6
        sampled = [f for f in (self.a, self.b) if f.kind == "sampled"]
        for f in sampled:
            lo = max(lo, f.grid[0])
            hi = min(hi, f.grid[-1])
        probes = np.geomspace(lo, hi, 49)
        av, bv = self.a(probes), self.b(probes)
        if not np.all(av < bv):
            raise DomainError("boundary pair needs a(x) < b(x) on the probe window")
        if not (np.all(np.diff(av) > 0) and np.all(np.diff(bv) > 0)):
            raise DomainError("boundary functions must be strictly increasing")
        if not sampled:
            if not (av[0] < av[-1] * 1e-6 and bv[0] < bv[-1] * 1e-6):
                raise DomainError("boundary functions must vanish at 0 and diverge at infinity")
        object.__setattr__(self, "thin", bool(np.max(av / bv) > 0.999))

    def __iter__(self):
        return iter((self.a, self.b))

    def x_cap(self, t, hi: float | None = None):
        """Largest admissible x for a fixed t: a(x) < b(t) up to the window cap."""
        cap = self.a.inverse(self.b(t))
        if hi is not None:
            cap = np.minimum(cap, hi)
        return cap


@dataclass(frozen=True)
class SearchPoint:
    """A candidate (t1, t2, x1, x2) for the constrained supremum search."""

    t1: float
    t2: float
    x1: float
    x2: float

    def is_admissible(self, boundaries: tuple[BoundaryPair, BoundaryPair]) -> bool:
        """0 < t_i < x_i and a_i(x_i) < b_i(t_i) on both axes."""
        for t, x, pair in ((self.t1, self.x1, boundaries[0]), (self.t2, self.x2, boundaries[1])):
            if not (0.0 < t < x):
                return False
            if not pair.a(x) < pair.b(t):
                return False
        return True

    def require_admissible(self, boundaries) -> "SearchPoint":
        if not self.is_admissible(boundaries):
            raise DomainError(f"search point {self} violates the admissibility constraints")
        return self
