"""Shared low-level machinery: Gauss panels and prefix-sum box queries.

A 2D table of per-cell masses, together with its cumulative prefix sums,
answers "integrate over the axis-aligned box [x0,x1] x [y0,y1]" queries in
O(log n).  When the underlying density is piecewise constant on the cells the
answer is exact; otherwise fractional edge cells are apportioned by area,
which is the approximation the supremum searches run on (final values are
re-evaluated by direct quadrature).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# Box masses below this multiple of the corner prefix magnitude are treated
# as pure cancellation noise and reported as 0.
_CANCEL_EPS = 64.0 * np.finfo(float).eps


@lru_cache(maxsize=32)
def leggauss(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(k)
    return x, w


def panel_nodes(edges: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss nodes/weights for the panels defined by ``edges``.

    Returns flat arrays of length ``(len(edges)-1) * k``, ordered panel by
    panel so a reshape to ``(npanels, k)`` recovers the structure.
    """
    x, w = leggauss(k)
    lo = edges[:-1]
    half = 0.5 * (edges[1:] - lo)
    nodes = lo[:, None] + half[:, None] * (x[None, :] + 1.0)
    wts = half[:, None] * w[None, :]
    return nodes.ravel(), wts.ravel()


def geometric_edges(lo: float, hi: float, n: int) -> np.ndarray:
    """n+1 geometrically spaced panel edges on [lo, hi] (lo > 0)."""
    if not (0.0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got [{lo}, {hi}]")
    return np.geomspace(lo, hi, n + 1)


def _corner_weights(edges: np.ndarray, x: np.ndarray):
    """Clip query coordinates to the edge span and split into index + fraction."""
    x = np.clip(x, edges[0], edges[-1])
    i = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(edges) - 2)
    width = edges[i + 1] - edges[i]
    f = (x - edges[i]) / width
    return i, f


class Prefix1D:
    """Cumulative masses over 1D panels with fractional interval queries."""

    def __init__(self, edges: np.ndarray, masses: np.ndarray):
        self.edges = np.asarray(edges, dtype=float)
        self.P = np.concatenate([[0.0], np.cumsum(masses)])

    def corner(self, x):
        i, f = _corner_weights(self.edges, np.asarray(x, dtype=float))
        return self.P[i] + f * (self.P[i + 1] - self.P[i])

    def interval(self, x0, x1):
        hi = self.corner(x1)
        lo = self.corner(x0)
        out = hi - lo
        noise = _CANCEL_EPS * np.maximum(np.abs(hi), np.abs(lo))
        return np.where(np.abs(out) <= noise, 0.0, out)

    def _corner_scalar(self, x: float) -> float:
        E, P = self.edges, self.P
        x = min(max(x, E[0]), E[-1])
        i = min(max(int(np.searchsorted(E, x, side="right")) - 1, 0), len(E) - 2)
        f = (x - E[i]) / (E[i + 1] - E[i])
        return float(P[i] + f * (P[i + 1] - P[i]))

    def interval_scalar(self, x0: float, x1: float) -> float:
        hi = self._corner_scalar(x1)
        lo = self._corner_scalar(x0)
        out = hi - lo
        if abs(out) <= _CANCEL_EPS * max(abs(hi), abs(lo)):
            return 0.0
        return out


class Prefix2D:
    """Cumulative masses over a 2D cell grid with fractional box queries."""

    def __init__(self, edges1: np.ndarray, edges2: np.ndarray, masses: np.ndarray):
        self.edges1 = np.asarray(edges1, dtype=float)
        self.edges2 = np.asarray(edges2, dtype=float)
        n1 = len(self.edges1) - 1
        n2 = len(self.edges2) - 1
        if masses.shape != (n1, n2):
            raise ValueError(f"masses shape {masses.shape} != grid ({n1}, {n2})")
        P = np.zeros((n1 + 1, n2 + 1))
        np.cumsum(masses, axis=0, out=P[1:, 1:])
        np.cumsum(P[1:, 1:], axis=1, out=P[1:, 1:])
        self.P = P

    def corner(self, x, y):
        """Phi(x, y) = integral over [lo1, x] x [lo2, y]; broadcasts."""
        i, fx = _corner_weights(self.edges1, np.asarray(x, dtype=float))
        j, fy = _corner_weights(self.edges2, np.asarray(y, dtype=float))
        P = self.P
        p00 = P[i, j]
        p10 = P[i + 1, j]
        p01 = P[i, j + 1]
        p11 = P[i + 1, j + 1]
        return (
            p00
            + fx * (p10 - p00)
            + fy * (p01 - p00)
            + fx * fy * (p11 - p10 - p01 + p00)
        )

    def box(self, x0, x1, y0, y1):
        """Integral over [x0,x1] x [y0,y1]; arguments broadcast together.

        Prefix differencing cancels catastrophically when the box mass is
        far below the corner magnitudes, so results under the cancellation
        noise floor are clamped to 0 rather than returned as float residue.
        """
        c11 = self.corner(x1, y1)
        c01 = self.corner(x0, y1)
        c10 = self.corner(x1, y0)
        c00 = self.corner(x0, y0)
        out = c11 - c01 - c10 + c00
        noise = _CANCEL_EPS * np.maximum(
            np.maximum(np.abs(c11), np.abs(c01)), np.maximum(np.abs(c10), np.abs(c00))
        )
        return np.where(np.abs(out) <= noise, 0.0, out)

    def _corner_scalar(self, x: float, y: float) -> float:
        E1, E2, P = self.edges1, self.edges2, self.P
        x = min(max(x, E1[0]), E1[-1])
        y = min(max(y, E2[0]), E2[-1])
        i = min(max(int(np.searchsorted(E1, x, side="right")) - 1, 0), len(E1) - 2)
        j = min(max(int(np.searchsorted(E2, y, side="right")) - 1, 0), len(E2) - 2)
        fx = (x - E1[i]) / (E1[i + 1] - E1[i])
        fy = (y - E2[j]) / (E2[j + 1] - E2[j])
        p00 = P[i, j]
        p10 = P[i + 1, j]
        p01 = P[i, j + 1]
        p11 = P[i + 1, j + 1]
        return float(
            p00 + fx * (p10 - p00) + fy * (p01 - p00)
            + fx * fy * (p11 - p10 - p01 + p00)
        )

    def box_scalar(self, x0: float, x1: float, y0: float, y1: float) -> float:
        """Scalar box query on the python fast path (hot in golden search)."""
        c11 = self._corner_scalar(x1, y1)
        c01 = self._corner_scalar(x0, y1)
        c10 = self._corner_scalar(x1, y0)
        c00 = self._corner_scalar(x0, y0)
        out = c11 - c01 - c10 + c00
        if abs(out) <= _CANCEL_EPS * max(abs(c11), abs(c01), abs(c10), abs(c00)):
            return 0.0
        return out

    def box_outer(self, x0, x1, y0, y1):
        """Box integrals for the outer product of per-axis interval arrays."""
        x0 = np.asarray(x0, dtype=float)[:, None]
        x1 = np.asarray(x1, dtype=float)[:, None]
        y0 = np.asarray(y0, dtype=float)[None, :]
        y1 = np.asarray(y1, dtype=float)[None, :]
        return self.box(x0, x1, y0, y1)


def golden_max(fn, lo: float, hi: float, tol: float, max_iter: int = 80):
    """Golden-section maximization of a unimodal scalar function on [lo, hi].

    Returns (argmax, value, evaluations).  Tolerance is absolute in x.
    """
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    if not b > a:
        mid = 0.5 * (a + b)
        return mid, fn(mid), 1
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fn(x1), fn(x2)
    evals = 2
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fn(x1)
        evals += 1
    if f1 >= f2:
        return x1, f1, evals
    return x2, f2, evals
