"""Small quadrature and extrapolation helpers shared by the modules."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def gauss_panels(a: float, b: float, panels: int, order: int):
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1))
        weights.append(half * w)
    nodes, weights = np.concatenate(nodes), np.concatenate(weights)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def symmetric_grid(P: float, M: int):
    """Uniform grid on [-P, P] with M (odd) nodes; p -> -p is index reversal."""
    if M % 2 != 1 or M < 3:
        raise ValueError(f"grid size must be odd and >= 3, got {M}")
    p = np.linspace(-P, P, M)
    p[M // 2] = 0.0
    p[M // 2 + 1:] = -p[M // 2 - 1::-1]
    return p, 2 * P / (M - 1)


def richardson(values, ratio=2.0, order=1):
    """Richardson table for values at steps h*ratio^(L-1), ..., h (coarse first).

    Assumes an error expansion in powers order, order+1, ... of the step.
    Returns (best estimate, spread) where spread is the change made by the
    last elimination.
    """
    vals = [complex(v) for v in values]
    if len(vals) == 1:
        return vals[0], float("nan")
    table = [vals]
    k = order
    while len(table[-1]) > 1:
        prev = table[-1]
        f = ratio ** k
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
        k += 1
    best = table[-1][0]
    spread = abs(best - table[-2][-1])
    return best, spread


def consistency_ratio(values):
    """|v0 - v1| / |v1 - v2| for a coarse-to-fine sequence of three values."""
    a, b, c = (complex(v) for v in values[:3])
    den = abs(b - c)
    return float("inf") if den == 0 else abs(a - b) / den


class MomentumGrid:
    """Symmetric trapezoid grid on [-P, P]; `w` are plain dp weights."""

    def __init__(self, P: float = 8.0, M: int = 129):
        self.P, self.M = float(P), int(M)
        self.p, self.dp = symmetric_grid(self.P, self.M)
        w = np.full(self.M, self.dp)
        w[0] = w[-1] = 0.5 * self.dp
        self.w = w
        for a in (self.p, self.w):
            a.setflags(write=False)

    def __eq__(self, other):
        return isinstance(other, MomentumGrid) and (self.P, self.M) == (other.P, other.M)

    def __hash__(self):
        return hash((self.P, self.M))

    def __repr__(self):
        return f"MomentumGrid(P={self.P}, M={self.M})"
