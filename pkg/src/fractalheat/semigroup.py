"""Discrete semigroup action and Duhamel quadrature.

The semigroup K_t acts on grid functions through the dense quadrature
matrix  (K_t g)(x_i) = sum_j k(t, x_i, x_j) w_j g(x_j);  applications are
O(N^2).  Time integrals use the trapezoid rule with analytic endpoint
values: the integrand at time lag 0 is the identity (K_0 g = g), so no
kernel evaluation at t = 0 is ever needed.

Kernel matrices are cached per (space, kernel, t) under a byte budget,
because solver sweeps and inequality checks revisit the same time lags
many times over.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from weakref import WeakKeyDictionary

import numpy as np

__all__ = [
    "TimeGrid",
    "apply_semigroup",
    "source_integral",
    "duhamel_step",
    "kernel_matrix",
    "transport_all",
    "source_cumulative",
    "duhamel_full",
    "set_cache_budget",
]


class TimeGrid:
    """Strictly increasing time nodes starting at 0 (trapezoid scheme)."""

    def __init__(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("need at least two time nodes")
        if nodes[0] != 0.0:
            raise ValueError("time grids start at 0")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("time nodes must be strictly increasing")
        self.nodes = nodes

    @classmethod
    def uniform(cls, t_max: float, n_nodes: int) -> "TimeGrid":
        if t_max <= 0:
            raise ValueError("t_max must be positive")
        if n_nodes < 2:
            raise ValueError("need at least two nodes")
        return cls(np.linspace(0.0, t_max, int(n_nodes)))

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def t_max(self) -> float:
        return float(self.nodes[-1])

    def prefix_weights(self, i: int) -> np.ndarray:
        """Trapezoid weights for integrating over nodes 0..i."""
        if not 0 <= i < self.n:
            raise IndexError("node index out of range")
        t = self.nodes[: i + 1]
        w = np.zeros(i + 1)
        if i == 0:
            return w
        w[1:] += 0.5 * np.diff(t)
        w[:-1] += 0.5 * np.diff(t)
        return w


# -- kernel matrix cache --------------------------------------------------

_CACHE_BUDGET = 768 * 1024 * 1024  # bytes of cached matrices per space
_cache: "WeakKeyDictionary" = WeakKeyDictionary()


def set_cache_budget(n_bytes: int) -> None:
    """Cap the per-space kernel matrix cache (0 disables caching)."""
    global _CACHE_BUDGET
    _CACHE_BUDGET = int(n_bytes)


def _cache_key(kernel, t: float):
    return (id(kernel), float(f"{t:.12e}"))


def kernel_matrix(kernel, space, t: float) -> np.ndarray:
    """Dense quadrature matrix k(t, x_i, x_j), cached per (space, kernel, t)."""
    if t <= 0:
        raise ValueError("kernel matrices require t > 0; lag 0 is the identity")
    if _CACHE_BUDGET <= 0:
        return kernel.matrix(space, t)
    store = _cache.setdefault(space, OrderedDict())
    key = _cache_key(kernel, t)
    hit = store.get(key)
    if hit is not None:
        store.move_to_end(key)
        return hit
    mat = kernel.matrix(space, t)
    store[key] = mat
    total = sum(m.nbytes for m in store.values())
    while total > _CACHE_BUDGET and len(store) > 1:
        _, old = store.popitem(last=False)
        total -= old.nbytes
    return mat


def apply_semigroup(kernel, space, g, t: float) -> np.ndarray:
    """(K_t g) on the grid; t = 0 is the identity.

    ``g`` may be a single grid function (N,) or a batch (N, k) applied
    column-wise.
    """
    g = np.asarray(g, dtype=float)
    if g.shape[0] != space.n:
        raise ValueError("grid function has wrong length")
    if t < 0:
        raise ValueError("negative times are not defined")
    if t == 0:
        return g.copy()
    m = kernel_matrix(kernel, space, t)
    if g.ndim == 1:
        return m @ (space.weights * g)
    return m @ (space.weights[:, None] * g)


def source_integral(kernel, space, f, t: float, steps: int = 64) -> np.ndarray:
    """integral_0^t (K_tau f) d tau by the trapezoid rule on uniform steps."""
    f = np.asarray(f, dtype=float)
    if t < 0:
        raise ValueError("negative times are not defined")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t == 0:
        return np.zeros_like(f)
    taus = np.linspace(0.0, t, steps + 1)
    acc = 0.5 * f.copy()                      # identity limit at tau = 0
    for tau in taus[1:-1]:
        acc += apply_semigroup(kernel, space, f, tau)
    acc += 0.5 * apply_semigroup(kernel, space, f, t)
    return acc * (t / steps)


def duhamel_step(kernel, space, u_values, p: float, tgrid: TimeGrid, i: int) -> np.ndarray:
    """integral_0^{t_i} K_{t_i - tau} u(tau)^p d tau over the solve nodes.

    ``u_values`` holds the trajectory rows u(t_j, .) for j = 0..i (or the
    full trajectory).  The tau = t_i endpoint uses the identity limit.
    """
    u_values = np.asarray(u_values, dtype=float)
    if p <= 1:
        raise ValueError("nonlinearity exponent p must exceed 1")
    w = tgrid.prefix_weights(i)
    out = np.zeros(space.n)
    t_i = tgrid.nodes[i]
    for j in range(i + 1):
        if w[j] == 0.0:
            continue
        up = u_values[j] ** p
        lag = t_i - tgrid.nodes[j]
        out += w[j] * (up if lag == 0.0 else apply_semigroup(kernel, space, up, lag))
    return out


# -- full-sweep helpers (vectorized over all nodes) ------------------------

def transport_all(kernel, space, g, tgrid: TimeGrid) -> np.ndarray:
    """Rows [K_{t_i} g] for every node of the grid; row 0 is g itself."""
    out = np.empty((tgrid.n, space.n))
    out[0] = g
    for i in range(1, tgrid.n):
        out[i] = apply_semigroup(kernel, space, g, tgrid.nodes[i])
    return out


def source_cumulative(kernel, space, f, tgrid: TimeGrid) -> np.ndarray:
    """Rows [integral_0^{t_i} K_tau f d tau] using the solve-node trapezoid rule."""
    vals = transport_all(kernel, space, f, tgrid)
    out = np.zeros_like(vals)
    t = tgrid.nodes
    for i in range(1, tgrid.n):
        h = t[i] - t[i - 1]
        out[i] = out[i - 1] + 0.5 * h * (vals[i - 1] + vals[i])
    return out


def duhamel_full(kernel, space, powered, tgrid: TimeGrid) -> np.ndarray:
    """All Duhamel rows [integral_0^{t_i} K_{t_i - tau} powered(tau) d tau] at once.

    ``powered`` holds u(t_j)^p rows.  Work is grouped by time lag so each
    kernel matrix is built once and applied to every column that needs it;
    on uniform grids this costs n_nodes matrix builds per sweep instead of
    n_nodes^2 / 2.
    """
    powered = np.asarray(powered, dtype=float)
    m, n = powered.shape
    if m != tgrid.n or n != space.n:
        raise ValueError("powered trajectory has wrong shape")
    t = tgrid.nodes
    out = np.zeros_like(powered)

    # trapezoid weight of node j inside the prefix integral up to node i
    def _weight(i, j):
        lo = t[j] - t[j - 1] if j > 0 else 0.0
        hi = t[j + 1] - t[j] if j < i else 0.0
        return 0.5 * (lo + hi)

    groups: dict = {}
    for i in range(1, m):
        for j in range(i + 1):
            lag = t[i] - t[j]
            groups.setdefault(float(f"{lag:.9e}"), []).append((i, j))

    w_mu = space.weights
    for lag, pairs in groups.items():
        if lag == 0.0:
            for i, j in pairs:
                out[i] += _weight(i, j) * powered[j]
            continue
        mat = kernel_matrix(kernel, space, lag)
        cols = sorted({j for _, j in pairs})
        applied = mat @ (w_mu[:, None] * powered[cols].T)    # (N, len(cols))
        col_of = {j: k for k, j in enumerate(cols)}
        for i, j in pairs:
            out[i] += _weight(i, j) * applied[:, col_of[j]]
    return out
