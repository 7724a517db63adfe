"""Radial grids, quadrature, Hartree potentials and the capped bathtub filler."""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Sequence

import numpy as np

from .errors import ContractError, InfeasibleError

FOUR_PI = 4.0 * np.pi

# Gregory end corrections to the trapezoid rule (exact for quintics, all weights positive)
_GREGORY = (1 / 12, 1 / 24, 19 / 720, 3 / 160)


def _gregory_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    if n < 2 * len(_GREGORY) + 2:
        return w
    for k, g in enumerate(_GREGORY, start=1):
        for j in range(k + 1):
            c = g * (-1) ** j * comb(k, j)
            w[j] -= c
            w[n - 1 - j] -= c
    return w


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Radial nodes with positive quadrature weights for integrals over [0, r_max].

    The first weight also carries the interval [0, r_0] so that a constant
    integrates to r_max exactly.
    """

    nodes: np.ndarray
    weights: np.ndarray
    spacing: str = "logarithmic"

    def __post_init__(self):
        r = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if r.ndim != 1 or r.size < 16:
            raise ContractError("grid needs at least 16 nodes")
        if r.shape != w.shape:
            raise ContractError("nodes and weights differ in length")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ContractError("nodes must be positive and strictly increasing")
        if np.any(w <= 0):
            raise ContractError("weights must be positive")
        if self.spacing not in ("uniform", "logarithmic"):
            raise ContractError(f"unknown spacing tag {self.spacing!r}")
        r.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "nodes", r)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @cached_property
    def shell(self) -> np.ndarray:
        """Weights for ∫ f 4πr² dr."""
        return FOUR_PI * self.nodes**2 * self.weights

    @cached_property
    def log_step(self) -> np.ndarray:
        """Local spacing in ln r at each node."""
        r = self.nodes
        h = np.empty_like(r)
        h[1:-1] = (r[2:] - r[:-2]) / (2 * r[1:-1])
        h[0] = (r[1] - r[0]) / r[0]
        h[-1] = (r[-1] - r[-2]) / r[-1]
        return h

    def same_as(self, other: "RadialGrid") -> bool:
        return self is other or (
            self.size == other.size
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def to_dict(self) -> dict:
        return {"nodes": self.nodes.tolist(), "weights": self.weights.tolist(), "spacing": self.spacing}

    @classmethod
    def from_dict(cls, d: dict) -> "RadialGrid":
        if "nodes" in d:
            return cls(np.array(d["nodes"]), np.array(d["weights"]), d.get("spacing", "logarithmic"))
        if d.get("spacing", "logarithmic") == "uniform":
            return uniform_grid(d["r_max"], d.get("n", 2000))
        return log_grid(d.get("r_min", 1e-6), d.get("r_max", 60.0), d.get("n", 2000))


def log_grid(r_min: float = 1e-6, r_max: float = 60.0, n: int = 2000) -> RadialGrid:
    """Logarithmic grid; trapezoid (Gregory-corrected) in x = ln r."""
    x = np.linspace(np.log(r_min), np.log(r_max), n)
    r = np.exp(x)
    r[0], r[-1] = r_min, r_max
    w = (x[1] - x[0]) * r * _gregory_weights(n)
    w[0] += r_min
    return RadialGrid(r, w, "logarithmic")


def uniform_grid(r_max: float, n: int = 2000) -> RadialGrid:
    """Uniform grid with nodes r_max/n, ..., r_max."""
    dr = r_max / n
    r = dr * np.arange(1, n + 1)
    w = dr * _gregory_weights(n)
    w[0] += dr
    return RadialGrid(r, w, "uniform")


def default_grid() -> RadialGrid:
    """Default grid, overridable by a JSON file named in DFTATOMS_GRID."""
    path = os.environ.get("DFTATOMS_GRID")
    if path:
        return load_grid(path)
    return _default_log_grid()


_DEFAULT_CACHE: list[RadialGrid] = []


def _default_log_grid() -> RadialGrid:
    if not _DEFAULT_CACHE:
        _DEFAULT_CACHE.append(log_grid())
    return _DEFAULT_CACHE[0]


def load_grid(path: str) -> RadialGrid:
    if path in ("", "default"):
        return _default_log_grid()
    with open(path) as fh:
        return RadialGrid.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class ChargeDistribution:
    """Signed spherically symmetric charge density on a grid."""

    grid: RadialGrid
    values: np.ndarray
    mass: float = field(init=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise ContractError("values do not match grid")
        if not np.all(np.isfinite(v)):
            raise ContractError("values must be finite")
        self._check(v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mass", float(self.grid.shell @ v))

    def _check(self, v: np.ndarray) -> None:
        pass

    def to_json(self) -> str:
        return json.dumps(
            {"grid": {"nodes": self.grid.nodes.tolist(), "weights": self.grid.weights.tolist()},
             "values": self.values.tolist(), "mass": self.mass}
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["r", "rho"])
        for r, v in zip(self.grid.nodes, self.values):
            wr.writerow([f"{r:.12g}", f"{v:.12g}"])
        return buf.getvalue()

    @classmethod
    def from_json(cls, text: str):
        d = json.loads(text)
        g = RadialGrid(np.array(d["grid"]["nodes"]), np.array(d["grid"]["weights"]))
        return cls(g, np.array(d["values"]))


@dataclass(frozen=True, eq=False)
class RadialDensity(ChargeDistribution):
    """Nonnegative electron density ρ(r) with cached particle number."""

    def _check(self, v: np.ndarray) -> None:
        if np.any(v < 0):
            raise ContractError("density must be nonnegative")

    @classmethod
    def from_csv(cls, text: str, grid: RadialGrid | None = None) -> "RadialDensity":
        rows = list(csv.DictReader(io.StringIO(text)))
        r = np.array([float(x["r"]) for x in rows])
        rho = np.array([float(x["rho"]) for x in rows])
        if grid is None:
            grid = _grid_from_nodes(r)
        elif not np.allclose(grid.nodes, r, rtol=1e-10):
            rho = np.interp(grid.nodes, r, rho, right=0.0)
        return cls(grid, np.clip(rho, 0.0, None))


def _grid_from_nodes(r: np.ndarray) -> RadialGrid:
    """Rebuild a grid from bare nodes (log or uniform spacing detected)."""
    ratio = r[1:] / r[:-1]
    if np.allclose(ratio, ratio[0], rtol=1e-8):
        return log_grid(r[0], r[-1], r.size)
    if np.allclose(np.diff(r), r[0], rtol=1e-8):
        return uniform_grid(r[-1], r.size)
    w = np.empty_like(r)
    w[1:-1] = (r[2:] - r[:-2]) / 2
    w[0] = r[0] + (r[1] - r[0]) / 2
    w[-1] = (r[-1] - r[-2]) / 2
    return RadialGrid(r, w, "logarithmic")


def integrate_radial(grid: RadialGrid, samples: Sequence[float]) -> float:
    """Return Σ w_i s_i ≈ ∫ s(r) dr."""
    s = np.asarray(samples, dtype=float)
    if s.shape != grid.nodes.shape:
        raise ContractError(f"expected {grid.size} samples, got {s.shape}")
    return float(grid.weights @ s)


def integrate_singular(grid: RadialGrid, samples: np.ndarray) -> float:
    """Like integrate_radial, but the [0, r_0] piece follows a power law fitted
    to the first two nodes. Used for integrands such as r^{-1/2} near the nucleus."""
    s = np.asarray(samples, dtype=float)
    total = integrate_radial(grid, s)
    r0, r1 = grid.nodes[:2]
    s0, s1 = s[:2]
    if s0 != 0 and s0 * s1 > 0:
        p = np.log(s1 / s0) / np.log(r1 / r0)
        if p > -1:
            total += s0 * r0 * (1.0 / (1.0 + p) - 1.0)
    return float(total)


def _kink_coupling(grid: RadialGrid) -> tuple[np.ndarray, np.ndarray]:
    # Symmetric nearest-neighbour coupling removing the O(h²) error the trapezoid
    # rule makes at the kink of 1/max(r, s) when s crosses a node.
    h, w = grid.log_step, grid.weights
    c = np.zeros(grid.size - 1)
    c[1:-1] = h[1:-2] * h[2:-1] / (24.0 * np.sqrt(w[1:-2] * w[2:-1]))
    return c, w


def hartree_potential(rho: ChargeDistribution) -> np.ndarray:
    """V(r_i) = ∫ 4πs²ρ(s)/max(r_i, s) ds, in O(n) via cumulative sums.

    Examples
    --------
    A charge placed on a single node (weight-normalised) reproduces 1/max(r, R)
    exactly away from its two neighbours; smooth densities are accurate to O(h⁴).
    """
    g = rho.grid
    r = g.nodes
    wq = g.shell * rho.values  # w_j · 4π r_j² ρ_j
    q_in = np.cumsum(wq)
    tail = np.cumsum((wq / r)[::-1])[::-1]
    q_out = np.zeros_like(r)
    q_out[:-1] = tail[1:]
    v = q_in / r + q_out
    c, _ = _kink_coupling(g)
    v[:-1] -= c * wq[1:]
    v[1:] -= c * wq[:-1]
    return v


def coulomb_inner(a: ChargeDistribution, b: ChargeDistribution) -> float:
    """D(a, b) = ½ ∫ 4πr² a V_b dr."""
    if not a.grid.same_as(b.grid):
        raise ContractError("charge distributions live on different grids")
    return 0.5 * float(a.grid.shell @ (a.values * hartree_potential(b)))


def coulomb_self(grid: RadialGrid, values: np.ndarray) -> float:
    """D(ρ, ρ) for a raw sample array (no validation)."""
    return 0.5 * float(grid.shell @ (values * hartree_potential(_Raw(grid, values))))


@dataclass(frozen=True, eq=False)
class _Raw:
    grid: RadialGrid
    values: np.ndarray


def bathtub_fill(levels: Sequence[float], measures: Sequence[float], cap: float,
                 total: float) -> tuple[np.ndarray, float]:
    """Minimise Σ e_i n_i m_i over 0 ≤ n_i ≤ cap with Σ n_i m_i = total.

    Cells are filled in order of increasing level; the cell straddling the
    Fermi level is filled partially. Returns (occupations, fermi_level).
    """
    e = np.asarray(levels, dtype=float)
    m = np.asarray(measures, dtype=float)
    if e.shape != m.shape or e.ndim != 1 or e.size == 0:
        raise ContractError("levels and measures must be equal-length vectors")
    if np.any(m <= 0) or cap <= 0:
        raise ContractError("measures and cap must be positive")
    capacity = cap * m.sum()
    slack = 1e-12 * max(capacity, 1.0)
    if total < -slack or total > capacity + slack:
        raise InfeasibleError(f"total {total} outside [0, {capacity}]")
    total = min(max(total, 0.0), capacity)
    occ = np.zeros_like(e)
    order = np.argsort(e, kind="stable")
    if total == 0:
        return occ, float(e[order[0]])
    cum = np.cumsum(cap * m[order])
    k = int(np.searchsorted(cum, total * (1 - 1e-15)))
    k = min(k, e.size - 1)
    occ[order[:k]] = cap
    before = cum[k - 1] if k else 0.0
    occ[order[k]] = min(cap, (total - before) / m[order[k]])
    return occ, float(e[order[k]])


def capped_simplex_projection(values: Sequence[float], total: float, cap: float = 1.0) -> np.ndarray:
    """Euclidean projection of a vector onto {0 ≤ x ≤ cap, Σx = total}.

    The solution is clip(v - θ, 0, cap); θ is located exactly from the sorted
    breakpoints of the piecewise-linear map θ ↦ Σ clip(v - θ, 0, cap).
    """
    v = np.asarray(values, dtype=float)
    if total < 0 or total > cap * v.size + 1e-12:
        raise InfeasibleError(f"total {total} outside [0, {cap * v.size}]")
    bps = np.unique(np.concatenate([v, v - cap]))

    def mass(t):
        return np.clip(v - t, 0.0, cap).sum()

    masses = np.array([mass(t) for t in bps])  # nonincreasing in θ
    k = int(np.searchsorted(-masses, -total))
    if k == 0:
        theta = bps[0]
    elif k >= bps.size:
        theta = bps[-1]
    else:
        t0, t1, m0, m1 = bps[k - 1], bps[k], masses[k - 1], masses[k]
        theta = t0 if m0 == m1 else t0 + (m0 - total) * (t1 - t0) / (m0 - m1)
    return np.clip(v - theta, 0.0, cap)


# sixth-order central first-derivative stencil
_D6 = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0


def radial_derivative(grid: RadialGrid, f: np.ndarray) -> np.ndarray:
    """df/dr with sixth-order central differences in the uniform variable
    (ln r or r), second-order one-sided differences at the ends."""
    f = np.asarray(f, dtype=float)
    r = grid.nodes
    if grid.spacing == "logarithmic":
        x = np.log(r)
        uniform = np.allclose(np.diff(x), x[1] - x[0], rtol=1e-8, atol=0)
    else:
        x = r
        uniform = np.allclose(np.diff(r), r[1] - r[0], rtol=1e-8, atol=0)
    d = np.gradient(f, x, edge_order=2)
    if uniform and f.size > 7:
        h = x[1] - x[0]
        d[3:-3] = np.convolve(f, _D6[::-1], mode="valid") / h
    return d / r if x is not r else d


def _interval_stencils(order: int = 8) -> np.ndarray:
    """Row p: weights of ∫_p^{p+1} for Lagrange interpolation through nodes 0..order-1."""
    t = np.arange(order, dtype=float)
    V = np.vander(t, order, increasing=True).T
    rows = []
    for p in range(order - 1):
        k = np.arange(order)
        moments = ((p + 1.0) ** (k + 1) - float(p) ** (k + 1)) / (k + 1)
        rows.append(np.linalg.solve(V, moments))
    return np.array(rows)


_STENCILS8 = _interval_stencils(8)


def cumulative_uniform(f: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    """F_j = ∫_{x_0}^{x_j} f for samples on a uniform grid with spacing h.

    Each interval uses the degree-7 interpolant through the eight nearest
    nodes, so F is accurate to O(h^8) for smooth f.
    """
    f = np.moveaxis(np.asarray(f, dtype=float), axis, -1)
    n = f.shape[-1]
    if n < 8:
        raise ContractError("cumulative integration needs at least 8 nodes")
    j = np.arange(n - 1)
    start = np.clip(j - 3, 0, n - 8)
    idx = start[:, None] + np.arange(8)
    pieces = h * np.einsum("...jm,jm->...j", f[..., idx], _STENCILS8[j - start])
    out = np.concatenate([np.zeros(f.shape[:-1] + (1,)), np.cumsum(pieces, axis=-1)], axis=-1)
    return np.moveaxis(out, -1, axis)


def uniform_weights(n: int, h: float) -> np.ndarray:
    """Gregory-corrected trapezoid weights for n uniform samples."""
    return h * _gregory_weights(n)


def central_derivative(f: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    """Sixth-order central differences along one axis of a uniform grid."""
    f = np.moveaxis(np.asarray(f), axis, -1)
    d = np.gradient(f, h, axis=-1, edge_order=2)
    if f.shape[-1] > 7:
        inner = sum(c * f[..., k:f.shape[-1] - 6 + k] for k, c in enumerate(_D6) if c)
        d[..., 3:-3] = inner / h
    return np.moveaxis(d, -1, axis)
