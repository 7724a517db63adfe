"""Semiclassical phase-space energy and its two marginal reductions.

f(r, p) ∈ [0, q] lives on radial cells × spherical momentum shells. The
momentum measure is đp = 4πp²dp/(2π)³, so ρ_f(r) = ∫f đp and the momentum
density τ(p) = ∫f dx is normalised per đp (N = ∫τ đp).

Minimising over p at fixed r (bathtub with levels p²/2) gives Fermi balls
and the TF functional; minimising over x at fixed p (levels -Z/r) gives
balls in position space and Englert's momentum functional.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ContractError
from .numerics import FOUR_PI, RadialGrid, bathtub_fill, coulomb_self, default_grid, integrate_singular
from .thomasfermi import GAMMA_TF, TfSolution, solve_tf_neutral

HBAR_CELL = (2 * np.pi) ** 3  # phase-space volume per state
CBRT_3PI2 = np.cbrt(3 * np.pi**2)


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Spherical shells [e_j, e_{j+1}] in |p|, e_0 = 0.

    measures are the đp volumes of the shells; levels are the shell averages
    of p²/2, so a filled shell carries its kinetic energy exactly.
    """

    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if e.ndim != 1 or e.size < 3 or e[0] != 0 or np.any(np.diff(e) <= 0):
            raise ContractError("momentum edges must start at 0 and increase")
        object.__setattr__(self, "edges", e)

    @property
    def size(self) -> int:
        return self.edges.size - 1

    @cached_property
    def measures(self) -> np.ndarray:
        e = self.edges
        return (e[1:] ** 3 - e[:-1] ** 3) * (FOUR_PI / 3) / HBAR_CELL

    @cached_property
    def levels(self) -> np.ndarray:
        a, b = self.edges[:-1], self.edges[1:]
        return 0.3 * (b**5 - a**5) / (b**3 - a**3)

    @cached_property
    def nodes(self) -> np.ndarray:
        """Representative |p| of each shell, √(2·level)."""
        return np.sqrt(2 * self.levels)

    def ball_fraction(self, R: np.ndarray) -> np.ndarray:
        """Fraction of each shell inside |p| < R; shape (len(R), size)."""
        R = np.asarray(R, dtype=float)[..., None]
        a, b = self.edges[:-1], self.edges[1:]
        inside = np.clip(R, a, b)
        return (inside**3 - a**3) / (b**3 - a**3)


def momentum_grid(p_max: float, n: int = 1500, p_min: float | None = None) -> MomentumGrid:
    """Geometric shells from p_min to p_max plus a central ball [0, p_min]."""
    if p_max <= 0 or n < 3:
        raise ContractError("need p_max > 0 and at least 3 shells")
    p_min = p_max * 1e-7 if p_min is None else p_min
    return MomentumGrid(np.concatenate([[0.0], np.geomspace(p_min, p_max, n)]))


def grid_for_potential(phi: np.ndarray, n: int = 1500) -> MomentumGrid:
    """Shells up to p_max = 4 max √(2φ)."""
    top = float(np.sqrt(2 * np.max(np.maximum(phi, 0.0))))
    if top <= 0:
        raise ContractError("potential has no classically allowed region")
    return momentum_grid(4 * top, n)


@dataclass(frozen=True, eq=False)
class PhaseSpaceDensity:
    grid: RadialGrid
    pgrid: MomentumGrid
    values: np.ndarray  # (n_r, n_p)
    q: float = 2.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size, self.pgrid.size):
            raise ContractError("phase-space values do not match the grids")
        if np.any(v < -1e-14) or np.any(v > self.q * (1 + 1e-14)):
            raise ContractError(f"f must lie in [0, {self.q}]")
        object.__setattr__(self, "values", np.clip(v, 0.0, self.q))

    @property
    def rho(self) -> np.ndarray:
        """Position marginal ∫f đp."""
        return self.values @ self.pgrid.measures

    @property
    def tau(self) -> np.ndarray:
        """Momentum marginal ∫f dx, per đp."""
        return self.grid.shell @ self.values

    @property
    def particle_number(self) -> float:
        return float(self.grid.shell @ self.rho)

    def fermi_radius(self) -> np.ndarray:
        return np.cbrt(3 * np.pi**2 * self.rho)

    def marginals_csv(self) -> tuple[str, str]:
        """(r,rho) and (p,tau) tables."""
        out = []
        for name, xs, ys in (("r,rho", self.grid.nodes, self.rho), ("p,tau", self.pgrid.nodes, self.tau)):
            buf = io.StringIO()
            wr = csv.writer(buf, lineterminator="\n")
            wr.writerow(name.split(","))
            for a, b in zip(xs, ys):
                wr.writerow([f"{a:.12g}", f"{b:.12g}"])
            out.append(buf.getvalue())
        return out[0], out[1]


@dataclass(frozen=True, eq=False)
class MomentumDensity:
    pgrid: MomentumGrid
    values: np.ndarray  # τ per đp

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.pgrid.size,):
            raise ContractError("τ does not match the momentum grid")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ContractError("τ must be finite and nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def mass(self) -> float:
        return float(self.pgrid.measures @ self.values)


def phase_energy_terms(f: PhaseSpaceDensity, Z: float) -> dict:
    g = f.grid
    r = g.nodes
    rho = f.rho
    kin_density = f.values @ (f.pgrid.measures * f.pgrid.levels)
    return {
        "kinetic": integrate_singular(g, FOUR_PI * r**2 * kin_density),
        "nuclear": -Z * integrate_singular(g, FOUR_PI * r * rho),
        "hartree": coulomb_self(g, rho),
    }


def phase_energy(f: PhaseSpaceDensity, Z: float) -> float:
    """∫∫(p²/2 - Z/r) f đp dx + D[ρ_f]."""
    return float(sum(phase_energy_terms(f, Z).values()))


def indicator_filling(grid: RadialGrid, phi: np.ndarray, pgrid: MomentumGrid | None = None,
                      q: float = 2.0) -> PhaseSpaceDensity:
    """q·θ(φ(r) - p²/2), with partial shells weighted by their volume inside the ball."""
    pgrid = pgrid or grid_for_potential(phi)
    R = np.sqrt(2 * np.maximum(phi, 0.0))
    return PhaseSpaceDensity(grid, pgrid, q * pgrid.ball_fraction(R), q)


def minimize_momentum_slices(rho: np.ndarray, grid: RadialGrid, pgrid: MomentumGrid,
                             q: float = 2.0) -> PhaseSpaceDensity:
    """At each r, fill momentum shells by increasing p²/2 up to mass ρ(r)."""
    rho = np.asarray(rho, dtype=float)
    if rho.shape != grid.nodes.shape or np.any(rho < 0):
        raise ContractError("ρ must be nonnegative on the radial grid")
    f = np.zeros((grid.size, pgrid.size))
    for i, m in enumerate(rho):
        if m > 0:
            f[i] = bathtub_fill(pgrid.levels, pgrid.measures, q, m)[0]
    return PhaseSpaceDensity(grid, pgrid, f, q)


def minimize_position_slices(tau: MomentumDensity, grid: RadialGrid, Z: float,
                             q: float = 2.0) -> PhaseSpaceDensity:
    """At each momentum shell, fill radial cells by increasing -Z/r up to mass τ(p)."""
    if Z <= 0:
        raise ContractError("Z must be positive")
    f = np.zeros((grid.size, tau.pgrid.size))
    levels = -Z / grid.nodes
    for j, m in enumerate(tau.values):
        if m > 0:
            f[:, j] = bathtub_fill(levels, grid.shell, q, m)[0]
    return PhaseSpaceDensity(grid, tau.pgrid, f, q)


def englert_energy(tau: MomentumDensity, Z: float) -> float:
    """Momentum-space functional of τ (per đp).

    In terms of t = τ/(2π)³ and plain d³p this is
    ∫½p²t - (3/2)Z(3π²)^{-1/3}∫t^{2/3} + (3/4)(3π²)^{-1/3}∫∫[t_< t_>^{2/3} - t_<^{5/3}/5],
    which is what the phase-space energy becomes when every momentum slice
    is a ball in position space of radius (3π²t)^{1/3}.
    """
    return float(sum(englert_energy_terms(tau, Z).values()))


def englert_energy_terms(tau: MomentumDensity, Z: float) -> dict:
    m = tau.pgrid.measures
    t = tau.values
    kinetic = float(m @ (tau.pgrid.levels * t))
    # converting d³p t^{2/3} to đp τ^{2/3} leaves a factor (2π)³/(2π)² = 2π
    nuclear = -1.5 * Z / CBRT_3PI2 * 2 * np.pi * float(m @ t ** (2 / 3))
    order = np.argsort(t)
    ts, ms = t[order], m[order]
    # pairs (j, k) with j ≤ k in sorted order: τ_< = ts[j], τ_> = ts[k]
    lo = ts[:, None]
    hi = ts[None, :]
    pair = np.where(np.arange(ts.size)[:, None] <= np.arange(ts.size)[None, :],
                    lo * hi ** (2 / 3) - 0.2 * lo ** (5 / 3), 0.0)
    sym = 2 * pair - np.diag(np.diag(pair))
    repulsion = 0.75 / CBRT_3PI2 * 2 * np.pi * float(ms @ sym @ ms)
    return {"kinetic": kinetic, "nuclear": nuclear, "repulsion": repulsion}


@dataclass(frozen=True)
class ReductionResult:
    Z: float
    mode: str
    energy: float
    tf_energy: float
    phase_energy: float
    particle_number: float
    f: PhaseSpaceDensity

    @property
    def relative_gap(self) -> float:
        return abs(self.energy - self.tf_energy) / abs(self.tf_energy)


def _tf_reference(Z: float, grid: RadialGrid | None, tf: TfSolution | None) -> TfSolution:
    return tf if tf is not None else solve_tf_neutral(Z, grid or default_grid())


def reduce_position(Z: float, grid: RadialGrid | None = None, n_p: int = 1500,
                    tf: TfSolution | None = None) -> ReductionResult:
    """Fermi-ball filling of the TF density; its phase energy is the TF energy."""
    sol = _tf_reference(Z, grid, tf)
    pg = grid_for_potential(sol.phi, n_p)
    f = minimize_momentum_slices(sol.rho.values, sol.rho.grid, pg)
    e = phase_energy(f, Z)
    return ReductionResult(Z, "position", e, sol.energy, e, f.particle_number, f)


def reduce_momentum(Z: float, grid: RadialGrid | None = None, n_p: int = 1500,
                    tf: TfSolution | None = None) -> ReductionResult:
    """Momentum marginal of the TF phase-space minimiser fed to the Englert functional.

    The slices are then refilled as position-space balls (levels -Z/r) and
    the phase energy of that refill is reported alongside.
    """
    sol = _tf_reference(Z, grid, tf)
    g = sol.rho.grid
    phi = np.maximum(sol.phi - max(sol.mu, 0.0), 0.0)
    f0 = indicator_filling(g, phi, grid_for_potential(phi, n_p))
    tau = MomentumDensity(f0.pgrid, f0.tau)
    f = minimize_position_slices(tau, g, Z)
    return ReductionResult(Z, "momentum", englert_energy(tau, Z), sol.energy, phase_energy(f, Z),
                           f.particle_number, f)


def tf_kinetic_density(rho: np.ndarray) -> np.ndarray:
    return 0.6 * GAMMA_TF * np.asarray(rho) ** (5 / 3)
