"""Thomas-Fermi functional and its radial Euler-equation solver.

With w(r) = r(φ(r) - μ) the TF equation becomes

    w'' = 4π r (w_+ / (γ r))^{3/2},   w(0) = Z,

and every solution is fixed by its initial slope s = w'(0). The electron
number follows from Gauss' law: N = Z + R w'(R) - w(R) at the edge R of the
density (the point where w vanishes, or the end of the grid). Shooting on s
with bisection therefore targets any N ≤ Z directly; for N = Z on a finite
grid this is the neutral atom with zero field at r_max.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ContractError, SolverError
from .numerics import (FOUR_PI, RadialDensity, RadialGrid, coulomb_self, default_grid,
                       hartree_potential, integrate_singular)

GAMMA_TF = (3 * np.pi**2) ** (2 / 3) / 2
# E_TF(1) in Hartree, used as the reference scale in checks and reports
E_TF_ONE = -0.7687


@dataclass(frozen=True)
class TfConstants:
    gamma_tf: float = GAMMA_TF
    q: int = 2

    def __post_init__(self):
        if self.gamma_tf <= 0 or self.q <= 0:
            raise ContractError("gamma_tf and q must be positive")

    @classmethod
    def for_spin_states(cls, q: int) -> "TfConstants":
        return cls((6 * np.pi**2 / q) ** (2 / 3) / 2, q)


@dataclass(frozen=True, eq=False)
class TfSolution:
    rho: RadialDensity
    phi: np.ndarray
    energy: float
    Z: float
    residual: float
    mu: float = 0.0
    N: float = 0.0
    slope: float = 0.0
    edge: float = 0.0
    saturated: bool = False

    @property
    def mass(self) -> float:
        return self.rho.mass

    def profile(self) -> list[dict]:
        r = self.rho.grid.nodes
        return [{"r": float(a), "rho": float(b), "phi": float(c)} for a, b, c in zip(r, self.rho.values, self.phi)]


def tf_energy_terms(rho: RadialDensity, Z: float, gamma: float = GAMMA_TF) -> dict:
    g = rho.grid
    r = g.nodes
    v = rho.values
    kin = 0.6 * gamma * integrate_singular(g, FOUR_PI * r**2 * v ** (5 / 3))
    nuc = -Z * integrate_singular(g, FOUR_PI * r * v)
    return {"kinetic": kin, "nuclear": nuc, "hartree": coulomb_self(g, v)}


def tf_energy(rho: RadialDensity, Z: float, gamma: float = GAMMA_TF) -> float:
    """∫(3/5 γ ρ^{5/3} - Zρ/r) 4πr² dr + D[ρ]."""
    if Z < 0:
        raise ContractError("Z must be nonnegative")
    return float(sum(tf_energy_terms(rho, Z, gamma).values()))


class _Shooter:
    """Integrates the TF equation in t = ln r for a given initial slope."""

    def __init__(self, Z: float, grid: RadialGrid, target_N: float, gamma: float, rtol: float):
        self.Z, self.grid, self.gamma, self.rtol = Z, grid, gamma, rtol
        self.c = FOUR_PI * gamma**-1.5
        self.gap = Z - target_N  # required value of w - r w' at the edge
        self.t0 = np.log(grid.nodes[0])
        self.t1 = np.log(grid.nodes[-1])

    def start(self, s: float) -> np.ndarray:
        r = np.exp(self.t0)
        k = self.c * self.Z**1.5
        return np.array([self.Z + s * r + (4 / 3) * k * r**1.5, s + 2 * k * np.sqrt(r)])

    def rhs(self, t, y):
        r = np.exp(t)
        w = max(y[0], 0.0)
        return [r * y[1], self.c * w**1.5 * np.sqrt(r)]

    def run(self, s: float, dense: bool = False):
        def crossing(t, y):
            return y[0]

        def intercept(t, y):
            return y[0] - np.exp(t) * y[1] - self.gap

        crossing.terminal = intercept.terminal = True
        crossing.direction = intercept.direction = -1
        sol = solve_ivp(self.rhs, (self.t0, self.t1), self.start(s), method="DOP853",
                        rtol=self.rtol, atol=1e-14 * max(self.Z, 1.0),
                        events=(crossing, intercept), dense_output=dense)
        if sol.t_events[1].size:
            return "shallow", sol
        return "steep", sol


def _solve(Z: float, N: float, grid: RadialGrid, tol: float, gamma: float,
           bracket: tuple[float, float] | None) -> TfSolution:
    if Z <= 0:
        raise ContractError("Z must be positive")
    sh = _Shooter(Z, grid, N, gamma, rtol=1e-12)
    lo, hi = bracket or (-10.0 * Z ** (4 / 3), 0.0)  # lo steep, hi shallow
    if sh.run(lo)[0] != "steep" or sh.run(hi)[0] != "shallow":
        raise SolverError("shooting bracket does not enclose the solution", Z=Z, N=N, bracket=(lo, hi))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= 4e-16 * abs(mid):
            break
        if sh.run(mid)[0] == "steep":
            lo = mid
        else:
            hi = mid
    kind, sol = sh.run(lo, dense=True)
    r = grid.nodes
    t_end = sol.t[-1]
    edge = float(np.exp(t_end))
    w_end, dw_end = sol.y[0, -1], sol.y[1, -1]
    t = np.log(r)
    w = np.where(t <= t_end, sol.sol(np.minimum(t, t_end))[0], 0.0)
    w = np.maximum(w, 0.0)
    rho_v = (w / (gamma * r)) ** 1.5
    rho = RadialDensity(grid, rho_v)
    phi = Z / r - hartree_potential(rho)
    mu = (Z - rho.mass - w_end) / edge
    occupied = rho_v > 0
    # Poisson consistency: r(γρ^{2/3} - φ + μ) should vanish where ρ > 0
    defect = r * (gamma * rho_v ** (2 / 3) - phi + mu)
    residual = float(np.abs(defect[occupied]).max() / Z) if occupied.any() else 0.0
    energy = tf_energy(rho, Z, gamma)
    if abs(rho.mass - N) > max(tol, 1e-8) * max(N, 1.0) * 10:
        raise SolverError("mass constraint not met", mass=rho.mass, target=N, slope=lo)
    return TfSolution(rho, phi, energy, Z, residual, float(mu), float(N), float(lo), edge)


def solve_tf_neutral(Z: float, grid: RadialGrid | None = None, tol: float = 1e-6,
                     bracket: tuple[float, float] | None = None,
                     constants: TfConstants = TfConstants()) -> TfSolution:
    """Neutral TF atom by shooting on u'(0) with bisection.

    The default bracket is [-10 Z^{4/3}, 0]; on a finite grid the boundary
    condition is zero electric field at r_max, which makes ∫ρ = Z exact.
    """
    return _solve(Z, Z, grid or default_grid(), tol, constants.gamma_tf, bracket)


def solve_tf_constrained(Z: float, N: float, grid: RadialGrid | None = None, tol: float = 1e-6,
                         constants: TfConstants = TfConstants()) -> TfSolution:
    """Minimiser over densities with ∫ρ ≤ N.

    Solves γρ^{2/3} = (φ - μ)_+ with the mass fixed to N. For N > Z there is
    no minimiser with that mass; the neutral solution is returned with
    saturated=True.
    """
    if N <= 0:
        raise ContractError("N must be positive")
    grid = grid or default_grid()
    if N >= Z:
        sol = solve_tf_neutral(Z, grid, tol, constants=constants)
        if N > Z:
            return TfSolution(sol.rho, sol.phi, sol.energy, Z, sol.residual, sol.mu, Z,
                              sol.slope, sol.edge, saturated=True)
        return sol
    return _solve(Z, N, grid, tol, constants.gamma_tf, None)


def check_minimizer_shape(sol: TfSolution, tol: float = 1e-10) -> dict:
    """Sign, monotonicity and discrete convexity of a TF solution."""
    r = sol.rho.grid.nodes
    rho = sol.rho.values
    scale = rho.max() if rho.size else 1.0
    d1 = np.diff(rho) / np.diff(r)
    d2 = np.diff(d1) / (0.5 * (r[2:] - r[:-2]))
    return {
        "phi_nonnegative": bool(sol.phi.min() >= -tol * sol.Z),
        "nonincreasing": bool(np.all(np.diff(rho) <= tol * scale)),
        "convex": bool(np.all(d2 >= -tol * np.abs(d2).max())),
        "min_phi": float(sol.phi.min()),
    }


def random_trial_density(grid: RadialGrid, Z: float, rng: np.random.Generator) -> RadialDensity:
    """Random admissible density: a positive mix of exponentials and Gaussians
    with mass in (0, 1.5 Z]."""
    r = grid.nodes
    k = rng.integers(1, 5)
    v = np.zeros_like(r)
    for _ in range(k):
        a = rng.uniform(0.2, 6.0) * Z ** (1 / 3)
        if rng.random() < 0.5:
            v += rng.random() * np.exp(-a * r)
        else:
            c = rng.uniform(0.0, 3.0) / Z ** (1 / 3)
            v += rng.random() * np.exp(-((a * (r - c)) ** 2))
    v *= rng.uniform(0.05, 1.5) * Z / (grid.shell @ v)
    return RadialDensity(grid, v)


def lieb_thirring_ratio(kinetic: float, rho_values: np.ndarray, grid: RadialGrid,
                        gamma_lt: float = GAMMA_TF) -> float:
    """Kinetic energy over (3/5)γ_LT ∫ρ^{5/3}; observational only."""
    denom = 0.6 * gamma_lt * integrate_singular(grid, FOUR_PI * grid.nodes**2 * rho_values ** (5 / 3))
    return kinetic / denom if denom > 0 else float("inf")
