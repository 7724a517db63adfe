"""Thomas-Fermi-Weizsäcker atoms, critical charge, and the Hellmann-Weizsäcker channel functional."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import ContractError, SolverError
from .numerics import (FOUR_PI, RadialDensity, RadialGrid, coulomb_self,
                       default_grid, hartree_potential, integrate_radial, radial_derivative,
                       _kink_coupling)
from .thomasfermi import GAMMA_TF, tf_energy

# constant in the excess-charge bound N_c ≤ Z + C (λ/(2γ_TF))^{3/2}
EXCESS_CHARGE_CONSTANT = 270.74
# |μ| below this (times Z^{4/3}) is indistinguishable from the finite-box pressure
BOX_MU_FLOOR = 1e-4


def weizsacker_energy(rho: RadialDensity, lam: float = 1.0) -> float:
    """λ/2 ∫|∇√ρ|² 4πr² dr."""
    g = rho.grid
    d = radial_derivative(g, np.sqrt(rho.values))
    return 0.5 * lam * integrate_radial(g, FOUR_PI * g.nodes**2 * d**2)


def tfw_energy(rho: RadialDensity, Z: float, lam: float) -> float:
    """Weizsäcker term plus the Thomas-Fermi energy."""
    if lam <= 0:
        raise ContractError("lambda must be positive")
    return weizsacker_energy(rho, lam) + tf_energy(rho, Z)


@dataclass(frozen=True, eq=False)
class TfwSolution:
    psi: np.ndarray
    mu: float
    lam: float
    energy: float
    euler_residual: float
    grid: RadialGrid
    Z: float
    N: float
    bound: bool = True
    outer_fraction: float = 0.0
    iterations: int = 0
    history: list = field(default_factory=list)

    @property
    def rho(self) -> RadialDensity:
        return RadialDensity(self.grid, self.psi**2)

    @property
    def mass(self) -> float:
        return float(self.grid.shell @ self.psi**2)


class TfwDiscretization:
    """Discrete TFW functional in ψ = √ρ that the minimiser descends.

    The gradient term uses first differences between neighbouring nodes,
    which keeps the quadratic form positive and free of oscillatory null modes.
    """

    def __init__(self, grid: RadialGrid, Z: float, lam: float, gamma: float = GAMMA_TF):
        self.grid, self.Z, self.lam, self.gamma = grid, Z, lam, gamma
        r = grid.nodes
        self.m = grid.shell
        self.a = FOUR_PI * r[:-1] * r[1:] / np.diff(r)  # 4π r_{i+½}² / Δr_i
        self.kink, _ = _kink_coupling(grid)

    def laplacian(self, psi: np.ndarray) -> np.ndarray:
        """A ψ for the quadratic form ψᵀAψ = Σ a_i (ψ_{i+1} - ψ_i)²."""
        flux = self.a * np.diff(psi)
        out = np.zeros_like(psi)
        out[:-1] -= flux
        out[1:] += flux
        return out

    def hartree(self, mrho: np.ndarray) -> np.ndarray:
        return hartree_potential(_Raw(self.grid, mrho / self.m))

    def potential(self, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        rho = psi**2
        vh = self.hartree(self.m * rho)
        return rho, self.gamma * rho ** (2 / 3) - self.Z / self.grid.nodes + vh

    def energy(self, psi: np.ndarray) -> float:
        rho = psi**2
        kin = 0.5 * self.lam * float(self.a @ np.diff(psi) ** 2)
        loc = self.m @ (0.6 * self.gamma * rho ** (5 / 3) - self.Z * rho / self.grid.nodes)
        return float(kin + loc + coulomb_self(self.grid, rho))

    def gradient(self, psi: np.ndarray) -> np.ndarray:
        _, v = self.potential(psi)
        return self.lam * self.laplacian(psi) + 2 * self.m * v * psi

    def euler_residual(self, psi: np.ndarray) -> tuple[float, float]:
        """Rayleigh μ and ‖(-λ/2 Δ + γρ^{2/3} - φ + μ)ψ‖ / ‖ψ‖ in the 4πr² dr norm."""
        g = self.gradient(psi)
        norm2 = self.m @ psi**2
        mu = -float(psi @ g) / (2 * norm2)
        R = (g + 2 * mu * self.m * psi) / (2 * self.m)
        return mu, float(np.sqrt(self.m @ R**2 / norm2))

    def local_hessian_bands(self, psi: np.ndarray, mu: float) -> np.ndarray:
        """Tridiagonal part of the Hessian (everything but Hartree), banded storage."""
        rho, v = self.potential(psi)
        diag = 2 * self.m * (v + mu + (4 / 3) * self.gamma * rho ** (2 / 3))
        diag[:-1] += self.lam * self.a
        diag[1:] += self.lam * self.a
        ab = np.zeros((3, psi.size))
        ab[0, 1:] = -self.lam * self.a
        ab[1] = diag
        ab[2, :-1] = -self.lam * self.a
        return ab

    def precondition(self, psi: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Solve (λA + 2m(|v| + 1)) x = g, a positive tridiagonal metric."""
        _, v = self.potential(psi)
        ab = np.zeros((3, psi.size))
        ab[1] = 2 * self.m * (np.abs(v) + 1.0)
        ab[1, :-1] += self.lam * self.a
        ab[1, 1:] += self.lam * self.a
        ab[0, 1:] = ab[2, :-1] = -self.lam * self.a
        return solve_banded((1, 1), ab, g)

    def newton_step(self, psi: np.ndarray, mu: float, F: np.ndarray, c: float) -> np.ndarray | None:
        """Solve the bordered Newton system with preconditioned GMRES.

        The Hartree block 4 (mψ) G (mψ) is applied in O(n) through the
        cumulative-sum potential; the tridiagonal rest is the preconditioner.
        """
        n = psi.size
        ab = self.local_hessian_bands(psi, mu)
        mp = self.m * psi
        b = 2 * mp

        def matvec(x):
            y = np.empty(n + 1)
            dpsi = x[:n]
            t = ab[1] * dpsi
            t[:-1] += ab[0, 1:] * dpsi[1:]
            t[1:] += ab[2, :-1] * dpsi[:-1]
            t += 4 * mp * self.hartree(mp * dpsi)
            y[:n] = t + b * x[n]
            y[n] = b @ dpsi
            return y

        try:
            z1 = solve_banded((1, 1), ab, b)
            s = b @ z1
            if not np.isfinite(s) or abs(s) < 1e-300:
                return None
        except (np.linalg.LinAlgError, ValueError):
            return None

        def precond(y):
            z = solve_banded((1, 1), ab, y[:n])
            lam_ = (b @ z - y[n]) / s
            return np.concatenate([z - lam_ * z1, [lam_]])

        op = LinearOperator((n + 1, n + 1), matvec=matvec)
        pre = LinearOperator((n + 1, n + 1), matvec=precond)
        rhs = -np.concatenate([F, [c]])
        x, info = gmres(op, rhs, M=pre, rtol=1e-10, atol=0.0, restart=60, maxiter=20)
        if not np.all(np.isfinite(x)):
            return None
        return x[:n]


@dataclass(frozen=True, eq=False)
class _Raw:
    grid: RadialGrid
    values: np.ndarray


def _initial_psi(grid: RadialGrid, Z: float, N: float) -> np.ndarray:
    r = grid.nodes
    rho = np.exp(-2.0 * max(Z, 0.5) ** (1 / 3) * r) + 1e-3 * np.exp(-0.5 * r)
    return np.sqrt(rho * N / (grid.shell @ rho))


def _outer_fraction(grid: RadialGrid, psi: np.ndarray, frac: float = 0.05) -> float:
    k = int(np.ceil((1 - frac) * grid.size))
    q = grid.shell * psi**2
    return float(q[k:].sum() / q.sum())


def minimize_tfw(Z: float, N: float, lam: float, grid: RadialGrid | None = None, tol: float = 1e-8,
                 max_iter: int = 200, psi0: np.ndarray | None = None,
                 disc: TfwDiscretization | None = None) -> TfwSolution:
    """Minimise the TFW functional over ψ ≥ 0 with ∫4πr²ψ² = N.

    Each step solves the bordered Newton system of the Euler equation,
    renormalises the mass, and halves the step until the energy decreases;
    a preconditioned gradient step is used when Newton is not a descent
    direction. Converged when the Euler residual falls below tol.
    """
    if lam <= 0 or N <= 0 or Z < 0:
        raise ContractError("need lambda > 0, N > 0, Z ≥ 0")
    grid = grid or default_grid()
    disc = disc or TfwDiscretization(grid, Z, lam)
    m = disc.m

    def normalize(p):
        p = np.abs(p)
        return p * np.sqrt(N / (m @ p**2))

    tol = tol * max(1.0, Z) ** 2  # residual carries energy units ~ Z²
    psi = normalize(_initial_psi(grid, Z, N) if psi0 is None else psi0)
    E = disc.energy(psi)
    history = [E]
    mu, res = disc.euler_residual(psi)
    for it in range(1, max_iter + 1):
        if res < tol:
            break
        g = disc.gradient(psi)
        F = g + 2 * mu * m * psi
        step = disc.newton_step(psi, mu, F, float(m @ psi**2 - N))
        if step is None or g @ step >= 0:
            step = -disc.precondition(psi, g)
        t = 1.0
        while t > 1e-12:
            cand = normalize(psi + t * step)
            Ec = disc.energy(cand)
            if Ec <= E + 1e-14 * abs(E):
                break
            t *= 0.5
        else:
            break
        psi, E = cand, Ec
        history.append(E)
        mu, res = disc.euler_residual(psi)
    converged = res < tol
    outer = _outer_fraction(grid, psi)
    bound = converged and mu > 0 and outer <= 0.01
    if not converged and outer <= 0.01:
        raise SolverError("TFW minimisation did not converge", residual=res, mu=mu, iterations=it)
    rho = RadialDensity(grid, psi**2)
    return TfwSolution(psi, mu, lam, tfw_energy(rho, Z, lam), res, grid, Z, N, bound, outer,
                       len(history) - 1, history)


def critical_charge(Z: float, lam: float, grid: RadialGrid | None = None, tol: float = 1e-3,
                    solver_tol: float = 1e-8) -> tuple[float, float]:
    """Bracket (n_lower, n_upper) around the largest bound electron number.

    Bisection on N between Z and 2Z; N counts as bound when the minimiser
    converges with μ > 0 and no more than 1% of its mass in the outermost
    5% of the grid.
    """
    grid = grid or default_grid()
    disc = TfwDiscretization(grid, Z, lam)
    lo, hi = float(Z), 2.0 * Z
    sol_lo = minimize_tfw(Z, lo, lam, grid, solver_tol, disc=disc)
    if not sol_lo.bound:
        # For small λ the binding energy of extra charge drops below what the
        # finite box resolves: μ sits at the box-pressure level and the
        # bracket has collapsed onto Z.
        if abs(sol_lo.mu) <= BOX_MU_FLOOR * max(Z, 1.0) ** (4 / 3) and sol_lo.outer_fraction <= 0.01:
            return lo, lo + tol
        raise SolverError("neutral TFW atom not bound", mu=sol_lo.mu)
    sol_hi = _try(Z, hi, lam, grid, solver_tol, disc, sol_lo.psi)
    if sol_hi is not None and sol_hi.bound:
        raise SolverError("no unbound electron number found below 2Z", mu=sol_hi.mu)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        s = _try(Z, mid, lam, grid, solver_tol, disc, sol_lo.psi)
        if s is not None and s.bound:
            lo, sol_lo = mid, s
        else:
            hi = mid
    bound = Z + EXCESS_CHARGE_CONSTANT * (lam / (2 * GAMMA_TF)) ** 1.5
    if not (lo > Z and hi < 2 * Z):
        raise SolverError("critical-charge bracket violates Z < N_c < 2Z", bracket=(lo, hi))
    if hi > bound + tol:
        raise SolverError("critical-charge bracket exceeds the excess-charge bound", bracket=(lo, hi), bound=bound)
    return lo, hi


def _try(Z, N, lam, grid, tol, disc, psi0):
    try:
        return minimize_tfw(Z, N, lam, grid, tol, psi0=psi0, disc=disc)
    except SolverError:
        return None


# --- Hellmann-Weizsäcker channels ------------------------------------------

@dataclass(frozen=True, eq=False)
class ChannelDensities:
    """Radial channel densities ρ_l(r) (per dr) for l = 0..L on one grid."""

    grid: RadialGrid
    values: np.ndarray  # shape (L+1, n)

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        if v.shape[1] != self.grid.size:
            raise ContractError("channel values do not match grid")
        if np.any(v < 0):
            raise ContractError("channel densities must be nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def L(self) -> int:
        return self.values.shape[0] - 1

    def masses(self) -> np.ndarray:
        return self.values @ self.grid.weights

    def total(self) -> np.ndarray:
        return self.values.sum(axis=0)


def hw_energy_terms(ch: ChannelDensities, Z: float, potential=None) -> dict:
    g = ch.grid
    r = g.nodes
    V = -Z / r if potential is None else np.asarray(potential(r))
    grad = cent = cubic = 0.0
    for l, rho_l in enumerate(ch.values):
        d = radial_derivative(g, np.sqrt(rho_l))
        grad += 0.5 * integrate_radial(g, d**2)
        cent += 0.5 * l * (l + 1) * integrate_radial(g, rho_l / r**2)
        cubic += 0.5 * (np.pi**2 / 3) / (2 * (2 * l + 1)) ** 2 * integrate_radial(g, rho_l**3)
    tot = ch.total()
    ext = integrate_radial(g, V * tot)
    # ½∫∫ρ(r)ρ(r')/max(r,r') equals D of the 3D density ρ/(4πr²)
    hart = coulomb_self(g, tot / (FOUR_PI * r**2))
    return {"gradient": grad, "centrifugal": cent, "cubic": cubic, "external": ext, "hartree": hart}


def hw_energy(ch: ChannelDensities, Z: float, potential=None) -> float:
    """Hellmann-Weizsäcker energy of radial channel densities."""
    return float(sum(hw_energy_terms(ch, Z, potential).values()))
