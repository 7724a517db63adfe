"""Relativistic Engel-Dreizler density functional.

E(ρ) = T^W + T^TF - X + V with p = (3π²ρ)^{1/3} and t = p/c:

    T^W  = ∫ 3λ/(8π²) |∇p|² c f2(t)
    T^TF = ∫ c⁵/(8π²) ttf(t)
    X    = ∫ c⁴/(8π³) x(t)
    V    = -Z∫ρ/r + D[ρ]

ttf and x are small differences of O(t) terms, so below SERIES_CUTOFF they
are summed from their Taylor series in u = t².
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import ContractError
from .numerics import FOUR_PI, RadialDensity, RadialGrid, coulomb_self, integrate_singular, radial_derivative
from .thomasfermi import GAMMA_TF

SPEED_OF_LIGHT = 137.037
SERIES_CUTOFF = 0.5
_SERIES_TERMS = 40


def _binomial_series(alpha: Fraction, n: int) -> list[Fraction]:
    """Coefficients of (1 + u)^alpha."""
    out = [Fraction(1)]
    for k in range(1, n):
        out.append(out[-1] * (alpha - k + 1) / k)
    return out


def _kernel_series(n: int = _SERIES_TERMS):
    # arsinh(t) = t Σ a_k u^k
    a = [Fraction((-1) ** k * comb(2 * k, k), 4**k * (2 * k + 1)) for k in range(n)]
    b12 = _binomial_series(Fraction(1, 2), n)
    b32 = _binomial_series(Fraction(3, 2), n)
    # ttf = t Σ c_k u^k
    c = [b32[k] + (b12[k - 1] if k else 0) - a[k] for k in range(n)]
    c[1] -= Fraction(8, 3)
    # t√(1+u) - arsinh t = t u Σ g_k u^k
    g = [b12[k + 1] - a[k + 1] for k in range(n - 1)]
    # x = t⁴ (2 - 3 u Σ (g*g)_k u^k)
    gg = [sum(g[i] * g[k - i] for i in range(k + 1)) for k in range(n - 1)]
    x = [Fraction(2)] + [-3 * gg[k - 1] for k in range(1, n - 1)]
    return np.array([float(v) for v in c]), np.array([float(v) for v in x])


_TTF_SERIES, _X_SERIES = _kernel_series()


def _check_t(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ContractError("kernel argument t must be finite and nonnegative")
    return t


def kernel_f2(t) -> np.ndarray:
    """f(t)² = t/√(t²+1) + 2t²/(t²+1) arsinh t."""
    t = _check_t(t)
    return t / np.sqrt(t * t + 1) + 2 * t * t / (t * t + 1) * np.arcsinh(t)


def kernel_ttf(t) -> np.ndarray:
    """t(t²+1)^{3/2} + t³(t²+1)^{1/2} - arsinh t - (8/3)t³."""
    t = _check_t(t)
    small = t < SERIES_CUTOFF
    out = np.empty_like(t)
    u = t[small] ** 2
    out[small] = t[small] * np.polynomial.polynomial.polyval(u, _TTF_SERIES)
    s = t[~small]
    q = np.sqrt(s * s + 1)
    out[~small] = s * q**3 + s**3 * q - np.arcsinh(s) - (8 / 3) * s**3
    return out


def kernel_x(t) -> np.ndarray:
    """2t⁴ - 3[t(t²+1)^{1/2} - arsinh t]²."""
    t = _check_t(t)
    small = t < SERIES_CUTOFF
    out = np.empty_like(t)
    u = t[small] ** 2
    out[small] = u * u * np.polynomial.polynomial.polyval(u, _X_SERIES)
    s = t[~small]
    out[~small] = 2 * s**4 - 3 * (s * np.sqrt(s * s + 1) - np.arcsinh(s)) ** 2
    return out


def ed_kernels(t):
    """(f2, ttf, x) at t ≥ 0; scalars in, floats out."""
    f2, ttf, x = kernel_f2(t), kernel_ttf(t), kernel_x(t)
    if np.ndim(t) == 0:
        return float(f2), float(ttf), float(x)
    return f2, ttf, x


@dataclass(frozen=True)
class EdParams:
    Z: float
    lam: float = 1.0 / 9.0
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.c > 0:
            raise ContractError("c must be positive")
        if not self.lam > 0:
            raise ContractError("lambda must be positive")
        if self.Z < 0:
            raise ContractError("Z must be nonnegative")


def fermi_momentum(rho_values) -> np.ndarray:
    return np.cbrt(3 * np.pi**2 * np.asarray(rho_values, dtype=float))


def ed_energy_terms(rho: RadialDensity, params: EdParams) -> dict:
    g = rho.grid
    r = g.nodes
    c = params.c
    p = fermi_momentum(rho.values)
    t = p / c
    dp = radial_derivative(g, p)
    vol = FOUR_PI * r**2
    weiz = integrate_singular(g, vol * 3 * params.lam / (8 * np.pi**2) * dp**2 * c * kernel_f2(t))
    kin = integrate_singular(g, vol * c**5 / (8 * np.pi**2) * kernel_ttf(t))
    exch = integrate_singular(g, vol * c**4 / (8 * np.pi**3) * kernel_x(t))
    nuc = -params.Z * integrate_singular(g, FOUR_PI * r * rho.values)
    return {"weizsacker": weiz, "kinetic": kin, "exchange": exch, "nuclear": nuc,
            "hartree": coulomb_self(g, rho.values)}


def ed_energy(rho: RadialDensity, params: EdParams) -> float:
    """T^W + T^TF - X + V for a radial density."""
    e = ed_energy_terms(rho, params)
    return float(e["weizsacker"] + e["kinetic"] - e["exchange"] + e["nuclear"] + e["hartree"])


def nonrelativistic_terms(rho: RadialDensity) -> dict:
    """c → ∞ limits of T^TF and X: (3/5)γ∫ρ^{5/3} and (3/4)(3/π)^{1/3}∫ρ^{4/3}."""
    g = rho.grid
    vol = FOUR_PI * g.nodes**2
    return {
        "kinetic": 0.6 * GAMMA_TF * integrate_singular(g, vol * rho.values ** (5 / 3)),
        "exchange": 0.75 * np.cbrt(3 / np.pi) * integrate_singular(g, vol * rho.values ** (4 / 3)),
    }


def scaled_density(rho: RadialDensity, mu: float) -> RadialDensity:
    """ρ_μ(r) = μ³ρ(μr), sampled exactly on the grid contracted by 1/μ."""
    if mu <= 0:
        raise ContractError("scale must be positive")
    g = rho.grid
    grid = RadialGrid(g.nodes / mu, g.weights / mu, g.spacing)
    return RadialDensity(grid, mu**3 * rho.values)


def scaling_scan(rho: RadialDensity, params: EdParams, mus=None) -> dict:
    """ED energies of μ³ρ(μx) across scales; reports the minimum found."""
    mus = np.logspace(0, 4, 17) if mus is None else np.asarray(mus, dtype=float)
    energies = np.array([ed_energy(scaled_density(rho, m), params) for m in mus])
    k = int(np.argmin(energies))
    return {"mu": mus.tolist(), "energy": energies.tolist(), "min_energy": float(energies[k]),
            "argmin_mu": float(mus[k])}
