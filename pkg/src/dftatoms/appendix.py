"""Two auxiliary computations on radial power laws.

maximal_function_power evaluates the Hardy-Littlewood maximal function of
|y|^{-α} in d ≤ 3 dimensions; homogeneity makes M(|·|^{-α}) = C_{α,d}|x|^{-α}.

scaled_infimum minimises ∫(3/5)γρ^{5/3} - C√(Z/r)ρ over ρ ≥ 0 with ∫ρ ≤ Z.
The minimiser is γρ^{2/3} = (C√(Z/r) - μ)_+ with support r < C²Z/μ², and
the infimum scales as Z^{13/9}γ^{-1/3}.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gamma as gamma_fn

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .errors import ContractError
from .numerics import FOUR_PI, integrate_singular, log_grid

_SPHERE = {1: 2.0, 2: 2 * np.pi, 3: 4 * np.pi}  # |S^{d-1}|


def unit_ball_volume(d: int) -> float:
    return np.pi ** (d / 2) / gamma_fn(d / 2 + 1)


@dataclass(frozen=True)
class MaximalFunctionQuery:
    alpha: float
    d: int = 3
    nodes: int = 64  # Gauss-Legendre nodes for the partial-shell integral

    def __post_init__(self):
        if self.d not in _SPHERE:
            raise ContractError("dimension must be 1, 2 or 3")
        if self.alpha < 0:
            raise ContractError("alpha must be nonnegative")
        if self.alpha >= self.d:
            raise ContractError(f"|y|^-{self.alpha} is not locally integrable in d={self.d}")
        if self.nodes < 4:
            raise ContractError("need at least 4 quadrature nodes")


def _shell_fraction(s: np.ndarray, a: float, R: float, d: int) -> np.ndarray:
    """Fraction of the sphere |y| = s lying in the ball |y - x| < R, |x| = a,
    for s between |R - a| and R + a."""
    c = np.clip((s * s + a * a - R * R) / (2 * a * s), -1.0, 1.0)
    if d == 3:
        return 0.5 * (1 - c)
    if d == 2:
        return np.arccos(c) / np.pi
    return np.full_like(s, 0.5)


def ball_average(q: MaximalFunctionQuery, a: float, R: float) -> float:
    """(∫_{|x-y|<R} |y|^{-α} dy) / (ω_d R^d) with |x| = a."""
    d, al = q.d, q.alpha
    S = _SPHERE[d]
    total = 0.0
    lo, hi = abs(R - a), R + a
    if R > a:
        # the whole sphere |y| = s sits inside the ball for s < R - a
        total += S * lo ** (d - al) / (d - al)
    # partial shells; s = lo + (hi - lo)u² smooths the endpoint behaviour
    u, w = np.polynomial.legendre.leggauss(q.nodes)
    u = 0.5 * (u + 1)
    w = 0.5 * w
    s = lo + (hi - lo) * u**2
    jac = 2 * (hi - lo) * u
    total += float(np.sum(w * jac * S * s ** (d - 1 - al) * _shell_fraction(s, a, R, d)))
    return total / (unit_ball_volume(d) * R**d)


def maximal_function_power(q: MaximalFunctionQuery, x_norm: float, scan: int = 121) -> float:
    """sup over R of the ball average, by a log-spaced scan on [1e-3|x|, 1e3|x|]
    followed by golden-section refinement around the best point."""
    if x_norm <= 0:
        raise ContractError("|x| must be positive")
    if q.alpha == 0:
        return 1.0
    logs = np.linspace(np.log(1e-3 * x_norm), np.log(1e3 * x_norm), scan)
    vals = np.array([ball_average(q, x_norm, np.exp(t)) for t in logs])
    k = int(np.argmax(vals))
    lo, hi = logs[max(k - 1, 0)], logs[min(k + 1, scan - 1)]
    res = minimize_scalar(lambda t: -ball_average(q, x_norm, np.exp(t)), bracket=(lo, logs[k], hi),
                          method="golden", options={"xtol": 1e-10}) if 0 < k < scan - 1 else None
    # R → 0 recovers |x|^{-α} itself; for α ≤ d - 2 the function is
    # superharmonic and that limit is the supremum
    best = max(vals[k], x_norm ** -q.alpha)
    if res is not None and -res.fun > best:
        best = -res.fun
    return float(best)


def maximal_constant(alpha: float, d: int = 3, nodes: int = 64) -> float:
    """C_{α,d} = M(|·|^{-α})(x)|x|^α, evaluated at |x| = 1."""
    return maximal_function_power(MaximalFunctionQuery(alpha, d, nodes), 1.0)


@dataclass(frozen=True)
class InfimumResult:
    value: float
    mu: float
    support_radius: float
    mass: float


def _profile(gamma: float, Z: float, C: float, mu: float, n: int):
    """Stationary density on a log grid spanning (0, R_μ]."""
    R = C * C * Z / (mu * mu)
    g = log_grid(1e-10 * R, R, n)
    r = g.nodes
    rho = (np.maximum(C * np.sqrt(Z / r) - mu, 0.0) / gamma) ** 1.5
    return g, r, rho


def scaled_infimum_details(gamma: float, Z: float, C: float, n: int = 2000) -> InfimumResult:
    if gamma <= 0 or Z <= 0:
        raise ContractError("gamma and Z must be positive")
    if C < 0:
        raise ContractError("C must be nonnegative")
    if C == 0:
        return InfimumResult(0.0, 0.0, 0.0, 0.0)

    def mass(mu):
        g, r, rho = _profile(gamma, Z, C, mu, n)
        return integrate_singular(g, FOUR_PI * r**2 * rho)

    # without the constraint ρ ~ r^{-3/4} has infinite mass, so μ > 0; mass(μ) falls like μ^{-9/2}
    lo, hi = 1e-3, 1.0
    while mass(lo) < Z:
        lo *= 0.1
    while mass(hi) > Z:
        hi *= 10.0
    mu = bisect(lambda m: np.log(mass(m) / Z), lo, hi, xtol=1e-300, rtol=1e-14)
    g, r, rho = _profile(gamma, Z, C, mu, n)
    energy = integrate_singular(g, FOUR_PI * r**2 * (0.6 * gamma * rho ** (5 / 3) - C * np.sqrt(Z / r) * rho))
    return InfimumResult(float(energy), float(mu), float(C * C * Z / mu**2), float(mass(mu)))


def scaled_infimum(gamma: float, Z: float, C: float = 1.0, n: int = 2000) -> float:
    """inf {∫(3/5)γρ^{5/3} - C√(Z/r)ρ : ρ ≥ 0, ∫ρ ≤ Z}."""
    return scaled_infimum_details(gamma, Z, C, n).value
