"""Macke orbitals: Slater determinants with a prescribed density.

Given a density ρ of mass N, Y = ∫ρ/N maps the line monotonically onto
(0, 1) and the plane waves e^{i2π(n-a)Y} weighted by √Y' are orthonormal
with Σ|φ_n|² = ρ. Three flavours live here: the line, tensor grids in d
dimensions (Y built from nested conditional CDFs), and radial channels.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from .errors import ContractError
from .numerics import (RadialGrid, central_derivative, cumulative_uniform, radial_derivative,
                       uniform_weights)
from .tfw import ChannelDensities

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class OrbitalSet:
    """Sampled orbitals sharing one quadrature.

    orbitals has shape (k, *grid_shape); weights broadcasts against one
    orbital. sectors labels blocks that are orthogonal for reasons outside
    the sampled coordinate (spin, angular momentum), None for a single block.
    """

    coords: tuple
    orbitals: np.ndarray
    weights: np.ndarray
    Y: np.ndarray
    phase_offset: object
    index_set: tuple
    sectors: tuple | None = None

    @property
    def count(self) -> int:
        return self.orbitals.shape[0]

    def gram(self) -> np.ndarray:
        flat = self.orbitals.reshape(self.count, -1)
        w = np.broadcast_to(self.weights, self.orbitals.shape[1:]).ravel()
        G = (flat.conj() * w) @ flat.T
        if self.sectors is not None:
            s = self.sectors
            G = G * np.array([[a == b for b in s] for a in s])
        return G

    def density(self) -> np.ndarray:
        return np.sum(np.abs(self.orbitals) ** 2, axis=0)

    def evaluate_Y(self, points) -> np.ndarray:
        """Y between nodes by monotone cubic interpolation (1D and radial sets)."""
        if len(self.coords) != 1:
            raise ContractError("off-grid evaluation is available for one coordinate only")
        return PchipInterpolator(self.coords[0], self.Y, extrapolate=True)(points)

    def to_csv(self) -> str:
        """One row per grid point: coordinates, then Re φ_k, Im φ_k."""
        mesh = np.meshgrid(*self.coords, indexing="ij")
        cols = [m.ravel() for m in mesh]
        names = ["x"] if len(cols) == 1 else [f"x{i}" for i in range(len(cols))]
        for k in range(self.count):
            phi = self.orbitals[k].ravel()
            cols += [phi.real, phi.imag]
            names += [f"re_phi{k}", f"im_phi{k}"]
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(names)
        for row in zip(*cols):
            wr.writerow([f"{v:.12g}" for v in row])
        return buf.getvalue()


def _uniform_spacing(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 16:
        raise ContractError("coordinate axis needs at least 16 nodes")
    h = (x[-1] - x[0]) / (x.size - 1)
    if h <= 0 or not np.allclose(np.diff(x), h, rtol=1e-9, atol=0):
        raise ContractError("coordinate axis must be uniform and increasing")
    return float(h)


def _particle_count(mass: float) -> int:
    N = int(round(mass))
    if N < 1 or abs(mass - N) > 1e-8 * max(1.0, mass):
        raise ContractError(f"density mass {mass:.12g} is not a positive integer")
    return N


def _check_density(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(rho)) or np.any(rho < 0):
        raise ContractError("density must be finite and nonnegative")
    return rho


# --- one dimension ---------------------------------------------------------

def line_cdf(x: np.ndarray, rho: np.ndarray) -> tuple[np.ndarray, int, float]:
    """Y(x) = ∫_{x_0}^x ρ / N on a uniform line grid, with N the rounded mass."""
    h = _uniform_spacing(x)
    rho = _check_density(rho)
    F = cumulative_uniform(rho, h)
    N = _particle_count(float(uniform_weights(rho.size, h) @ rho))
    return F / F[-1], N, h


def macke_orbitals_1d(x: np.ndarray, rho: np.ndarray, a: float = 0.0) -> OrbitalSet:
    """φ_n = √Y' exp(i2π(n-a)Y), n = 1..N, with Y' = ρ/N exactly."""
    x = np.asarray(x, dtype=float)
    Y, N, h = line_cdf(x, rho)
    amp = np.sqrt(_check_density(rho) / N)
    n = np.arange(1, N + 1)
    phi = amp * np.exp(1j * TWO_PI * (n[:, None] - a) * Y)
    return OrbitalSet((x,), phi, uniform_weights(x.size, h), Y, float(a), tuple(int(k) for k in n))


def slater_kinetic(orbs: OrbitalSet) -> float:
    """½ Σ_k ∫|∇φ_k|², by sixth-order differences on the tensor grid."""
    total = 0.0
    for ax, xs in enumerate(orbs.coords):
        h = _uniform_spacing(xs)
        d = central_derivative(orbs.orbitals, h, axis=ax + 1)
        total += float(np.sum(np.abs(d) ** 2 * orbs.weights))
    return 0.5 * total


def kinetic_upper_bound_1d(x: np.ndarray, rho: np.ndarray, N: int | None = None) -> float:
    """½∫[(√ρ)'² + (π²/3)(1 - 1/N²) ρ³] on a uniform grid."""
    h = _uniform_spacing(x)
    rho = _check_density(rho)
    if N is None:
        N = _particle_count(float(uniform_weights(rho.size, h) @ rho))
    if N < 1:
        raise ContractError("N must be at least 1")
    ds = central_derivative(np.sqrt(rho), h)
    integrand = ds**2 + (np.pi**2 / 3) * (1 - 1 / N**2) * rho**3
    return 0.5 * float(uniform_weights(rho.size, h) @ integrand)


def optimal_phase(energy, bracket=(-1.0, 1.0), tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section search of a scalar energy(a); returns (a*, energy(a*))."""
    res = minimize_scalar(energy, bracket=bracket, method="golden", options={"xtol": tol})
    return float(res.x), float(res.fun)


def macke_kinetic_at_optimum(x: np.ndarray, rho: np.ndarray) -> tuple[float, float]:
    """Direct Slater kinetic energy minimised over the phase offset a."""
    _, N, _ = line_cdf(x, rho)
    c = 0.5 * (N + 1)
    return optimal_phase(lambda a: slater_kinetic(macke_orbitals_1d(x, rho, a)), (c - 1, c + 1))


# --- d dimensions ----------------------------------------------------------

def _nested_cdfs(axes, rho: np.ndarray):
    """Components Y_k and Jacobian diagonal ∂Y_k/∂x_k on the tensor grid."""
    d = rho.ndim
    hs = [_uniform_spacing(ax) for ax in axes]
    Y, diag = [], []
    marg = rho
    for k in range(d):
        # marg has axes k..d-1 (earlier axes integrated out)
        w = uniform_weights(marg.shape[0], hs[k])
        total = np.tensordot(w, marg, axes=(0, 0))
        if np.any(total <= 0):
            raise ContractError(f"marginal along axis {k} vanishes; Y is undefined there")
        cum = cumulative_uniform(marg, hs[k], axis=0)
        Yk = cum / total
        dk = marg / total
        shape = (1,) * k + marg.shape
        Y.append(np.broadcast_to(Yk.reshape(shape), rho.shape))
        diag.append(np.broadcast_to(dk.reshape(shape), rho.shape))
        marg = total
    return np.stack(Y), np.stack(diag), float(marg)


def macke_orbitals_dd(axes, rho: np.ndarray, indices, a=None) -> OrbitalSet:
    """φ_ν = √|det J| exp(i2π(n_ν - a)·Y) on a tensor grid.

    Y_k integrates ρ over x_1..x_{k-1} and up to x_k, normalised by the
    full integral over x_1..x_k; J is triangular and det J = ρ/N.
    """
    rho = _check_density(rho)
    axes = tuple(np.asarray(ax, dtype=float) for ax in axes)
    d = rho.ndim
    if len(axes) != d or tuple(ax.size for ax in axes) != rho.shape:
        raise ContractError("axes do not match the density array")
    idx = np.atleast_2d(np.asarray(indices, dtype=int))
    if idx.shape[1] != d:
        raise ContractError(f"indices must be {d}-vectors")
    if len({tuple(v) for v in idx}) != len(idx):
        raise ContractError("indices must be distinct")
    a = np.zeros(d) if a is None else np.asarray(a, dtype=float).reshape(d)
    Y, diag, N = _nested_cdfs(axes, rho)
    detJ = np.prod(diag, axis=0)
    theta = np.tensordot(idx - a, Y, axes=(1, 0))
    phi = np.sqrt(detJ) * np.exp(1j * TWO_PI * theta)
    w = uniform_weights(axes[0].size, _uniform_spacing(axes[0]))
    for ax in axes[1:]:
        w = np.multiply.outer(w, uniform_weights(ax.size, _uniform_spacing(ax)))
    # φ carries ρ/N, so the set reproduces ρ when N orbitals are used
    return OrbitalSet(axes, phi, w, Y, a, tuple(tuple(int(c) for c in v) for v in idx))


def jacobian_determinant(axes, rho: np.ndarray) -> np.ndarray:
    """det J of the nested-CDF map, computed as the product of its diagonal."""
    _, diag, _ = _nested_cdfs(tuple(np.asarray(ax, dtype=float) for ax in axes), _check_density(rho))
    return np.prod(diag, axis=0)


def weizsacker_dd(axes, rho: np.ndarray) -> float:
    """½∫|∇√ρ|² on a tensor grid."""
    s = np.sqrt(_check_density(rho))
    w = 1.0
    total = np.zeros_like(s)
    for k, ax in enumerate(axes):
        h = _uniform_spacing(ax)
        total += central_derivative(s, h, axis=k) ** 2
        w = np.multiply.outer(w, uniform_weights(len(ax), h)) if k else uniform_weights(len(ax), h)
    return 0.5 * float(np.sum(total * w))


# --- radial channels -------------------------------------------------------

def _radial_cdf(grid: RadialGrid, rho_l: np.ndarray, l: int) -> np.ndarray:
    """Y_l(r) = ∫_0^r ρ_l / ∫_0^∞ ρ_l, with the [0, r_0] piece from ρ_l ~ r^{2l+2}."""
    r = grid.nodes
    if grid.spacing == "logarithmic":
        t = np.log(r)
        h = _uniform_spacing(t)
        cum = cumulative_uniform(rho_l * r, h)
    else:
        cum = cumulative_uniform(rho_l, _uniform_spacing(r))
    cum = cum + rho_l[0] * r[0] / (2 * l + 3)
    return cum / cum[-1]


def radial_macke(channels: ChannelDensities, occupations: dict, a=None) -> OrbitalSet:
    """Radial Macke orbitals u_{n,l,m,s} = √Y_l' exp(i2π(n - a_l)Y_l).

    occupations maps (l, m, s) to N_{l,m,s}; the full orbital is u/r times a
    spherical harmonic and a spin function, which only enter through the
    (l, m, s) labels. Each channel's mass must equal Σ_{m,s} N_{l,m,s} so the
    orbitals reproduce ρ_l.
    """
    grid = channels.grid
    a = {} if a is None else (dict(a) if isinstance(a, dict) else dict(enumerate(np.atleast_1d(a))))
    per_l: dict[int, int] = {}
    for (l, m, s), cnt in occupations.items():
        if not (0 <= l <= channels.L and -l <= m <= l and s in (1, 2)) or int(cnt) != cnt or cnt < 0:
            raise ContractError(f"bad occupation {(l, m, s)}: {cnt}")
        per_l[l] = per_l.get(l, 0) + int(cnt)
    masses = channels.masses()
    rows, labels, sectors, Ys = [], [], [], {}
    for l, total in sorted(per_l.items()):
        if total == 0:
            continue
        if masses[l] <= 0:
            raise ContractError(f"channel l={l} has zero mass but nonzero occupation")
        if abs(masses[l] - total) > 1e-8 * max(1.0, total):
            raise ContractError(f"channel l={l} mass {masses[l]:.10g} differs from its occupation {total}")
        rho_l = channels.values[l]
        Y = _radial_cdf(grid, rho_l, l)
        Ys[l] = Y
        amp = np.sqrt(rho_l / masses[l])
        al = float(a.get(l, 0.0))
        for (ll, m, s), cnt in sorted(occupations.items()):
            if ll != l:
                continue
            for n in range(1, int(cnt) + 1):
                rows.append(amp * np.exp(1j * TWO_PI * (n - al) * Y))
                labels.append((n, l, m, s))
                sectors.append((l, m, s))
    if not rows:
        raise ContractError("no occupied orbitals")
    Yarr = np.array([Ys.get(l, np.zeros(grid.size)) for l in range(channels.L + 1)])
    return OrbitalSet((grid.nodes,), np.array(rows), grid.weights, Yarr, dict(a), tuple(labels), tuple(sectors))


def radial_channel_densities(orbs: OrbitalSet, L: int) -> np.ndarray:
    out = np.zeros((L + 1, orbs.orbitals.shape[1]))
    for u, (n, l, m, s) in zip(orbs.orbitals, orbs.index_set):
        out[l] += np.abs(u) ** 2
    return out


def radial_kinetic(orbs: OrbitalSet, grid: RadialGrid) -> dict[int, float]:
    """Per channel l: ½ Σ ∫(|u'|² + l(l+1)|u|²/r²) dr, derivatives by finite differences."""
    r = grid.nodes
    out: dict[int, float] = {}
    for u, (n, l, m, s) in zip(orbs.orbitals, orbs.index_set):
        du = radial_derivative(grid, u.real) + 1j * radial_derivative(grid, u.imag)
        e = 0.5 * (np.abs(du) ** 2 + l * (l + 1) * np.abs(u) ** 2 / r**2)
        out[l] = out.get(l, 0.0) + float(grid.weights @ e)
    return out


def channel_bound(grid: RadialGrid, rho_l: np.ndarray, l: int, counts) -> float:
    """Kinetic plus centrifugal energy of channel l at the optimal phase.

    counts lists N_{l,m,s} over the occupied (m, s). With all 2(2l+1) entries
    equal to k this is ½∫[(√ρ_l)'² + l(l+1)ρ_l/r² + (π²/3)(1 - 1/k²)ρ_l³/(2(2l+1))²].
    """
    counts = np.asarray([c for c in counts if c > 0], dtype=int)
    M = counts.sum()
    r = grid.nodes
    ds = radial_derivative(grid, np.sqrt(rho_l))
    # Σ_{m,s} Σ_n (n - a)² at the shared optimum a = mean of all n
    ns = np.concatenate([np.arange(1, c + 1) for c in counts])
    spread = float(np.sum((ns - ns.mean()) ** 2))
    integrand = ds**2 + l * (l + 1) * rho_l / r**2 + 4 * np.pi**2 * spread * rho_l**3 / M**3
    return 0.5 * float(grid.weights @ integrand)


def radial_optimal_phases(channels: ChannelDensities, occupations: dict) -> dict[int, float]:
    """Golden-section search of the direct channel energy over each a_l."""
    grid = channels.grid
    out = {}
    for l in sorted({k[0] for k, c in occupations.items() if c > 0}):
        occ_l = {k: c for k, c in occupations.items() if k[0] == l}

        def energy(al, occ_l=occ_l, l=l):
            return radial_kinetic(radial_macke(channels, occ_l, {l: al}), grid)[l]

        c = 0.5 * (max(occ_l.values()) + 1)
        out[l] = optimal_phase(energy, (c - 1, c + 1))[0]
    return out
