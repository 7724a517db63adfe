"""Static registry of property checks and the deterministic report runner.

Each check takes a seeded Generator and returns an Outcome. Records are
sorted by name and floats are rounded to 12 significant digits, so a fixed
seed gives byte-identical JSON. Wall-clock timings are only included on
request since they would break that guarantee.
"""
from __future__ import annotations

import json
import os
import time
import zlib
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable

import numpy as np

from . import appendix, constraint_search as cs, dmf, engel_dreizler as ed, fockspace as fs
from . import numerics as nm, phasespace as ps, thomasfermi as tf, tfw
from .errors import SolverError

SCHEMA = 1
RIGOROUS_TF_BOUND = -1.46  # E_TF(Z) ≥ -1.46 Z^{7/3}
# proven kinetic Lieb-Thirring constant as a fraction of the semiclassical one;
# conservative, override via DFTATOMS_LT_RATIO
LT_SAFE_RATIO = float(os.environ.get("DFTATOMS_LT_RATIO", "0.5"))


@dataclass(frozen=True)
class Outcome:
    measured: float
    expected: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    fn: Callable[[np.random.Generator], Outcome]
    observational: bool = False
    criteria: tuple = ()


REGISTRY: list[Check] = []


def check(name: str, anchor: str, observational: bool = False, criteria: tuple = ()):
    def wrap(fn):
        REGISTRY.append(Check(name, anchor, fn, observational, criteria))
        return fn
    return wrap


def _le(measured, bound, tol) -> Outcome:
    return Outcome(float(measured), float(bound), float(tol), bool(measured <= bound + tol))


def _ge(measured, bound, tol) -> Outcome:
    return Outcome(float(measured), float(bound), float(tol), bool(measured >= bound - tol))


# --- shared solves (deterministic, cached per process) ----------------------

@lru_cache(maxsize=None)
def _grid():
    return nm.default_grid()


@lru_cache(maxsize=None)
def _tf(Z: float) -> tf.TfSolution:
    return tf.solve_tf_neutral(Z, _grid())


@lru_cache(maxsize=None)
def _tfw(Z: float, N: float, lam: float) -> tfw.TfwSolution:
    return tfw.minimize_tfw(Z, N, lam, _grid(), tol=1e-8)


@lru_cache(maxsize=None)
def _critical(Z: float, lam: float) -> tuple[float, float]:
    return tfw.critical_charge(Z, lam, _grid())


def bundled_cases() -> list[tuple[dmf.TwoBodyProblem, int]]:
    out = []
    for p in dmf.bundled_problems():
        if p.name.startswith("s-channel-Z"):
            N = int(round(float(p.name.split("Z")[1].split("-")[0])))
        else:
            N = p.M // 2
        out.append((p, N))
    return out


@lru_cache(maxsize=None)
def _dmf_minima():
    rows = []
    for p, N in bundled_cases():
        g_hf, e_hf = dmf.minimize_dmf(p, N, "hf", seed=0)
        g_mu, e_mu = dmf.minimize_dmf(p, N, "mueller", seed=0)
        rows.append((p, N, g_hf, e_hf, g_mu, e_mu, dmf.fci_energy(p, N)))
    return rows


def _random_signed(grid: nm.RadialGrid, rng) -> nm.ChargeDistribution:
    r = grid.nodes
    v = np.zeros_like(r)
    for _ in range(rng.integers(1, 5)):
        a = rng.uniform(0.3, 5.0)
        c = rng.uniform(0.0, 4.0)
        v += rng.normal() * np.exp(-a * (r - c) ** 2)
    return nm.ChargeDistribution(grid, v)


# --- numerics ----------------------------------------------------------------

@check("numerics.integrate_linear", "linearity of radial quadrature")
def _(rng):
    g = _grid()
    worst = 0.0
    for _ in range(20):
        a, b = rng.normal(size=g.size), rng.normal(size=g.size)
        s, t = rng.normal(size=2)
        lhs = nm.integrate_radial(g, s * a + t * b)
        rhs = s * nm.integrate_radial(g, a) + t * nm.integrate_radial(g, b)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return _le(worst, 0.0, 1e-13)


@check("numerics.onsager_positive", "positivity of the Coulomb self-energy")
def _(rng):
    g = _grid()
    low = min(nm.coulomb_inner(d, d) for d in (_random_signed(g, rng) for _ in range(100)))
    return Outcome(low, 0.0, 0.0, low > 0)


@check("numerics.newton_theorem", "potential outside a spherical charge")
def _(rng):
    g = _grid()
    r = g.nodes
    R = 3.0
    v = np.where(r < R, (R - r) ** 2 * (1 + rng.random() * r), 0.0)
    rho = nm.RadialDensity(g, v)
    V = nm.hartree_potential(rho)
    out = r > R * 1.01
    err = np.max(np.abs(V[out] - rho.mass / r[out]) / (rho.mass / r[out]))
    return _le(err, 0.0, 1e-10)


def _bathtub_exhaustive(levels, measures, cap, total):
    n = len(levels)
    best = np.inf
    for k in range(n + 1):
        for full in combinations(range(n), k):
            base = cap * sum(measures[i] for i in full)
            e_full = cap * sum(levels[i] * measures[i] for i in full)
            if abs(base - total) < 1e-12:
                best = min(best, e_full)
            for j in set(range(n)) - set(full):
                rest = total - base
                if 0 <= rest <= cap * measures[j]:
                    best = min(best, e_full + levels[j] * rest)
    return best


@check("numerics.bathtub_exhaustive", "bathtub principle on small instances")
def _(rng):
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 7))
        levels = rng.integers(-5, 6, n) / 2.0
        measures = rng.integers(1, 5, n) / 4.0
        cap = float(rng.integers(1, 3))
        total = float(rng.integers(0, int(4 * cap * measures.sum()) + 1)) / 4.0
        occ, _ = nm.bathtub_fill(levels, measures, cap, total)
        got = float(np.sum(levels * measures * occ))
        worst = max(worst, abs(got - _bathtub_exhaustive(levels, measures, cap, total)))
    return _le(worst, 0.0, 1e-12)


# --- Fock space --------------------------------------------------------------

def _random_spec(M: int, rng) -> fs.ManyBodyOperatorSpec:
    h = rng.normal(size=(M, M))
    h = 0.5 * (h + h.T)
    A = rng.normal(size=(M, M, M, M))
    W = A + A.transpose(1, 0, 3, 2)
    W = W + W.transpose(2, 3, 0, 1)
    return fs.ManyBodyOperatorSpec(h, 0.1 * W)


@check("fock.car", "canonical anticommutation relations", criteria=(7,))
def _(rng):
    worst = 0.0
    for M in range(1, 7):
        a = [fs.annihilation_matrix(M, k) for k in range(M)]
        c = [fs.creation_matrix(M, k) for k in range(M)]
        eye = np.eye(1 << M)
        for m in range(M):
            for n in range(M):
                for X in ((a[m] @ a[n] + a[n] @ a[m]).toarray(),
                          (c[m] @ c[n] + c[n] @ c[m]).toarray(),
                          (c[m] @ a[n] + a[n] @ c[m]).toarray() - (m == n) * eye):
                    worst = max(worst, np.abs(X).max())
    return _le(worst, 0.0, 1e-12)


@check("fock.number_conservation", "Hamiltonian commutes with particle number")
def _(rng):
    M = 6
    H = fs.assemble_hamiltonian(_random_spec(M, rng))
    Nop = fs.number_operator(M)
    return _le(np.abs((H @ Nop - Nop @ H).toarray()).max(), 0.0, 1e-12)


def _slater_state(M: int, U: np.ndarray) -> fs.FockVector:
    """b*_1 ... b*_N |0> with b*_k = Σ_m U_mk a*_m."""
    psi = fs.vacuum(M).amplitudes.astype(float)
    creators = [fs.creation_matrix(M, m) for m in range(M)]
    for k in reversed(range(U.shape[1])):
        psi = sum(U[m, k] * (creators[m] @ psi) for m in range(M))
    return fs.FockVector(M, psi)


@check("fock.slater_hf_bridge", "Slater determinant energy equals the HF energy of its projection")
def _(rng):
    M, N = 6, 3
    spec = _random_spec(M, rng)
    H = fs.assemble_hamiltonian(spec)
    prob = dmf.TwoBodyProblem(spec.h, spec.W)
    worst = 0.0
    for _ in range(5):
        Q, _ = np.linalg.qr(rng.normal(size=(M, M)))
        psi = _slater_state(M, Q[:, :N])
        e = float(psi.amplitudes @ (H @ psi.amplitudes))
        gamma = Q[:, :N] @ Q[:, :N].T
        worst = max(worst, abs(e - dmf.hf_energy(gamma, prob)))
    return _le(worst, 0.0, 1e-10)


@check("fock.rdm_bounds", "one-particle density matrix has spectrum in [0, 1] and trace N", criteria=(7,))
def _(rng):
    M = 6
    worst = 0.0
    for N in range(M + 1):
        idx = fs.sector_indices(M, N)
        amp = np.zeros(1 << M)
        amp[idx] = rng.normal(size=idx.size)
        amp /= np.linalg.norm(amp)
        g = fs.reduced_density_matrix(fs.FockVector(M, amp), 1)
        lam = np.linalg.eigvalsh(g)
        worst = max(worst, -lam.min(), lam.max() - 1, abs(np.trace(g) - N))
    return _le(worst, 0.0, 1e-12)


# --- Thomas-Fermi ------------------------------------------------------------

@check("tf.energy_z1", "neutral atom energy E_TF(1) = -0.7687", criteria=(1,))
def _(rng):
    e = _tf(1.0).energy
    return Outcome(e, tf.E_TF_ONE, 1e-3, abs(e - tf.E_TF_ONE) <= 1e-3)


@check("tf.scaling", "E_TF(Z) = E_TF(1) Z^{7/3}", criteria=(2,))
def _(rng):
    e1 = _tf(1.0).energy
    dev = max(abs(_tf(Z).energy / Z ** (7 / 3) - e1) for Z in (10.0, 100.0))
    return _le(dev, 0.0, 1e-3)


@check("tf.minimizer_properties", "neutrality, positive potential, monotone convex density", criteria=(3,))
def _(rng):
    worst = 0.0
    ok = True
    for Z in (1.0, 10.0, 100.0):
        s = _tf(Z)
        shape = tf.check_minimizer_shape(s)
        ok &= shape["phi_nonnegative"] and shape["nonincreasing"] and shape["convex"]
        worst = max(worst, abs(s.mass - Z) / Z)
    return Outcome(worst, 0.0, 1e-4, bool(ok and worst <= 1e-4))


@check("tf.strict_convexity", "midpoint convexity of the TF functional")
def _(rng):
    g = _grid()
    low = np.inf
    for _ in range(20):
        Z = float(rng.choice([1.0, 4.0]))
        a, b = tf.random_trial_density(g, Z, rng), tf.random_trial_density(g, Z, rng)
        mid = nm.RadialDensity(g, 0.5 * (a.values + b.values))
        margin = 0.5 * (tf.tf_energy(a, Z) + tf.tf_energy(b, Z)) - tf.tf_energy(mid, Z)
        low = min(low, margin)
    return _ge(low, 0.0, 1e-12)


@check("tf.uniqueness", "shooting from different brackets gives one minimiser")
def _(rng):
    g = _grid()
    a = _tf(1.0)
    b = tf.solve_tf_neutral(1.0, g, bracket=(-4.0, -0.5))
    mask = a.rho.values > 1e-12 * a.rho.values.max()
    dev = np.max(np.abs(a.rho.values[mask] - b.rho.values[mask]) / a.rho.values[mask])
    return _le(dev, 0.0, 1e-6)


@check("tf.lower_bound", "E_TF(Z) ≥ -1.46 Z^{7/3} on random densities", criteria=(4,))
def _(rng):
    g = _grid()
    low = min(tf.tf_energy(tf.random_trial_density(g, Z, rng), Z) / Z ** (7 / 3)
              for Z in (1.0, 4.0, 16.0) for _ in range(200))
    return _ge(low, RIGOROUS_TF_BOUND, 0.0)


@lru_cache(maxsize=None)
def _lt_ratios() -> tuple[float, ...]:
    g = _grid()
    r = g.nodes
    ratios = []
    for Z, per_spin in ((1.0, 1), (2.0, 2), (3.0, 3)):
        v = r**2 * np.exp(-2 * Z * r)
        v *= 2 * per_spin / (g.weights @ v)
        ch = tfw.ChannelDensities(g, v[None, :])
        occ = {(0, 0, 1): per_spin, (0, 0, 2): per_spin}
        orbs = cs.radial_macke(ch, occ, cs.radial_optimal_phases(ch, occ))
        kin = cs.radial_kinetic(orbs, g)[0]
        ratios.append(tf.lieb_thirring_ratio(kin, v / (nm.FOUR_PI * r**2), g))
    return tuple(ratios)


@check("tf.lieb_thirring_ratio", "kinetic energy against the semiclassical constant", observational=True)
def _(rng):
    low = min(_lt_ratios())
    return Outcome(low, 1.0, 0.0, low >= 1.0)


@check("tf.lieb_thirring_bound", "kinetic inequality with a proven constant")
def _(rng):
    return _ge(min(_lt_ratios()), LT_SAFE_RATIO, 0.0)


# --- TFW -----------------------------------------------------------------------

@check("tfw.energy_monotone", "energy decreases along the descent")
def _(rng):
    worst = 0.0
    for key in ((1.0, 1.0, 0.2), (5.0, 5.0, 0.2)):
        h = np.array(_tfw(*key).history)
        worst = max(worst, float(np.max(np.diff(h) / np.maximum(1.0, np.abs(h[1:])), initial=-np.inf)))
    return _le(worst, 0.0, 1e-12)


@check("tfw.weizsacker_convexity", "midpoint convexity of the gradient term")
def _(rng):
    g = _grid()
    low = np.inf
    for _ in range(100):
        a, b = tf.random_trial_density(g, 1.0, rng), tf.random_trial_density(g, 1.0, rng)
        mid = nm.RadialDensity(g, 0.5 * (a.values + b.values))
        low = min(low, 0.5 * (tfw.weizsacker_energy(a) + tfw.weizsacker_energy(b)) - tfw.weizsacker_energy(mid))
    return _ge(low, 0.0, 1e-12)


@check("tfw.negative_ions", "TFW binds more than Z electrons")
def _(rng):
    lows = [_critical(Z, 0.2)[0] - Z for Z in (1.0, 2.0)]
    return Outcome(min(lows), 0.0, 0.0, min(lows) > 0)


@check("tfw.critical_bracket", "N_c ≤ Z + 270.74 (λ/2γ)^{3/2} at Z = 1, λ = 0.2", criteria=(5,))
def _(rng):
    lo, hi = _critical(1.0, 0.2)
    bound = 1 + tfw.EXCESS_CHARGE_CONSTANT * (0.2 / (2 * tf.GAMMA_TF)) ** 1.5
    return Outcome(hi, bound, 0.0, bool(1 < lo <= hi <= min(bound, 1.82)))


@check("tfw.benguria_bound", "every converged minimiser has mass below 2Z", criteria=(5,))
def _(rng):
    worst = -np.inf
    for Z in (1.0, 5.0):
        lo, hi = _critical(Z, 0.2)
        worst = max(worst, hi / (2 * Z))
        for N in (Z, 0.5 * (Z + lo)):
            s = _tfw(Z, N, 0.2)
            if s.euler_residual < 1e-8 * Z**2:
                worst = max(worst, s.mass / (2 * Z))
    return Outcome(worst, 1.0, 0.0, worst < 1.0)


@check("tfw.first_order_optimality", "converged residual small and no descent direction")
def _(rng):
    Z, N, lam = 1.0, 1.0, 0.2
    s = _tfw(Z, N, lam)
    disc = tfw.TfwDiscretization(_grid(), Z, lam)
    E0 = disc.energy(s.psi)
    r = _grid().nodes
    worst = 0.0
    for _ in range(10):
        eta = sum(rng.normal() * np.exp(-rng.uniform(0.2, 3) * r) * r ** rng.integers(0, 3) for _ in range(3))
        p = np.abs(s.psi + 1e-4 * eta * s.psi.max())
        p *= np.sqrt(N / (disc.m @ p**2))
        worst = max(worst, E0 - disc.energy(p))
    ok = s.euler_residual < 1e-8 and worst <= 1e-10
    return Outcome(worst, 0.0, 1e-10, bool(ok))


# --- Macke orbitals ----------------------------------------------------------

def _random_line_density(x, N, rng):
    v = np.zeros_like(x)
    for _ in range(rng.integers(1, 4)):
        v += rng.uniform(0.2, 1.0) * np.exp(-((x - rng.uniform(-2, 2)) ** 2) / (2 * rng.uniform(0.5, 1.5) ** 2))
    return v * N / (nm.uniform_weights(x.size, x[1] - x[0]) @ v)


def _macke_sets(rng):
    x = np.linspace(-12, 12, 2401)
    rho1 = _random_line_density(x, 3, rng)
    yield "line", cs.macke_orbitals_1d(x, rho1, rng.random()), rho1
    ax = np.linspace(-8, 8, 241)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    rho2 = 4 * np.exp(-(X**2 + (Y - 0.3 * X) ** 2) / 2) / (2 * np.pi)
    yield "plane", cs.macke_orbitals_dd((ax, ax), rho2, [(0, 0), (1, 0), (0, 1), (1, 1)], rng.random(2)), rho2
    g = _grid()
    r = g.nodes
    v = np.array([r**2 * np.exp(-2 * r), r**4 * np.exp(-r)])
    v *= np.array([[2.0], [6.0]]) / (v @ g.weights)[:, None]
    occ = {(0, 0, 1): 1, (0, 0, 2): 1}
    occ.update({(1, m, s): 1 for m in (-1, 0, 1) for s in (1, 2)})
    yield "radial", cs.radial_macke(tfw.ChannelDensities(g, v), occ, {0: rng.random(), 1: rng.random()}), v


@check("macke.gram", "Macke orbitals are orthonormal", criteria=(6,))
def _(rng):
    worst = max(np.abs(o.gram() - np.eye(o.count)).max() for _, o, _ in _macke_sets(rng))
    return _le(worst, 0.0, 1e-10)


@check("macke.density_reproduction", "Macke orbitals reproduce the density", criteria=(6,))
def _(rng):
    worst = 0.0
    for kind, o, ref in _macke_sets(rng):
        if kind == "radial":
            got = cs.radial_channel_densities(o, ref.shape[0] - 1)
        else:
            got = o.density()
        worst = max(worst, np.abs(got - ref).max() / np.abs(ref).max())
    return _le(worst, 0.0, 1e-10)


@check("macke.kinetic_identity", "1D Slater kinetic energy at the optimal phase", criteria=(6,))
def _(rng):
    x = np.linspace(-12, 12, 4001)
    worst = 0.0
    for k in range(20):
        N = (1, 2, 3, 5)[k % 4]
        rho = _random_line_density(x, N, rng)
        _, direct = cs.macke_kinetic_at_optimum(x, rho)
        bound = cs.kinetic_upper_bound_1d(x, rho)
        worst = max(worst, abs(direct - bound))
    return _le(worst, 0.0, 1e-6)


@check("macke.plane_kinetic_excess", "d-dimensional Macke kinetic energy beyond the gradient term",
       observational=True)
def _(rng):
    ax = np.linspace(-8, 8, 241)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    rho = 4 * np.exp(-(X**2 + Y**2) / 2) / (2 * np.pi)
    o = cs.macke_orbitals_dd((ax, ax), rho, [(0, 0), (1, 0), (0, 1), (1, 1)], [0.5, 0.5])
    excess = cs.slater_kinetic(o) - cs.weizsacker_dd((ax, ax), rho)
    return Outcome(excess, 0.0, 0.0, excess >= 0)


# --- density-matrix functionals ------------------------------------------------

@check("dmf.exchange_le_direct", "exchange bounded by direct energy", criteria=(8,))
def _(rng):
    worst = -np.inf
    for p, N in bundled_cases():
        if not p.psd_flag:
            continue
        for _ in range(1000):
            g = dmf.random_density_matrix(p.M, rng.uniform(0.5, p.M - 0.5), rng).matrix
            D = dmf.direct_energy(g, p)
            worst = max(worst, dmf.exchange_energy(g, p) - D)
    return _le(worst, 0.0, 1e-10)


@check("dmf.hf_projection", "HF minimisers are projections; interior occupations can be lowered",
       criteria=(8,))
def _(rng):
    worst = 0.0
    descent_ok = True
    for p, N, g_hf, *_ in _dmf_minima():
        lam = g_hf.occupations
        worst = max(worst, float(np.max(np.minimum(lam, 1 - lam))))
        mid = dmf._descend(p, N, "hf", dmf.random_density_matrix(p.M, N, rng), 1e-12, 3).gamma
        nu, U = mid.occupations, mid.natural_orbitals
        inner = np.nonzero((nu > 1e-6) & (nu < 1 - 1e-6))[0]
        if inner.size >= 2:
            i, j = inner[:2]
            delta = np.outer(U[:, i], U[:, i].conj()) - np.outer(U[:, j], U[:, j].conj())
            eps = np.linspace(-min(nu[i], 1 - nu[j]), min(1 - nu[i], nu[j]), 21)
            E = [dmf.hf_energy(mid.matrix + e * delta, p) for e in eps]
            descent_ok &= min(E[0], E[-1]) <= dmf.hf_energy(mid.matrix, p) + 1e-12
    return Outcome(worst, 0.0, 1e-6, bool(worst <= 1e-6 and descent_ok))


@check("dmf.hf_above_fci", "HF minimum bounds the FCI energy from above", criteria=(8,))
def _(rng):
    slack = min(e_hf - e_fci for _, _, _, e_hf, _, _, e_fci in _dmf_minima())
    return _ge(slack, 0.0, 1e-9)


@check("dmf.muller_le_hf", "Müller below HF at equal γ, equal on projections", criteria=(8,))
def _(rng):
    worst_gap = -np.inf
    worst_eq = 0.0
    for p, N in bundled_cases():
        for _ in range(50):
            g = dmf.random_density_matrix(p.M, N, rng)
            worst_gap = max(worst_gap, dmf.muller_energy(g, p) - dmf.hf_energy(g, p))
            P = dmf.random_density_matrix(p.M, N, rng, projection=True)
            worst_eq = max(worst_eq, abs(dmf.muller_energy(P, p) - dmf.hf_energy(P, p)))
    ok = worst_gap <= 1e-10 and worst_eq <= 1e-10
    return Outcome(max(worst_gap, worst_eq), 0.0, 1e-10, bool(ok))


@check("dmf.rdm_bridge", "FCI one-particle density matrix is HF-feasible")
def _(rng):
    low = np.inf
    for p, N in bundled_cases():
        e, psi = fs.ground_state(fs.assemble_hamiltonian(p.spec()), N)
        g = dmf.DensityMatrix(fs.reduced_density_matrix(psi, 1))
        low = min(low, dmf.hf_energy(g, p) - e)
    return _ge(low, 0.0, 1e-9)


@check("dmf.muller_below_fci", "Müller minimum against the FCI energy", observational=True)
def _(rng):
    gap = min(e_fci - e_mu for *_, e_mu, e_fci in _dmf_minima())
    return Outcome(gap, 0.0, 0.0, gap >= 0)


# --- Engel-Dreizler ------------------------------------------------------------

@check("ed.kernel_signs", "f2 and ttf nonnegative; reports min x")
def _(rng):
    t = np.linspace(0.0, 1e3, 200001)
    f2, ttf, x = ed.ed_kernels(t)
    low = min(f2.min(), ttf.min())
    return Outcome(float(x.min()), 0.0, 0.0, bool(low >= 0))


@check("ed.series_coefficients", "small-t kernel coefficients 4/5 and 2", criteria=(10,))
def _(rng):
    _, ttf, x = ed.ed_kernels(1e-3)
    dev = max(abs(ttf / 1e-15 - 0.8) / 0.8, abs(x / 1e-12 - 2) / 2)
    return _le(dev, 0.0, 1e-5)


def _gaussian(Z=2.0):
    g = _grid()
    r = g.nodes
    return nm.RadialDensity(g, Z * np.exp(-(r**2)) / np.pi**1.5)


@check("ed.nonrelativistic_limit", "c → ∞ gives TF kinetic and Dirac exchange", criteria=(10,))
def _(rng):
    rho = _gaussian()
    e = ed.ed_energy_terms(rho, ed.EdParams(2.0, 0.2, 1e6))
    ref = ed.nonrelativistic_terms(rho)
    dev = max(abs(e["kinetic"] / ref["kinetic"] - 1), abs(e["exchange"] / ref["exchange"] - 1))
    return _le(dev, 0.0, 1e-4)


@check("ed.weizsacker_limit", "gradient term tends to the Weizsäcker term")
def _(rng):
    rho = _gaussian()
    ratios = [ed.ed_energy_terms(rho, ed.EdParams(2.0, 0.2, c))["weizsacker"] / tfw.weizsacker_energy(rho, 0.2)
              for c in (1e4, 1e5, 1e6)]
    return _le(abs(ratios[-1] - ratios[-2]) / ratios[-1], 0.0, 1e-2)


@check("ed.monotone_in_z", "energy increases as Z decreases")
def _(rng):
    rho = _gaussian()
    E = [ed.ed_energy(rho, ed.EdParams(Z)) for Z in (4.0, 3.0, 2.0, 1.0)]
    step = float(np.min(np.diff(E)))
    return Outcome(step, 0.0, 0.0, step > 0)


@check("ed.boundedness_scan", "scaling scan minimum at Z = 50", observational=True)
def _(rng):
    # exponential profile: the TF profile's cusp makes the gradient term diverge
    g = _grid()
    rho = nm.RadialDensity(g, 50.0 * np.exp(-2 * g.nodes) / np.pi)
    s = ed.scaling_scan(rho, ed.EdParams(50.0), np.logspace(0, 4, 33))
    return Outcome(s["min_energy"], 0.0, 0.0, bool(np.isfinite(s["min_energy"])))


# --- phase space -------------------------------------------------------------

@lru_cache(maxsize=None)
def _reductions(Z: float):
    return ps.reduce_position(Z, tf=_tf(Z)), ps.reduce_momentum(Z, tf=_tf(Z))


@check("phase.bounds", "phase-space densities stay in [0, q]")
def _(rng):
    worst = 0.0
    for Z in (1.0, 10.0):
        for res in _reductions(Z):
            v = res.f.values
            worst = max(worst, -v.min(), v.max() - res.f.q)
    return _le(worst, 0.0, 0.0)


@check("phase.marginal", "position marginal of the momentum filling equals ρ")
def _(rng):
    worst = 0.0
    for Z in (1.0, 10.0):
        pos, _ = _reductions(Z)
        rho = _tf(Z).rho.values
        worst = max(worst, np.abs(pos.f.rho - rho).max() / rho.max())
    return _le(worst, 0.0, 1e-10)


@check("phase.ordering", "phase-space energy dominates the TF energy of its marginal")
def _(rng):
    g = _grid()
    pg = ps.momentum_grid(50.0, 400)
    r = g.nodes
    low = np.inf
    for _ in range(100):
        R = rng.uniform(0.3, 3.0) * np.exp(-rng.uniform(0.1, 1.0) * r)
        f = rng.uniform(0.0, 2.0) * pg.ball_fraction(R) * rng.uniform(0.2, 1.0, size=(1, pg.size))
        f = ps.PhaseSpaceDensity(g, pg, f)
        Z = float(rng.uniform(0.5, 4.0))
        low = min(low, ps.phase_energy(f, Z) - tf.tf_energy(nm.RadialDensity(g, f.rho), Z))
    return _ge(low, 0.0, 1e-8)


@check("phase.position_reduction", "Fermi-ball filling of the TF minimiser gives E_TF", criteria=(9,))
def _(rng):
    gap = max(_reductions(Z)[0].relative_gap for Z in (1.0, 10.0))
    return _le(gap, 0.0, 0.02)


@check("phase.englert_reduction", "momentum functional on the TF momentum marginal gives E_TF(1)",
       criteria=(9,))
def _(rng):
    e = _reductions(1.0)[1].energy
    gap = abs(e - tf.E_TF_ONE) / abs(tf.E_TF_ONE)
    return Outcome(e, tf.E_TF_ONE, 0.02 * abs(tf.E_TF_ONE), gap <= 0.02)


@check("phase.cross_reduction", "position and momentum reductions agree")
def _(rng):
    gap = max(abs(a.energy - b.energy) / abs(a.tf_energy) for a, b in map(_reductions, (1.0, 10.0)))
    return _le(gap, 0.0, 0.02)


# --- power-law lemmas ----------------------------------------------------------

@check("appendix.eigenrelation", "M(|x|^-α)|x|^α is constant", criteria=(11,))
def _(rng):
    worst = 0.0
    for al in (0.5, 1.0, 1.5):
        q = appendix.MaximalFunctionQuery(al, 3)
        v = np.array([appendix.maximal_function_power(q, x) * x**al for x in (0.1, 1.0, 10.0)])
        worst = max(worst, (v.max() - v.min()) / v.mean())
    return _le(worst, 0.0, 1e-3)


@check("appendix.scaling_law", "I(γ, Z) = Z^{13/9} γ^{-1/3} I(1, 1)", criteria=(11,))
def _(rng):
    base = appendix.scaled_infimum(1.0, 1.0)
    worst = 0.0
    for _ in range(6):
        gam, Z = rng.uniform(0.2, 5.0), rng.uniform(0.5, 50.0)
        worst = max(worst, abs(appendix.scaled_infimum(gam, Z) / (Z ** (13 / 9) / gam ** (1 / 3) * base) - 1))
    return _le(worst, 0.0, 1e-3)


@check("appendix.monotone", "infimum nonincreasing in C, nondecreasing in γ")
def _(rng):
    inC = np.diff([appendix.scaled_infimum(1.0, 1.0, C) for C in (0.0, 0.5, 1.0, 2.0)])
    inG = np.diff([appendix.scaled_infimum(g, 1.0, 1.0) for g in (0.5, 1.0, 2.0, 4.0)])
    worst = max(float(inC.max()), float(-inG.min()))
    return _le(worst, 0.0, 0.0)


# --- runner -------------------------------------------------------------------

def _round(x):
    if x is None:
        return None
    x = float(x)
    if not np.isfinite(x):
        return None
    return float(f"{x:.12g}")


def select(suite: str = "all") -> list[Check]:
    if suite == "all":
        return sorted(REGISTRY, key=lambda c: c.name)
    if suite == "acceptance":
        return sorted((c for c in REGISTRY if c.criteria), key=lambda c: c.name)
    chosen = [c for c in REGISTRY if c.name.split(".")[0] == suite or c.name == suite]
    if not chosen:
        raise KeyError(suite)
    return sorted(chosen, key=lambda c: c.name)


def run_check(c: Check, seed: int, timings: bool = False) -> dict:
    rng = np.random.default_rng([seed, zlib.crc32(c.name.encode())])
    t0 = time.perf_counter()
    try:
        out = c.fn(rng)
        status = "observational" if c.observational else ("pass" if out.passed else "fail")
        rec = {"measured": _round(out.measured), "expected": _round(out.expected),
               "tolerance": _round(out.tolerance)}
    except (SolverError, ArithmeticError, ValueError) as exc:
        status = "observational" if c.observational else "fail"
        rec = {"measured": None, "expected": None, "tolerance": None, "error": str(exc)}
    ms = (time.perf_counter() - t0) * 1e3
    return {"name": c.name, "paper_anchor": c.anchor, "status": status, **rec,
            "runtime_ms": _round(ms) if timings else 0}


def run_suite(suite: str = "all", seed: int = 0, timings: bool = False) -> dict:
    records = [run_check(c, seed, timings) for c in select(suite)]
    summary = {s: sum(r["status"] == s for r in records) for s in ("pass", "fail", "observational")}
    return {"schema": SCHEMA, "suite": suite, "seed": seed, "summary": summary, "records": records}


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"
