"""Hartree-Fock and Müller density-matrix functionals in a finite orbital basis.

Conventions match fockspace: γ_mn = <a*_n a_m>, W_mnpq = <mn|W|pq>,
J(γ)_mn = Σ W_mpnq γ_qp and K(γ)_mn = Σ W_mpqn γ_qp.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ContractError, SolverError
from .fockspace import ManyBodyOperatorSpec
from .numerics import (ChargeDistribution, RadialGrid, capped_simplex_projection,
                       default_grid, hartree_potential)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian γ with spectrum in [0, 1] (clamped within 1e-10)."""

    matrix: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.matrix)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ContractError("density matrix must be square")
        scale = max(1.0, np.abs(g).max(initial=0.0))
        if np.abs(g - g.conj().T).max(initial=0.0) > 1e-12 * scale:
            raise ContractError("density matrix is not Hermitian")
        g = 0.5 * (g + g.conj().T)
        object.__setattr__(self, "matrix", g)
        lam = self._eig[0]
        if lam.size and (lam.min() < -1e-10 or lam.max() > 1 + 1e-10):
            raise ContractError(f"occupations outside [0, 1]: [{lam.min()}, {lam.max()}]")

    @cached_property
    def _eig(self):
        return np.linalg.eigh(self.matrix)

    @property
    def occupations(self) -> np.ndarray:
        return np.clip(self._eig[0], 0.0, 1.0)

    @property
    def natural_orbitals(self) -> np.ndarray:
        return self._eig[1]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def power(self, p: float) -> np.ndarray:
        U = self.natural_orbitals
        lam = self.occupations
        # roundoff-level occupations would otherwise leak into fractional powers
        lam = np.where(lam < 1e-13, 0.0, lam)
        return (U * lam**p) @ U.conj().T

    def is_projection(self, tol: float = 1e-6) -> bool:
        lam = self.occupations
        return bool(np.all(np.minimum(lam, 1 - lam) < tol))

    @classmethod
    def from_occupations(cls, U: np.ndarray, lam: np.ndarray) -> "DensityMatrix":
        return cls((U * lam) @ U.conj().T)


@dataclass(frozen=True, eq=False)
class TwoBodyProblem:
    """One-body matrix h and pair tensor W defining HF, Müller and FCI energies.

    psd_flag marks tensors obtained by projecting a real-space kernel that is
    pointwise nonnegative and positive semidefinite onto orthonormal orbitals.
    """

    h: np.ndarray
    W: np.ndarray
    psd_flag: bool = False
    name: str = "problem"

    def __post_init__(self):
        ManyBodyOperatorSpec(self.h, self.W)  # validates symmetries and size

    @property
    def M(self) -> int:
        return self.h.shape[0]

    def J(self, g: np.ndarray) -> np.ndarray:
        return np.einsum("mpnq,qp->mn", self.W, g)

    def K(self, g: np.ndarray) -> np.ndarray:
        return np.einsum("mpqn,qp->mn", self.W, g)

    def spec(self) -> ManyBodyOperatorSpec:
        return ManyBodyOperatorSpec(self.h, self.W)

    def to_dict(self) -> dict:
        d = self.spec().to_dict()
        d["psd"] = self.psd_flag
        d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TwoBodyProblem":
        s = ManyBodyOperatorSpec.from_dict(d)
        return cls(s.h, s.W, bool(d.get("psd", False)), d.get("name", "problem"))

    @classmethod
    def load(cls, path: str) -> "TwoBodyProblem":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _mat(gamma) -> np.ndarray:
    return gamma.matrix if isinstance(gamma, DensityMatrix) else np.asarray(gamma)


def _check_dims(g: np.ndarray, prob: TwoBodyProblem) -> None:
    if g.shape != (prob.M, prob.M):
        raise ContractError(f"γ has shape {g.shape}, problem has M={prob.M}")


def direct_energy(gamma, prob: TwoBodyProblem) -> float:
    g = _mat(gamma)
    return 0.5 * float(np.real(np.trace(g @ prob.J(g))))


def exchange_energy(gamma, prob: TwoBodyProblem) -> float:
    g = _mat(gamma)
    return 0.5 * float(np.real(np.trace(g @ prob.K(g))))


def hf_energy(gamma, prob: TwoBodyProblem) -> float:
    """tr(hγ) + ½tr(γJ(γ)) - ½tr(γK(γ))."""
    g = _mat(gamma)
    _check_dims(g, prob)
    return float(np.real(np.trace(prob.h @ g))) + direct_energy(g, prob) - exchange_energy(g, prob)


def muller_energy(gamma, prob: TwoBodyProblem) -> float:
    """tr(hγ) + ½tr(γJ(γ)) - ½tr(γ^½ K(γ^½))."""
    if not isinstance(gamma, DensityMatrix):
        gamma = DensityMatrix(gamma)
    _check_dims(gamma.matrix, prob)
    g = gamma.matrix
    root = gamma.power(0.5)
    return (float(np.real(np.trace(prob.h @ g))) + direct_energy(g, prob)
            - exchange_energy(root, prob))


def fock_operator(gamma, prob: TwoBodyProblem) -> np.ndarray:
    """h + J(γ) - K(γ), the gradient of hf_energy."""
    g = _mat(gamma)
    _check_dims(g, prob)
    F = prob.h + prob.J(g) - prob.K(g)
    return 0.5 * (F + F.conj().T)


def _loewner(lam: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    # divided differences of sqrt; diagonal/degenerate entries use ½λ^{-1/2}
    lam = np.maximum(lam, 0.0)
    s = np.sqrt(lam)
    num = s[:, None] - s[None, :]
    den = lam[:, None] - lam[None, :]
    deriv = 0.5 / np.sqrt(np.maximum(0.5 * (lam[:, None] + lam[None, :]), floor))
    close = np.abs(den) < 1e-10
    L = np.where(close, deriv, num / np.where(close, 1.0, den))
    return L


def muller_gradient(gamma: DensityMatrix, prob: TwoBodyProblem) -> np.ndarray:
    g = gamma.matrix
    U, lam = gamma.natural_orbitals, gamma.occupations
    root = gamma.power(0.5)
    Kr = U.conj().T @ prob.K(root) @ U
    dX = U @ (_loewner(lam) * Kr) @ U.conj().T
    G = prob.h + prob.J(g) - dX
    return 0.5 * (G + G.conj().T)


_FUNCTIONALS = {
    "hf": (hf_energy, lambda gm, p: fock_operator(gm, p)),
    "mueller": (muller_energy, muller_gradient),
}


def _project(A: np.ndarray, N: float) -> DensityMatrix:
    lam, U = np.linalg.eigh(0.5 * (A + A.conj().T))
    return DensityMatrix.from_occupations(U, capped_simplex_projection(lam, N))


@dataclass
class DmfResult:
    gamma: DensityMatrix
    energy: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def _project_root(A: np.ndarray, N: float) -> np.ndarray:
    # nearest B = B* with spectrum in [0, 1] and tr B² = N: b = clip(ν/(1+θ), 0, 1)
    nu, U = np.linalg.eigh(0.5 * (A + A.conj().T))

    def mass(theta):
        return np.sum(np.clip(nu / (1 + theta), 0.0, 1.0) ** 2)

    lo, hi = -1 + 1e-12, 1.0
    if mass(lo) < N:
        # too few positive directions: occupy the largest ones fully
        b = np.zeros_like(nu)
        order = np.argsort(nu)[::-1]
        full = int(np.floor(N + 1e-12))
        b[order[:full]] = 1.0
        if full < nu.size:
            b[order[full]] = np.sqrt(max(N - full, 0.0))
    else:
        while mass(hi) > N:
            hi *= 2
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if mass(mid) > N else (lo, mid)
        b = np.clip(nu / (1 + hi), 0.0, 1.0)
    return (U * b) @ U.conj().T


def _muller_root_energy(B: np.ndarray, prob: TwoBodyProblem) -> float:
    g = B @ B
    return (float(np.real(np.trace(prob.h @ g))) + direct_energy(g, prob) - exchange_energy(B, prob))


def _muller_root_gradient(B: np.ndarray, prob: TwoBodyProblem) -> np.ndarray:
    g = B @ B
    A = prob.h + prob.J(g)
    G = A @ B + B @ A - prob.K(B)
    return 0.5 * (G + G.conj().T)


def _descend(prob, N, functional, gamma, tol, max_iter):
    """Armijo projected gradient. HF works on γ; Müller works on B = γ^½,
    where the functional is smooth up to the boundary of the occupation box."""
    if functional == "hf":
        x = gamma.matrix
        energy = lambda m: hf_energy(m, prob)  # noqa: E731
        grad = lambda m: fock_operator(m, prob)  # noqa: E731
        project = lambda m: _project(m, N).matrix  # noqa: E731
    else:
        x = gamma.power(0.5)
        energy = lambda m: _muller_root_energy(m, prob)  # noqa: E731
        grad = lambda m: _muller_root_gradient(m, prob)  # noqa: E731
        project = lambda m: _project_root(m, N)  # noqa: E731
    E = energy(x)
    t = 1.0
    history = [E]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        G = grad(x)
        # the B-set is not convex, so the unit step can jump between branches;
        # a short step keeps the stationarity measure local
        s = min(1.0, 0.1 / max(np.linalg.norm(G, 2), 1e-300))
        pg = np.linalg.norm(x - project(x - s * G)) / s
        if pg < tol:
            converged = True
            break
        t = min(2 * t, 10.0)
        if it > 1:
            # Barzilai-Borwein trial step
            dx, dg = x - x_prev, G - G_prev
            curv = float(np.real(np.vdot(dx, dg)))
            if curv > 0:
                t = min(max(float(np.real(np.vdot(dx, dx))) / curv, 1e-10), 1e3)
        x_prev, G_prev = x, G
        while True:
            cand = project(x - t * G)
            Ec = energy(cand)
            d = cand - x
            if Ec <= E - 1e-4 * np.real(np.vdot(d, d)) / t or t < 1e-14:
                break
            t *= 0.5
        if t < 1e-14:
            # no representable decrease left: accept if the gradient is small
            converged = pg < max(10 * tol, 1e-6)
            break
        x, E = cand, Ec
        history.append(E)
        if len(history) > 50 and history[-51] - E <= 1e-14 * max(1.0, abs(E)):
            converged = pg < max(10 * tol, 1e-6)
            break
    g = x if functional == "hf" else x @ x
    return DmfResult(DensityMatrix(0.5 * (g + g.conj().T)), E, it, converged, history)


def random_density_matrix(M: int, N: float, rng: np.random.Generator, projection: bool = False) -> DensityMatrix:
    Q, _ = np.linalg.qr(rng.standard_normal((M, M)))
    if projection:
        lam = np.zeros(M)
        lam[: int(round(N))] = 1.0
    else:
        lam = capped_simplex_projection(rng.random(M) * 2 * N / M, N)
    return DensityMatrix.from_occupations(Q, lam)


def minimize_dmf(prob: TwoBodyProblem, N: int, functional: str = "hf", tol: float = 1e-9,
                 restarts: int = 5, seed: int = 0, max_iter: int = 20000) -> tuple[DensityMatrix, float]:
    """Projected-gradient minimisation over {0 ≤ γ ≤ 1, tr γ = N}.

    Each step moves along the negative gradient and projects the spectrum onto
    the capped simplex. The best of several random starts is returned.
    """
    if functional not in _FUNCTIONALS:
        raise ContractError(f"unknown functional {functional!r}")
    if not 0 <= N <= prob.M:
        raise ContractError(f"N={N} outside [0, {prob.M}]")
    rng = np.random.default_rng(seed)
    results = []
    for _ in range(max(1, restarts)):
        g0 = random_density_matrix(prob.M, N, rng)
        results.append(_descend(prob, N, functional, g0, tol, max_iter))
    ok = [r for r in results if r.converged]
    if not ok:
        best = min(results, key=lambda r: r.energy)
        raise SolverError("projected gradient did not converge", energies=best.history[-10:])
    best = min(ok, key=lambda r: r.energy)
    return best.gamma, best.energy


def fci_energy(prob: TwoBodyProblem, N: int) -> float:
    from .fockspace import assemble_hamiltonian, ground_state

    return ground_state(assemble_hamiltonian(prob.spec()), N)[0]


# --- bundled problems -------------------------------------------------------

def _lattice_tensor(phi: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # W_mnpq = Σ_ij φ_im φ_jn w_ij φ_ip φ_jq for orthonormal columns φ
    pair = np.einsum("im,ip->imp", phi, phi)
    return np.einsum("imp,ij,jnq->mnpq", pair, kernel, pair)


def random_problem(M: int, seed: int = 0, psd: bool = True) -> TwoBodyProblem:
    """Random instance; with psd=True the pair tensor comes from a positive,
    positive-definite kernel exp(-|x-y|) on a 1D lattice."""
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((M, M))
    h = 0.5 * (h + h.T)
    if psd:
        L = 3 * M
        x = np.sort(rng.uniform(0, L, L))
        kern = np.exp(-np.abs(x[:, None] - x[None, :]))
        phi, _ = np.linalg.qr(rng.standard_normal((L, M)))
        W = _lattice_tensor(phi, kern)
    else:
        W = rng.standard_normal((M,) * 4)
        W = W + W.transpose(1, 0, 3, 2)
        W = 0.25 * (W + W.transpose(2, 3, 0, 1))
    return TwoBodyProblem(h, W, psd, f"random-M{M}-seed{seed}")


def _spinful(h_sp: np.ndarray, W_sp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # spin-orbital index = 2·a + σ
    m = h_sp.shape[0]
    eye = np.eye(2)
    h = np.kron(h_sp, eye)
    W = np.zeros((2 * m,) * 4)
    for s in range(2):
        for t in range(2):
            W[s::2, t::2, s::2, t::2] = W_sp
    return h, W


def hydrogenic_s_problem(Z: float = 2.0, n_spatial: int = 3, grid: RadialGrid | None = None,
                         spin: bool = True) -> TwoBodyProblem:
    """s-channel atom: even-tempered exponentials, kernel 1/max(r, r')."""
    grid = grid or default_grid()
    r = grid.nodes
    zetas = Z * 2.0 ** np.linspace(-1.0, 1.5, n_spatial) if n_spatial > 1 else np.array([Z])
    raw = np.exp(-np.outer(r, zetas))
    draw = -raw * zetas
    S = raw.T @ (grid.shell[:, None] * raw)
    # Löwdin orthonormalisation
    s, V = np.linalg.eigh(S)
    X = V @ np.diag(s**-0.5) @ V.T
    phi, dphi = raw @ X, draw @ X
    kin = 0.5 * dphi.T @ (grid.shell[:, None] * dphi)
    pot = -Z * phi.T @ ((grid.shell / r)[:, None] * phi)
    h = kin + pot
    h = 0.5 * (h + h.T)
    m = n_spatial
    V_pair = np.empty((m, m, r.size))
    for a in range(m):
        for c in range(a, m):
            V_pair[a, c] = V_pair[c, a] = hartree_potential(ChargeDistribution(grid, phi[:, a] * phi[:, c]))
    W = np.einsum("ia,ic,bdi->abcd", grid.shell[:, None] * phi, phi, V_pair)
    W = 0.5 * (W + W.transpose(1, 0, 3, 2))
    W = 0.5 * (W + W.transpose(2, 3, 0, 1))
    if spin:
        h, W = _spinful(h, W)
    return TwoBodyProblem(h, W, True, f"s-channel-Z{Z:g}-n{n_spatial}{'-spin' if spin else ''}")


def bundled_problems() -> list[TwoBodyProblem]:
    """Problems used by the verification suite (all with M ≤ 8)."""
    return [
        hydrogenic_s_problem(2.0, 2),
        hydrogenic_s_problem(2.0, 3),
        hydrogenic_s_problem(3.0, 4),
        random_problem(4, seed=1),
        random_problem(6, seed=2),
        random_problem(8, seed=3),
    ]
