"""Finite fermionic Fock space on M ≤ 14 modes.

States are indexed by occupation bitmasks; bit n set means mode n occupied.
Operators act with the Jordan-Wigner sign (-1)^{#occupied modes below n}.
The two-body part follows ½ Σ W_{mnpq} a*_m a*_n a_q a_p with W_{mnpq} = <mn|W|pq>.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.sparse as sp

from .errors import ContractError

MAX_MODES = 14


def _check_modes(M: int) -> None:
    if not 1 <= M <= MAX_MODES:
        raise ContractError(f"mode count must lie in [1, {MAX_MODES}], got {M}")


@dataclass(frozen=True, eq=False)
class FockVector:
    M: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_modes(self.M)
        a = np.asarray(self.amplitudes)
        if a.shape != (1 << self.M,):
            raise ContractError("amplitude vector must have length 2^M")
        if not np.all(np.isfinite(a)):
            raise ContractError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "FockVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def sectors(self, atol: float = 1e-14) -> list[int]:
        """Particle numbers carrying nonzero weight."""
        occ = particle_numbers(self.M)
        return sorted({int(n) for n in occ[np.abs(self.amplitudes) > atol]})


def particle_numbers(M: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << M, dtype=np.uint32)).astype(int)


def vacuum(M: int) -> FockVector:
    a = np.zeros(1 << M)
    a[0] = 1.0
    return FockVector(M, a)


def basis_state(M: int, occupied) -> FockVector:
    """|S> = a*_{i1} a*_{i2} ... |0> with i1 < i2 < ...; equals the bare bitmask state."""
    a = np.zeros(1 << M)
    a[sum(1 << int(i) for i in set(occupied))] = 1.0
    return FockVector(M, a)


def _apply_string(M: int, ops, states: np.ndarray):
    """Apply an operator word (rightmost first) to basis states.

    ops: sequence of (mode, dagger). Returns (new_states, sign, valid).
    """
    s = states.copy()
    sign = np.ones(s.shape, dtype=np.int8)
    valid = np.ones(s.shape, dtype=bool)
    for mode, dagger in reversed(ops):
        bit = np.uint32(1 << mode)
        occupied = (s & bit) != 0
        valid &= ~occupied if dagger else occupied
        parity = np.bitwise_count(s & np.uint32(bit - 1)) & 1
        sign = np.where(parity == 1, -sign, sign)
        s = s ^ bit
    return s, sign, valid


def _apply(mode: int, dagger: bool, psi: FockVector) -> FockVector:
    if not 0 <= mode < psi.M:
        raise ContractError(f"mode {mode} out of range for M={psi.M}")
    idx = np.arange(1 << psi.M, dtype=np.uint32)
    new, sign, valid = _apply_string(psi.M, [(mode, dagger)], idx)
    out = np.zeros_like(psi.amplitudes, dtype=np.result_type(psi.amplitudes, float))
    out[new[valid]] = sign[valid] * psi.amplitudes[valid]
    return FockVector(psi.M, out)


def annihilate(mode: int, psi: FockVector) -> FockVector:
    """a_n psi."""
    return _apply(mode, False, psi)


def create(mode: int, psi: FockVector) -> FockVector:
    """a*_n psi."""
    return _apply(mode, True, psi)


def operator_matrix(M: int, ops) -> sp.csr_matrix:
    """Sparse 2^M matrix of an operator word [(mode, dagger), ...] (leftmost acts last)."""
    _check_modes(M)
    dim = 1 << M
    idx = np.arange(dim, dtype=np.uint32)
    new, sign, valid = _apply_string(M, ops, idx)
    return sp.csr_matrix((sign[valid].astype(float), (new[valid], idx[valid])), shape=(dim, dim))


def annihilation_matrix(M: int, mode: int) -> sp.csr_matrix:
    return operator_matrix(M, [(mode, False)])


def creation_matrix(M: int, mode: int) -> sp.csr_matrix:
    return operator_matrix(M, [(mode, True)])


def number_operator(M: int) -> sp.csr_matrix:
    return sp.diags(particle_numbers(M).astype(float)).tocsr()


@dataclass(frozen=True, eq=False)
class ManyBodyOperatorSpec:
    """One-body matrix h (M×M) and dense two-body tensor W[m,n,p,q] = <mn|W|pq>."""

    h: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h)
        M = h.shape[0]
        _check_modes(M)
        W = np.zeros((M,) * 4) if self.W is None else np.asarray(self.W)
        if h.shape != (M, M) or W.shape != (M,) * 4:
            raise ContractError("h must be M×M and W must be M×M×M×M")
        scale = max(1.0, np.abs(h).max(initial=0), np.abs(W).max(initial=0))
        if np.abs(h - h.conj().T).max() > 1e-12 * scale:
            raise ContractError("h is not Hermitian")
        if np.abs(W - W.transpose(1, 0, 3, 2)).max(initial=0) > 1e-12 * scale:
            raise ContractError("W violates W_mnpq = W_nmqp")
        if np.abs(W - W.transpose(2, 3, 0, 1).conj()).max(initial=0) > 1e-12 * scale:
            raise ContractError("W violates W_mnpq = conj(W_pqmn)")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "W", W)

    @property
    def M(self) -> int:
        return self.h.shape[0]

    def to_dict(self) -> dict:
        M = self.M
        terms = [
            {"m": m, "n": n, "p": p, "q": q, "value": float(self.W[m, n, p, q])}
            for m in range(M) for n in range(M) for p in range(M) for q in range(M)
            if self.W[m, n, p, q] != 0
        ]
        return {"M": M, "h": np.real(self.h).tolist(), "W": terms}

    @classmethod
    def from_dict(cls, d: dict) -> "ManyBodyOperatorSpec":
        M = int(d["M"])
        h = np.array(d["h"], dtype=float)
        if h.shape != (M, M):
            raise ContractError("h shape does not match M")
        W = np.zeros((M,) * 4)
        for t in d.get("W", []):
            W[t["m"], t["n"], t["p"], t["q"]] = t["value"]
        return cls(h, W)

    @classmethod
    def load(cls, path: str) -> "ManyBodyOperatorSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def assemble_hamiltonian(spec: ManyBodyOperatorSpec) -> sp.csr_matrix:
    """Σ h_mn a*_m a_n + ½ Σ W_mnpq a*_m a*_n a_q a_p as a sparse 2^M matrix."""
    M = spec.M
    dim = 1 << M
    idx = np.arange(dim, dtype=np.uint32)
    rows, cols, vals = [], [], []

    def add(coef, ops):
        new, sign, valid = _apply_string(M, ops, idx)
        rows.append(new[valid])
        cols.append(idx[valid])
        vals.append(coef * sign[valid])

    for m, n in zip(*np.nonzero(spec.h)):
        add(spec.h[m, n], [(m, True), (n, False)])
    for m, n, p, q in zip(*np.nonzero(spec.W)):
        if m == n or p == q:
            continue
        add(0.5 * spec.W[m, n, p, q], [(m, True), (n, True), (q, False), (p, False)])
    if not rows:
        return sp.csr_matrix((dim, dim))
    data = np.concatenate(vals)
    H = sp.csr_matrix((data, (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))
    H.sum_duplicates()
    return H


def sector_indices(M: int, N: int) -> np.ndarray:
    return np.nonzero(particle_numbers(M) == N)[0]


def ground_state(H, N: int) -> tuple[float, FockVector]:
    """Lowest eigenpair of the N-particle block of H."""
    dim = H.shape[0]
    M = int(dim).bit_length() - 1
    if not 0 <= N <= M:
        raise ContractError(f"sector N={N} is empty for M={M}")
    idx = sector_indices(M, N)
    block = H[idx][:, idx]
    block = block.toarray() if sp.issparse(block) else np.asarray(block)
    evals, evecs = np.linalg.eigh(block)
    v = evecs[:, 0]
    # fix the global phase so repeated runs agree
    k = int(np.argmax(np.abs(v) > 1e-8 * np.abs(v).max()))
    v = v * (np.abs(v[k]) / v[k])
    amps = np.zeros(dim, dtype=v.dtype)
    amps[idx] = v
    return float(evals[0]), FockVector(M, amps)


def reduced_density_matrix(psi: FockVector, k: int = 1) -> np.ndarray:
    """k-particle reduced density matrix of a single-sector state.

    k=1: γ_mn = <ψ, a*_n a_m ψ>, trace N.
    k=2: Γ[(m,n),(p,q)] = ½ <ψ, a*_p a*_q a_n a_m ψ> as an M²×M² matrix, trace N(N-1)/2.
    """
    if k not in (1, 2):
        raise ContractError("only k = 1 or 2 supported")
    sectors = psi.sectors()
    if len(sectors) > 1:
        raise ContractError(f"state spans several particle sectors {sectors}")
    M = psi.M
    a = psi.amplitudes
    idx = np.arange(1 << M, dtype=np.uint32)
    if k == 1:
        g = np.zeros((M, M), dtype=np.result_type(a, float))
        for m in range(M):
            for n in range(M):
                new, sign, valid = _apply_string(M, [(n, True), (m, False)], idx)
                g[m, n] = np.vdot(a[new[valid]], sign[valid] * a[valid])
        return g
    G = np.zeros((M * M, M * M), dtype=np.result_type(a, float))
    for m in range(M):
        for n in range(M):
            if m == n:
                continue
            for p in range(M):
                for q in range(M):
                    if p == q:
                        continue
                    new, sign, valid = _apply_string(M, [(p, True), (q, True), (n, False), (m, False)], idx)
                    G[m * M + n, p * M + q] = 0.5 * np.vdot(a[new[valid]], sign[valid] * a[valid])
    return G


def two_rdm_trace(N: int) -> int:
    return comb(N, 2)
