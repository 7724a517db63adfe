import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dftatoms import dmf, fockspace as fs
from dftatoms.errors import ContractError


def _random_spec(M, rng, scale=0.1):
    h = rng.normal(size=(M, M))
    h = 0.5 * (h + h.T)
    A = rng.normal(size=(M,) * 4)
    W = A + A.transpose(1, 0, 3, 2)
    W = W + W.transpose(2, 3, 0, 1)
    return fs.ManyBodyOperatorSpec(h, scale * W)


@pytest.mark.parametrize("M", range(1, 7))
def test_canonical_anticommutation(M):
    a = [fs.annihilation_matrix(M, k).toarray() for k in range(M)]
    c = [fs.creation_matrix(M, k).toarray() for k in range(M)]
    eye = np.eye(1 << M)
    for m in range(M):
        for n in range(M):
            assert np.abs(a[m] @ a[n] + a[n] @ a[m]).max() <= 1e-12
            assert np.abs(c[m] @ c[n] + c[n] @ c[m]).max() <= 1e-12
            assert np.abs(c[m] @ a[n] + a[n] @ c[m] - (m == n) * eye).max() <= 1e-12


def test_creation_is_adjoint_of_annihilation():
    M = 4
    for k in range(M):
        np.testing.assert_array_equal(fs.creation_matrix(M, k).toarray(), fs.annihilation_matrix(M, k).toarray().T)


def test_basis_state_sign_convention():
    M = 3
    psi = fs.create(0, fs.create(2, fs.vacuum(M)))  # a*_0 a*_2 |0>
    assert psi.amplitudes[0b101] == 1.0
    psi = fs.create(2, fs.create(0, fs.vacuum(M)))
    assert psi.amplitudes[0b101] == -1.0


def test_hamiltonian_conserves_particle_number(rng):
    H = fs.assemble_hamiltonian(_random_spec(5, rng))
    Nop = fs.number_operator(5)
    assert np.abs((H @ Nop - Nop @ H).toarray()).max() <= 1e-12
    assert np.abs((H - H.T).toarray()).max() <= 1e-12


def test_noninteracting_ground_state_fills_lowest_orbitals(rng):
    M, N = 5, 2
    h = rng.normal(size=(M, M))
    h = 0.5 * (h + h.T)
    e, _ = fs.ground_state(fs.assemble_hamiltonian(fs.ManyBodyOperatorSpec(h, None)), N)
    assert e == pytest.approx(np.sort(np.linalg.eigvalsh(h))[:N].sum(), abs=1e-12)


def test_slater_determinant_energy_is_hf_energy(rng):
    M, N = 5, 2
    spec = _random_spec(M, rng)
    H = fs.assemble_hamiltonian(spec)
    Q, _ = np.linalg.qr(rng.normal(size=(M, M)))
    psi = fs.vacuum(M)
    for k in reversed(range(N)):
        psi = fs.FockVector(M, sum(Q[m, k] * fs.create(m, psi).amplitudes for m in range(M)))
    e = psi.amplitudes @ (H @ psi.amplitudes)
    gamma = Q[:, :N] @ Q[:, :N].T
    assert e == pytest.approx(dmf.hf_energy(gamma, dmf.TwoBodyProblem(spec.h, spec.W)), abs=1e-10)
    np.testing.assert_allclose(fs.reduced_density_matrix(psi, 1), gamma, atol=1e-12)


@given(st.integers(0, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_rdm_spectrum_and_traces(N, seed):
    M = 5
    rng = np.random.default_rng(seed)
    idx = fs.sector_indices(M, N)
    amp = np.zeros(1 << M)
    amp[idx] = rng.normal(size=idx.size)
    amp /= np.linalg.norm(amp)
    psi = fs.FockVector(M, amp)
    g = fs.reduced_density_matrix(psi, 1)
    lam = np.linalg.eigvalsh(g)
    assert lam.min() >= -1e-12 and lam.max() <= 1 + 1e-12
    assert np.trace(g) == pytest.approx(N, abs=1e-12)
    G = fs.reduced_density_matrix(psi, 2)
    assert np.trace(G) == pytest.approx(fs.two_rdm_trace(N), abs=1e-12)


def test_rdm_rejects_mixed_sectors():
    amp = np.zeros(8)
    amp[[1, 3]] = 1 / np.sqrt(2)
    with pytest.raises(ContractError):
        fs.reduced_density_matrix(fs.FockVector(3, amp), 1)


def test_spec_validation_and_roundtrip(rng, tmp_path):
    spec = _random_spec(3, rng)
    back = fs.ManyBodyOperatorSpec.from_dict(spec.to_dict())
    np.testing.assert_allclose(back.W, spec.W)
    bad = spec.W.copy()
    bad[0, 1, 2, 0] += 1.0
    with pytest.raises(ContractError):
        fs.ManyBodyOperatorSpec(spec.h, bad)
    with pytest.raises(ContractError):
        fs.vacuum(fs.MAX_MODES + 1)
