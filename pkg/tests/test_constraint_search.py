import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dftatoms import constraint_search as cs, numerics as nm, tfw
from dftatoms.errors import ContractError

X = np.linspace(-12, 12, 2401)


def _line_density(N, centers, widths):
    v = sum(np.exp(-((X - c) ** 2) / (2 * w**2)) for c, w in zip(centers, widths))
    return v * N / (nm.uniform_weights(X.size, X[1] - X[0]) @ v)


line_params = st.tuples(
    st.sampled_from([1, 2, 3, 5]),
    st.lists(st.floats(-2, 2), min_size=1, max_size=3),
    st.floats(0.5, 1.5),
    st.floats(0, 1),
)


@given(line_params)
@settings(max_examples=25, deadline=None)
def test_line_orbitals_orthonormal_and_reproduce_density(params):
    N, centers, width, a = params
    rho = _line_density(N, centers, [width] * len(centers))
    o = cs.macke_orbitals_1d(X, rho, a)
    assert o.count == N
    assert np.abs(o.gram() - np.eye(N)).max() < 1e-10
    assert np.abs(o.density() - rho).max() < 1e-10 * rho.max()


@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_kinetic_identity_at_optimal_phase(N):
    x = np.linspace(-12, 12, 4001)
    v = np.exp(-x**2 / 2) + 0.5 * np.exp(-((x - 1.5) ** 2))
    rho = v * N / (nm.uniform_weights(x.size, x[1] - x[0]) @ v)
    a, direct = cs.macke_kinetic_at_optimum(x, rho)
    assert a == pytest.approx((N + 1) / 2, abs=1e-4)
    assert direct == pytest.approx(cs.kinetic_upper_bound_1d(x, rho), abs=1e-6)


def test_single_particle_kinetic_is_weizsacker():
    rho = _line_density(1, [0.0], [1.0])
    o = cs.macke_orbitals_1d(X, rho, 1.0)  # a = N removes the phase
    sq = np.sqrt(rho)
    w = nm.uniform_weights(X.size, X[1] - X[0])
    weiz = 0.5 * w @ nm.central_derivative(sq, X[1] - X[0]) ** 2
    assert cs.slater_kinetic(o) == pytest.approx(weiz, rel=1e-8)


def test_box_density():
    x = np.linspace(0, 1, 1001)
    o = cs.macke_orbitals_1d(x, 2 * np.ones_like(x), 0.0)
    assert np.abs(o.gram() - np.eye(2)).max() < 1e-12


def test_non_integer_mass_rejected():
    with pytest.raises(ContractError):
        cs.macke_orbitals_1d(X, _line_density(1.5, [0.0], [1.0]))


def test_cdf_interpolation_is_monotone():
    rho = _line_density(2, [-1, 1], [0.7, 0.7])
    o = cs.macke_orbitals_1d(X, rho)
    y = o.evaluate_Y(np.linspace(-12, 12, 5000))
    assert np.all(np.diff(y) >= 0)


@pytest.fixture(scope="module")
def plane():
    ax = np.linspace(-8, 8, 241)
    Xg, Yg = np.meshgrid(ax, ax, indexing="ij")
    rho = 4 * np.exp(-(Xg**2 + (Yg - 0.3 * Xg) ** 2) / 2) / (2 * np.pi)
    return ax, rho


def test_plane_orbitals(plane):
    ax, rho = plane
    o = cs.macke_orbitals_dd((ax, ax), rho, [(0, 0), (1, 0), (0, 1), (1, 1)], [0.3, 0.7])
    assert np.abs(o.gram() - np.eye(4)).max() < 1e-10
    assert np.abs(o.density() - rho).max() < 1e-10 * rho.max()
    np.testing.assert_allclose(cs.jacobian_determinant((ax, ax), rho), rho / 4, atol=1e-14)


def test_plane_kinetic_exceeds_weizsacker(plane):
    ax, rho = plane
    o = cs.macke_orbitals_dd((ax, ax), rho, [(0, 0), (1, 0), (0, 1), (1, 1)])
    assert cs.slater_kinetic(o) > cs.weizsacker_dd((ax, ax), rho)


def test_duplicate_indices_rejected(plane):
    ax, rho = plane
    with pytest.raises(ContractError):
        cs.macke_orbitals_dd((ax, ax), rho, [(0, 0), (0, 0), (1, 0), (0, 1)])


@pytest.fixture(scope="module")
def neon_like(grid):
    r = grid.nodes
    v = np.array([r**2 * np.exp(-2 * r), r**4 * np.exp(-r)])
    v *= np.array([[4.0], [6.0]]) / (v @ grid.weights)[:, None]
    occ = {(0, 0, s): 2 for s in (1, 2)}
    occ.update({(1, m, s): 1 for m in (-1, 0, 1) for s in (1, 2)})
    return tfw.ChannelDensities(grid, v), occ


def test_radial_orbitals(neon_like, grid):
    ch, occ = neon_like
    o = cs.radial_macke(ch, occ, {0: 0.4, 1: 0.0})
    assert o.count == 10
    assert np.abs(o.gram() - np.eye(10)).max() < 1e-10
    np.testing.assert_allclose(cs.radial_channel_densities(o, 1), ch.values, atol=1e-12)


def test_radial_channel_bound_matches_direct(neon_like, grid):
    ch, occ = neon_like
    a = cs.radial_optimal_phases(ch, occ)
    kin = cs.radial_kinetic(cs.radial_macke(ch, occ, a), grid)
    for l, counts in ((0, [2, 2]), (1, [1] * 6)):
        assert kin[l] == pytest.approx(cs.channel_bound(grid, ch.values[l], l, counts), rel=1e-6)


def test_radial_occupation_must_match_mass(neon_like):
    ch, occ = neon_like
    bad = dict(occ)
    bad[(0, 0, 1)] = 3
    with pytest.raises(ContractError):
        cs.radial_macke(ch, bad)


def test_orbital_csv_columns():
    o = cs.macke_orbitals_1d(X, _line_density(2, [0.0], [1.0]))
    header = o.to_csv().splitlines()[0]
    assert header == "x,re_phi0,im_phi0,re_phi1,im_phi1"
