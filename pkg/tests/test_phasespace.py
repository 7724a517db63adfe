import numpy as np
import pytest

from dftatoms import numerics as nm, phasespace as ps, thomasfermi as tf
from dftatoms.errors import ContractError


@pytest.fixture(scope="module")
def reductions(tf_solutions):
    return {Z: (ps.reduce_position(Z, tf=s), ps.reduce_momentum(Z, tf=s)) for Z, s in tf_solutions.items()}


def test_momentum_grid_measures():
    pg = ps.momentum_grid(3.0, 200)
    assert pg.measures.sum() == pytest.approx(4 * np.pi / 3 * 27 / (2 * np.pi) ** 3, rel=1e-12)
    assert np.all(pg.ball_fraction(np.array([0.0]))[0] == 0)
    assert np.all(pg.ball_fraction(np.array([3.0]))[0] == 1)


def test_indicator_marginal_is_tf_density(grid):
    phi = 1.0 / grid.nodes
    f = ps.indicator_filling(grid, phi)
    np.testing.assert_allclose(f.rho, (phi / tf.GAMMA_TF) ** 1.5, rtol=1e-12)


@pytest.mark.parametrize("Z", [1.0, 10.0])
def test_position_reduction_reproduces_tf(reductions, Z):
    pos, _ = reductions[Z]
    assert pos.relative_gap < 0.02
    f = pos.f
    assert f.values.min() >= 0 and f.values.max() <= f.q
    np.testing.assert_allclose(f.rho, pos.f.rho, rtol=0)


def test_position_marginal_is_exact(reductions, tf_solutions):
    pos, _ = reductions[1.0]
    rho = tf_solutions[1.0].rho.values
    assert np.abs(pos.f.rho - rho).max() <= 1e-10 * rho.max()


@pytest.mark.parametrize("Z", [1.0, 10.0])
def test_momentum_reduction_agrees(reductions, Z):
    pos, mom = reductions[Z]
    assert abs(mom.energy - pos.energy) / abs(pos.tf_energy) < 0.02


def test_englert_energy_at_hydrogen(reductions):
    _, mom = reductions[1.0]
    assert mom.energy == pytest.approx(tf.E_TF_ONE, rel=0.02)


def test_phase_energy_dominates_tf(grid, rng):
    pg = ps.momentum_grid(50.0, 300)
    r = grid.nodes
    for _ in range(20):
        R = rng.uniform(0.3, 3.0) * np.exp(-rng.uniform(0.1, 1.0) * r)
        f = ps.PhaseSpaceDensity(grid, pg, rng.uniform(0, 2) * pg.ball_fraction(R) * rng.uniform(0.2, 1, pg.size))
        Z = rng.uniform(0.5, 4)
        assert ps.phase_energy(f, Z) >= tf.tf_energy(nm.RadialDensity(grid, f.rho), Z) - 1e-8


def test_phase_density_bounds_enforced(grid):
    pg = ps.momentum_grid(2.0, 10)
    with pytest.raises(ContractError):
        ps.PhaseSpaceDensity(grid, pg, 3.0 * np.ones((grid.size, pg.size)))


def test_marginal_csv(reductions):
    pos_csv, mom_csv = reductions[1.0][0].f.marginals_csv()
    assert pos_csv.startswith("r,rho\n") and mom_csv.startswith("p,tau\n")
