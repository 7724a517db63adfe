import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dftatoms import engel_dreizler as ed, numerics as nm, tfw
from dftatoms.errors import ContractError

mpmath.mp.dps = 50


def _ttf_exact(t):
    t = mpmath.mpf(t)
    q = mpmath.sqrt(t * t + 1)
    return t * q**3 + t**3 * q - mpmath.asinh(t) - mpmath.mpf(8) / 3 * t**3


def _x_exact(t):
    t = mpmath.mpf(t)
    return 2 * t**4 - 3 * (t * mpmath.sqrt(t * t + 1) - mpmath.asinh(t)) ** 2


@given(st.floats(1e-4, 50))
@settings(max_examples=60, deadline=None)
def test_kernels_match_high_precision(t):
    _, ttf, x = ed.ed_kernels(t)
    assert ttf == pytest.approx(float(_ttf_exact(t)), rel=1e-12)
    assert x == pytest.approx(float(_x_exact(t)), rel=1e-10, abs=1e-300)


def test_kernels_continuous_across_series_cutoff():
    t = ed.SERIES_CUTOFF
    lo, hi = np.nextafter(t, 0), t
    for k in (ed.kernel_ttf, ed.kernel_x):
        a, b = k(np.array([lo, hi]))
        assert a == pytest.approx(b, rel=1e-13)


def test_small_t_coefficients():
    _, ttf, x = ed.ed_kernels(1e-3)
    assert ttf / 1e-15 == pytest.approx(0.8, rel=1e-5)
    assert x / 1e-12 == pytest.approx(2.0, rel=1e-5)


def test_kernel_signs():
    t = np.linspace(0, 1e3, 20001)
    f2, ttf, x = ed.ed_kernels(t)
    assert f2.min() >= 0 and ttf.min() >= 0
    assert x[t < 1].min() >= 0
    assert x[-1] < 0  # exchange kernel turns negative at large t


def test_negative_argument_rejected():
    with pytest.raises(ContractError):
        ed.kernel_f2(-0.1)


@pytest.fixture(scope="module")
def gaussian(grid):
    r = grid.nodes
    return nm.RadialDensity(grid, 2 * np.exp(-(r**2)) / np.pi**1.5)


def test_nonrelativistic_limit(gaussian):
    e = ed.ed_energy_terms(gaussian, ed.EdParams(2.0, 0.2, 1e6))
    ref = ed.nonrelativistic_terms(gaussian)
    assert e["kinetic"] == pytest.approx(ref["kinetic"], rel=1e-4)
    assert e["exchange"] == pytest.approx(ref["exchange"], rel=1e-4)
    assert e["weizsacker"] == pytest.approx(tfw.weizsacker_energy(gaussian, 0.2), rel=1e-2)


def test_relativistic_kinetic_below_nonrelativistic(gaussian):
    rel = ed.ed_energy_terms(gaussian, ed.EdParams(2.0))["kinetic"]
    assert rel < ed.nonrelativistic_terms(gaussian)["kinetic"]


def test_energy_increases_as_z_decreases(gaussian):
    E = [ed.ed_energy(gaussian, ed.EdParams(Z)) for Z in (4, 3, 2, 1)]
    assert np.all(np.diff(E) > 0)


def test_scaled_density_preserves_mass(gaussian):
    for mu in (0.5, 3.0, 40.0):
        assert ed.scaled_density(gaussian, mu).mass == pytest.approx(gaussian.mass, rel=1e-12)


def test_scaling_scan_reports_minimum(gaussian):
    s = ed.scaling_scan(gaussian, ed.EdParams(2.0), mus=[0.5, 1.0, 2.0, 4.0])
    assert s["min_energy"] == min(s["energy"])
