import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dftatoms import appendix
from dftatoms.errors import ContractError


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_maximal_function_eigenrelation(alpha):
    q = appendix.MaximalFunctionQuery(alpha, 3)
    c = [appendix.maximal_function_power(q, x) * x**alpha for x in (0.1, 1.0, 10.0)]
    assert max(c) - min(c) <= 1e-3 * np.mean(c)
    assert min(c) >= 1.0 - 1e-12


def test_superharmonic_powers_have_unit_constant():
    assert appendix.maximal_constant(1.0, 3) == pytest.approx(1.0, abs=1e-9)
    assert appendix.maximal_constant(1.5, 3) > 1.1


def test_ball_average_of_constant():
    q = appendix.MaximalFunctionQuery(0.0, 3)
    assert appendix.ball_average(q, 1.0, 0.7) == pytest.approx(1.0, rel=1e-10)


def test_ball_average_centered():
    q = appendix.MaximalFunctionQuery(1.0, 3)
    # mean of 1/|y| over the ball of radius 2 containing a point at distance 1
    # from the centre: for R > |x|, 3/(2R) - |x|²/(2R³)
    assert appendix.ball_average(q, 1.0, 2.0) == pytest.approx(1.5 / 2 - 0.5 / 8, rel=1e-10)


def test_non_integrable_power_rejected():
    with pytest.raises(ContractError):
        appendix.MaximalFunctionQuery(3.0, 3)


@given(st.floats(0.2, 5.0), st.floats(0.5, 50.0))
@settings(max_examples=12, deadline=None)
def test_infimum_scaling_law(gamma, Z):
    base = appendix.scaled_infimum(1.0, 1.0)
    got = appendix.scaled_infimum(gamma, Z)
    assert got == pytest.approx(Z ** (13 / 9) * gamma ** (-1 / 3) * base, rel=1e-3)


def test_infimum_constraint_is_active():
    r = appendix.scaled_infimum_details(1.0, 1.0, 1.0)
    assert r.mass == pytest.approx(1.0, rel=1e-10)
    assert r.mu > 0 and r.value < 0


def test_infimum_monotone():
    inC = [appendix.scaled_infimum(1.0, 1.0, C) for C in (0.0, 0.5, 1.0, 2.0)]
    inG = [appendix.scaled_infimum(g, 1.0) for g in (0.5, 1.0, 2.0)]
    assert np.all(np.diff(inC) < 0) and np.all(np.diff(inG) > 0)
