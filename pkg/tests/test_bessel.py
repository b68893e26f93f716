import numpy as np
import pytest
from scipy import special

from boltzgap.bessel import SERIES_CUTOFF, i0e, scaled_ratio


def test_i0e_matches_scipy():
    x = np.concatenate([np.linspace(0, 30, 601), [SERIES_CUTOFF - 1e-9, SERIES_CUTOFF + 1e-9, 100.0, 1e4]])
    np.testing.assert_allclose(i0e(x), special.i0e(x), rtol=2e-14)


def test_i0e_even_and_scalar():
    assert i0e(-3.0) == i0e(3.0)
    assert isinstance(i0e(0.0), float) and i0e(0.0) == 1.0


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 1.5, 2.0])
def test_scaled_ratio(nu):
    z = np.array([1e-3, 0.1, 1.0, 7.0, 40.0])
    ref = (2 / z) ** nu * special.ive(nu, z)
    np.testing.assert_allclose(scaled_ratio(nu, z), ref, rtol=1e-13)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 1.5])
def test_scaled_ratio_continuous_at_zero(nu):
    lim = 1 / special.gamma(nu + 1)
    assert scaled_ratio(nu, np.array(0.0)) == pytest.approx(lim, rel=1e-15)
    a, b = scaled_ratio(nu, np.array([1e-8 * (1 - 1e-6), 1e-8 * (1 + 1e-6)]))
    assert a == pytest.approx(b, rel=1e-12)
