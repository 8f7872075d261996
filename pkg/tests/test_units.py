import pytest
from hypothesis import given
from hypothesis import strategies as st

from tisr.units import ATOMIC_MASS_UNIT, HBAR, TrapUnits


def cesium():
    return TrapUnits.for_atoms(133 * ATOMIC_MASS_UNIT, 2 * 3.141592653589793 * 1e5)


def test_scales():
    u = cesium()
    assert u.mu == pytest.approx(133 * ATOMIC_MASS_UNIT / 2)
    assert u.z0 == pytest.approx((HBAR / (u.mu * u.omega)) ** 0.5)
    assert u.hbar_omega == pytest.approx(HBAR * u.omega)
    assert u.atom_mass == pytest.approx(133 * ATOMIC_MASS_UNIT)


@given(st.floats(1e-12, 1e-3), st.floats(1e-35, 1e-25))
def test_round_trip(length, energy):
    u = cesium()
    assert u.length_from_natural(u.length_to_natural(length)) == pytest.approx(length, rel=1e-12)
    assert u.energy_from_natural(u.energy_to_natural(energy)) == pytest.approx(energy, rel=1e-12)


def test_time_conversion():
    u = cesium()
    assert u.time_from_natural(u.omega) == pytest.approx(1.0)
