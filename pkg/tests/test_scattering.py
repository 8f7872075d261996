import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tisr.scattering import (
    ConstantScatteringLength,
    DomainError,
    StepWell,
    aeff,
    aeff_table,
    effective_scattering_length,
    phase_shift,
    square_well_bound_states,
)


def test_zero_energy_length_closed_form(well):
    q0 = math.sqrt(2 * well.V0)
    expected = well.R * (1 - math.tan(q0 * well.R) / (q0 * well.R))
    assert well.zero_energy_length() == pytest.approx(expected, rel=1e-12)
    assert well.zero_energy_length() == pytest.approx(0.99958, abs=1e-5)


def test_single_bound_state_and_pole_identity(well):
    states = square_well_bound_states(well)
    assert len(states) == 1
    b = states[0]
    assert b.E_b == pytest.approx(-0.62060, abs=1e-5)
    assert abs(well.aeff(b.E_b) * b.kappa_b - 1.0) < 1e-8
    assert well.inverse_aeff(b.E_b) == pytest.approx(b.kappa_b, rel=1e-10)


@given(st.floats(0.01, 30.0))
def test_aeff_is_minus_tan_delta_over_k(E):
    w = StepWell(36.79, 0.2)
    k = math.sqrt(2 * E)
    a = w.aeff(E)
    if abs(a) > 1e6:
        return
    assert a == pytest.approx(-math.tan(w.phase_shift(E)) / k, rel=1e-9, abs=1e-12)


def test_aeff_continuous_through_threshold(well):
    eps = 1e-7
    assert well.aeff(eps) == pytest.approx(well.aeff(-eps), abs=1e-6)
    assert well.aeff(0.0) == pytest.approx(well.aeff(eps), abs=1e-6)


def test_phase_shift_continuous_and_levinson(well):
    k = np.linspace(1e-3, 9.0, 4000)
    Es = 0.5 * k * k
    deltas = np.array([well.phase_shift(E) for E in Es])
    assert np.max(np.abs(np.diff(deltas))) < 0.05
    # one bound state: delta -> pi at threshold
    assert deltas[0] == pytest.approx(math.pi, abs=1e-3)


def test_no_well_no_scattering():
    w = StepWell(0.0, 0.2)
    assert w.aeff(1.3) == 0.0
    assert w.phase_shift(1.3) == 0.0
    assert w.bound_states() == []


def test_domain_errors(well):
    with pytest.raises(DomainError):
        well.aeff(-well.V0 - 1.0)
    with pytest.raises(DomainError):
        well.phase_shift(-0.5)
    with pytest.raises(ValueError):
        StepWell(-1.0, 0.2)
    with pytest.raises(ValueError):
        StepWell(1.0, 0.0)


def test_validity_flag():
    assert StepWell(36.79, 0.2).valid
    assert not StepWell(1.0, 0.8).valid


def test_bound_state_count_grows_with_depth():
    # thresholds at sqrt(2 V0) R = (2m+1) pi / 2
    R = 0.2
    for n in range(1, 4):
        V0 = 0.5 * (((2 * n - 1) * math.pi / 2 + 0.05) / R) ** 2
        assert len(StepWell(V0, R).bound_states()) == n


def test_deeper_well_binds_more_deeply(well):
    deeper = StepWell(well.V0 * 1.01, well.R)
    assert deeper.bound_states()[0].E_b < well.bound_states()[0].E_b


def test_constant_model():
    m = ConstantScatteringLength(0.5)
    assert m.aeff(3.0) == 0.5 and m.inverse_aeff(-2.0) == 2.0
    assert m.bound_states()[0].E_b == pytest.approx(-2.0)
    assert ConstantScatteringLength(-1.0).bound_states() == []
    assert ConstantScatteringLength(0.0).inverse_aeff(1.0) == math.inf
    assert phase_shift(m, 0.5) == pytest.approx(-math.atan(0.5))


def test_table_helpers(well):
    rows = aeff_table(well, [-1.0, 0.0, 2.0])
    assert rows[0].kappa == pytest.approx(math.sqrt(2)) and rows[0].k is None
    assert rows[2].k == pytest.approx(2.0)
    assert aeff(well, 1.0) == well.aeff(1.0)
    assert not effective_scattering_length(well, 1.0).pole_flag


def test_pole_flag_at_resonance(well):
    # a_eff has a pole where the denominator vanishes; bracket it and check the flag near it
    Es = np.linspace(3.0, 8.0, 2001)
    inv = np.array([well.inverse_aeff(E) for E in Es])
    i = np.nonzero(np.sign(inv[:-1]) != np.sign(inv[1:]))[0][0]
    assert abs(well.aeff(Es[i])) > 50
