import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cigyro import analytic
from cigyro.analytic import BciAnalyticInputs, SensitivityInputs
from cigyro.core_dynamics import HBAR, PhysicalParams

P = PhysicalParams()
OMEGA0 = 1e5
TAU = math.pi / OMEGA0


def amplitude(f, phi, dphi=0.0, phi20=0.0):
    return analytic.mbci_amplitude(
        BciAnalyticInputs(delta_phi0=dphi, omega0=OMEGA0, tau=TAU, delta_tau=f * TAU, phi=phi,
                          phi20=phi20, phi30=dphi + 2 * phi20)
    )


def test_inputs_validate():
    with pytest.raises(ValueError):
        BciAnalyticInputs(0.1, OMEGA0, 1.1 * TAU)
    with pytest.raises(ValueError):
        BciAnalyticInputs(0.1, OMEGA0, TAU, delta_tau=0.6 * TAU)
    i = BciAnalyticInputs.from_zone_phases(OMEGA0, 0.0, 0.0, 0.2, 0.5)
    assert i.delta_phi0 == pytest.approx(0.1)
    assert i.tau2 == pytest.approx(TAU / 2)


def test_rotational_phase_forms_agree():
    om = 0.02
    assert analytic.rotational_phase(P, om) == pytest.approx(analytic.rotational_phase_from_area(P, om), rel=1e-12)
    assert analytic.omega_for_phase(P, analytic.rotational_phase(P, om)) == pytest.approx(om)
    assert analytic.bci_area(P) == pytest.approx(3.532e-10, rel=1e-3)


@pytest.mark.parametrize("f", [0.5, -0.5])
def test_amplitude_reduces_to_bci_fringe(f):
    phis = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    got = np.array([abs(amplitude(f, x)) ** 2 for x in phis])
    assert np.allclose(got, 0.5 * (1 - np.cos(phis)), atol=1e-12)


def test_bci_minimum_at_minus_delta_phi0():
    phis = np.linspace(-math.pi, math.pi, 20001)
    p = [abs(amplitude(0.5, x, dphi=0.1)) ** 2 for x in phis]
    assert phis[int(np.argmin(p))] == pytest.approx(-0.1, abs=1e-3)


@given(f=st.floats(-0.5, 0.5), phi=st.floats(-6, 6), d=st.floats(-1, 1), p20=st.floats(-3, 3))
def test_amplitude_is_probability(f, phi, d, p20):
    assert abs(amplitude(f, phi, d, p20)) ** 2 <= 1 + 1e-12


@pytest.mark.parametrize("f", [-0.4, -0.2, 0.15, 0.35])
def test_exact_shift_locates_numerical_minimum(f):
    d = 0.05
    phis = np.linspace(-math.pi, math.pi, 200001)
    inp = [BciAnalyticInputs(d, OMEGA0, TAU, f * TAU, x, 0.0, d) for x in phis]
    p = np.array([abs(analytic.mbci_amplitude(i)) ** 2 for i in inp[::10]])
    x0 = phis[::10][int(np.argmin(p))]
    assert analytic.exact_fringe_shift(d, OMEGA0, f * TAU, TAU) == pytest.approx(x0, abs=1e-3)
    # small rotation: close to the approximate law
    assert analytic.approx_fringe_shift(d, OMEGA0, f * TAU) == pytest.approx(x0, abs=0.02)


def test_exact_shift_rejects_out_of_range():
    with pytest.raises(ValueError):
        analytic.exact_fringe_shift(0.1, OMEGA0, 0.7 * TAU, TAU)


def test_approx_shift_limits():
    assert analytic.approx_fringe_shift(0.1, OMEGA0, 0.0) == pytest.approx(-math.pi / 2)
    assert analytic.approx_fringe_shift(-0.1, OMEGA0, 0.0) == pytest.approx(math.pi / 2)
    assert analytic.approx_fringe_shift(0.1, OMEGA0, TAU / 2) == pytest.approx(-math.atan(0.1))


def test_eta_conventions():
    assert analytic.eta_mbci(0.1, OMEGA0, TAU / 2) == pytest.approx(math.atan(0.1) / 0.1, abs=1e-12)
    assert analytic.eta_mbci(0.1, OMEGA0, -TAU / 2) == pytest.approx(math.atan(0.1) / 0.1, abs=1e-12)
    assert analytic.eta_mbci(0.1, OMEGA0, -TAU / 2, signed=True) == pytest.approx(-math.atan(0.1) / 0.1)
    assert analytic.eta_mbci(0.1, OMEGA0, 0.0) == pytest.approx(5 * math.pi)
    with pytest.raises(ValueError):
        analytic.eta_mbci(0.0, OMEGA0, 0.0)


@given(f=st.floats(-0.5, 0.5), d=st.floats(1e-4, 3.0))
def test_q_bounded(f, d):
    q = analytic.quality_factor_mbci(d, OMEGA0, f * TAU)
    assert 0.0 <= q <= 1.0 + 1e-15


def test_min_measurable_rotation():
    a0 = analytic.bci_area(P)
    ideal = SensitivityInputs(a0, a0, 1.0, 1e6, P.m)
    assert analytic.min_measurable_rotation(ideal) == pytest.approx(
        analytic.min_measurable_rotation_bci(a0, 1e6, P.m), rel=1e-12)
    assert analytic.quality_factor(ideal) == 1.0
    # halving |A_eff| doubles Omega_mm; sign of the area does not matter
    half = SensitivityInputs(-a0 / 2, a0, 1.0, 1e6, P.m)
    assert analytic.min_measurable_rotation(half) == pytest.approx(2 * analytic.min_measurable_rotation(ideal))
    assert analytic.min_measurable_rotation_bci(a0, 1e6, P.m) == pytest.approx(
        2 * math.pi * HBAR / (4 * P.m * a0 * 1e3))
    for bad in (SensitivityInputs(0.0, a0, 1.0, 1e6, P.m), SensitivityInputs(a0, a0, 0.0, 1e6, P.m),
                SensitivityInputs(a0, a0, 1.0, 0.0, P.m)):
        with pytest.raises(ValueError):
            analytic.min_measurable_rotation(bad)
    with pytest.raises(ValueError):
        SensitivityInputs(a0, a0, 1.5, 1e6, P.m)
