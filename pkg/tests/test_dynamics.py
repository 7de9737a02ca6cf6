import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phonon_contrast.contrast import transfer_dia_sq, transfer_spin_sq
from phonon_contrast.dynamics import (
    ModeState,
    ThermalState,
    TIME_SERIES_HEADER,
    arm_deltas,
    characteristic_widths,
    coth,
    evolve_mode,
    mode_time_series,
    occupation_at,
    thermal_occupation,
    wigner_density,
    write_time_series,
)
from phonon_contrast.forces import CouplingChannel, CouplingKind
from phonon_contrast.materials import CONSTANTS, DIAMOND
from phonon_contrast.protocol import from_target

SPIN = CouplingChannel(kind=CouplingKind.SPIN_MAGNETIC)
DIA = CouplingChannel(kind=CouplingKind.DIAMAGNETIC)


def test_coth_branch_formulas_agree_at_switchovers():
    # series vs direct evaluation at the 1e-4 boundary
    x = 1e-4
    assert 1.0 / x + x / 3.0 - x**3 / 45.0 == pytest.approx(1.0 / np.tanh(x), rel=1e-13)
    # direct vs saturated at the 20 boundary
    assert 1.0 / np.tanh(20.0) == 1.0
    assert coth(50.0) == 1.0
    assert coth(np.array([1e-6, 1.0, 25.0]))[0] == pytest.approx(1e6 + 1e-6 / 3, rel=1e-12)


def test_thermal_occupation_values():
    assert thermal_occupation(3.88e10, 0.0) == 0.5
    # frozen from 40-digit arithmetic at omega = 3.88e10, T = 300
    assert thermal_occupation(3.88e10, 300.0) == pytest.approx(1012.2707462964174, rel=1e-12)
    # saturation: hbar w >> k_B T
    x = 50.0
    T = CONSTANTS.hbar * 3.88e10 / (CONSTANTS.k_B * x)
    assert thermal_occupation(3.88e10, T) == pytest.approx(0.5, abs=1e-20)
    with pytest.raises(ValueError):
        thermal_occupation(0.0, 300.0)
    with pytest.raises(ValueError):
        thermal_occupation(1e9, -1.0)


def test_characteristic_widths():
    w = 5.5e9
    su, sv = characteristic_widths(w, 0.0)
    assert su**2 == pytest.approx(CONSTANTS.hbar / (2 * w), rel=1e-14)
    assert sv**2 == pytest.approx(CONSTANTS.hbar * w / 2, rel=1e-14)
    for T in (0.0, 0.3, 77.0, 300.0):
        su, sv = characteristic_widths(w, T)
        assert sv / su == pytest.approx(w, rel=1e-13)
    # high temperature: equipartition <udot^2> = k_B T
    w_low = 1e3
    _, sv = characteristic_widths(w_low, 300.0)
    assert sv**2 == pytest.approx(CONSTANTS.k_B * 300.0, rel=1e-8)


@settings(max_examples=80, deadline=None)
@given(
    st.floats(min_value=1e3, max_value=1e13),
    st.floats(min_value=0.0, max_value=1e4),
)
def test_occupation_width_identity(omega, temperature):
    n = thermal_occupation(omega, temperature)
    su, sv = characteristic_widths(omega, temperature)
    assert omega * su**2 / CONSTANTS.hbar == pytest.approx(n, rel=1e-14)
    assert sv**2 / (CONSTANTS.hbar * omega) == pytest.approx(n, rel=1e-14)


def test_representative_state_carries_mean_occupation():
    state = ThermalState(300.0).representative_state(2.6e5)
    assert occupation_at(state, 2.6e5) == pytest.approx(
        thermal_occupation(2.6e5, 300.0), rel=1e-14
    )


def test_free_oscillator():
    w = 2.0
    st_out = evolve_mode(ModeState(1.0, 0.0), w, None, 3.0)
    assert st_out.u == pytest.approx(np.cos(6.0), rel=1e-15)
    assert st_out.u_dot == pytest.approx(-2.0 * np.sin(6.0), rel=1e-15)


def test_constant_drive_closed_form():
    w, F = 2.0, 0.7
    st_out = evolve_mode(ModeState(0.0, 0.0), w, lambda t: np.full_like(t, F), 3.0)
    assert st_out.u == pytest.approx(F / w**2 * (1 - np.cos(w * 3.0)), abs=1e-14)
    assert st_out.u_dot == pytest.approx(F / w * np.sin(w * 3.0), abs=1e-14)


def test_free_evolution_conserves_occupation_many_periods():
    w = 3.3e5
    state = ThermalState(300.0).representative_state(w)
    n0 = occupation_at(state, w)
    t = 1e6 * (2 * np.pi / w)
    later = evolve_mode(state, w, None, t)
    assert occupation_at(later, w) == pytest.approx(n0, rel=1e-12)


def test_linearity_of_driven_response():
    w = 2.2e2
    f = lambda t: np.sin(0.3 * t) + 0.2
    g = lambda t: np.cos(1.7 * t)
    a, b = 0.6, -1.9
    combo = evolve_mode(ModeState(0.0, 0.0), w, lambda t: a * f(t) + b * g(t), 2.0)
    fa = evolve_mode(ModeState(0.0, 0.0), w, f, 2.0)
    gb = evolve_mode(ModeState(0.0, 0.0), w, g, 2.0)
    assert combo.u == pytest.approx(a * fa.u + b * gb.u, rel=1e-10, abs=1e-18)
    assert combo.u_dot == pytest.approx(a * fa.u_dot + b * gb.u_dot, rel=1e-10, abs=1e-16)


def test_occupation_constant_after_closure():
    p = from_target(1e-14, 1e-4, 1.0, 0.0)
    w = 2 * np.pi * 2e6 * 513 / 512
    for ch in (SPIN, DIA):
        series = mode_time_series(ch, p, DIAMOND, w, 300.0, [p.delta_t, 1.05 * p.delta_t, 1.37 * p.delta_t])
        for arm in ("L", "R"):
            n = series[f"n_{arm}"]
            assert n[1] == pytest.approx(n[0], rel=1e-9)
            assert n[2] == pytest.approx(n[0], rel=1e-9)


def test_occupations_differ_between_arms_and_stabilize():
    p = from_target(1e-14, 1e-4, 1.0, 0.0)
    w = 2 * np.pi * 2e6 * 513 / 512  # detuned off the protocol's transfer zeros
    times = np.linspace(0.0, 1.2 * p.delta_t, 301)
    series = mode_time_series(SPIN, p, DIAMOND, w, 300.0, times)
    n_l, n_r = series["n_L"], series["n_R"]
    assert n_l[0] == n_r[0]
    closed = times >= p.delta_t
    assert np.any(n_l[closed] != n_r[closed])
    for n in (n_l, n_r):
        tail = n[closed]
        assert np.ptp(tail) <= 1e-9 * tail[0]


def test_arm_deltas_zero_without_gradient():
    quiet = from_target(1e-14, 0.0, 1.0, 0.0)
    du, dv = arm_deltas(SPIN, quiet, DIAMOND, 1e5)
    assert du == 0.0 and dv == 0.0


def test_arm_deltas_spin_twice_single_arm():
    p = from_target(1e-14, 1e-4, 1e-3, 0.25)
    w = 5.5e5
    du, dv = arm_deltas(SPIN, p, DIAMOND, w)
    from phonon_contrast.forces import mode_force
    from phonon_contrast.quadrature import fourier_drive_prefix

    right = mode_force(SPIN, p, DIAMOND).arm_drive
    from phonon_contrast.protocol import RIGHT

    integral = fourier_drive_prefix(right(RIGHT), w, [p.delta_t], sign=-1)[0]
    rot = integral * np.exp(1j * w * p.delta_t)
    assert du == pytest.approx(2 * rot.imag / w, rel=1e-12)
    assert dv == pytest.approx(2 * rot.real, rel=1e-12)


@pytest.mark.parametrize("method", ["exact", "quadrature"])
def test_phase_space_norm_identity(method):
    p = from_target(1e-14, 1e-4, 1e-3, 0.0)
    for w in (3.1e5, 1.3e6):
        du, dv = arm_deltas(SPIN, p, DIAMOND, w, method=method)
        norm = w**2 * du**2 + dv**2
        assert norm == pytest.approx(transfer_spin_sq(p, w), rel=1e-8)
        du, dv = arm_deltas(DIA, p, DIAMOND, w, method=method)
        norm = w**2 * du**2 + dv**2
        assert norm == pytest.approx(float(transfer_dia_sq(p, DIAMOND, w)), rel=1e-8)


def test_wigner_density():
    su, sv = 2.0, 3.0
    peak = wigner_density(0.0, 0.0, su, sv)
    assert peak == pytest.approx(1.0 / (2 * np.pi * su * sv), rel=1e-14)
    us = np.linspace(-8 * su, 8 * su, 401)
    vs = np.linspace(-8 * sv, 8 * sv, 401)
    uu, vv = np.meshgrid(us, vs)
    grid = wigner_density(uu, vv, su, sv)
    integral = np.trapezoid(np.trapezoid(grid, vs, axis=0), us)
    assert integral == pytest.approx(1.0, abs=1e-6)
    w = 7.7e9
    su0, sv0 = characteristic_widths(w, 0.0)
    assert su0**2 == pytest.approx(CONSTANTS.hbar / (2 * w), rel=1e-14)
    assert sv0**2 == pytest.approx(CONSTANTS.hbar * w / 2, rel=1e-14)
    with pytest.raises(ValueError):
        wigner_density(0.0, 0.0, 0.0, 1.0)


def test_time_series_export(tmp_path):
    p = from_target(1e-14, 1e-4, 1e-3, 0.0)
    times = np.linspace(0.0, p.delta_t, 11)
    series = mode_time_series(SPIN, p, DIAMOND, 2.6e5, 300.0, times)
    path = tmp_path / "series.csv"
    write_time_series(path, series)
    lines = path.read_text().splitlines()
    assert lines[0] == TIME_SERIES_HEADER
    assert len(lines) == 12
    back = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert np.allclose(back[:, 0], times)
    assert np.allclose(back[:, 5], series["n_L"])


def test_mode_state_validation():
    with pytest.raises(ValueError):
        ModeState(float("nan"), 0.0)
    with pytest.raises(ValueError):
        evolve_mode(ModeState(0.0, 0.0, t=1.0), 1.0, None, 0.5)
    with pytest.raises(ValueError):
        occupation_at(ModeState(0.0, 0.0), 0.0)
