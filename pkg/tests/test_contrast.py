import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phonon_contrast.contrast import (
    ContrastReport,
    TransferSpectrum,
    asymptotic_ln_contrast,
    fundamental_omega,
    gamma,
    induced_dipole_inner_sq,
    ln_contrast_dia,
    ln_contrast_induced_dipole,
    ln_contrast_spin,
    mode_ln_contrast,
    transfer_dia_sq,
    transfer_induced_dipole_sq,
    transfer_spectrum,
    transfer_spin_sq,
)
from phonon_contrast.dynamics import coth
from phonon_contrast.materials import CONSTANTS, DIAMOND, MaterialModel, TruncationPolicy
from phonon_contrast.protocol import from_target


def test_gamma_matches_three_sine_sum():
    rng = np.random.default_rng(7)
    for _ in range(200):
        ta = rng.uniform(0.01, 2.0)
        tf = rng.uniform(0.0, 2.0)
        w = rng.uniform(0.5, 200.0)
        direct = np.sin(tf * w) - 2 * np.sin((ta + tf) * w) + np.sin((2 * ta + tf) * w)
        # the two forms assemble trig arguments differently; agreement is
        # limited by argument rounding, not by the identity
        assert gamma(w, ta, tf) == pytest.approx(direct, abs=1e-11)


def test_gamma_small_omega_taylor():
    ta, tf = 0.3, 0.2
    for w in (1e-6, 1e-4, 1e-3):
        leading = -(w**3) * ta**2 * (ta + tf)
        assert gamma(w, ta, tf) == pytest.approx(leading, rel=1e-4)


def test_gamma_reference_point():
    assert gamma(2 * np.pi, 0.25, 0.0) == pytest.approx(-2.0, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=1e-3, max_value=10.0),
    st.floats(min_value=0.0, max_value=10.0),
    st.floats(min_value=1e-6, max_value=1e13),
)
def test_gamma_bounded(ta, tf, w):
    assert abs(gamma(w, ta, tf)) <= 4.0 + 1e-12


def test_transfer_zero_separation():
    p = from_target(1e-14, 0.0, 1.0, 0.0)
    assert transfer_spin_sq(p, 1e10) == 0.0
    assert transfer_dia_sq(p, DIAMOND, 1e10) == 0.0


def test_transfer_spin_square_law(qgem_protocol):
    p = qgem_protocol
    p4 = from_target(p.mass, 4e-4, 1.0, 0.0)
    w = 3.3e9
    assert transfer_spin_sq(p4, w) == pytest.approx(16.0 * transfer_spin_sq(p, w), rel=1e-12)


def test_transfer_ratio_gamma_cancels(qgem_protocol):
    p = qgem_protocol
    cst = CONSTANTS
    for w in (1.1e9, 3.9e10, 7.7e11):
        ratio = transfer_dia_sq(p, DIAMOND, w) / transfer_spin_sq(p, w)
        expected = (
            p.mass**4 * DIAMOND.susceptibility**2 * p.delta_x_max**4
            / (16.0 * cst.mu_0**2 * cst.mu**4 * p.tau_a**8 * w**4)
        )
        assert ratio == pytest.approx(expected, rel=1e-12)


def test_mode_ln_contrast_limits():
    assert mode_ln_contrast(0.0, 1e10, 300.0) == 0.0
    w = 1e10
    t0 = mode_ln_contrast(1e-30, w, 0.0)
    assert t0 == pytest.approx(-1e-30 / (4 * CONSTANTS.hbar * w), rel=1e-14)
    # hotter always loses more
    vals = [mode_ln_contrast(1e-30, w, T) for T in (0.0, 4.0, 300.0, 3e4, 3e8)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_reports_zero_separation_give_unit_contrast():
    p = from_target(1e-14, 0.0, 1.0, 0.0)
    for builder in (ln_contrast_spin, ln_contrast_dia):
        rep = builder(p, DIAMOND, 300.0)
        assert rep.ln_total == 0.0 and rep.contrast == 1.0
    rep = ln_contrast_induced_dipole(from_target(1e-14, 1e-4, 1.0, 0.0), DIAMOND, 300.0, 0.0)
    assert rep.contrast == 1.0  # eta_e = 0


def test_report_structure(qgem_protocol):
    rep = ln_contrast_spin(qgem_protocol, DIAMOND, 300.0)
    assert np.all(rep.ln_modes <= 0.0)
    assert 0.0 < rep.contrast <= 1.0
    assert rep.ln_total == pytest.approx(np.sum(rep.ln_modes), rel=1e-14)
    assert rep.modes_used == len(rep.ln_modes) == len(rep.omegas)
    assert rep.converged
    doc = rep.to_json_dict()
    assert set(doc) == {
        "channel", "ln_contrast_total", "contrast", "modes_used", "per_mode", "fidelity_flag",
    }
    assert doc["per_mode"][0]["n"] == 1
    json.dumps(doc)  # serializable


def test_closed_forms_match_generic_pipeline(qgem_protocol):
    p = qgem_protocol
    for T in (4.0, 300.0):
        rep = ln_contrast_spin(p, DIAMOND, T, TruncationPolicy(kind="fixed", n_modes=64))
        pipeline = mode_ln_contrast(transfer_spin_sq(p, rep.omegas), rep.omegas, T)
        assert np.allclose(rep.ln_modes, pipeline, rtol=1e-12)
        rep = ln_contrast_dia(p, DIAMOND, T, TruncationPolicy(kind="fixed", n_modes=64))
        pipeline = mode_ln_contrast(transfer_dia_sq(p, DIAMOND, rep.omegas), rep.omegas, T)
        assert np.allclose(rep.ln_modes, pipeline, rtol=1e-12)
        rep = ln_contrast_induced_dipole(
            p, DIAMOND, T, 30.0, TruncationPolicy(kind="fixed", n_modes=64)
        )
        pipeline = mode_ln_contrast(
            transfer_induced_dipole_sq(p, DIAMOND, rep.omegas, 30.0), rep.omegas, T
        )
        assert np.allclose(rep.ln_modes, pipeline, rtol=1e-12)


def test_dia_below_spin_everywhere():
    for dx in np.logspace(-6, -3, 7):
        for mass in (1e-14, 1e-18):
            p = from_target(mass, dx, 1.0, 0.0)
            spin = ln_contrast_spin(p, DIAMOND, 300.0).neg_ln_total
            dia = ln_contrast_dia(p, DIAMOND, 300.0).neg_ln_total
            assert dia < spin


def test_heavier_mass_loses_more():
    for T in (4.0, 300.0):
        heavy = ln_contrast_spin(from_target(1e-14, 1e-4, 1.0, 0.0), DIAMOND, T)
        light = ln_contrast_spin(from_target(1e-18, 1e-4, 1.0, 0.0), DIAMOND, T)
        assert heavy.neg_ln_total > light.neg_ln_total


def test_monotone_in_separation_temperature_mass():
    seps = np.logspace(-6, -3, 9)
    for channel in (ln_contrast_spin, ln_contrast_dia):
        losses = [channel(from_target(1e-14, dx, 1.0, 0.0), DIAMOND, 300.0).neg_ln_total
                  for dx in seps]
        assert np.all(np.diff(losses) > 0)
        hot = channel(from_target(1e-14, 1e-4, 1.0, 0.0), DIAMOND, 300.0).neg_ln_total
        cold = channel(from_target(1e-14, 1e-4, 1.0, 0.0), DIAMOND, 4.0).neg_ln_total
        assert hot > cold


def test_dia_fidelity_flag():
    assert ln_contrast_dia(from_target(1e-14, 1e-4, 1.0, 0.0), DIAMOND, 4.0).fidelity == "exact"
    assert (
        ln_contrast_dia(from_target(1e-14, 1e-4, 1.0, 0.4), DIAMOND, 4.0).fidelity
        == "paper-approximate"
    )
    env = ln_contrast_dia(from_target(1e-14, 1e-4, 1.0, 0.0), DIAMOND, 4.0, gamma_sq=1.0)
    assert env.fidelity == "gamma-envelope"


def test_induced_dipole_magnitudes():
    p = from_target(1e-15, 1e-4, 1.0, 0.0)
    w0 = fundamental_omega(p, DIAMOND)
    inner1 = induced_dipole_inner_sq(p, DIAMOND, w0, 1.0) / gamma(w0, p.tau_a, p.tau_f) ** 2
    # the squared coupling factor at unit gradient, max Gamma^2 = 16:
    # within two orders of magnitude of 1e-130
    assert 1e-132 < 16.0 * inner1 < 1e-128
    rep = ln_contrast_induced_dipole(p, DIAMOND, 4.0, 30.0)
    assert rep.neg_ln_total < 1e-100
    # eta_e^4 scaling is exact
    rep_10 = ln_contrast_induced_dipole(p, DIAMOND, 4.0, 300.0)
    assert rep_10.neg_ln_total == pytest.approx(1e4 * rep.neg_ln_total, rel=1e-12)


def test_combined_ln_contrast_is_channel_sum(qgem_protocol):
    p = qgem_protocol
    spin = ln_contrast_spin(p, DIAMOND, 300.0)
    dia = ln_contrast_dia(p, DIAMOND, 300.0)
    combined = spin.ln_total + dia.ln_total
    assert np.exp(combined) == pytest.approx(spin.contrast * dia.contrast, rel=1e-12)


@pytest.mark.parametrize("channel", ["spin", "dia"])
def test_asymptotic_limits(channel, diamond):
    p = from_target(1e-14, 1e-4, 1.0, 0.0)
    w0 = fundamental_omega(p, diamond)
    builder = {"spin": ln_contrast_spin, "dia": ln_contrast_dia}[channel]
    transfer = {"spin": lambda w: transfer_spin_sq(p, w),
                "dia": lambda w: transfer_dia_sq(p, diamond, w)}[channel]

    # high temperature: hbar w0 / k_B T = 1e-4
    T_hot = CONSTANTS.hbar * w0 / (CONSTANTS.k_B * 1e-4)
    exact = -mode_ln_contrast(transfer(w0), w0, T_hot) / gamma(w0, p.tau_a, p.tau_f) ** 2
    approx = asymptotic_ln_contrast(channel, "highT", p, diamond, T_hot)
    assert exact == pytest.approx(approx, rel=1e-3)

    # low temperature: hbar w0 / k_B T = 1e3
    T_cold = CONSTANTS.hbar * w0 / (CONSTANTS.k_B * 1e3)
    exact = -mode_ln_contrast(transfer(w0), w0, T_cold) / gamma(w0, p.tau_a, p.tau_f) ** 2
    approx = asymptotic_ln_contrast(channel, "lowT", p, diamond, T_cold)
    assert exact == pytest.approx(approx, rel=1e-10)


def test_asymptotic_softer_material_loses_more():
    p = from_target(1e-14, 1e-4, 1.0, 0.0)
    rigid = MaterialModel("rigid", DIAMOND.density, 2 * DIAMOND.sound_speed,
                          DIAMOND.susceptibility, DIAMOND.dielectric)
    for channel in ("spin", "dia"):
        for regime in ("highT", "lowT"):
            soft_loss = asymptotic_ln_contrast(channel, regime, p, DIAMOND, 77.0)
            rigid_loss = asymptotic_ln_contrast(channel, regime, p, rigid, 77.0)
            assert rigid_loss < soft_loss


def test_asymptotic_rejects_unknown():
    p = from_target(1e-14, 1e-4, 1.0, 0.0)
    with pytest.raises(ValueError):
        asymptotic_ln_contrast("spin", "warmish", p, DIAMOND, 1.0)
    with pytest.raises(ValueError):
        asymptotic_ln_contrast("dipole", "highT", p, DIAMOND, 1.0)


def test_transfer_spectrum_validation(qgem_protocol):
    omegas = np.array([1e9, 2e9, 3e9])
    spec = transfer_spectrum("spin", qgem_protocol, DIAMOND, omegas)
    assert spec.provenance == "analytic"
    assert np.all(spec.values >= 0)
    with pytest.raises(ValueError):
        TransferSpectrum("spin", omegas[::-1], spec.values, "analytic")
    with pytest.raises(ValueError):
        TransferSpectrum("spin", omegas, -spec.values, "analytic")
    with pytest.raises(ValueError):
        TransferSpectrum("spin", omegas, spec.values, "guess")
    with pytest.raises(ValueError):
        transfer_spectrum("nope", qgem_protocol, DIAMOND, omegas)
