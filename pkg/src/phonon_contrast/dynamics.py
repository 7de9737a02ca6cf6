"""Thermal initial conditions and driven evolution of single phonon modes.

Mode amplitudes are mass-weighted (units kg^1/2 m), so the driven oscillator
reads u'' + w^2 u = f_q(t) with f_q from the forces module. Time here is
protocol-local: 0 is gradient onset, delta_t is loop closure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .forces import CouplingChannel, ModeForce, mode_force
from .materials import CONSTANTS, MaterialModel, PhysicalConstants
from .piecewise import SegmentedDrive
from .protocol import LEFT, RIGHT, SplitProtocol
from .quadrature import fourier_callable_gl, fourier_drive_prefix

__all__ = [
    "coth",
    "thermal_occupation",
    "characteristic_widths",
    "ThermalState",
    "ModeState",
    "evolve_mode",
    "occupation_at",
    "arm_deltas",
    "wigner_density",
    "mode_time_series",
    "write_time_series",
    "TIME_SERIES_HEADER",
]


def coth(x):
    """Hyperbolic cotangent for x > 0, array-aware.

    Series 1/x + x/3 - x^3/45 below 1e-4 (direct evaluation cancels there),
    exactly 1 above 20 (saturated to double precision).
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.ones_like(x)
    tiny = x < 1e-4
    mid = ~tiny & (x <= 20.0)
    xt = x[tiny]
    out[tiny] = 1.0 / xt + xt / 3.0 - xt**3 / 45.0
    out[mid] = 1.0 / np.tanh(x[mid])
    return float(out[0]) if scalar else out


def _half_quantum_ratio(omega, temperature: float, constants: PhysicalConstants):
    """x = hbar w / (2 k_B T), +inf at T = 0."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0.0:
        return np.full_like(omega, np.inf)
    with np.errstate(divide="ignore", over="ignore"):
        # subnormal temperatures may underflow the denominator; inf is the
        # correct limit and coth handles it
        return constants.hbar * omega / (2.0 * constants.k_B * temperature)


def thermal_occupation(omega, temperature: float, constants: PhysicalConstants = CONSTANTS):
    """Mean initial occupation (1/2) coth(hbar w / 2 k_B T); 1/2 at T = 0."""
    return 0.5 * coth(_half_quantum_ratio(omega, temperature, constants))


def characteristic_widths(omega, temperature: float, constants: PhysicalConstants = CONSTANTS):
    """(sigma_u, sigma_udot): thermal widths of amplitude and velocity."""
    c = coth(_half_quantum_ratio(omega, temperature, constants))
    sigma_u = np.sqrt(constants.hbar / (2.0 * np.asarray(omega, dtype=float)) * c)
    sigma_udot = np.sqrt(constants.hbar * np.asarray(omega, dtype=float) / 2.0 * c)
    return sigma_u, sigma_udot


@dataclass(frozen=True)
class ThermalState:
    """Thermal equilibrium ensemble of the chain at a fixed temperature."""

    temperature: float
    constants: PhysicalConstants = CONSTANTS

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")

    def occupation(self, omega):
        return thermal_occupation(omega, self.temperature, self.constants)

    def widths(self, omega):
        return characteristic_widths(omega, self.temperature, self.constants)

    def representative_state(self, omega) -> "ModeState":
        """(u, udot) = (sigma_u, sigma_udot): carries the ensemble-mean occupation."""
        su, sv = self.widths(omega)
        return ModeState(u=float(su), u_dot=float(sv), t=0.0)


@dataclass(frozen=True)
class ModeState:
    """Amplitude/velocity pair of one mode at time t."""

    u: float
    u_dot: float
    t: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.u_dot)):
            raise ValueError("mode state components must be finite")


def _forced_response(drive, omega, t0, t_end, breakpoints, rel_tol):
    """(conv_sin/omega, conv_cos) of the drive against the mode kernel.

    Uses I(t) = integral f(t') e^{-i w t'} dt'; then the convolution pair is
    (Im, Re) of e^{i w t} I(t).
    """
    if drive is None:
        return 0.0, 0.0
    if isinstance(drive, SegmentedDrive):
        start = drive.window[0]
        integral = fourier_drive_prefix(drive, omega, [t_end], sign=-1)[0]
        if t0 > start:
            integral -= fourier_drive_prefix(drive, omega, [t0], sign=-1)[0]
    else:
        integral, _ = fourier_callable_gl(
            drive, (t0, t_end), omega, sign=-1, breakpoints=breakpoints, rel_tol=rel_tol
        )
    rot = integral * (math.cos(omega * t_end) + 1j * math.sin(omega * t_end))
    return rot.imag / omega, rot.real


def evolve_mode(
    initial: ModeState,
    omega: float,
    drive,
    t_end: float,
    breakpoints=(),
    rel_tol: float = 1e-10,
) -> ModeState:
    """Propagate one driven mode from initial.t to t_end.

    drive is a vectorized callable of local time, a SegmentedDrive, or None
    for free evolution. The forced response is the convolution with
    sin(w(t - t'))/w; interval subdivision follows the declared breakpoints.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    if t_end < initial.t:
        raise ValueError("t_end precedes the initial state")
    dt = t_end - initial.t
    cos_wt, sin_wt = math.cos(omega * dt), math.sin(omega * dt)
    u_free = initial.u * cos_wt + initial.u_dot * sin_wt / omega
    v_free = -initial.u * omega * sin_wt + initial.u_dot * cos_wt
    u_forced, v_forced = _forced_response(drive, omega, initial.t, t_end, breakpoints, rel_tol)
    return ModeState(u=u_free + u_forced, u_dot=v_free + v_forced, t=t_end)


def occupation_at(state: ModeState, omega: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """n = (udot^2 + w^2 u^2) / (2 hbar w)."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    return (state.u_dot**2 + omega**2 * state.u**2) / (2.0 * constants.hbar * omega)


def arm_deltas(
    channel: CouplingChannel,
    p: SplitProtocol,
    material: MaterialModel,
    omega: float,
    t: float | None = None,
    method: str = "auto",
    dia_variant: str = "literal",
    rel_tol: float = 1e-10,
):
    """(Delta u, Delta udot) at local time t (default loop closure).

    method "exact" takes the closed-form piecewise path, "quadrature" the
    Gauss-Legendre panels, "auto" prefers exact whenever the channel exposes
    polynomial segments.
    """
    if t is None:
        t = p.delta_t
    mf = mode_force(channel, p, material, dia_variant=dia_variant)
    delta = mf.delta_drive()
    if method not in ("auto", "exact", "quadrature"):
        raise ValueError("method must be auto, exact or quadrature")
    if method == "exact" and delta is None:
        raise ValueError("exact method needs a piecewise-polynomial channel")
    use_exact = delta is not None and method != "quadrature"
    drive = delta if use_exact else mf.delta_f
    bps = () if use_exact else tuple(mf.breakpoints())
    du, dv = _forced_response(drive, omega, 0.0, t, bps, rel_tol)
    return du, dv


def wigner_density(u, u_dot, sigma_u: float, sigma_udot: float):
    """Thermal Wigner density, normalized to 1 over the (u, udot) plane."""
    if not (sigma_u > 0 and sigma_udot > 0):
        raise ValueError("widths must be positive")
    u = np.asarray(u, dtype=float)
    u_dot = np.asarray(u_dot, dtype=float)
    norm = 1.0 / (2.0 * math.pi * sigma_u * sigma_udot)
    return norm * np.exp(-(u**2) / (2.0 * sigma_u**2) - u_dot**2 / (2.0 * sigma_udot**2))


TIME_SERIES_HEADER = "t,u_L,udot_L,u_R,udot_R,n_L,n_R"


def mode_time_series(
    channel: CouplingChannel,
    p: SplitProtocol,
    material: MaterialModel,
    omega: float,
    temperature: float,
    times,
    dia_variant: str = "literal",
):
    """Per-arm (u, udot, n) histories from the representative thermal start.

    The initial condition is (sigma_u, sigma_udot), which reproduces the
    ensemble-mean initial occupation exactly. Returns a dict of arrays keyed
    like the CSV header.
    """
    times = np.asarray(times, dtype=float)
    state0 = ThermalState(temperature, p.constants).representative_state(omega)
    mf = mode_force(channel, p, material, dia_variant=dia_variant)
    cos_wt = np.cos(omega * times)
    sin_wt = np.sin(omega * times)
    u_free = state0.u * cos_wt + state0.u_dot * sin_wt / omega
    v_free = -state0.u * omega * sin_wt + state0.u_dot * cos_wt
    out = {"t": times}
    for label, arm in (("L", LEFT), ("R", RIGHT)):
        drive = mf.arm_drive(arm)
        if drive is not None:
            integral = fourier_drive_prefix(drive, omega, times, sign=-1)
        else:
            integral = np.array(
                [
                    fourier_callable_gl(
                        lambda tt, a=arm: mf.f_arm(tt, a),
                        (0.0, float(t)),
                        omega,
                        sign=-1,
                        breakpoints=tuple(mf.breakpoints()),
                    )[0]
                    if t > 0
                    else 0.0
                    for t in times
                ]
            )
        rot = integral * (cos_wt + 1j * sin_wt)
        u = u_free + rot.imag / omega
        v = v_free + rot.real
        out[f"u_{label}"] = u
        out[f"udot_{label}"] = v
        out[f"n_{label}"] = (v**2 + omega**2 * u**2) / (2.0 * p.constants.hbar * omega)
    return out


def write_time_series(path, series) -> None:
    """CSV export with the documented header, reproducible formatting."""
    cols = TIME_SERIES_HEADER.split(",")
    with open(path, "w", newline="") as fh:
        fh.write(TIME_SERIES_HEADER + "\n")
        for i in range(len(series["t"])):
            fh.write(",".join(repr(float(series[c][i])) for c in cols) + "\n")
