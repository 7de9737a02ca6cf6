"""Step-gradient splitting schedule and the resulting left/right CoM kinematics.

The run is the window [t1, t6] with the time origin at maximum separation:
t1 = -(2 tau_a + tau_f), t6 = +(2 tau_a + tau_f). The gradient is +eta_b on
[t1, t2] and [t5, t6], -eta_b on [t2, t3] and [t4, t5], and off during the
free flight [t3, t4] of total length 2 tau_f. Boundaries belong to the
earlier interval. Internally every segment quantity is also available in
protocol-local time s = t - t1 in [0, delta_t], measured from gradient onset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
from .materials import CONSTANTS, PhysicalConstants
from .piecewise import SegmentedDrive

__all__ = [
    "Arm",
    "LEFT",
    "RIGHT",
    "SplitProtocol",
    "KinematicState",
    "GradientBudget",
    "gradient_at",
    "kinematics_at",
    "separation_at",
    "from_target",
    "check_gradient_budget",
    "protocol_to_json",
    "protocol_from_json",
]


@dataclass(frozen=True)
class Arm:
    """One interferometer arm; sign +1 is the right arm, -1 the left."""

    sign: int

    def __post_init__(self):
        if self.sign not in (+1, -1):
            raise ValueError("arm sign must be +1 or -1")


RIGHT = Arm(+1)
LEFT = Arm(-1)


class KinematicState(NamedTuple):
    position: float
    velocity: float
    acceleration: float
    in_run: bool


class GradientBudget(NamedTuple):
    passed: bool
    margin: float  # eta_b / cap


@dataclass(frozen=True)
class SplitProtocol:
    """Gradient schedule parameters plus the constants they act through."""

    tau_a: float   # s, acceleration (= deceleration) duration
    tau_f: float   # s, HALF the free-flight duration
    eta_b: float   # T/m, gradient magnitude
    B_0: float     # T, bias field (cancels in every differential quantity)
    mass: float    # kg
    constants: PhysicalConstants = CONSTANTS

    def __post_init__(self):
        if not self.tau_a > 0:
            raise ValueError("tau_a must be positive")
        if self.tau_f < 0:
            raise ValueError("tau_f must be non-negative")
        if self.eta_b < 0:
            raise ValueError("eta_b must be non-negative")
        if not self.mass > 0:
            raise ValueError("mass must be positive")

    @property
    def accel(self) -> float:
        """Magnitude of the splitting acceleration mu*eta_b/M."""
        return self.constants.mu * self.eta_b / self.mass

    @property
    def delta_t(self) -> float:
        return 4.0 * self.tau_a + 2.0 * self.tau_f

    @property
    def delta_x_max(self) -> float:
        # same association as the trajectory arrays, so separation_at(0) matches exactly
        return 2.0 * (self.accel * self.tau_a * self.tau_a)

    @property
    def t_start(self) -> float:
        return -(2.0 * self.tau_a + self.tau_f)

    @property
    def t_end(self) -> float:
        return 2.0 * self.tau_a + self.tau_f

    def boundaries(self) -> np.ndarray:
        """t1..t6 in run time (origin at maximum separation)."""
        ta, tf = self.tau_a, self.tau_f
        return np.array([-2 * ta - tf, -ta - tf, -tf, tf, ta + tf, 2 * ta + tf])

    def gradient_signs(self) -> tuple[int, ...]:
        return (+1, -1, 0, -1, +1)

    def trajectory_arrays(self):
        """(edges, q, qd, curv) of X^R in protocol-local time.

        Shared edge values/slopes use one floating point value per edge, so
        downstream by-parts Fourier integrals cancel the continuous parts
        exactly; the window-end value and slope are exact zeros (closed loop).
        Free-flight rows are dropped when tau_f == 0.
        """
        a = self.accel
        ta, tf = self.tau_a, self.tau_f
        x_max = a * ta * ta  # single-arm displacement at flight, = delta_x_max/2
        v_max = a * ta
        if tf > 0:
            edges = np.array([0.0, ta, 2 * ta, 2 * ta + 2 * tf, 3 * ta + 2 * tf, 4 * ta + 2 * tf])
            q = np.array([0.0, 0.5 * x_max, x_max, x_max, 0.5 * x_max, 0.0])
            qd = np.array([0.0, v_max, 0.0, 0.0, -v_max, 0.0])
            curv = np.array([0.5 * a, -0.5 * a, 0.0, -0.5 * a, 0.5 * a])
        else:
            edges = np.array([0.0, ta, 2 * ta, 3 * ta, 4 * ta])
            q = np.array([0.0, 0.5 * x_max, x_max, 0.5 * x_max, 0.0])
            qd = np.array([0.0, v_max, 0.0, -v_max, 0.0])
            curv = np.array([0.5 * a, -0.5 * a, -0.5 * a, 0.5 * a])
        return edges, q, qd, curv

    def right_arm_segments(self):
        """Per-segment (lo, hi, x_lo, v_lo, accel) of the right arm in local time."""
        edges, q, qd, curv = self.trajectory_arrays()
        return [
            (edges[k], edges[k + 1], q[k], qd[k], 2.0 * curv[k])
            for k in range(len(curv))
        ]

    def right_arm_drive(self) -> SegmentedDrive:
        """X^R as a SegmentedDrive in protocol-local time."""
        edges, q, qd, curv = self.trajectory_arrays()
        k = len(curv)
        return SegmentedDrive(
            edges=edges, const=np.zeros(k), scale=np.ones(k), q=q, qd=qd, curv=curv
        )

    def segment_gradients(self) -> np.ndarray:
        """Gradient value on each local segment (matches trajectory_arrays)."""
        signs = [+1, -1, 0, -1, +1] if self.tau_f > 0 else [+1, -1, -1, +1]
        return self.eta_b * np.asarray(signs, dtype=float)


def gradient_at(p: SplitProtocol, t: float) -> float:
    """Gradient b(t) in run time; zero outside [t1, t6]."""
    t1, t2, t3, t4, t5, t6 = p.boundaries()
    if t < t1 or t > t6:
        return 0.0
    if t <= t2:
        return +p.eta_b
    if t <= t3:
        return -p.eta_b
    if t <= t4:
        return 0.0
    if t <= t5:
        return -p.eta_b
    return +p.eta_b


def kinematics_at(p: SplitProtocol, arm: Arm, t: float) -> KinematicState:
    """CoM position, velocity and acceleration of one arm at run time t."""
    if t < p.t_start or t > p.t_end:
        return KinematicState(0.0, 0.0, 0.0, False)
    s = t - p.t_start
    segs = p.right_arm_segments()
    for k, (lo, hi, x0, v0, acc) in enumerate(segs):
        # right-continuous branch choice; the last segment also owns s == delta_t
        if s < hi or k == len(segs) - 1:
            u = s - lo
            x = x0 + v0 * u + 0.5 * acc * u * u
            v = v0 + acc * u
            return KinematicState(arm.sign * x, arm.sign * v, arm.sign * acc, True)
    raise AssertionError("unreachable: t inside run but no segment matched")


def separation_at(p: SplitProtocol, t: float) -> float:
    """Arm separation X^R(t) - X^L(t) = 2 X^R(t)."""
    return 2.0 * kinematics_at(p, RIGHT, t).position


def from_target(
    mass: float,
    delta_x_max: float,
    delta_t: float,
    flight_fraction: float = 0.0,
    B_0: float = 0.0,
    constants: PhysicalConstants = CONSTANTS,
) -> SplitProtocol:
    """Design the gradient schedule that reaches a target separation in a target time.

    flight_fraction is the share of delta_t spent in free flight, so
    2 tau_f = flight_fraction * delta_t and tau_a = (1 - flight_fraction) * delta_t / 4.
    """
    if delta_x_max < 0:
        raise ValueError("delta_x_max must be non-negative")
    if not delta_t > 0:
        raise ValueError("delta_t must be positive")
    if not 0.0 <= flight_fraction < 1.0:
        raise ValueError("flight_fraction must lie in [0, 1)")
    tau_f = 0.5 * flight_fraction * delta_t
    tau_a = (delta_t - 2.0 * tau_f) / 4.0
    eta_b = mass * delta_x_max / (2.0 * constants.mu * tau_a**2)
    return SplitProtocol(tau_a=tau_a, tau_f=tau_f, eta_b=eta_b, B_0=B_0, mass=mass, constants=constants)


def check_gradient_budget(p: SplitProtocol, cap: float) -> GradientBudget:
    """Pass iff eta_b <= cap (boundary inclusive); margin is eta_b/cap."""
    if not cap > 0:
        raise ValueError("cap must be positive")
    margin = p.eta_b / cap
    return GradientBudget(passed=p.eta_b <= cap, margin=margin)


_DIRECT_FIELDS = {"tau_a", "tau_f", "eta_b", "B_0", "mass"}
_TARGET_FIELDS = {"mass", "delta_x_max", "delta_t", "flight_fraction"}


def protocol_to_json(p: SplitProtocol) -> str:
    return json.dumps(
        {"tau_a": p.tau_a, "tau_f": p.tau_f, "eta_b": p.eta_b, "B_0": p.B_0, "mass": p.mass}
    )


def protocol_from_json(doc) -> SplitProtocol:
    """Accept exactly one of the two documented forms (direct or target)."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict):
        raise ConfigError("protocol document must be a JSON object")
    keys = set(doc)
    if keys == _DIRECT_FIELDS:
        try:
            return SplitProtocol(
                tau_a=float(doc["tau_a"]),
                tau_f=float(doc["tau_f"]),
                eta_b=float(doc["eta_b"]),
                B_0=float(doc["B_0"]),
                mass=float(doc["mass"]),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if keys == _TARGET_FIELDS:
        try:
            return from_target(
                mass=float(doc["mass"]),
                delta_x_max=float(doc["delta_x_max"]),
                delta_t=float(doc["delta_t"]),
                flight_fraction=float(doc["flight_fraction"]),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(
        "protocol document must carry exactly {tau_a, tau_f, eta_b, B_0, mass} "
        "or {mass, delta_x_max, delta_t, flight_fraction}; got " + str(sorted(keys))
    )
