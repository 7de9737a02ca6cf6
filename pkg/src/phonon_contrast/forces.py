"""Time-domain forces on the chain and their per-mode driving terms.

Mode drives follow the mass-weighted convention f_q(t) = sum_i F_i(t)/sqrt(M)
with the flat eigenvector; the spin channel plucks the single NV site, the
diamagnetic and dipole channels push every atom. ModeForce evaluators run in
protocol-local time (0 = gradient onset), matching the Duhamel integrals;
the standalone force functions take run time like the protocol module.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .materials import M_CARBON, MaterialModel
from .piecewise import SegmentedDrive
from .protocol import Arm, LEFT, RIGHT, SplitProtocol, gradient_at, kinematics_at

__all__ = [
    "CouplingKind",
    "CouplingChannel",
    "ModeForce",
    "spin_force",
    "diamagnetic_force_total",
    "per_atom_partition",
    "polarizability",
    "induced_dipole_force",
    "atom_count",
    "mode_force",
    "channel_from_json",
]


class CouplingKind(enum.Enum):
    SPIN_MAGNETIC = "spin"
    DIAMAGNETIC = "dia"
    INDUCED_DIPOLE = "induced_dipole"
    INTRINSIC_DIPOLE = "intrinsic_dipole"


@dataclass(frozen=True)
class CouplingChannel:
    """A coupling mechanism plus its field parameters.

    E_0 (V/m) and eta_e (V/m^2) describe the linear electric field of the
    dipole channels; d_0 (C m) is the intrinsic dipole moment. field_gradient
    optionally replaces the constant dE/dX of the intrinsic channel with a
    user-supplied profile dE/dX(x).
    """

    kind: CouplingKind
    E_0: float = 0.0
    eta_e: float = 0.0
    d_0: float = 0.0
    field_gradient: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        for name in ("E_0", "eta_e", "d_0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def spin_force(p: SplitProtocol, arm: Arm, t: float) -> float:
    """Splitting force on the NV site, mu * arm * b(t)."""
    return p.constants.mu * arm.sign * gradient_at(p, t)


def diamagnetic_force_total(p: SplitProtocol, material: MaterialModel, arm: Arm, t: float) -> float:
    """Whole-crystal diamagnetic repulsion at run time t (acts at the CoM)."""
    b = gradient_at(p, t)
    x = kinematics_at(p, arm, t).position
    return (material.susceptibility * p.mass / p.constants.mu_0) * (p.B_0 * b + b * b * x)


def per_atom_partition(f_total: float, n_atoms: int) -> float:
    """Uniform share of a whole-crystal force; the sum over atoms is exact."""
    if n_atoms < 1:
        raise ValueError("n_atoms must be at least 1")
    return f_total / n_atoms


def polarizability(eps_r: float, volume: float, n_atoms: float, eps_0: float) -> float:
    """Per-atom polarizability from the bulk dielectric constant.

    alpha = (3 eps_0 V / N) (eps_r - 1)/(eps_r + 2); the product alpha*N
    depends only on the volume and eps_r.
    """
    if not eps_r > 1:
        raise ValueError("eps_r must exceed 1")
    if not volume > 0:
        raise ValueError("volume must be positive")
    return (3.0 * eps_0 * volume / n_atoms) * (eps_r - 1.0) / (eps_r + 2.0)


def atom_count(mass: float) -> float:
    """Carbon atoms in the crystal; only per-atom reporting depends on it."""
    return mass / M_CARBON


def induced_dipole_force(
    p: SplitProtocol,
    material: MaterialModel,
    arm: Arm,
    t: float,
    E_0: float,
    eta_e: float,
) -> float:
    """Force on one polarized atom (evaluated at the CoM site) at run time t."""
    volume = p.mass / material.density
    n = atom_count(p.mass)
    alpha = polarizability(material.dielectric, volume, n, p.constants.eps_0)
    x = kinematics_at(p, arm, t).position
    return (2.0 * alpha / material.dielectric) * (E_0 * eta_e + eta_e**2 * x)


def _alpha_n(p: SplitProtocol, material: MaterialModel) -> float:
    """alpha * N_atoms, which is what every summed dipole quantity uses."""
    volume = p.mass / material.density
    return 3.0 * p.constants.eps_0 * volume * (material.dielectric - 1.0) / (material.dielectric + 2.0)


@dataclass(frozen=True)
class ModeForce:
    """Per-mode drive f_q(t) for one channel over one protocol.

    Evaluators take protocol-local time in [0, delta_t] and vanish outside.
    arm_segments/delta_segments expose the piecewise-quadratic representation
    when one exists (None for the intrinsic-dipole hook), which is what the
    exact Fourier and Duhamel paths consume.
    """

    channel: CouplingChannel
    protocol: SplitProtocol
    material: MaterialModel
    dia_variant: str = "literal"

    def __post_init__(self):
        if self.dia_variant not in ("literal", "paper"):
            raise ValueError("dia_variant must be 'literal' or 'paper'")

    # -- piecewise representations -------------------------------------------------

    def _build(self, const, scale) -> SegmentedDrive:
        edges, q, qd, curv = self.protocol.trajectory_arrays()
        return SegmentedDrive(
            edges=edges,
            const=np.asarray(const, dtype=float),
            scale=np.asarray(scale, dtype=float),
            q=q,
            qd=qd,
            curv=curv,
        )

    def arm_drive(self, arm: Arm) -> Optional[SegmentedDrive]:
        """f_q of one arm as a SegmentedDrive, or None for the field hook."""
        p, mat, ch = self.protocol, self.material, self.channel
        sqrt_m = math.sqrt(p.mass)
        grads = p.segment_gradients()
        zeros = np.zeros_like(grads)
        kind = ch.kind
        if kind is CouplingKind.SPIN_MAGNETIC:
            return self._build(p.constants.mu * arm.sign / sqrt_m * grads, zeros)
        if kind is CouplingKind.DIAMAGNETIC:
            pref = mat.susceptibility * sqrt_m / p.constants.mu_0
            return self._build(pref * p.B_0 * grads, pref * self._dia_b2(grads) * arm.sign)
        if kind is CouplingKind.INDUCED_DIPOLE:
            pref = 2.0 * _alpha_n(p, mat) / (mat.dielectric * sqrt_m)
            return self._build(
                pref * ch.E_0 * ch.eta_e + zeros, pref * ch.eta_e**2 * arm.sign + zeros
            )
        if kind is CouplingKind.INTRINSIC_DIPOLE:
            if ch.field_gradient is not None:
                return None
            return self._build(ch.d_0 * ch.eta_e / sqrt_m + zeros, zeros)
        raise AssertionError(f"unhandled channel kind {kind}")

    def delta_drive(self) -> Optional[SegmentedDrive]:
        """Delta f_q = f_q^R - f_q^L as a SegmentedDrive, or None for the hook."""
        p, mat, ch = self.protocol, self.material, self.channel
        sqrt_m = math.sqrt(p.mass)
        grads = p.segment_gradients()
        zeros = np.zeros_like(grads)
        kind = ch.kind
        if kind is CouplingKind.SPIN_MAGNETIC:
            return self._build(2.0 * p.constants.mu / sqrt_m * grads, zeros)
        if kind is CouplingKind.DIAMAGNETIC:
            pref = mat.susceptibility * sqrt_m / p.constants.mu_0
            return self._build(zeros, 2.0 * pref * self._dia_b2(grads))
        if kind is CouplingKind.INDUCED_DIPOLE:
            pref = 2.0 * _alpha_n(p, mat) * ch.eta_e**2 / (mat.dielectric * sqrt_m)
            return self._build(zeros, 2.0 * pref + zeros)
        if kind is CouplingKind.INTRINSIC_DIPOLE:
            if ch.field_gradient is not None:
                return None
            return self._build(zeros, zeros)
        raise AssertionError(f"unhandled channel kind {kind}")

    def _dia_b2(self, grads: np.ndarray) -> np.ndarray:
        if self.dia_variant == "paper":
            # hold the gradient magnitude through the flight window
            return np.full_like(grads, self.protocol.eta_b**2)
        return grads**2

    # -- callable evaluators ---------------------------------------------------------

    def f_arm(self, t_local, arm: Arm):
        """f_q(t) for one arm; t_local measured from gradient onset."""
        drive = self.arm_drive(arm)
        if drive is not None:
            return drive(t_local)
        return self._hook_force(t_local, arm)

    def delta_f(self, t_local):
        """Delta f_q(t) = f_q^R(t) - f_q^L(t)."""
        drive = self.delta_drive()
        if drive is not None:
            return drive(t_local)
        return self._hook_force(t_local, RIGHT) - self._hook_force(t_local, LEFT)

    def _hook_force(self, t_local, arm: Arm):
        ch, p = self.channel, self.protocol
        grad = np.vectorize(ch.field_gradient, otypes=[float])
        t = np.asarray(t_local, dtype=float)
        x = arm.sign * p.right_arm_drive()(t)
        inside = (t >= 0.0) & (t <= p.delta_t)
        return np.where(inside, ch.d_0 * grad(x) / math.sqrt(p.mass), 0.0)

    def breakpoints(self) -> np.ndarray:
        """Drive breakpoints in local time, for quadrature subdivision."""
        return self.protocol.trajectory_arrays()[0]


def mode_force(
    channel: CouplingChannel,
    p: SplitProtocol,
    material: MaterialModel,
    dia_variant: str = "literal",
) -> ModeForce:
    return ModeForce(channel=channel, protocol=p, material=material, dia_variant=dia_variant)


_CHANNEL_KEYS = {"kind", "E_0", "eta_e", "d_0"}


def channel_from_json(doc: dict) -> CouplingChannel:
    """Channel configuration {kind, E_0?, eta_e?, d_0?}."""
    if not isinstance(doc, dict):
        raise ConfigError("channel document must be a JSON object")
    unknown = set(doc) - _CHANNEL_KEYS
    if unknown:
        raise ConfigError(f"unknown channel fields: {sorted(unknown)}")
    try:
        kind = CouplingKind(doc["kind"])
    except (KeyError, ValueError):
        raise ConfigError(
            f"channel kind must be one of {[k.value for k in CouplingKind]}"
        ) from None
    required = {
        CouplingKind.INDUCED_DIPOLE: ("E_0", "eta_e"),
        CouplingKind.INTRINSIC_DIPOLE: ("d_0", "E_0", "eta_e"),
    }.get(kind, ())
    missing = [k for k in required if k not in doc]
    if missing:
        raise ConfigError(f"channel kind {kind.value!r} requires fields {missing}")
    try:
        return CouplingChannel(
            kind=kind,
            E_0=float(doc.get("E_0", 0.0)),
            eta_e=float(doc.get("eta_e", 0.0)),
            d_0=float(doc.get("d_0", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
