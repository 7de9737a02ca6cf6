"""Physical constants, material properties, crystal geometry and the phonon mode ladder.

Frequencies are angular (rad/s) throughout the package; reporting layers expose
omega/2pi alongside where a plain frequency is more readable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "MaterialModel",
    "DIAMOND",
    "M_CARBON",
    "TruncationPolicy",
    "ModeLadder",
    "cube_side",
    "fundamental_tone",
    "mode_ladder",
    "sum_over_modes",
    "material_from_json",
    "load_material",
]

# Atomic mass of carbon, used only for per-atom reporting.
M_CARBON = 1.994e-26  # kg


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA constants plus the magnetic moment mu = g_lande * mu_b."""

    hbar: float = 1.054571817e-34   # J s
    k_B: float = 1.380649e-23       # J/K
    mu_0: float = 1.25663706212e-6  # T m/A
    eps_0: float = 8.8541878128e-12  # F/m
    mu_b: float = 9.27e-24          # J/T
    g_lande: float = 2.0

    def __post_init__(self):
        for name in ("hbar", "k_B", "mu_0", "eps_0", "mu_b", "g_lande"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def mu(self) -> float:
        """Magnetic moment of the embedded spin, g_lande * mu_b (J/T)."""
        return self.g_lande * self.mu_b


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class MaterialModel:
    """Bulk material parameters.

    susceptibility is the mass susceptibility chi_rho in m^3/kg, negative for
    diamagnets; dielectric is the relative constant eps_r (> 1).
    """

    name: str
    density: float        # kg/m^3
    sound_speed: float    # m/s
    susceptibility: float  # m^3/kg
    dielectric: float     # dimensionless

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError("density must be positive")
        if not self.sound_speed > 0:
            raise ValueError("sound_speed must be positive")
        if not self.dielectric > 1:
            raise ValueError("dielectric constant must exceed 1")


DIAMOND = MaterialModel(
    name="diamond",
    density=3.51e3,
    sound_speed=1.75e4,
    susceptibility=-6.2e-9,
    dielectric=5.7,
)

_MATERIAL_FIELDS = {"name", "density", "sound_speed", "susceptibility", "dielectric"}


def material_from_json(doc: dict) -> MaterialModel:
    """Build a MaterialModel from a JSON document; unknown fields are rejected."""
    unknown = set(doc) - _MATERIAL_FIELDS
    if unknown:
        raise ConfigError(f"unknown material fields: {sorted(unknown)}")
    missing = _MATERIAL_FIELDS - set(doc)
    if missing:
        raise ConfigError(f"missing material fields: {sorted(missing)}")
    try:
        return MaterialModel(
            name=str(doc["name"]),
            density=float(doc["density"]),
            sound_speed=float(doc["sound_speed"]),
            susceptibility=float(doc["susceptibility"]),
            dielectric=float(doc["dielectric"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_material(spec: str) -> MaterialModel:
    """Resolve a material by preset name or by path to a JSON file."""
    if spec == "diamond":
        return DIAMOND
    try:
        with open(spec) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"unknown material {spec!r} (not a preset, not a readable file)") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"material file {spec!r} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("material document must be a JSON object")
    return material_from_json(doc)


def cube_side(mass: float, material: MaterialModel) -> float:
    """Side length of the cube of the given mass, (M/rho)^(1/3)."""
    if not mass > 0:
        raise ValueError("mass must be positive")
    return (mass / material.density) ** (1.0 / 3.0)


def fundamental_tone(length: float, sound_speed: float) -> float:
    """Lowest chain-mode angular frequency pi*c/L (rad/s)."""
    if not length > 0:
        raise ValueError("length must be positive")
    if not sound_speed > 0:
        raise ValueError("sound speed must be positive")
    return math.pi * sound_speed / length


@dataclass(frozen=True)
class TruncationPolicy:
    """How many harmonics enter a mode sum.

    kind "fixed" takes exactly n_modes harmonics. kind "adaptive" accumulates
    blocks of block_size harmonics until a block adds less than rel_tol of the
    running total, capped at max_modes.
    """

    kind: str = "adaptive"
    n_modes: int | None = None
    rel_tol: float = 1e-12
    max_modes: int = 100_000
    block_size: int = 4096

    def __post_init__(self):
        if self.kind not in ("fixed", "adaptive"):
            raise ValueError(f"unknown truncation kind {self.kind!r}")
        if self.kind == "fixed":
            if self.n_modes is None or self.n_modes < 1:
                raise ValueError("fixed truncation needs n_modes >= 1")
        if self.max_modes < 1:
            raise ValueError("empty ladder request")


@dataclass(frozen=True)
class ModeLadder:
    """Harmonic ladder omega_n = n * omega_0 for n = 1..n_modes."""

    omega_0: float
    n_modes: int
    frequencies: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.omega_0 > 0:
            raise ValueError("omega_0 must be positive")
        if self.n_modes < 1:
            raise ValueError("empty ladder request")

    @property
    def frequencies_hz(self) -> np.ndarray:
        return self.frequencies / (2.0 * math.pi)


def _ladder(omega_0: float, n: int) -> ModeLadder:
    freqs = omega_0 * np.arange(1, n + 1, dtype=float)
    return ModeLadder(omega_0=omega_0, n_modes=n, frequencies=freqs)


def sum_over_modes(omega_0, policy, term_fn):
    """Accumulate term_fn(omega_array) over the harmonic ladder.

    term_fn maps an array of angular frequencies to same-shaped per-mode
    contributions. Returns (values, converged) where values is the
    concatenated per-mode array actually used.

    Adaptive accumulation is block-wise, so the stop criterion is a whole
    block contributing less than rel_tol of the running total; single-mode
    increments are not trusted because oscillatory factors can vanish at
    isolated harmonics.
    """
    if not omega_0 > 0:
        raise ValueError("omega_0 must be positive")
    if policy.kind == "fixed":
        values = np.asarray(term_fn(omega_0 * np.arange(1, policy.n_modes + 1, dtype=float)))
        return values, True

    blocks = []
    total = 0.0
    n_done = 0
    converged = False
    while n_done < policy.max_modes:
        hi = min(n_done + policy.block_size, policy.max_modes)
        ns = np.arange(n_done + 1, hi + 1, dtype=float)
        block = np.asarray(term_fn(omega_0 * ns))
        blocks.append(block)
        block_sum = float(np.sum(block))
        total += block_sum
        n_done = hi
        if abs(block_sum) <= policy.rel_tol * abs(total):
            converged = True
            break
    return np.concatenate(blocks), converged


def mode_ladder(omega_0: float, policy: TruncationPolicy, summand=None) -> ModeLadder:
    """Materialize the ladder selected by a truncation policy.

    Fixed policies need no summand. Adaptive policies determine the count from
    the running sum of `summand`, a callable on arrays of angular frequencies.
    """
    if not omega_0 > 0:
        raise ValueError("omega_0 must be positive")
    if policy.kind == "fixed":
        return _ladder(omega_0, policy.n_modes)
    if summand is None:
        raise ValueError("adaptive truncation needs a summand to watch")
    values, _ = sum_over_modes(omega_0, policy, summand)
    return _ladder(omega_0, len(values))
