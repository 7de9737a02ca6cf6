"""Phonon-induced contrast loss in a Stern-Gerlach matter-wave interferometer.

Core layout: materials (constants, crystal geometry, mode ladder), protocol
(gradient schedule and CoM kinematics), forces (per-mode drives), dynamics
(thermal states and Duhamel evolution), contrast (closed forms), oracle
(independent numeric validation), sweeps/cli (scenario runner).
"""

from .contrast import (
    ContrastReport,
    TransferSpectrum,
    asymptotic_ln_contrast,
    gamma,
    fundamental_omega,
    ln_contrast_dia,
    ln_contrast_induced_dipole,
    ln_contrast_spin,
    mode_ln_contrast,
    transfer_dia_sq,
    transfer_spectrum,
    transfer_spin_sq,
)
from .dynamics import (
    ModeState,
    ThermalState,
    arm_deltas,
    characteristic_widths,
    coth,
    evolve_mode,
    mode_time_series,
    occupation_at,
    thermal_occupation,
    wigner_density,
)
from .errors import ConfigError, NonConvergenceError
from .forces import (
    CouplingChannel,
    CouplingKind,
    ModeForce,
    atom_count,
    diamagnetic_force_total,
    induced_dipole_force,
    mode_force,
    per_atom_partition,
    polarizability,
    spin_force,
)
from .materials import (
    CONSTANTS,
    DIAMOND,
    MaterialModel,
    ModeLadder,
    PhysicalConstants,
    TruncationPolicy,
    cube_side,
    fundamental_tone,
    load_material,
    material_from_json,
    mode_ladder,
    sum_over_modes,
)
from .oracle import (
    OracleResult,
    duhamel_recheck,
    fourier_transfer_numeric,
    golden_check,
    golden_table_build,
    relative_error,
    transfer_oracle_sq,
)
from .protocol import (
    LEFT,
    RIGHT,
    Arm,
    SplitProtocol,
    check_gradient_budget,
    from_target,
    gradient_at,
    kinematics_at,
    protocol_from_json,
    protocol_to_json,
    separation_at,
)
from .sweeps import ScenarioConfig, feasibility_contour, run_scenario, sweep

__version__ = "0.1.0"
