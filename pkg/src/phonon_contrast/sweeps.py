"""Scenario runner and grid sweeps: the computational half of the CLI.

Every scenario writes delimited text with fixed headers and repr-formatted
floats, so identical configurations produce byte-identical files at any
worker count. Rendering is out of scope here; the figures package consumes
these files.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from contourpy import contour_generator

from . import contrast as ct
from .dynamics import mode_time_series, write_time_series
from .errors import ConfigError
from .materials import DIAMOND, MaterialModel, TruncationPolicy, load_material
from .oracle import golden_default_grid, golden_table_build
from .protocol import check_gradient_budget, from_target

__all__ = [
    "CONTRAST_HEADER",
    "OVERLAY_HEADER",
    "DIPOLE_HEADER",
    "ScenarioConfig",
    "scenario_config_from_json",
    "evaluate_contrast_row",
    "contrast_row_line",
    "sweep",
    "feasibility_contour",
    "gradient_cap_curve",
    "run_scenario",
]

CONTRAST_HEADER = "channel,M,delta_x,delta_t,flight_fraction,T,neg_ln_c,contrast,modes_used,fidelity"
OVERLAY_HEADER = "kind,segment,x,y"
DIPOLE_HEADER = "eta_e,prefactor_sq,neg_ln_c,contrast"

SCENARIO_NAMES = (
    "occupation",
    "phase_space",
    "contrast_curves",
    "contrast_maps",
    "dipole_estimate",
    "custom_sweep",
)

_KNOWN_CHANNELS = ("spin", "dia", "dipole")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    material: str = "diamond"
    out_dir: str = "out"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario not in SCENARIO_NAMES:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIO_NAMES}")


def scenario_config_from_json(doc) -> ScenarioConfig:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict):
        raise ConfigError("scenario config must be a JSON object")
    unknown = set(doc) - {"scenario", "material", "out_dir", "params"}
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    if "scenario" not in doc:
        raise ConfigError("config needs a 'scenario' field")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("'params' must be an object")
    return ScenarioConfig(
        scenario=doc["scenario"],
        material=doc.get("material", "diamond"),
        out_dir=doc.get("out_dir", "out"),
        params=params,
    )


def _fmt(x) -> str:
    return repr(float(x))


def evaluate_contrast_row(
    channel: str,
    mass: float,
    delta_x: float,
    delta_t: float,
    flight_fraction: float,
    temperature: float,
    material: MaterialModel = DIAMOND,
    policy: TruncationPolicy = TruncationPolicy(),
    eta_e: float = 0.0,
    gamma_sq: float | None = None,
) -> dict:
    """One contrast evaluation, returned as a flat row dict."""
    p = from_target(mass, delta_x, delta_t, flight_fraction)
    if channel == "spin":
        report = ct.ln_contrast_spin(p, material, temperature, policy, gamma_sq=gamma_sq)
    elif channel == "dia":
        report = ct.ln_contrast_dia(p, material, temperature, policy, gamma_sq=gamma_sq)
    elif channel == "dipole":
        report = ct.ln_contrast_induced_dipole(p, material, temperature, eta_e, policy)
    else:
        raise ConfigError(f"unknown channel {channel!r}; expected one of {_KNOWN_CHANNELS}")
    return {
        "channel": channel,
        "M": mass,
        "delta_x": delta_x,
        "delta_t": delta_t,
        "flight_fraction": flight_fraction,
        "T": temperature,
        "neg_ln_c": report.neg_ln_total,
        "contrast": report.contrast,
        "modes_used": report.modes_used,
        "fidelity": report.fidelity,
    }


def contrast_row_line(row: dict) -> str:
    return ",".join(
        [
            row["channel"],
            _fmt(row["M"]),
            _fmt(row["delta_x"]),
            _fmt(row["delta_t"]),
            _fmt(row["flight_fraction"]),
            _fmt(row["T"]),
            _fmt(row["neg_ln_c"]),
            _fmt(row["contrast"]),
            str(int(row["modes_used"])),
            row["fidelity"],
        ]
    )


def _row_task(task):
    idx, kwargs = task
    return idx, evaluate_contrast_row(**kwargs)


def sweep(points, channels, material=DIAMOND, policy=TruncationPolicy(), jobs: int = 1,
          eta_e: float = 0.0, gamma_sq=None):
    """Evaluate every (grid point, channel) pair; deterministic row order.

    points is a sequence of dicts with keys mass, delta_x, delta_t,
    flight_fraction, temperature. Returns row dicts ordered by (point index,
    channel index) independent of the worker count.
    """
    points = list(points)
    if not points:
        raise ConfigError("empty sweep grid")
    for ch in channels:
        if ch not in _KNOWN_CHANNELS:
            raise ConfigError(f"unknown channel {ch!r}; expected one of {_KNOWN_CHANNELS}")
    tasks = []
    for i, pt in enumerate(points):
        for j, ch in enumerate(channels):
            kwargs = dict(
                channel=ch,
                mass=pt["mass"],
                delta_x=pt["delta_x"],
                delta_t=pt["delta_t"],
                flight_fraction=pt["flight_fraction"],
                temperature=pt["temperature"],
                material=material,
                policy=policy,
                eta_e=eta_e,
                gamma_sq=gamma_sq,
            )
            tasks.append((i * len(channels) + j, kwargs))
    if jobs <= 1:
        results = [_row_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_row_task, t) for t in tasks]
            results = []
            for t, fut in zip(tasks, futures):
                try:
                    results.append(fut.result())
                except Exception as exc:
                    raise RuntimeError(
                        f"sweep failed at grid point {t[0]}: {t[1]['channel']} "
                        f"M={t[1]['mass']:g} delta_x={t[1]['delta_x']:g} "
                        f"delta_t={t[1]['delta_t']:g} T={t[1]['temperature']:g}: {exc}"
                    ) from exc
    results.sort(key=lambda r: r[0])
    return [row for _, row in results]


def _write_rows(path: Path, header: str, lines) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for line in lines:
            fh.write(line + "\n")


def feasibility_contour(x_vals, y_vals, z, threshold: float, log_x=False, log_y=False):
    """Marching-squares polylines of z(x, y) at the threshold.

    z is indexed [iy, ix]. Log-scaled axes interpolate in log10 coordinates.
    Returns (polylines, notice): a list of (N, 2) arrays in original units and
    None, or an empty list with a notice when the threshold is out of range.
    """
    x = np.asarray(x_vals, dtype=float)
    y = np.asarray(y_vals, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.shape != (len(y), len(x)):
        raise ValueError("z must have shape (len(y), len(x))")
    if not (np.nanmin(z) <= threshold <= np.nanmax(z)):
        return [], f"threshold {threshold:g} outside data range [{np.nanmin(z):g}, {np.nanmax(z):g}]"
    cx = np.log10(x) if log_x else x
    cy = np.log10(y) if log_y else y
    lines = contour_generator(x=cx, y=cy, z=z).lines(threshold)
    out = []
    for line in lines:
        pts = np.asarray(line, dtype=float)
        if log_x:
            pts[:, 0] = 10.0 ** pts[:, 0]
        if log_y:
            pts[:, 1] = 10.0 ** pts[:, 1]
        out.append(pts)
    return out, None


def gradient_cap_curve(kind: str, y_vals, fixed: float, cap: float,
                       flight_fraction: float = 0.0, constants=None) -> np.ndarray:
    """x(y) along which the required gradient equals the cap.

    kind "separation": x is delta_x at fixed mass; kind "mass": x is mass at
    fixed delta_x. y is delta_t. Uses eta_b = M dX / (2 mu tau_a^2) with
    tau_a = (1 - flight_fraction) delta_t / 4.
    """
    from .materials import CONSTANTS

    cst = constants or CONSTANTS
    y = np.asarray(y_vals, dtype=float)
    tau_a = (1.0 - flight_fraction) * y / 4.0
    if kind == "separation":
        x = cap * 2.0 * cst.mu * tau_a**2 / fixed
    elif kind == "mass":
        x = cap * 2.0 * cst.mu * tau_a**2 / fixed
    else:
        raise ValueError("kind must be 'separation' or 'mass'")
    return np.column_stack([x, y])


def _overlay_lines(polylines, cap_curve) -> list[str]:
    lines = []
    for seg_id, pts in enumerate(polylines):
        for xx, yy in pts:
            lines.append(f"loss_contour,{seg_id},{_fmt(xx)},{_fmt(yy)}")
    for xx, yy in cap_curve:
        lines.append(f"gradient_cap,0,{_fmt(xx)},{_fmt(yy)}")
    return lines


def _log_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    decades = math.log10(hi / lo)
    n = max(2, int(round(decades * per_decade)) + 1)
    return np.logspace(math.log10(lo), math.log10(hi), n)


def _merged_params(defaults: dict, params: dict, scenario: str) -> dict:
    unknown = set(params) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown params for scenario {scenario!r}: {sorted(unknown)}")
    merged = dict(defaults)
    merged.update(params)
    return merged


# -- scenarios ---------------------------------------------------------------------


def _series_scenario(cfg, material, out_dir, prefix: str):
    from .forces import CouplingChannel, CouplingKind

    defaults = {
        "mass": 1e-14,
        "delta_x": 1e-4,
        "delta_t": 1.0,
        "flight_fraction": 0.0,
        "temperature": 300.0,
        # nominally 2 MHz / 42 kHz; detuned by 513/512 because exact integer
        # tones are commensurate with tau_a = 0.25 s and sit on transfer zeros
        "freq_spin_hz": 2e6 * 513 / 512,
        "freq_dia_hz": 42e3 * 513 / 512,
        "n_samples": 2001,
        "tail_fraction": 0.2,
    }
    prm = _merged_params(defaults, cfg.params, cfg.scenario)
    p = from_target(prm["mass"], prm["delta_x"], prm["delta_t"], prm["flight_fraction"])
    omega_0 = ct.fundamental_omega(p, material)
    times = np.linspace(0.0, (1.0 + prm["tail_fraction"]) * p.delta_t, int(prm["n_samples"]))
    files = {}
    flags = {}
    for name, kind, freq in (
        ("spin", CouplingKind.SPIN_MAGNETIC, prm["freq_spin_hz"]),
        ("dia", CouplingKind.DIAMAGNETIC, prm["freq_dia_hz"]),
    ):
        omega = 2.0 * math.pi * freq
        series = mode_time_series(
            CouplingChannel(kind=kind), p, material, omega, prm["temperature"], times
        )
        path = out_dir / f"{prefix}_{name}.csv"
        write_time_series(path, series)
        files[name] = str(path)
        flags[name] = {"omega": omega, "sub_fundamental": bool(omega < omega_0)}
    return {
        "params": prm,
        "fundamental_omega": omega_0,
        "modes": flags,
        "outputs": files,
    }


def _run_occupation(cfg, material, out_dir):
    return _series_scenario(cfg, material, out_dir, "occupation")


def _run_phase_space(cfg, material, out_dir):
    return _series_scenario(cfg, material, out_dir, "phase_space")


def _run_contrast_curves(cfg, material, out_dir, jobs):
    defaults = {
        "masses": [1e-14, 1e-18],
        "temperatures": [4.0, 300.0],
        "delta_t": 1.0,
        "flight_fraction": 0.0,
        "delta_x_min": 1e-6,
        "delta_x_max": 1e-3,
        "per_decade": 16,
        "channels": ["spin", "dia"],
        "eta_e": 0.0,
    }
    prm = _merged_params(defaults, cfg.params, cfg.scenario)
    seps = _log_grid(prm["delta_x_min"], prm["delta_x_max"], prm["per_decade"])
    points = [
        {
            "mass": m,
            "delta_x": float(dx),
            "delta_t": prm["delta_t"],
            "flight_fraction": prm["flight_fraction"],
            "temperature": T,
        }
        for m in prm["masses"]
        for T in prm["temperatures"]
        for dx in seps
    ]
    rows = sweep(points, prm["channels"], material, jobs=jobs, eta_e=prm["eta_e"])
    path = out_dir / "contrast_curves.csv"
    _write_rows(path, CONTRAST_HEADER, [contrast_row_line(r) for r in rows])
    return {"params": prm, "rows": len(rows), "outputs": {"curves": str(path)}}


def _map_rows_to_grid(rows, x_key, x_vals, y_vals):
    z = np.empty((len(y_vals), len(x_vals)))
    it = iter(rows)
    for iy in range(len(y_vals)):
        for ix in range(len(x_vals)):
            z[iy, ix] = next(it)["neg_ln_c"]
    return z


def _run_contrast_maps(cfg, material, out_dir, jobs):
    defaults = {
        "map_mass": 2.25e-14,
        "map_delta_x": 1e-4,
        "temperature": 300.0,
        "flight_fraction": 0.0,
        "delta_x_min": 1e-6,
        "delta_x_max": 1e-2,
        "mass_min": 1e-18,
        "mass_max": 1e-11,
        "delta_t_min": 1e-3,
        "delta_t_max": 1.0,
        "per_decade": 16,
        "per_decade_time": 8,
        "threshold": 0.01,
        "eta_cap": 1e6,
    }
    prm = _merged_params(defaults, cfg.params, cfg.scenario)
    dts = _log_grid(prm["delta_t_min"], prm["delta_t_max"], prm["per_decade_time"])
    seps = _log_grid(prm["delta_x_min"], prm["delta_x_max"], prm["per_decade"])
    masses = _log_grid(prm["mass_min"], prm["mass_max"], prm["per_decade"])

    outputs = {}
    summaries = {}
    specs = [
        ("a", "spin", "separation", seps),
        ("b", "dia", "separation", seps),
        ("c", "spin", "mass", masses),
        ("d", "dia", "mass", masses),
    ]
    for map_id, channel, axis_kind, x_vals in specs:
        points = []
        for dt in dts:
            for x in x_vals:
                mass = prm["map_mass"] if axis_kind == "separation" else float(x)
                dx = float(x) if axis_kind == "separation" else prm["map_delta_x"]
                points.append(
                    {
                        "mass": mass,
                        "delta_x": dx,
                        "delta_t": float(dt),
                        "flight_fraction": prm["flight_fraction"],
                        "temperature": prm["temperature"],
                    }
                )
        rows = sweep(points, [channel], material, jobs=jobs, gamma_sq=1.0)
        map_path = out_dir / f"map_{map_id}.csv"
        _write_rows(map_path, CONTRAST_HEADER, [contrast_row_line(r) for r in rows])
        z = _map_rows_to_grid(rows, axis_kind, x_vals, dts)
        polylines, notice = feasibility_contour(
            x_vals, dts, z, prm["threshold"], log_x=True, log_y=True
        )
        fixed = prm["map_delta_x"] if axis_kind == "mass" else prm["map_mass"]
        cap = gradient_cap_curve(axis_kind, dts, fixed, prm["eta_cap"], prm["flight_fraction"])
        keep = (cap[:, 0] >= x_vals[0]) & (cap[:, 0] <= x_vals[-1])
        overlay_path = out_dir / f"overlay_{map_id}.csv"
        _write_rows(overlay_path, OVERLAY_HEADER, _overlay_lines(polylines, cap[keep]))
        outputs[f"map_{map_id}"] = str(map_path)
        outputs[f"overlay_{map_id}"] = str(overlay_path)
        summaries[map_id] = {
            "channel": channel,
            "axis": axis_kind,
            "contour_segments": len(polylines),
            "contour_notice": notice,
        }
    return {"params": prm, "maps": summaries, "outputs": outputs}


def _run_dipole_estimate(cfg, material, out_dir):
    defaults = {
        "mass": 1e-15,
        "delta_x": 1e-4,
        "delta_t": 1.0,
        "flight_fraction": 0.0,
        "temperature": 4.0,
        "eta_min": 1.0,
        "eta_max": 1e10,
        "n_eta": 21,
        "eta_single_charge": 30.0,
        "gamma_sq_max": 16.0,
    }
    prm = _merged_params(defaults, cfg.params, cfg.scenario)
    p = from_target(prm["mass"], prm["delta_x"], prm["delta_t"], prm["flight_fraction"])
    omega_0 = ct.fundamental_omega(p, material)
    etas = np.logspace(math.log10(prm["eta_min"]), math.log10(prm["eta_max"]), int(prm["n_eta"]))
    lines = []
    prefactors = []
    for eta in etas:
        inner = ct.induced_dipole_inner_no_gamma(p, material, omega_0, float(eta))
        prefactor = prm["gamma_sq_max"] * inner**2
        report = ct.ln_contrast_induced_dipole(p, material, prm["temperature"], float(eta))
        prefactors.append(prefactor)
        lines.append(
            ",".join([_fmt(eta), _fmt(prefactor), _fmt(report.neg_ln_total), _fmt(report.contrast)])
        )
    path = out_dir / "dipole_estimate.csv"
    _write_rows(path, DIPOLE_HEADER, lines)
    slope = np.polyfit(np.log10(etas), np.log10(prefactors), 1)[0]
    single = ct.ln_contrast_induced_dipole(
        p, material, prm["temperature"], prm["eta_single_charge"]
    )
    return {
        "params": prm,
        "fundamental_omega": omega_0,
        "fit_exponent": float(slope),
        "prefactor_at_unit_gradient": float(prefactors[0]),
        "neg_ln_c_single_charge": single.neg_ln_total,
        "outputs": {"estimate": str(path)},
    }


def _run_custom_sweep(cfg, material, out_dir, jobs):
    defaults = {
        "masses": [1e-14],
        "delta_xs": [1e-4],
        "delta_ts": [1.0],
        "flight_fractions": [0.0],
        "temperatures": [300.0],
        "channels": ["spin", "dia"],
        "eta_e": 0.0,
    }
    prm = _merged_params(defaults, cfg.params, cfg.scenario)
    for key in ("masses", "delta_xs", "delta_ts", "flight_fractions", "temperatures", "channels"):
        if not isinstance(prm[key], (list, tuple)) or len(prm[key]) == 0:
            raise ConfigError(f"param {key!r} must be a non-empty list")
    points = [
        {
            "mass": m,
            "delta_x": dx,
            "delta_t": dt,
            "flight_fraction": ff,
            "temperature": T,
        }
        for m, dx, dt, ff, T in itertools.product(
            prm["masses"], prm["delta_xs"], prm["delta_ts"],
            prm["flight_fractions"], prm["temperatures"],
        )
    ]
    rows = sweep(points, prm["channels"], material, jobs=jobs, eta_e=prm["eta_e"])
    path = out_dir / "sweep.csv"
    _write_rows(path, CONTRAST_HEADER, [contrast_row_line(r) for r in rows])
    budgets = [
        check_gradient_budget(from_target(pt["mass"], pt["delta_x"], pt["delta_t"],
                                          pt["flight_fraction"]), 1e6).passed
        for pt in points
    ]
    return {
        "params": prm,
        "rows": len(rows),
        "all_within_gradient_cap": bool(all(budgets)),
        "outputs": {"sweep": str(path)},
    }


def run_scenario(cfg: ScenarioConfig, jobs: int = 1) -> dict:
    """Execute a scenario; returns the summary dict (also written to disk)."""
    material = load_material(cfg.material)
    out_dir = Path(cfg.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out_dir} is not writable: {exc}") from exc

    start = time.perf_counter()
    if cfg.scenario == "occupation":
        body = _run_occupation(cfg, material, out_dir)
    elif cfg.scenario == "phase_space":
        body = _run_phase_space(cfg, material, out_dir)
    elif cfg.scenario == "contrast_curves":
        body = _run_contrast_curves(cfg, material, out_dir, jobs)
    elif cfg.scenario == "contrast_maps":
        body = _run_contrast_maps(cfg, material, out_dir, jobs)
    elif cfg.scenario == "dipole_estimate":
        body = _run_dipole_estimate(cfg, material, out_dir)
    elif cfg.scenario == "custom_sweep":
        body = _run_custom_sweep(cfg, material, out_dir, jobs)
    else:  # pragma: no cover - guarded by ScenarioConfig
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")

    summary = {
        "scenario": cfg.scenario,
        "material": material.name,
        "wall_time_s": time.perf_counter() - start,
        **body,
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def build_golden(path, material=DIAMOND, policy=TruncationPolicy()) -> int:
    return golden_table_build(golden_default_grid(), path, material, policy)
