"""Command-line interface: scenario runs, free-form sweeps, golden values.

Exit codes: 0 success, 2 configuration error, 3 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, NonConvergenceError
from .materials import load_material
from .oracle import golden_check
from .sweeps import ScenarioConfig, build_golden, run_scenario, scenario_config_from_json

_REPO_GOLDEN = Path(__file__).resolve().parents[2] / "golden" / "fig5.csv"


def _default_golden_path() -> Path:
    return _REPO_GOLDEN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonon-contrast",
        description="Phonon-induced contrast loss in a Stern-Gerlach matter-wave interferometer.",
    )
    parser.add_argument(
        "--material",
        default=None,
        help="material preset name or path to a material JSON file (overrides config)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario described by a JSON config")
    p_run.add_argument("config", help="path to the scenario config JSON")
    p_run.add_argument("--out", default=None, help="override the config's output directory")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel workers for grid scenarios")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="free-form contrast sweep over a parameter grid")
    p_sweep.add_argument("--grid", required=True, help="JSON file with the parameter grid")
    p_sweep.add_argument(
        "--channels", default="spin,dia", help="comma-separated channels (spin,dia,dipole)"
    )
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--eta-e", type=float, default=0.0, help="electric gradient for dipole rows")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_golden = sub.add_parser("golden", help="build or check the golden regression table")
    p_golden.add_argument("action", choices=["build", "check"])
    p_golden.add_argument("--file", default=None, help=f"golden CSV path (default {_REPO_GOLDEN})")
    p_golden.add_argument("--rel-drift", type=float, default=1e-9, help="allowed relative drift")
    p_golden.set_defaults(func=_cmd_golden)

    return parser


def _cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {args.config!r} is not valid JSON: {exc}") from exc
    cfg = scenario_config_from_json(doc)
    if args.out is not None:
        cfg = ScenarioConfig(cfg.scenario, cfg.material, args.out, cfg.params)
    if args.material is not None:
        cfg = ScenarioConfig(cfg.scenario, args.material, cfg.out_dir, cfg.params)
    summary = run_scenario(cfg, jobs=args.jobs)
    outputs = ", ".join(sorted(summary.get("outputs", {}).values()))
    print(f"{cfg.scenario}: wrote {outputs} (wall {summary['wall_time_s']:.2f} s)")
    return 0


def _cmd_sweep(args) -> int:
    try:
        with open(args.grid) as fh:
            grid = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read grid {args.grid!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"grid {args.grid!r} is not valid JSON: {exc}") from exc
    if not isinstance(grid, dict):
        raise ConfigError("grid document must be a JSON object")
    channels = [c.strip() for c in args.channels.split(",") if c.strip()]
    if not channels:
        raise ConfigError("no channels requested")
    params = dict(grid)
    params["channels"] = channels
    params["eta_e"] = args.eta_e
    cfg = ScenarioConfig(
        scenario="custom_sweep",
        material=args.material or "diamond",
        out_dir=args.out,
        params=params,
    )
    summary = run_scenario(cfg, jobs=args.jobs)
    print(f"sweep: {summary['rows']} rows -> {summary['outputs']['sweep']}")
    return 0


def _cmd_golden(args) -> int:
    path = Path(args.file) if args.file else _default_golden_path()
    material = load_material(args.material or "diamond")
    if args.action == "build":
        path.parent.mkdir(parents=True, exist_ok=True)
        n = build_golden(path, material)
        print(f"golden build: {n} rows -> {path}")
        return 0
    if not path.exists():
        raise ConfigError(f"golden file {path} does not exist (run 'golden build' first)")
    ok, max_drift, n = golden_check(path, material, rel_drift=args.rel_drift)
    status = "OK" if ok else "FAIL"
    print(f"golden check: {n} rows, max drift {max_drift:.3e} -> {status}")
    return 0 if ok else 3


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NonConvergenceError as exc:
        print(f"numeric non-convergence: {exc}", file=sys.stderr)
        return 3
    except RuntimeError as exc:
        if isinstance(exc.__cause__, NonConvergenceError):
            print(f"numeric non-convergence: {exc}", file=sys.stderr)
            return 3
        raise


if __name__ == "__main__":
    sys.exit(main())
