import json
import shutil
import subprocess

import pytest

CLI = shutil.which("phonon-contrast")


def _run_scenario(out_dir, scenario, params):
    cfg = out_dir / f"{scenario}.json"
    cfg.write_text(json.dumps({
        "scenario": scenario,
        "out_dir": str(out_dir / scenario),
        "params": params,
    }))
    subprocess.run([CLI, "run", str(cfg)], check=True, capture_output=True)
    return out_dir / scenario


@pytest.fixture(scope="session")
def cli_outputs(tmp_path_factory):
    """Reduced-size runs of every scenario through the primary CLI."""
    if CLI is None:
        pytest.skip("phonon-contrast CLI not installed")
    root = tmp_path_factory.mktemp("cli_outputs")
    dirs = {
        "occupation": _run_scenario(root, "occupation", {"n_samples": 201}),
        "phase_space": _run_scenario(root, "phase_space", {"n_samples": 201}),
        "contrast_curves": _run_scenario(root, "contrast_curves", {"per_decade": 4}),
        "contrast_maps": _run_scenario(
            root, "contrast_maps", {"per_decade": 4, "per_decade_time": 3}
        ),
        "dipole_estimate": _run_scenario(root, "dipole_estimate", {"n_eta": 9}),
    }
    return dirs
