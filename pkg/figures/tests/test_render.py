import csv
import json
from collections import defaultdict

import pytest

from phonon_contrast_figures import FigureSpec, SchemaError, render, spec_from_json
from phonon_contrast_figures.cli import main
from phonon_contrast_figures.spec import CONTRAST_COLUMNS, read_csv

PNG_MAGIC = b"\x89PNG"


def _assert_png(path):
    assert path.exists()
    assert path.read_bytes()[:4] == PNG_MAGIC


def test_fig3_renders(cli_outputs, tmp_path):
    spec = FigureSpec(
        figure="fig3",
        inputs={
            "spin": str(cli_outputs["occupation"] / "occupation_spin.csv"),
            "dia": str(cli_outputs["occupation"] / "occupation_dia.csv"),
        },
        out=str(tmp_path / "fig3.png"),
    )
    _assert_png(render(spec))


def test_fig4_renders(cli_outputs, tmp_path):
    spec = FigureSpec(
        figure="fig4",
        inputs={
            "spin": str(cli_outputs["phase_space"] / "phase_space_spin.csv"),
            "dia": str(cli_outputs["phase_space"] / "phase_space_dia.csv"),
        },
        out=str(tmp_path / "fig4.png"),
    )
    _assert_png(render(spec))


def test_fig5_renders_and_orderings_hold(cli_outputs, tmp_path):
    curves_csv = cli_outputs["contrast_curves"] / "contrast_curves.csv"
    spec = FigureSpec(
        figure="fig5", inputs={"curves": str(curves_csv)}, out=str(tmp_path / "fig5.png")
    )
    _assert_png(render(spec))
    # the rendered data itself must carry the caption's ordering structure
    data = read_csv(curves_csv, CONTRAST_COLUMNS)
    by_key = defaultdict(dict)
    for ch, m, t, dx, loss in zip(
        data["channel"], data["M"], data["T"], data["delta_x"], data["neg_ln_c"]
    ):
        by_key[(m, t, dx)][ch] = loss
    assert by_key
    for losses in by_key.values():
        assert losses["spin"] > losses["dia"]  # spin above dia everywhere
    hot_cold = defaultdict(dict)
    for ch, m, t, dx, loss in zip(
        data["channel"], data["M"], data["T"], data["delta_x"], data["neg_ln_c"]
    ):
        hot_cold[(ch, m, dx)][t] = loss
    for losses in hot_cold.values():
        temps = sorted(losses)
        assert losses[temps[-1]] > losses[temps[0]]  # hot above cold


@pytest.mark.parametrize("map_id", ["a", "b", "c", "d"])
def test_fig6_renders(cli_outputs, tmp_path, map_id):
    maps = cli_outputs["contrast_maps"]
    spec = FigureSpec(
        figure=f"fig6{map_id}",
        inputs={
            "map": str(maps / f"map_{map_id}.csv"),
            "overlay": str(maps / f"overlay_{map_id}.csv"),
        },
        out=str(tmp_path / f"fig6{map_id}.png"),
    )
    _assert_png(render(spec))


def test_fig6_empty_contour_warns(cli_outputs, tmp_path):
    maps = cli_outputs["contrast_maps"]
    overlay = tmp_path / "overlay_cap_only.csv"
    lines = (maps / "overlay_a.csv").read_text().splitlines()
    kept = [lines[0]] + [l for l in lines[1:] if l.startswith("gradient_cap")]
    overlay.write_text("\n".join(kept) + "\n")
    spec = FigureSpec(
        figure="fig6a",
        inputs={"map": str(maps / "map_a.csv"), "overlay": str(overlay)},
        out=str(tmp_path / "fig6a_nocontour.png"),
    )
    with pytest.warns(UserWarning, match="no loss contour"):
        _assert_png(render(spec))


def test_dipole_renders(cli_outputs, tmp_path):
    spec = FigureSpec(
        figure="dipole",
        inputs={"estimate": str(cli_outputs["dipole_estimate"] / "dipole_estimate.csv")},
        out=str(tmp_path / "dipole.png"),
    )
    _assert_png(render(spec))


def test_rendering_is_deterministic(cli_outputs, tmp_path):
    curves_csv = cli_outputs["contrast_curves"] / "contrast_curves.csv"
    blobs = []
    for name in ("one.png", "two.png"):
        spec = FigureSpec(
            figure="fig5", inputs={"curves": str(curves_csv)}, out=str(tmp_path / name)
        )
        blobs.append(render(spec).read_bytes())
    assert blobs[0] == blobs[1]


def test_schema_mismatch_lists_offending_column(cli_outputs, tmp_path):
    broken = tmp_path / "broken.csv"
    with open(cli_outputs["contrast_curves"] / "contrast_curves.csv") as fh:
        rows = list(csv.reader(fh))
    rows[0][6] = "negative_log_contrast"
    with open(broken, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    spec = FigureSpec(
        figure="fig5", inputs={"curves": str(broken)}, out=str(tmp_path / "x.png")
    )
    with pytest.raises(SchemaError, match="negative_log_contrast"):
        render(spec)


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        FigureSpec(figure="fig99", inputs={}, out="x.png")
    with pytest.raises(ValueError, match="needs inputs"):
        FigureSpec(figure="fig5", inputs={}, out="x.png")
    with pytest.raises(ValueError, match="does not exist"):
        FigureSpec(figure="fig5", inputs={"curves": str(tmp_path / "nope.csv")}, out="x.png")
    with pytest.raises(ValueError, match="unknown spec fields"):
        spec_from_json({"figure": "fig5", "inputs": {}, "out": "x.png", "zoom": 2})


def test_cli_roundtrip(cli_outputs, tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({
        "figure": "fig5",
        "inputs": {"curves": str(cli_outputs["contrast_curves"] / "contrast_curves.csv")},
        "out": str(tmp_path / "cli_fig5.png"),
    }))
    assert main(["render", "--spec", str(spec_path)]) == 0
    _assert_png(tmp_path / "cli_fig5.png")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"figure": "fig5", "inputs": {}, "out": "x.png"}))
    assert main(["render", "--spec", str(bad)]) == 2
