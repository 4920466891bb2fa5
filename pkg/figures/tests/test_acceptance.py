"""End-to-end: render the built-in cycle scenarios from real run manifests,
consuming the simulation package only through its command line and files."""

import csv
import subprocess
import sys

import pytest

from landauflow_figures.cli import main as figures_main


def run_preset(name, out_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "landauflow.runner", "preset", name,
         "--out", str(out_dir), "--quiet"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out_dir / "manifest.json"


@pytest.fixture(scope="module")
def cycle_manifests(tmp_path_factory):
    base = tmp_path_factory.mktemp("runs")
    return {name: run_preset(name, base / name)
            for name in ("fig4_cycle", "fig5_marginal_cycle")}


def test_renders_cycle_panels_idempotently(cycle_manifests, tmp_path):
    for name, manifest in cycle_manifests.items():
        out = tmp_path / f"{name}.png"
        code = figures_main([str(manifest), "--panel", "all", "--out", str(out)])
        assert code == 0
        first = out.read_bytes()
        assert figures_main([str(manifest), "--panel", "all", "--out", str(out)]) == 0
        assert out.read_bytes() == first


def test_drive_panel_carries_both_series(cycle_manifests, tmp_path):
    from landauflow_figures.render import render, spec_from_manifest
    out = tmp_path / "a.png"
    info = render(spec_from_manifest(cycle_manifests["fig4_cycle"],
                                     panels=("a",), output_path=out))
    assert info.series["a"] == ["b(t)", "Gamma(t)"]


def test_marginal_cycle_energy_returns_to_baseline(cycle_manifests):
    # the rendered energy panel of the marginal cycle sits on its baseline at
    # the end: verify from the very CSV the figure was drawn from
    import json
    manifest = json.loads(cycle_manifests["fig5_marginal_cycle"].read_text())
    n0 = manifest["config"]["n0"]
    b0 = manifest["config"]["profile"]["b0"]
    run_dir = cycle_manifests["fig5_marginal_cycle"].parent
    with open(run_dir / "energy.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert abs(float(rows[-1]["excess"])) <= 1e-8
    # total energy back to the pre-cycle level (n0 + 1/2) b0
    assert float(rows[-1]["E_total"]) == pytest.approx((n0 + 0.5) * b0, abs=1e-8)
