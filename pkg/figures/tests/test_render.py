import json
import math
import os

import numpy as np
import pytest

from landauflow_figures.render import (
    FigureDataError,
    FigureSpec,
    read_columns,
    render,
    spec_from_manifest,
)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


@pytest.fixture()
def synthetic_run(tmp_path):
    """A hand-built run directory with the three CSV kinds and a manifest."""
    t = np.linspace(0.0, 4.0, 81)
    gamma = 1.0 + 0.3 * np.sin(2.0 * t) ** 2
    write_csv(tmp_path / "trajectory.csv",
              ["t", "b", "beta", "beta_dot", "gamma", "int_beta", "int_gamma"],
              np.column_stack([t, np.full_like(t, 1.2), 0 * t, 0 * t, gamma, 0 * t, t]))
    write_csv(tmp_path / "energy.csv",
              ["t", "b", "E_kx", "E_ky", "E_Q", "E_total", "excess"],
              np.column_stack([t, np.full_like(t, 1.2), 0.6 + 0 * t, 0.1 + 0 * t,
                               0.5 + 0 * t, 1.2 + 0 * t, 0.05 + 0 * t]))
    ys = np.linspace(-2.0, 2.0, 21)
    rows = [(ti, y, math.sin(ti) * y * math.exp(-y * y))
            for ti in t[::8] for y in ys]
    write_csv(tmp_path / "fluxmap.csv", ["t", "y", "rho_v"], rows)
    manifest = {
        "config": {"name": "synthetic"},
        "files": [
            {"path": "trajectory.csv", "kind": "trajectory", "sha256": "x"},
            {"path": "energy.csv", "kind": "energy", "sha256": "x"},
            {"path": "fluxmap.csv", "kind": "fluxmap", "sha256": "x"},
        ],
        "checks": [],
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    return path


class TestSpec:
    def test_from_manifest_resolves_kinds(self, synthetic_run):
        spec = spec_from_manifest(synthetic_run, panels="all",
                                  output_path=synthetic_run.parent / "fig.png")
        assert spec.panels == ("a", "b", "c")
        assert spec.csv_paths["a"].endswith("trajectory.csv")

    def test_missing_panel_artifact(self, synthetic_run):
        with pytest.raises(FigureDataError, match="panels"):
            FigureSpec(panels=("a",), csv_paths={}, output_path="x.png")

    def test_unknown_panel_rejected(self):
        with pytest.raises(FigureDataError, match="unknown panels"):
            FigureSpec(panels=("z",), csv_paths={"z": "x.csv"}, output_path="x.png")


class TestReadColumns:
    def test_missing_column_named(self, synthetic_run, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,b,E_kx,E_ky,EQ,E_total,excess\n0,1,1,1,1,1,0\n")
        with pytest.raises(FigureDataError, match="E_Q"):
            read_columns(path, ("t", "E_kx", "E_ky", "E_Q", "E_total", "excess"))

    def test_empty_csv_is_clean_error(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("t,b,E_kx,E_ky,E_Q,E_total,excess\n")
        with pytest.raises(FigureDataError, match="no data rows"):
            read_columns(path, ("t", "E_kx"))


class TestRender:
    def test_renders_all_panels_with_drive_overlay(self, synthetic_run, tmp_path):
        out = tmp_path / "fig.png"
        info = render(spec_from_manifest(synthetic_run, output_path=out))
        assert out.exists() and out.stat().st_size > 0
        assert info.panels == ("a", "b", "c")
        assert info.series["a"] == ["b(t)", "Gamma(t)"]
        assert "E_total" in info.series["c"]

    def test_rerender_is_byte_identical(self, synthetic_run, tmp_path):
        out = tmp_path / "fig.png"
        spec = spec_from_manifest(synthetic_run, output_path=out)
        render(spec)
        first = out.read_bytes()
        render(spec)
        assert out.read_bytes() == first

    def test_error_leaves_no_partial_file(self, synthetic_run, tmp_path):
        # truncate the energy CSV to header-only, then ask for panel c
        run_dir = synthetic_run.parent
        (run_dir / "energy.csv").write_text("t,b,E_kx,E_ky,E_Q,E_total,excess\n")
        out = tmp_path / "sub" / "fig.png"
        spec = spec_from_manifest(synthetic_run, panels=("c",), output_path=out)
        with pytest.raises(FigureDataError, match="no data rows"):
            render(spec)
        assert not out.exists()
        assert not list((tmp_path / "sub").glob("*.png")) if (tmp_path / "sub").exists() else True

    def test_panel_subset(self, synthetic_run, tmp_path):
        out = tmp_path / "fig_a.png"
        info = render(spec_from_manifest(synthetic_run, panels=("a",), output_path=out))
        assert info.panels == ("a",)
        assert out.exists()
