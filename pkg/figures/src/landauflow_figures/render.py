"""Panel rendering from scenario CSV artifacts.

Three panels, each fed by one CSV kind from the run manifest:

    a  trajectory.csv   drive b(t) overlaid with the trap frequency Gamma(t)
    b  fluxmap.csv      meridional mass flux rho*v over the (t, y) plane
    c  energy.csv       energy partition and the excess above the adjusted level

The renderer validates headers before opening any output and writes the
image atomically, so a failed render never leaves a partial file.  Output is
rasterized at a fixed DPI; rendering the same inputs twice produces
byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FigureDataError", "FigureSpec", "RenderInfo", "render", "spec_from_manifest"]

PANELS = ("a", "b", "c")
DPI = 150

REQUIRED_COLUMNS = {
    "a": ("t", "b", "gamma"),
    "b": ("t", "y", "rho_v"),
    "c": ("t", "E_kx", "E_ky", "E_Q", "E_total", "excess"),
}


class FigureDataError(ValueError):
    """Missing or malformed input data for a figure."""


@dataclass
class FigureSpec:
    """What to draw: one CSV path per requested panel plus the output path."""

    panels: tuple
    csv_paths: dict          # panel letter -> csv path
    output_path: str
    axis_labels: dict = field(default_factory=dict)  # panel -> (xlabel, ylabel)

    def __post_init__(self):
        bad = [p for p in self.panels if p not in PANELS]
        if bad:
            raise FigureDataError(f"unknown panels {bad}; available: {list(PANELS)}")
        missing = [p for p in self.panels if p not in self.csv_paths]
        if missing:
            raise FigureDataError(
                f"no input CSV available for panels {missing}; the run that "
                "produced the manifest did not write the matching artifact")


@dataclass
class RenderInfo:
    """What was drawn, for callers that want to verify without reparsing."""

    output_path: str
    panels: tuple
    series: dict             # panel letter -> list of plotted series labels


_KIND_TO_PANEL = {"trajectory": "a", "fluxmap": "b", "energy": "c"}


def spec_from_manifest(manifest_path, panels="all", output_path="fig.png") -> FigureSpec:
    """Build a FigureSpec from a scenario manifest, resolving CSVs by kind."""
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FigureDataError(f"cannot read manifest {manifest_path}: {exc}") from exc
    if panels == "all" or panels == ("all",):
        wanted = None
    else:
        wanted = tuple(panels)
    csv_paths = {}
    for entry in manifest.get("files", []):
        panel = _KIND_TO_PANEL.get(entry.get("kind"))
        if panel is not None:
            csv_paths[panel] = str(manifest_path.parent / entry["path"])
    available = tuple(p for p in PANELS if p in csv_paths)
    selected = available if wanted is None else wanted
    if not selected:
        raise FigureDataError(
            f"manifest {manifest_path} lists no renderable CSV artifacts")
    return FigureSpec(panels=selected, csv_paths=csv_paths, output_path=str(output_path))


def read_columns(path, required) -> dict:
    """Load the required columns of a CSV, complaining by column name."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FigureDataError(f"{path} has no header row") from None
            missing = [c for c in required if c not in header]
            if missing:
                raise FigureDataError(
                    f"{path} is missing required column(s) {missing}; found {header}")
            idx = [header.index(c) for c in required]
            rows = [[float(row[i]) for i in idx] for row in reader if row]
    except OSError as exc:
        raise FigureDataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise FigureDataError(f"{path} contains a header but no data rows")
    data = np.asarray(rows, dtype=float)
    return {name: data[:, k] for k, name in enumerate(required)}


def _draw_drive_panel(ax, data, labels):
    ax.plot(data["t"], data["b"], color="#888888", lw=1.4, ls="--", label="b(t)")
    ax.plot(data["t"], data["gamma"], color="#1f4e9c", lw=1.4, label="Gamma(t)")
    xlabel, ylabel = labels.get("a", ("t", "trap frequency"))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(loc="best", frameon=False)
    return ["b(t)", "Gamma(t)"]


def _draw_flux_panel(ax, fig, data, labels):
    t = np.unique(data["t"])
    y = np.unique(data["y"])
    flux = np.full((y.size, t.size), np.nan)
    ti = np.searchsorted(t, data["t"])
    yi = np.searchsorted(y, data["y"])
    flux[yi, ti] = data["rho_v"]
    scale = np.nanmax(np.abs(flux)) or 1.0
    mesh = ax.pcolormesh(t, y, flux, cmap="RdBu_r", vmin=-scale, vmax=scale,
                         shading="nearest", rasterized=True)
    fig.colorbar(mesh, ax=ax, label="rho v")
    xlabel, ylabel = labels.get("b", ("t", "y"))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return ["rho v"]


def _draw_energy_panel(ax, data, labels):
    series = []
    for name, style in (("E_total", {"color": "black", "lw": 1.6}),
                        ("E_kx", {"color": "#c23b22", "lw": 1.1}),
                        ("E_ky", {"color": "#2a9d8f", "lw": 1.1}),
                        ("E_Q", {"color": "#7a5195", "lw": 1.1}),
                        ("excess", {"color": "#888888", "lw": 1.1, "ls": ":"})):
        ax.plot(data["t"], data[name], label=name, **style)
        series.append(name)
    xlabel, ylabel = labels.get("c", ("t", "energy"))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(loc="best", frameon=False, ncols=3, fontsize=8)
    return series


def render(spec: FigureSpec) -> RenderInfo:
    """Draw the requested panels into one stacked raster image.

    All inputs are read and validated before the figure file is opened, and
    the image is moved into place atomically: on error no file appears.
    """
    loaded = {p: read_columns(spec.csv_paths[p], REQUIRED_COLUMNS[p])
              for p in spec.panels}

    fig, axes = plt.subplots(len(spec.panels), 1,
                             figsize=(7.0, 2.7 * len(spec.panels)),
                             constrained_layout=True, squeeze=False)
    series = {}
    try:
        for ax, panel in zip(axes[:, 0], spec.panels):
            if panel == "a":
                series[panel] = _draw_drive_panel(ax, loaded[panel], spec.axis_labels)
            elif panel == "b":
                series[panel] = _draw_flux_panel(ax, fig, loaded[panel], spec.axis_labels)
            else:
                series[panel] = _draw_energy_panel(ax, loaded[panel], spec.axis_labels)

        out = Path(spec.output_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        tmp_fd, tmp_name = tempfile.mkstemp(suffix=".png", dir=out.parent)
        try:
            with os.fdopen(tmp_fd, "wb") as fh:
                fig.savefig(fh, format="png", dpi=DPI,
                            metadata={"Software": "landauflow-figures"})
            os.replace(tmp_name, out)
        except BaseException:
            os.unlink(tmp_name)
            raise
    finally:
        plt.close(fig)
    return RenderInfo(output_path=str(out), panels=spec.panels, series=series)
