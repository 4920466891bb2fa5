"""Post-processing plots for landauflow scenario runs.

Reads the manifest and CSV artifacts written by the simulation CLI and
renders the diagnostic panels: drive vs trap frequency, the meridional
mass-flux map, and the energy partition.  Display only; nothing is
recomputed here.
"""

from .render import FigureDataError, FigureSpec, RenderInfo, render, spec_from_manifest

__version__ = "0.1.0"
