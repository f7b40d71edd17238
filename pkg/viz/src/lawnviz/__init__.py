"""Rendering companion for sphere lawn optimization outputs.

Consumes the optimizer's documented file formats (grid text, lawn JSON,
sweep CSV) and produces PNG images: site-dot sphere maps in Mollweide or
orthographic projection, and probability/gap curve plots.
"""

from .formats import (
    FormatError,
    LawnFile,
    SWEEP_COLUMNS,
    read_grid,
    read_lawn,
    read_sweep,
    rle_decode,
)
from .render import (
    PROJECTIONS,
    REGION_COLORS,
    RenderSpec,
    render_curve,
    render_lawn,
    site_colors,
)

__version__ = "0.1.0"

__all__ = [
    "FormatError",
    "LawnFile",
    "PROJECTIONS",
    "REGION_COLORS",
    "RenderSpec",
    "SWEEP_COLUMNS",
    "read_grid",
    "read_lawn",
    "read_sweep",
    "render_curve",
    "render_lawn",
    "rle_decode",
    "site_colors",
]
