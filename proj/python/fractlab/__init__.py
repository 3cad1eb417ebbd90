"""Numerical laboratory for parameterized contracting interval systems.

The heavy lifting lives in the compiled `_core` module; see the `fractlab`
command-line tool for batch runs and file outputs.
"""

from ._core import (
    AffineFamily,
    blender_summary,
    jet_dimension,
    rng_stream,
    uniform_dimension,
)

__all__ = [
    "AffineFamily",
    "blender_summary",
    "jet_dimension",
    "rng_stream",
    "uniform_dimension",
]

__version__ = "0.1.0"
