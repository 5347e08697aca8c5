"""Simplicial groups, free resolutions and cubical homotopy fibres, with
exact integral homology and seeded verification suites."""

from . import chainlab, cube, freegrp, homology, resolve, simp

__version__ = "0.1.0"

__all__ = ["chainlab", "cube", "freegrp", "homology", "resolve", "simp", "__version__"]
