"""Numerical toolkit for the Reeb dynamics of a sphere built from an
open book with a left-handed twist: contact-condition checks, closed
orbit families and their degrees, the explicit finite-energy plane and
its energy identity, and the kernel count of the linearized operator.
"""

from . import cli, config, energy, geometry, lincr, orbits, plane, profiles
from . import index

__version__ = "0.1.0"

__all__ = ["cli", "config", "energy", "geometry", "index", "lincr",
           "orbits", "plane", "profiles", "__version__"]
