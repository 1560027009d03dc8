"""Spherical analysis and heat kernels on noncompact symmetric spaces.

Submodules
----------
spacegeom   root data, Weyl groups, radial densities
cgamma      complex Gamma function (Lanczos)
harish      c-function, Plancherel density, b-function
spherical   spherical functions and the ground spherical function
heatkern    heat kernel, envelopes, concentration
convlab     long-time behaviour of the Laplace-Beltrami heat flow
solvlab     heat flow of the distinguished Laplacian on the solvable group
acceptance  acceptance criteria shared by tests and the CLI
cli         command line interface
"""

from .spacegeom import build_space, SpaceSpec, RootDatum
from .heatkern import HeatEngine, ConcentrationSpec
from .convlab import InitialDatum

__all__ = ["build_space", "SpaceSpec", "RootDatum", "HeatEngine", "ConcentrationSpec", "InitialDatum"]
__version__ = "0.1.0"
