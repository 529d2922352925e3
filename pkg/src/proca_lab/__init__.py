"""Discrete laboratory for the quantized Proca field on lattice spacetimes.

Modules:

* ``mesh``       periodic lattices and their Hodge complex
* ``spectral``   functions of Hodge Laplacians
* ``spacetime``  staggered spacetime grid, N, P, Q, κ and adjoints
* ``green``      retarded/advanced Green operators
* ``cauchy``     constrained Cauchy data, energy, symplectic form
* ``moller``     Møller operators between interpolated metrics
* ``states``     quasifree states, Wick expansion, frequency proxy
* ``cli``        scenario runner
"""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def bundled_scenario(name: str = "flat_1p1_small.json") -> Path:
    """Path of a scenario file shipped with the package."""
    return Path(str(resources.files(__name__) / "scenarios" / name))
