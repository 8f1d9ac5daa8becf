"""rigidlab: a numerical laboratory for boundary rigidity of holomorphic maps.

Submodules
----------
domain     bounded domains in C^d and their Euclidean boundary geometry
kobayashi  exact model invariant metrics and certified two-sided bounds
cgeo       complex geodesics, good left inverses, boundary probes
schwarz    disk self-maps, displacement inequalities, the disk pipeline
riemann    chart-based Riemannian engine and tangent-bundle estimates
kahler     holomorphic curvature, bounded geometry, thresholds
rigidity   end-to-end pipelines with machine verdicts
cli        command-line front end
"""

from .intervals import DistInterval

__version__ = "0.1.0"

__all__ = ["DistInterval", "__version__"]
