"""symcert: certified symmetry reduction for nested polyhedral central configurations.

The package block-diagonalizes the parametric linear system that
characterizes two-shell polyhedral central configurations under the full
symmetry group of the shared polyhedron, and then proves sign and
root-count facts about the resulting blocks in exact arithmetic,
emitting machine-replayable certificates.
"""

from .fields import FieldElement, FieldTower, format_exact, parse_exact, sign_of

__version__ = "0.1.0"

__all__ = [
    "FieldElement",
    "FieldTower",
    "format_exact",
    "parse_exact",
    "sign_of",
    "__version__",
]
