"""Boundary representations of free groups acting on their trees.

Exact combinatorics of the visual boundary, logarithmic Sobolev energies,
Zygmund-class norms and the boundary representations with the quantities
controlling their growth, plus a batch experiment driver (:mod:`boundary_lab.lab`).
"""

from .errors import (
    DegenerateFit,
    DepthTooShallow,
    DimensionTooLarge,
    LabError,
    NeedsRefinement,
    NonConstantDistance,
    ZeroFunction,
)
from .word_tree import BoundaryPoint, Cylinder, ReducedWord, ScaleExponent, TreeBoundarySpace
from .functions_orlicz import CylinderFunction
from .boundary_reps import RepParams, apply_rep

__all__ = [
    "BoundaryPoint",
    "Cylinder",
    "CylinderFunction",
    "DegenerateFit",
    "DepthTooShallow",
    "DimensionTooLarge",
    "LabError",
    "NeedsRefinement",
    "NonConstantDistance",
    "ReducedWord",
    "RepParams",
    "ScaleExponent",
    "TreeBoundarySpace",
    "ZeroFunction",
    "apply_rep",
]
