"""Periodic phase-field simulator for volume-preserving mean curvature flow."""

from .field import Grid, ScalarField, VectorField
from .model import Kind, ModelParams

__version__ = "0.1.0"
__all__ = ["Grid", "ScalarField", "VectorField", "Kind", "ModelParams"]
