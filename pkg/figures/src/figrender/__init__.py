"""Static figure renderer for opkrylov CSV artifacts."""

from .io import EmptyInputError, SchemaError
from .recipes import KINDS, FigureRecipe, build_figure, render

__all__ = [
    "EmptyInputError",
    "FigureRecipe",
    "KINDS",
    "SchemaError",
    "build_figure",
    "render",
]
