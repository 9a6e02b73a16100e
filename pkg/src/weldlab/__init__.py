"""Conformal welding of circle diffeomorphisms and the associated period matrices."""

__version__ = "0.1.0"
