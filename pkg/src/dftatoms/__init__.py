"""Mathematical density-functional solvers for atoms and finite orbital models."""

__version__ = "0.1.0"
