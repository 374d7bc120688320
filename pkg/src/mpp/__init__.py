"""Minimum perimeter polygons: exact cutting-plane solver, factor-3
approximation and an exhaustive oracle for small inputs."""

from .approx import approximate
from .instances import Instance, read_instance, uniform_instance
from .solver import SolveConfig, oracle, solve

__all__ = ["Instance", "SolveConfig", "approximate", "oracle", "read_instance", "solve", "uniform_instance"]
__version__ = "0.1.0"
