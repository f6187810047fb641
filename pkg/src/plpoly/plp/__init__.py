"""Parametric linear programming: construction, regions and the worklist solver."""
from .problem import PlpProblem, construct_hull, construct_projection
from .region import OptimalFunction, Region, Task, add_extra_point, check_covered, extract_region
from .solver import PlpConfig, PlpSolution, PlpSolver, convex_hull, project, solve

__all__ = [
    "PlpProblem", "construct_projection", "construct_hull",
    "OptimalFunction", "Region", "Task", "extract_region", "check_covered", "add_extra_point",
    "PlpConfig", "PlpSolver", "PlpSolution", "solve", "project", "convex_hull",
]
