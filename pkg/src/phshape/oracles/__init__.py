"""Independent reference diagrams: closed forms and a cubical pipeline."""

from .analytic import arc_diagram, arc_points, comb_set, sierpinski_levels, sierpinski_points
from .cubical import GridField, cubical_diagram, cubical_persistence, grid_field
from .matching import MatchReport, match_diagrams

__all__ = [
    "GridField", "MatchReport", "arc_diagram", "arc_points", "comb_set", "cubical_diagram",
    "cubical_persistence", "grid_field", "match_diagrams", "sierpinski_levels",
    "sierpinski_points",
]
