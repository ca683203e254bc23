"""Energy-efficient relay routing over randomly deployed LEO constellations."""

from .params import SystemParams, load_config
from .planner import DecisionVars, RouteKind

__all__ = ["SystemParams", "load_config", "DecisionVars", "RouteKind"]
__version__ = "0.1.0"
