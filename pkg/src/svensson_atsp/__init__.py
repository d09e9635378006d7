"""Exact-arithmetic ATSP approximation with runtime-certified bounds."""

from .core import CertificationError, Config, run
from .cover import compute_subtour_cover, verify_subtour_cover
from .harness import exact_opt, generate_laminar_instance, generate_unit_instance
from .instance import Backbone, from_unit_graph, load, store, validate
from .lp import certify_feasible, solve_atsp_lp
from .multigraph import Circuit, MultiDigraph

__version__ = "0.1.0"

__all__ = [
    "Backbone",
    "CertificationError",
    "Circuit",
    "Config",
    "MultiDigraph",
    "certify_feasible",
    "compute_subtour_cover",
    "exact_opt",
    "from_unit_graph",
    "generate_laminar_instance",
    "generate_unit_instance",
    "load",
    "run",
    "solve_atsp_lp",
    "store",
    "validate",
    "verify_subtour_cover",
]
