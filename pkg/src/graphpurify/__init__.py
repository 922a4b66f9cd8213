"""Exact recurrence and breeding purification of graph states, with a dense cross-check."""
from .diag import IDEAL, DiagState, NoiseParams, perfect_state, white_noise_from_x, white_noise_state
from .graphs import Coloring, Graph, build_graph, color_graph, derive_gj, ring, wheel
from .purification import merge_states, prepare_auxiliary, run_schedule, subprotocol_pj

__all__ = [
    "IDEAL",
    "Coloring",
    "DiagState",
    "Graph",
    "NoiseParams",
    "build_graph",
    "color_graph",
    "derive_gj",
    "merge_states",
    "perfect_state",
    "prepare_auxiliary",
    "ring",
    "run_schedule",
    "subprotocol_pj",
    "white_noise_from_x",
    "white_noise_state",
    "wheel",
]
