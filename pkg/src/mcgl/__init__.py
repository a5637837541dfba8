"""Sparse graph Laplacian learning with the minimax concave penalty."""
from .graph_core import apply_L, apply_L_adjoint, edge_index, operator_norm, validate_cgl
from .metrics import EvalResult, f_score, relative_error
from .penalties import PenaltyParams, objective_P2
from .solver import SolveReport, SolverParams, solve, validate_params

__version__ = "0.1.0"
