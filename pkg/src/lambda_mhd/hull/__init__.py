"""Certified laminate decompositions of the lamination hull."""

from .constants import HullConstants, hull_constants
from .construct import (InRelativeInterior, Outside, RationalFrame,
                        decompose_ball, decompose_five, decompose_general,
                        decompose_rank_one, decompose_sym23, frame_coefficients,
                        frame_matrix, membership_u_rs, rational_frame)
from .tree import LaminateTree, branch, iter_nodes, leaf
from .verify import Report, verify_laminate

__all__ = [
    "HullConstants", "hull_constants", "InRelativeInterior", "Outside",
    "RationalFrame", "decompose_ball", "decompose_five", "decompose_general",
    "decompose_rank_one", "decompose_sym23", "frame_coefficients",
    "frame_matrix", "membership_u_rs", "rational_frame", "LaminateTree",
    "branch", "iter_nodes", "leaf", "Report", "verify_laminate",
]

from .serialize import dump_tree, load_tree, tree_from_json, tree_to_json  # noqa: E402

__all__ += ["dump_tree", "load_tree", "tree_from_json", "tree_to_json"]
