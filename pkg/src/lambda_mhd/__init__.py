"""Wave cones, certified laminates, subsolutions and torus diagnostics for ideal MHD."""

from .algebra import (ElsasserState, State2D, State3D, from_elsasser, k_membership,
                      state_from_json, to_elsasser)
from .errors import (ConstraintViolated, DegenerateScale, FormatMismatch, FrameDegenerate,
                     LambdaMHDError, NontrivialityFailed, NoScaleFound, NotSolenoidal,
                     ParseError, PreconditionViolated)
from .hull import hull_constants, membership_u_rs, verify_laminate
from .pfld import PeriodicField, read_pfld, write_pfld
from .wavecone import cone_membership, cone_witness_numeric

__version__ = "0.1.0"

__all__ = [
    "ElsasserState", "State2D", "State3D", "from_elsasser", "to_elsasser",
    "k_membership", "state_from_json", "ConstraintViolated", "DegenerateScale",
    "FormatMismatch", "FrameDegenerate", "LambdaMHDError", "NontrivialityFailed",
    "NoScaleFound", "NotSolenoidal", "ParseError", "PreconditionViolated",
    "hull_constants", "membership_u_rs", "verify_laminate", "PeriodicField",
    "read_pfld", "write_pfld", "cone_membership", "cone_witness_numeric",
]
