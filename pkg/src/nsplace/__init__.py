"""Net-separation PCB placement.

The flow seeds component positions from Laplacian eigenvectors, runs a
momentum gradient placer on smoothed wirelength, bin density and a
max-margin net separation penalty, then legalizes with a mixed-integer
program.  Hot kernels come from a compiled extension when it is built and
fall back to NumPy otherwise; see :mod:`nsplace.kernels`.
"""
__version__ = "0.1.0"

from .design import (Board, Component, Design, DesignError, Net, PinDef, Placement,  # noqa: E402
                     parse_design, parse_placement, serialize_design, serialize_placement)
from .flow import RunConfig, run_flow  # noqa: E402

__all__ = ["Board", "Component", "Design", "DesignError", "Net", "PinDef", "Placement",
           "RunConfig", "parse_design", "parse_placement", "run_flow", "serialize_design",
           "serialize_placement", "__version__"]
