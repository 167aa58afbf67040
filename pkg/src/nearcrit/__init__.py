"""Near-critical random graphs: generation, core/kernel decomposition, and random-walk
mixing, hitting and conductance measurements."""

__version__ = "0.1.0"

from .errors import PreconditionError, ResourceCapError, TreeOverflowError  # noqa: E402
from .graph import MultiGraph, RootedTree  # noqa: E402
from .rng import ModelParams, RngStream, conjugate_mu  # noqa: E402

__all__ = [
    "MultiGraph",
    "RootedTree",
    "ModelParams",
    "RngStream",
    "conjugate_mu",
    "PreconditionError",
    "ResourceCapError",
    "TreeOverflowError",
]
