"""q-Nekrasov functions, q-conformal blocks and q-isomonodromic tau functions."""
from .blocks import BlockParams, Cutoffs, conformal_block, connection_matrix
from .lax import LatticeWindow, LaxParams, fundamental_solution, tau
from .qspecial import QBase, ResonanceError
from .report import VerificationReport
from .series import TruncatedSeries

__all__ = [
    "BlockParams",
    "Cutoffs",
    "LatticeWindow",
    "LaxParams",
    "QBase",
    "ResonanceError",
    "TruncatedSeries",
    "VerificationReport",
    "conformal_block",
    "connection_matrix",
    "fundamental_solution",
    "tau",
]
__version__ = "0.1.0"
