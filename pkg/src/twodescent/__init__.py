"""Complete 2-descent on elliptic curves over Q with full rational 2-torsion."""

from .arith import REAL, F2Span, LocalPlace, SquareClass, hilbert_symbol, local_square_class
from .covering import BinaryQuartic, ConicPairModel, conic_to_quartic, is_locally_soluble, make_conic_pair, solve_conic
from .curve import CurveE2, CurveError, NotFullTwoTorsion, PointE, normalize
from .minred import TransformWitness, minimize, reduce
from .search import full_descent, search_quartic
from .selmer import SelmerElement, compute_selmer, delta_global, local_image

__all__ = [
    "REAL", "F2Span", "LocalPlace", "SquareClass", "hilbert_symbol", "local_square_class",
    "BinaryQuartic", "ConicPairModel", "conic_to_quartic", "is_locally_soluble", "make_conic_pair", "solve_conic",
    "CurveE2", "CurveError", "NotFullTwoTorsion", "PointE", "normalize",
    "TransformWitness", "minimize", "reduce",
    "full_descent", "search_quartic",
    "SelmerElement", "compute_selmer", "delta_global", "local_image",
]
__version__ = "0.1.0"
