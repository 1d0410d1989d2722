"""pdmsym: symbolic-numeric verification of planar position-dependent-mass
Schrodinger symmetry classes.
"""

from .expr import (
    Expr, Rat, Var, Param, Add, Mul, Pow, Fun, UFunc,
    simplify, diff, substitute, substitute_function, eval_expr, is_zero,
    PROVEN_ZERO, PROVEN_NONZERO, UNDECIDED_ZERO,
)
from .parsing import parse, to_text, to_prefix

__version__ = "0.1.0"

__all__ = [
    "Expr", "Rat", "Var", "Param", "Add", "Mul", "Pow", "Fun", "UFunc",
    "simplify", "diff", "substitute", "substitute_function", "eval_expr",
    "is_zero", "PROVEN_ZERO", "PROVEN_NONZERO", "UNDECIDED_ZERO",
    "parse", "to_text", "to_prefix", "__version__",
]
