"""Fox H-function kernels, fractional operators and their composition rules."""

from hfrac.errors import (
    ConvergenceError,
    DivergentError,
    DomainError,
    DSLError,
    HFracError,
    InterpolationError,
    ParseError,
    PoleCollisionError,
    PoleError,
    RewriteError,
)
from hfrac.fracops import (
    HKernelOp,
    TestFunction,
    h_kernel_apply,
    hilfer_derivative,
    ik_integral,
    rl_derivative,
    rl_integral,
)
from hfrac.hfunction import HParams, check_convergence, eval_h, mellin_theta

__all__ = [
    "ConvergenceError",
    "DivergentError",
    "DomainError",
    "DSLError",
    "HFracError",
    "HKernelOp",
    "HParams",
    "InterpolationError",
    "ParseError",
    "PoleCollisionError",
    "PoleError",
    "RewriteError",
    "TestFunction",
    "check_convergence",
    "eval_h",
    "h_kernel_apply",
    "hilfer_derivative",
    "ik_integral",
    "mellin_theta",
    "rl_derivative",
    "rl_integral",
]
