"""Expression-program evaluation with a compiled fast path.

At import time this package selects the compiled kernel if the extension
built, otherwise the pure-Python lane.  Callers can also pin a lane
explicitly (the simulator's ``backend`` option and the benchmark do).
"""

from __future__ import annotations

from . import _pure
from .program import Program, compile_expr

try:
    from . import _kernel  # type: ignore[attr-defined]

    NATIVE_AVAILABLE = True
    Evaluator = _kernel.Evaluator
except ImportError:  # extension not built; pure lane only
    _kernel = None
    NATIVE_AVAILABLE = False
    Evaluator = None

run_pure = _pure.run_program


def run_native(program: Program, values, arena, arr_off, arr_len, stack) -> int:
    """Evaluate on the compiled kernel; only valid when program.kernel_ok."""
    ops, a, b, masks = program.native_arrays()
    return _kernel.run_program(ops, a, b, masks, values, arena, arr_off, arr_len, stack)


def default_lane() -> str:
    return "native" if NATIVE_AVAILABLE else "pure"


__all__ = [
    "Evaluator",
    "Program",
    "compile_expr",
    "run_pure",
    "run_native",
    "NATIVE_AVAILABLE",
    "default_lane",
]
