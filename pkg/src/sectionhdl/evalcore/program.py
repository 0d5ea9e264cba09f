"""Compilation of expression trees into flat stack programs.

The simulator evaluates every guard and right-hand side thousands of times;
walking the tree each time is the hot inner loop.  An expression is
compiled once into a postfix instruction list that two interchangeable
evaluators execute: a pure-Python one (any width) and a compiled kernel
(all node widths <= 64).  Both implement the width/wrap rules of
``expr.evaluate`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from ..errors import ElaborationError
from ..expr import (
    ArraySignal,
    Binary,
    Const,
    Expression,
    Index,
    Mux,
    Ref,
    Slice,
    Unary,
    mask_of,
)

OP_CONST = 0
OP_LOAD = 1
OP_LOADARR = 2
OP_BITSEL = 3
OP_SLICE = 4
OP_ADD = 5
OP_SUB = 6
OP_MUL = 7
OP_AND = 8
OP_OR = 9
OP_XOR = 10
OP_SHL = 11
OP_SHR = 12
OP_EQ = 13
OP_NE = 14
OP_LT = 15
OP_LE = 16
OP_GT = 17
OP_GE = 18
OP_NOT = 19
OP_NEG = 20
OP_MUX = 21

_BINARY_OPS = {
    "+": OP_ADD,
    "-": OP_SUB,
    "*": OP_MUL,
    "&": OP_AND,
    "|": OP_OR,
    "^": OP_XOR,
    "<<": OP_SHL,
    ">>": OP_SHR,
    "==": OP_EQ,
    "!=": OP_NE,
    "<": OP_LT,
    "<=": OP_LE,
    ">": OP_GT,
    ">=": OP_GE,
}

_U64_MAX = (1 << 64) - 1


@dataclass
class Program:
    """One compiled expression: postfix steps of (op, a, b, mask)."""

    steps: tuple[tuple[int, int, int, int], ...]
    max_stack: int
    kernel_ok: bool
    load_slots: frozenset[int]
    source: str  # rendered expression, for diagnostics
    _native: Optional[tuple] = field(default=None, repr=False)

    def native_arrays(self):
        """Numpy views of the step fields, built on first use."""
        if self._native is None:
            import numpy as np

            ops = np.array([s[0] for s in self.steps], dtype=np.int64)
            a = np.array([s[1] for s in self.steps], dtype=np.uint64)
            b = np.array([s[2] for s in self.steps], dtype=np.int64)
            masks = np.array([s[3] for s in self.steps], dtype=np.uint64)
            self._native = (ops, a, b, masks)
        return self._native


def compile_expr(
    e: Expression,
    slots: Mapping[str, int],
    arrays: Mapping[str, int],
) -> Program:
    steps: list[tuple[int, int, int, int]] = []
    loads: set[int] = set()
    depth = 0
    max_depth = 0
    wide = False

    def push(op: int, a: int = 0, b: int = 0, mask: int = 0, pops: int = 0):
        nonlocal depth, max_depth, wide
        steps.append((op, a, b, mask))
        depth += 1 - pops
        max_depth = max(max_depth, depth)
        if mask > _U64_MAX or a > _U64_MAX:
            wide = True

    def emit(node: Expression):
        if isinstance(node, Ref):
            slot = _slot_of(node.signal.name, slots)
            loads.add(slot)
            push(OP_LOAD, slot, 0, mask_of(node.width))
        elif isinstance(node, Const):
            push(OP_CONST, node.value, 0, mask_of(node.width))
        elif isinstance(node, Binary):
            emit(node.lhs)
            emit(node.rhs)
            push(_BINARY_OPS[node.op], 0, 0, mask_of(node.width), pops=2)
        elif isinstance(node, Unary):
            emit(node.operand)
            op = OP_NOT if node.op == "~" else OP_NEG
            push(op, 0, 0, mask_of(node.width), pops=1)
        elif isinstance(node, Index):
            if isinstance(node.base, ArraySignal):
                emit(node.index)
                arr_id = _slot_of(node.base.name, arrays)
                push(OP_LOADARR, arr_id, 0, mask_of(node.base.width), pops=1)
            else:
                slot = _slot_of(node.base.name, slots)
                loads.add(slot)
                push(OP_LOAD, slot, 0, mask_of(node.base.width))
                emit(node.index)
                push(OP_BITSEL, 0, 0, 1, pops=2)
        elif isinstance(node, Slice):
            slot = _slot_of(node.base.name, slots)
            loads.add(slot)
            push(OP_LOAD, slot, 0, mask_of(node.base.width))
            push(OP_SLICE, 0, node.lo, mask_of(node.width), pops=1)
        elif isinstance(node, Mux):
            emit(node.cond)
            emit(node.then)
            emit(node.orelse)
            push(OP_MUX, 0, 0, mask_of(node.width), pops=3)
        else:
            raise TypeError(f"cannot compile {node!r}")

    emit(e)
    return Program(
        steps=tuple(steps),
        max_stack=max_depth,
        kernel_ok=not wide,
        load_slots=frozenset(loads),
        source=e.render(),
    )


def _slot_of(name: str, table: Mapping[str, int]) -> int:
    try:
        return table[name]
    except KeyError:
        raise ElaborationError(f"no storage slot for signal {name!r}") from None
