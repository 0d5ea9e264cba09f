"""Pure-Python program evaluator: the always-available reference lane.

Handles arbitrary widths (masks are plain Python ints).  Array reads index
into a flat arena through per-array (offset, length) tables; out-of-range
indices raise ``IndexError((array_id, index))`` for the caller to dress
with context.
"""

from __future__ import annotations

from .program import (
    OP_ADD,
    OP_AND,
    OP_BITSEL,
    OP_CONST,
    OP_EQ,
    OP_GE,
    OP_GT,
    OP_LE,
    OP_LOAD,
    OP_LOADARR,
    OP_LT,
    OP_MUL,
    OP_MUX,
    OP_NE,
    OP_NEG,
    OP_NOT,
    OP_OR,
    OP_SHL,
    OP_SHR,
    OP_SLICE,
    OP_SUB,
    OP_XOR,
    Program,
)


def run_program(program: Program, values, arena, arr_off, arr_len) -> int:
    stack: list[int] = []
    push = stack.append
    pop = stack.pop
    for op, a, b, mask in program.steps:
        if op == OP_CONST:
            push(a)
        elif op == OP_LOAD:
            push(int(values[a]) & mask)
        elif op == OP_LOADARR:
            idx = pop()
            if idx >= arr_len[a]:
                raise IndexError((a, idx))
            push(int(arena[arr_off[a] + idx]) & mask)
        elif op == OP_BITSEL:
            idx = pop()
            v = pop()
            push((v >> idx) & 1)
        elif op == OP_SLICE:
            push((pop() >> b) & mask)
        elif op == OP_MUX:
            orelse = pop()
            then = pop()
            cond = pop()
            push((then if cond else orelse) & mask)
        elif op == OP_NOT:
            push(~pop() & mask)
        elif op == OP_NEG:
            push(-pop() & mask)
        else:
            rhs = pop()
            lhs = pop()
            if op == OP_ADD:
                push((lhs + rhs) & mask)
            elif op == OP_SUB:
                push((lhs - rhs) & mask)
            elif op == OP_MUL:
                push((lhs * rhs) & mask)
            elif op == OP_AND:
                push(lhs & rhs)
            elif op == OP_OR:
                push(lhs | rhs)
            elif op == OP_XOR:
                push(lhs ^ rhs)
            elif op == OP_SHL:
                push(0 if rhs >= mask.bit_length() else (lhs << rhs) & mask)
            elif op == OP_SHR:
                push(0 if rhs >= mask.bit_length() else lhs >> rhs)
            elif op == OP_EQ:
                push(int(lhs == rhs))
            elif op == OP_NE:
                push(int(lhs != rhs))
            elif op == OP_LT:
                push(int(lhs < rhs))
            elif op == OP_LE:
                push(int(lhs <= rhs))
            elif op == OP_GT:
                push(int(lhs > rhs))
            elif op == OP_GE:
                push(int(lhs >= rhs))
            else:
                raise ValueError(f"bad opcode {op}")
    return stack[-1]
