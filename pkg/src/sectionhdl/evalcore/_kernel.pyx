# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled program evaluator for node widths up to 64 bits.

Mirrors ``_pure.run_program`` instruction for instruction; uint64
arithmetic wraps modulo 2**64 and every step masks its result, which
matches the unsigned wrap-around semantics of the expression layer.

Two entry points:

* ``run_program``: one-shot evaluation over numpy views (used by the raw
  benchmark and the lane-equivalence tests);
* ``Evaluator``: holds the simulator's current/next value and arena
  buffers plus pre-lowered programs, so the per-call cost inside the
  cycle loop is a single handle dispatch.
"""

from cpython.mem cimport PyMem_Free, PyMem_Malloc
from libc.stdint cimport int64_t, uint64_t

DEF OP_CONST = 0
DEF OP_LOAD = 1
DEF OP_LOADARR = 2
DEF OP_BITSEL = 3
DEF OP_SLICE = 4
DEF OP_ADD = 5
DEF OP_SUB = 6
DEF OP_MUL = 7
DEF OP_AND = 8
DEF OP_OR = 9
DEF OP_XOR = 10
DEF OP_SHL = 11
DEF OP_SHR = 12
DEF OP_EQ = 13
DEF OP_NE = 14
DEF OP_LT = 15
DEF OP_LE = 16
DEF OP_GT = 17
DEF OP_GE = 18
DEF OP_NOT = 19
DEF OP_NEG = 20
DEF OP_MUX = 21


cdef struct Step:
    int64_t op
    uint64_t a
    int64_t b
    uint64_t mask


cdef inline int _width_of(uint64_t mask) nogil:
    cdef int w = 0
    while mask:
        mask >>= 1
        w += 1
    return w


cdef object _execute(
    const Step* steps,
    Py_ssize_t n,
    const uint64_t* values,
    const uint64_t* arena,
    const int64_t* arr_off,
    const int64_t* arr_len,
    uint64_t* stack,
):
    cdef Py_ssize_t pc
    cdef Py_ssize_t sp = 0
    cdef int64_t op
    cdef uint64_t lhs, rhs, v, mask, idx
    for pc in range(n):
        op = steps[pc].op
        mask = steps[pc].mask
        if op == OP_LOAD:
            stack[sp] = values[steps[pc].a] & mask
            sp += 1
        elif op == OP_CONST:
            stack[sp] = steps[pc].a
            sp += 1
        elif op == OP_LOADARR:
            sp -= 1
            idx = stack[sp]
            if idx >= <uint64_t> arr_len[steps[pc].a]:
                raise IndexError((int(steps[pc].a), int(idx)))
            stack[sp] = arena[arr_off[steps[pc].a] + idx] & mask
            sp += 1
        elif op == OP_BITSEL:
            sp -= 2
            idx = stack[sp + 1]
            v = stack[sp]
            stack[sp] = (v >> idx) & 1 if idx < 64 else 0
            sp += 1
        elif op == OP_SLICE:
            stack[sp - 1] = (stack[sp - 1] >> steps[pc].b) & mask
        elif op == OP_MUX:
            sp -= 3
            stack[sp] = (stack[sp + 1] if stack[sp] else stack[sp + 2]) & mask
            sp += 1
        elif op == OP_NOT:
            stack[sp - 1] = (~stack[sp - 1]) & mask
        elif op == OP_NEG:
            stack[sp - 1] = (0 - stack[sp - 1]) & mask
        else:
            sp -= 2
            lhs = stack[sp]
            rhs = stack[sp + 1]
            if op == OP_ADD:
                v = (lhs + rhs) & mask
            elif op == OP_SUB:
                v = (lhs - rhs) & mask
            elif op == OP_MUL:
                v = (lhs * rhs) & mask
            elif op == OP_AND:
                v = lhs & rhs
            elif op == OP_OR:
                v = lhs | rhs
            elif op == OP_XOR:
                v = lhs ^ rhs
            elif op == OP_SHL:
                v = 0 if rhs >= <uint64_t> _width_of(mask) else (lhs << rhs) & mask
            elif op == OP_SHR:
                v = 0 if rhs >= 64 else lhs >> rhs
            elif op == OP_EQ:
                v = 1 if lhs == rhs else 0
            elif op == OP_NE:
                v = 1 if lhs != rhs else 0
            elif op == OP_LT:
                v = 1 if lhs < rhs else 0
            elif op == OP_LE:
                v = 1 if lhs <= rhs else 0
            elif op == OP_GT:
                v = 1 if lhs > rhs else 0
            elif op == OP_GE:
                v = 1 if lhs >= rhs else 0
            else:
                raise ValueError(f"bad opcode {op}")
            stack[sp] = v
            sp += 1
    return stack[sp - 1]


cdef Step* _lower(steps_py) except NULL:
    cdef Py_ssize_t n = len(steps_py)
    cdef Step* steps = <Step*> PyMem_Malloc(max(1, n) * sizeof(Step))
    if steps == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(n):
        op, a, b, mask = steps_py[i]
        steps[i].op = op
        steps[i].a = a
        steps[i].b = b
        steps[i].mask = mask
    return steps


def run_program(
    const long long[::1] ops,
    const unsigned long long[::1] a,
    const long long[::1] b,
    const unsigned long long[::1] masks,
    const unsigned long long[::1] values,
    const unsigned long long[::1] arena,
    const long long[::1] arr_off,
    const long long[::1] arr_len,
    unsigned long long[::1] stack,
):
    """One-shot evaluation over numpy views (slower per call than Evaluator)."""
    cdef Py_ssize_t n = ops.shape[0]
    cdef Step* steps = <Step*> PyMem_Malloc(max(1, n) * sizeof(Step))
    if steps == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(n):
        steps[i].op = ops[i]
        steps[i].a = a[i]
        steps[i].b = b[i]
        steps[i].mask = masks[i]
    try:
        return _execute(
            steps,
            n,
            <const uint64_t*> &values[0],
            <const uint64_t*> &arena[0] if arena.shape[0] else NULL,
            <const int64_t*> &arr_off[0] if arr_off.shape[0] else NULL,
            <const int64_t*> &arr_len[0] if arr_len.shape[0] else NULL,
            <uint64_t*> &stack[0],
        )
    finally:
        PyMem_Free(steps)


cdef class Evaluator:
    """Per-instance evaluation engine bound to fixed state buffers.

    The simulator flips between two value buffers (current/next cycle) and
    two arena buffers; programs are lowered once into C step arrays and
    addressed by handle afterwards.
    """

    cdef unsigned long long[::1] _values0
    cdef unsigned long long[::1] _values1
    cdef unsigned long long[::1] _arena0
    cdef unsigned long long[::1] _arena1
    cdef long long[::1] _arr_off
    cdef long long[::1] _arr_len
    cdef uint64_t* _stack
    cdef Step** _progs
    cdef Py_ssize_t* _prog_len
    cdef Py_ssize_t _count
    cdef Py_ssize_t _capacity

    def __cinit__(
        self,
        unsigned long long[::1] values0,
        unsigned long long[::1] values1,
        unsigned long long[::1] arena0,
        unsigned long long[::1] arena1,
        long long[::1] arr_off,
        long long[::1] arr_len,
        Py_ssize_t max_stack,
    ):
        self._values0 = values0
        self._values1 = values1
        self._arena0 = arena0
        self._arena1 = arena1
        self._arr_off = arr_off
        self._arr_len = arr_len
        self._stack = <uint64_t*> PyMem_Malloc(max(1, max_stack) * sizeof(uint64_t))
        self._progs = NULL
        self._prog_len = NULL
        self._count = 0
        self._capacity = 0
        if self._stack == NULL:
            raise MemoryError()

    def __dealloc__(self):
        cdef Py_ssize_t i
        if self._progs != NULL:
            for i in range(self._count):
                PyMem_Free(self._progs[i])
            PyMem_Free(self._progs)
        if self._prog_len != NULL:
            PyMem_Free(self._prog_len)
        if self._stack != NULL:
            PyMem_Free(self._stack)

    def prepare(self, steps_py) -> int:
        """Lower one compiled program; returns its handle."""
        cdef Py_ssize_t new_cap
        cdef Step** new_progs
        cdef Py_ssize_t* new_len
        cdef Py_ssize_t i
        if self._count == self._capacity:
            new_cap = 16 if self._capacity == 0 else self._capacity * 2
            new_progs = <Step**> PyMem_Malloc(new_cap * sizeof(Step*))
            new_len = <Py_ssize_t*> PyMem_Malloc(new_cap * sizeof(Py_ssize_t))
            if new_progs == NULL or new_len == NULL:
                raise MemoryError()
            for i in range(self._count):
                new_progs[i] = self._progs[i]
                new_len[i] = self._prog_len[i]
            if self._progs != NULL:
                PyMem_Free(self._progs)
            if self._prog_len != NULL:
                PyMem_Free(self._prog_len)
            self._progs = new_progs
            self._prog_len = new_len
            self._capacity = new_cap
        self._progs[self._count] = _lower(steps_py)
        self._prog_len[self._count] = len(steps_py)
        self._count += 1
        return self._count - 1

    def run(self, Py_ssize_t handle, bint values_phase, bint arena_phase):
        """Evaluate a prepared program against the selected buffers."""
        cdef const uint64_t* values
        cdef const uint64_t* arena
        if values_phase:
            values = <const uint64_t*> &self._values1[0]
        else:
            values = <const uint64_t*> &self._values0[0]
        if arena_phase:
            arena = <const uint64_t*> &self._arena1[0]
        else:
            arena = <const uint64_t*> &self._arena0[0]
        return _execute(
            self._progs[handle],
            self._prog_len[handle],
            values,
            arena,
            <const int64_t*> &self._arr_off[0],
            <const int64_t*> &self._arr_len[0],
            self._stack,
        )
