"""Immutable symbolic expressions over hardware signals.

Signals and expressions overload the Python operators, so ``a + b`` on two
signal handles yields a symbolic tree instead of a number.  The trees are
rendered to Verilog text by the emitter and evaluated to integers by the
simulator; both consumers rely on the width rules defined here.

Width rules (all arithmetic is unsigned with wrap-around):

* arithmetic / bitwise / shift  ->  max(width(lhs), width(rhs))
* comparison                    ->  1
* bit select                    ->  1;  array element select -> element width
* part select [hi:lo]           ->  hi - lo + 1
* mux                           ->  max(width(then), width(else))

The max-width rule means ``a + b`` of two 32-bit operands is 32 bits wide:
carries out of the top bit are dropped.  Designs that need the carry must
widen an operand explicitly (assigning to a wider target zero-extends).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .errors import AddressError, ElaborationError, EvalError
from .naming import is_identifier

BINARY_OPS = ("+", "-", "*", "&", "|", "^", "<<", ">>", "==", "!=", "<", "<=", ">", ">=")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
UNARY_OPS = ("~", "-")


class Kind(enum.Enum):
    """What a signal is at the hardware level."""

    REG = "Reg"
    VAR = "Var"
    IN_PORT = "InPort"
    OUT_PORT = "OutPort"
    WIRE = "Wire"
    CONST = "Const"
    LOOP_VAR = "LoopVar"


def mask_of(width: int) -> int:
    return (1 << width) - 1


def width_for_value(value: int) -> int:
    """Minimum width holding ``value`` (at least 1)."""
    return max(1, int(value).bit_length())


class _Operand:
    """Operator-overloading mixin shared by signals and expressions.

    Subclasses provide ``width`` and ``_as_expr``.
    """

    width: int

    def _as_expr(self) -> "Expression":
        raise NotImplementedError

    def _coerce(self, other) -> "Expression":
        if isinstance(other, _Operand):
            return other._as_expr()
        if isinstance(other, int):
            if other < 0:
                raise ElaborationError(
                    f"negative literal {other}: arithmetic is unsigned, use unary minus"
                )
            width = max(self.width, width_for_value(other))
            return Const(width, other)
        raise TypeError(f"cannot use {type(other).__name__} as an expression operand")

    def _bin(self, op: str, other, reverse: bool = False) -> "Binary":
        rhs = self._coerce(other)
        lhs = self._as_expr()
        if reverse:
            lhs, rhs = rhs, lhs
        return Binary(op, lhs, rhs)

    def __add__(self, other):
        return self._bin("+", other)

    def __radd__(self, other):
        return self._bin("+", other, reverse=True)

    def __sub__(self, other):
        return self._bin("-", other)

    def __rsub__(self, other):
        return self._bin("-", other, reverse=True)

    def __mul__(self, other):
        return self._bin("*", other)

    def __rmul__(self, other):
        return self._bin("*", other, reverse=True)

    def __and__(self, other):
        return self._bin("&", other)

    def __rand__(self, other):
        return self._bin("&", other, reverse=True)

    def __or__(self, other):
        return self._bin("|", other)

    def __ror__(self, other):
        return self._bin("|", other, reverse=True)

    def __xor__(self, other):
        return self._bin("^", other)

    def __rxor__(self, other):
        return self._bin("^", other, reverse=True)

    def __lshift__(self, other):
        return self._bin("<<", other)

    def __rshift__(self, other):
        return self._bin(">>", other)

    def __eq__(self, other):  # type: ignore[override]
        return self._bin("==", other)

    def __ne__(self, other):  # type: ignore[override]
        return self._bin("!=", other)

    def __lt__(self, other):
        return self._bin("<", other)

    def __le__(self, other):
        return self._bin("<=", other)

    def __gt__(self, other):
        return self._bin(">", other)

    def __ge__(self, other):
        return self._bin(">=", other)

    def __invert__(self):
        return Unary("~", self._as_expr())

    def __neg__(self):
        return Unary("-", self._as_expr())

    def __hash__(self):
        return object.__hash__(self)

    def __bool__(self):
        raise TypeError(
            "symbolic expressions have no truth value; "
            "use Mux(cond, a, b) for selection and add_guard(cond) for conditions"
        )


@dataclass(frozen=True, eq=False)
class Signal(_Operand):
    """A named hardware value: register, port, wire, variable or loop index.

    ``role`` distinguishes machine-managed signals (input/output shadows,
    FSM state registers, interface wires) from plain user declarations; it
    never affects expression semantics, only writability and emission.
    """

    name: str
    width: int
    kind: Kind
    initial: int = 0
    role: str = ""

    def __post_init__(self):
        if self.width < 1:
            raise ElaborationError(f"signal {self.name!r}: width must be >= 1")
        if not is_identifier(self.name):
            raise ElaborationError(f"{self.name!r} is not a valid identifier")
        if self.initial & ~mask_of(self.width):
            raise ElaborationError(
                f"signal {self.name!r}: initial value {self.initial} "
                f"does not fit in {self.width} bits"
            )

    def _as_expr(self) -> "Expression":
        return Ref(self)

    def __getitem__(self, item) -> "Expression":
        if isinstance(item, slice):
            if item.step is not None:
                raise ElaborationError("part select takes [hi:lo] without a step")
            return Slice(self, int(item.start), int(item.stop))
        return Index(self, _index_expr(item, self.width))

    def __repr__(self):
        return f"Signal({self.name}:{self.width})"


@dataclass(frozen=True, eq=False)
class ArraySignal:
    """A register array: combinational element reads, clocked element writes."""

    name: str
    width: int
    depth: int

    def __post_init__(self):
        if self.width < 1:
            raise ElaborationError(f"array {self.name!r}: width must be >= 1")
        if self.depth < 1:
            raise ElaborationError(f"array {self.name!r}: depth must be >= 1")
        if not is_identifier(self.name):
            raise ElaborationError(f"{self.name!r} is not a valid identifier")

    def __getitem__(self, item) -> "Expression":
        return Index(self, _index_expr(item, max(1, (self.depth - 1).bit_length() or 1)))

    def __repr__(self):
        return f"ArraySignal({self.name}:{self.width}x{self.depth})"


def _index_expr(item, default_width: int) -> "Expression":
    if isinstance(item, _Operand):
        return item._as_expr()
    if isinstance(item, int):
        if item < 0:
            raise ElaborationError("index must be non-negative")
        return Const(max(default_width, width_for_value(item)), item)
    raise TypeError(f"cannot index with {type(item).__name__}")


class Expression(_Operand):
    """Base of all symbolic expression nodes. Immutable after construction."""

    __slots__ = ()

    def _as_expr(self) -> "Expression":
        return self

    def render(self) -> str:
        return render(self)

    def __repr__(self):
        return f"<expr {render(self)} :{self.width}>"


@dataclass(frozen=True, eq=False)
class Ref(Expression):
    signal: Signal

    @property
    def width(self) -> int:
        return self.signal.width


@dataclass(frozen=True, eq=False)
class Const(Expression):
    width: int
    value: int

    def __post_init__(self):
        if self.width < 1:
            raise ElaborationError("constant width must be >= 1")
        if self.value < 0 or self.value & ~mask_of(self.width):
            raise ElaborationError(
                f"constant {self.value} does not fit in {self.width} bits"
            )


@dataclass(frozen=True, eq=False)
class Binary(Expression):
    op: str
    lhs: Expression
    rhs: Expression
    width: int = field(init=False)

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ElaborationError(f"unsupported binary operator {self.op!r}")
        w = 1 if self.op in COMPARE_OPS else max(self.lhs.width, self.rhs.width)
        object.__setattr__(self, "width", w)


@dataclass(frozen=True, eq=False)
class Unary(Expression):
    op: str
    operand: Expression

    def __post_init__(self):
        if self.op not in UNARY_OPS:
            raise ElaborationError(f"unsupported unary operator {self.op!r}")

    @property
    def width(self) -> int:
        return self.operand.width


@dataclass(frozen=True, eq=False)
class Index(Expression):
    """Bit select of a scalar signal, or element select of a register array."""

    base: Union[Signal, ArraySignal]
    index: Expression

    @property
    def width(self) -> int:
        return self.base.width if isinstance(self.base, ArraySignal) else 1


@dataclass(frozen=True, eq=False)
class Slice(Expression):
    base: Signal
    hi: int
    lo: int

    def __post_init__(self):
        if not (self.base.width > self.hi >= self.lo >= 0):
            raise ElaborationError(
                f"bad part select {self.base.name}[{self.hi}:{self.lo}] "
                f"on {self.base.width}-bit signal"
            )

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True, eq=False)
class Mux(Expression):
    cond: Expression
    then: Expression
    orelse: Expression
    width: int = field(init=False)

    def __post_init__(self):
        if self.cond.width != 1:
            raise ElaborationError("mux condition must be 1 bit wide")
        object.__setattr__(self, "width", max(self.then.width, self.orelse.width))


def make_binary(op: str, lhs, rhs) -> Binary:
    """Explicit constructor for a binary node (operators are the usual way)."""
    if not isinstance(lhs, _Operand) or not isinstance(rhs, _Operand):
        raise ElaborationError("make_binary operands must be signals or expressions")
    return Binary(op, lhs._as_expr(), rhs._as_expr())


def render(e: Expression, rename=None) -> str:
    """Fully parenthesized infix text; deterministic for a given tree.

    ``rename`` optionally maps signal names (the emitter redirects register
    reads to their next-value shadows inside scheduling logic).
    """
    name = rename if rename is not None else (lambda sig: sig.name)
    if isinstance(e, Ref):
        return name(e.signal)
    if isinstance(e, Const):
        return f"{e.width}'d{e.value}"
    if isinstance(e, Binary):
        return f"({render(e.lhs, rename)} {e.op} {render(e.rhs, rename)})"
    if isinstance(e, Unary):
        return f"({e.op}{render(e.operand, rename)})"
    if isinstance(e, Index):
        base = e.base.name if isinstance(e.base, ArraySignal) else name(e.base)
        return f"{base}[{render(e.index, rename)}]"
    if isinstance(e, Slice):
        return f"{name(e.base)}[{e.hi}:{e.lo}]"
    if isinstance(e, Mux):
        return (
            f"(({render(e.cond, rename)}) ? ({render(e.then, rename)}) : "
            f"({render(e.orelse, rename)}))"
        )
    raise TypeError(f"not an expression: {e!r}")


def _shift_left(value: int, amount: int, width: int) -> int:
    if amount >= width:
        return 0
    return (value << amount) & mask_of(width)


def _shift_right(value: int, amount: int, width: int) -> int:
    if amount >= width:
        return 0
    return value >> amount


def evaluate(e: Expression, env: Mapping[str, Union[int, Sequence[int]]]) -> int:
    """Evaluate against a name->value map; wraps modulo 2**width at every node.

    Array signals are looked up as sequences.  This is the reference
    semantics; the simulator runs a compiled form of the same rules.
    """
    if isinstance(e, Ref):
        try:
            value = env[e.signal.name]
        except KeyError:
            raise EvalError(f"unbound signal {e.signal.name!r}") from None
        return int(value) & mask_of(e.width)
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Binary):
        a = evaluate(e.lhs, env)
        b = evaluate(e.rhs, env)
        w = e.width
        op = e.op
        if op == "+":
            return (a + b) & mask_of(w)
        if op == "-":
            return (a - b) & mask_of(w)
        if op == "*":
            return (a * b) & mask_of(w)
        if op == "&":
            return a & b
        if op == "|":
            return a | b
        if op == "^":
            return a ^ b
        if op == "<<":
            return _shift_left(a, b, w)
        if op == ">>":
            return _shift_right(a, b, w)
        if op == "==":
            return int(a == b)
        if op == "!=":
            return int(a != b)
        if op == "<":
            return int(a < b)
        if op == "<=":
            return int(a <= b)
        if op == ">":
            return int(a > b)
        if op == ">=":
            return int(a >= b)
    if isinstance(e, Unary):
        v = evaluate(e.operand, env)
        if e.op == "~":
            return ~v & mask_of(e.width)
        return (-v) & mask_of(e.width)
    if isinstance(e, Index):
        idx = evaluate(e.index, env)
        if isinstance(e.base, ArraySignal):
            try:
                contents = env[e.base.name]
            except KeyError:
                raise EvalError(f"unbound array {e.base.name!r}") from None
            if idx >= e.base.depth:
                raise AddressError(
                    f"array {e.base.name!r}: index {idx} out of range "
                    f"(depth {e.base.depth})"
                )
            return int(contents[idx]) & mask_of(e.base.width)
        base = evaluate(Ref(e.base), env)
        return (base >> idx) & 1 if idx < e.base.width else 0
    if isinstance(e, Slice):
        base = evaluate(Ref(e.base), env)
        return (base >> e.lo) & mask_of(e.width)
    if isinstance(e, Mux):
        cond = evaluate(e.cond, env)
        branch = e.then if cond else e.orelse
        return evaluate(branch, env) & mask_of(e.width)
    raise TypeError(f"not an expression: {e!r}")


def referenced_signals(e: Expression):
    """Yield every Signal/ArraySignal mentioned in an expression tree."""
    if isinstance(e, Ref):
        yield e.signal
    elif isinstance(e, Binary):
        yield from referenced_signals(e.lhs)
        yield from referenced_signals(e.rhs)
    elif isinstance(e, Unary):
        yield from referenced_signals(e.operand)
    elif isinstance(e, Index):
        yield e.base
        yield from referenced_signals(e.index)
    elif isinstance(e, Slice):
        yield e.base
    elif isinstance(e, Mux):
        yield from referenced_signals(e.cond)
        yield from referenced_signals(e.then)
        yield from referenced_signals(e.orelse)
