"""The schedule tree: leaves grouped in series, parallel and loops.

Sections are recorded by ``with`` blocks while a module is being
elaborated; host-language control flow around the builder calls performs
static elaboration (a Python loop issuing ``assign`` thirty-two times
records thirty-two statements).  One module is elaborated at a time; the
active module and the stack of open sections live in a thread-local
context.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import ElaborationError
from .expr import ArraySignal, Expression, Index, Kind, Signal, _Operand, render, width_for_value

# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Assign:
    """Write ``rhs`` to a scalar signal or an array element.

    Registers take the value next cycle; variables immediately.  A narrower
    target truncates high bits, a wider one zero-extends.
    """

    target: Union[Signal, Index]
    rhs: Expression


@dataclass(frozen=True)
class Display:
    """Print when the enclosing leaf fires. Supports %d, %x and %%."""

    format: str
    args: tuple[Expression, ...]


@dataclass(frozen=True)
class FifoPop:
    fifo: object  # interfaces.SimpleFifo


@dataclass(frozen=True)
class FifoPush:
    fifo: object
    value: Expression


@dataclass(frozen=True)
class BramAccess:
    """One port operation: a read issue (data is None) or a write."""

    bram: object  # interfaces.SimpleBram
    addr: Expression
    data: Optional[Expression]


@dataclass(frozen=True)
class InstanceStart:
    instance: object  # module.InstanceRef
    bindings: tuple[tuple[str, Expression], ...]


@dataclass(frozen=True)
class InstanceRelease:
    instance: object


Statement = Union[Assign, Display, FifoPop, FifoPush, BramAccess, InstanceStart, InstanceRelease]


# ---------------------------------------------------------------------------
# Section nodes


@dataclass
class Leaf:
    """Smallest schedule unit: its whole body executes in one clock cycle,
    in the cycle all guards evaluate to 1 (it stalls until then)."""

    label: str
    statements: list[Statement] = field(default_factory=list)
    guards: list[Expression] = field(default_factory=list)

    children = ()


@dataclass
class Serial:
    label: str
    children: list["Section"] = field(default_factory=list)


@dataclass
class Parallel:
    label: str
    children: list["Section"] = field(default_factory=list)


@dataclass
class ForLoop:
    """Children run in sequence once per iteration; the loop variable is
    readable inside the body and steps with no dead cycle between
    iterations."""

    label: str
    var: Signal
    start: int
    end_exclusive: int
    children: list["Section"] = field(default_factory=list)


@dataclass
class WhileLoop:
    """Condition is checked each time the loop (re)activates, against the
    state registers as they will read in the next cycle; a false condition
    completes the loop without spending a cycle."""

    label: str
    cond: Expression
    children: list["Section"] = field(default_factory=list)


Section = Union[Leaf, Serial, Parallel, ForLoop, WhileLoop]


def iter_sections(root: Section):
    """Pre-order walk of a section subtree."""
    yield root
    for child in root.children:
        yield from iter_sections(child)


def iter_leaves(root: Section):
    for s in iter_sections(root):
        if isinstance(s, Leaf):
            yield s


# ---------------------------------------------------------------------------
# Elaboration context


class _ElabContext(threading.local):
    def __init__(self):
        self.module = None  # module.HWModule being elaborated
        self.stack: list[Section] = []
        self.library = None  # module.Library


_CTX = _ElabContext()


def context() -> _ElabContext:
    return _CTX


def current_module():
    if _CTX.module is None:
        raise ElaborationError("no module is being elaborated")
    return _CTX.module


def current_leaf() -> Leaf:
    if not _CTX.stack or not isinstance(_CTX.stack[-1], Leaf):
        raise ElaborationError("this operation requires an open leaf section")
    return _CTX.stack[-1]


def open_section(section: Section) -> Section:
    """Push a new section: child of the innermost open section (or a new
    root-level section).  Leaves cannot contain child sections."""
    mod = current_module()
    if _CTX.stack and isinstance(_CTX.stack[-1], Leaf):
        raise ElaborationError(
            f"cannot open section {section.label!r} inside leaf "
            f"{_CTX.stack[-1].label!r}: leaves hold statements only"
        )
    mod._register_label(section.label)
    if _CTX.stack:
        _CTX.stack[-1].children.append(section)
    else:
        mod._add_root_child(section)
    _CTX.stack.append(section)
    return section


def close_section(section: Section) -> None:
    if not _CTX.stack or _CTX.stack[-1] is not section:
        raise ElaborationError(
            f"out-of-order close of section {section.label!r}"
        )
    if not isinstance(section, Leaf) and not section.children:
        raise ElaborationError(
            f"section {section.label!r} must contain at least one child section"
        )
    _CTX.stack.pop()


class _SectionScope:
    """Context manager wrapping open_section/close_section."""

    _section: Section

    def __enter__(self):
        open_section(self._section)
        return self._enter_value()

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            close_section(self._section)
        return False

    def _enter_value(self):
        return self._section


class LeafSection(_SectionScope):
    def __init__(self, label: str):
        self._section = Leaf(label)


class SerialSections(_SectionScope):
    def __init__(self, label: str):
        self._section = Serial(label)


class ParallelSections(_SectionScope):
    def __init__(self, label: str):
        self._section = Parallel(label)


class ForLoopSection(_SectionScope):
    """``with ForLoopSection("F", "i", 0, 8) as i:`` — i runs 0..7."""

    def __init__(self, label: str, var_name: str, start: int, end_exclusive: int):
        if not start < end_exclusive:
            raise ElaborationError(
                f"loop {label!r}: start must be < end (got {start}, {end_exclusive})"
            )
        if start < 0:
            raise ElaborationError(f"loop {label!r}: start must be >= 0")
        var = Signal(var_name, width_for_value(end_exclusive), Kind.LOOP_VAR)
        self._section = ForLoop(label, var, start, end_exclusive)

    def __enter__(self):
        current_module()._register_signal(self._section.var)
        return super().__enter__()

    def _enter_value(self):
        return self._section.var


class WhileLoopSection(_SectionScope):
    def __init__(self, label: str, cond):
        cond = _to_expr(cond)
        if cond.width != 1:
            raise ElaborationError(f"while loop {label!r}: condition must be 1 bit")
        _check_schedule_expr(cond, f"while loop {label!r} condition")
        self._section = WhileLoop(label, cond)


def _to_expr(value) -> Expression:
    if isinstance(value, _Operand):
        return value._as_expr()
    raise ElaborationError(f"expected a signal or expression, got {type(value).__name__}")


def _check_schedule_expr(cond: Expression, what: str) -> None:
    # Schedule conditions are re-evaluated by the FSM next-state logic, which
    # sees registers only: combinational Vars and array reads have no stable
    # next-cycle view there.
    from .expr import referenced_signals

    for sig in referenced_signals(cond):
        if isinstance(sig, ArraySignal):
            raise ElaborationError(f"{what} may not read register arrays")
        if sig.kind is Kind.VAR:
            raise ElaborationError(f"{what} may not read Var signals")


# ---------------------------------------------------------------------------
# Leaf-body operations


def assign(target, rhs) -> None:
    """Record an assignment at the end of the open leaf's statement list."""
    leaf = current_leaf()
    mod = current_module()
    if isinstance(target, Index):
        if not isinstance(target.base, ArraySignal):
            raise ElaborationError("only whole signals or array elements are assignable")
        rhs_e = _coerce_rhs(rhs, target.base.width)
        leaf.statements.append(Assign(target, rhs_e))
        return
    if not isinstance(target, Signal):
        raise ElaborationError(f"cannot assign to {type(target).__name__}")
    mod._check_assignable(target)
    rhs_e = _coerce_rhs(rhs, target.width)
    leaf.statements.append(Assign(target, rhs_e))


def _coerce_rhs(rhs, width: int) -> Expression:
    if isinstance(rhs, int):
        if rhs < 0:
            raise ElaborationError("negative literal: arithmetic is unsigned")
        from .expr import Const

        return Const(max(width, width_for_value(rhs)), rhs)
    return _to_expr(rhs)


def add_guard(cond) -> None:
    """Append a firing condition to the open leaf.

    The leaf executes, and lets its successors proceed, only in a cycle
    where every guard evaluates to 1; otherwise it stalls and retries with
    no side effects.
    """
    leaf = current_leaf()
    cond = _to_expr(cond)
    if cond.width != 1:
        raise ElaborationError("guard condition must be 1 bit wide")
    _check_schedule_expr(cond, f"guard on leaf {leaf.label!r}")
    text = render(cond)
    if all(render(g) != text for g in leaf.guards):
        leaf.guards.append(cond)


def display(fmt: str, *args) -> None:
    """Record a formatted print that runs in the cycle the leaf fires."""
    leaf = current_leaf()
    placeholders = _count_placeholders(fmt)
    if placeholders != len(args):
        raise ElaborationError(
            f"display format has {placeholders} placeholder(s) "
            f"but {len(args)} argument(s) were given"
        )
    exprs = tuple(_to_expr(a) if not isinstance(a, int) else _coerce_rhs(a, 32) for a in args)
    leaf.statements.append(Display(fmt, exprs))


def _count_placeholders(fmt: str) -> int:
    count = 0
    i = 0
    while i < len(fmt):
        if fmt[i] == "%":
            if i + 1 >= len(fmt):
                raise ElaborationError("dangling % at end of display format")
            spec = fmt[i + 1]
            if spec in ("d", "x"):
                count += 1
            elif spec != "%":
                raise ElaborationError(f"unsupported display conversion %{spec}")
            i += 2
        else:
            i += 1
    return count
