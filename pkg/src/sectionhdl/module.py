"""Hardware modules: named containers of ports, state and a section tree.

Every module implicitly carries the handshake interface
``CLK, RST, START, Done, get_done, Ready``:

* START high in cycle t latches the ``_inreg`` copies of the inputs at t
  and activates the root section for t+1;
* Done rises the cycle after the root section completes and holds;
* a ``get_done`` pulse releases the module back to Ready (idle).

Submodules are driven through the same protocol from inside a leaf:
``inst.start(...)`` guards on Ready and pulses START, ``inst.get_result(p)``
guards on Done, reads the output register and pulses get_done.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

from . import naming, sections
from .errors import ElaborationError
from .expr import (
    ArraySignal,
    Binary,
    Const,
    Expression,
    Index,
    Kind,
    Ref,
    Signal,
    referenced_signals,
    width_for_value,
)
from .sections import (
    Assign,
    BramAccess,
    Display,
    FifoPop,
    FifoPush,
    InstanceRelease,
    InstanceStart,
    Leaf,
    Serial,
    WhileLoop,
    current_leaf,
    current_module,
    iter_sections,
)

ROOT_LABEL = "root"


class Library:
    """Registry of frozen modules, keyed by unique name."""

    def __init__(self):
        self.modules: dict[str, "HWModule"] = {}

    def register(self, module: "HWModule") -> None:
        if module.name in self.modules:
            raise ElaborationError(f"a module named {module.name!r} already exists")
        self.modules[module.name] = module

    def get(self, name: str) -> "HWModule":
        return self.modules[name]

    def activate(self):
        return use_library(self)


class use_library:
    """Make ``library`` the registration target for begin_module/end_module."""

    def __init__(self, library: Optional[Library] = None):
        self.library = library or Library()

    def __enter__(self) -> Library:
        ctx = sections.context()
        self._saved = ctx.library
        ctx.library = self.library
        return self.library

    def __exit__(self, exc_type, exc, tb):
        sections.context().library = self._saved
        return False


def fresh_library() -> use_library:
    return use_library()


@dataclass
class InstanceRef:
    """A submodule instance inside a parent module.

    The child's interface appears in the parent as wires named
    ``<instance>_<signal>``; only Ready, Done and the output ports are
    readable from parent expressions.
    """

    name: str
    module: "HWModule"
    parent: "HWModule"
    ready: Signal = field(init=False)
    done: Signal = field(init=False)
    out_wires: dict[str, Signal] = field(init=False)

    def __post_init__(self):
        self.ready = Signal(naming.instance_wire(self.name, "Ready"), 1, Kind.WIRE, role="instwire")
        self.done = Signal(naming.instance_wire(self.name, "Done"), 1, Kind.WIRE, role="instwire")
        self.out_wires = {
            port.name: Signal(
                naming.instance_wire(self.name, port.name), port.width, Kind.WIRE, role="instwire"
            )
            for port, _shadow in self.module.out_ports
        }

    def start(self, **bindings) -> None:
        """In the firing cycle, drive the child's inputs and pulse START.

        Adds a Ready guard to the enclosing leaf, so the leaf stalls while
        the child is busy.  Bindings must cover every input port.
        """
        leaf = current_leaf()
        parent = current_module()
        if parent is not self.parent:
            raise ElaborationError(f"instance {self.name!r} belongs to another module")
        expected = [port.name for port, _ in self.module.in_ports]
        unknown = sorted(set(bindings) - set(expected))
        if unknown:
            raise ElaborationError(
                f"start of {self.name!r}: unknown port(s) {', '.join(unknown)}"
            )
        missing = sorted(set(expected) - set(bindings))
        if missing:
            raise ElaborationError(
                f"start of {self.name!r}: missing binding(s) {', '.join(missing)}"
            )
        bound: list[tuple[str, Expression]] = []
        for port, _shadow in self.module.in_ports:
            value = bindings[port.name]
            if isinstance(value, int):
                expr: Expression = Const(port.width, value)
            else:
                expr = sections._to_expr(value)
                if expr.width != port.width:
                    warnings.warn(
                        f"start of {self.name!r}: binding for {port.name!r} is "
                        f"{expr.width} bits, port is {port.width}; value will be "
                        "truncated/zero-extended",
                        stacklevel=2,
                    )
            bound.append((port.name, expr))
        sections.add_guard(Binary("==", Ref(self.ready), Const(1, 1)))
        leaf.statements.append(InstanceStart(self, tuple(bound)))

    def get_result(self, port: str) -> Expression:
        """Read an output of the child once it is Done; releases the child.

        Adds a Done guard; the returned expression is valid in the firing
        cycle.  The get_done pulse sends the child back to Ready.
        """
        leaf = current_leaf()
        if port not in self.out_wires:
            raise ElaborationError(
                f"get_result on {self.name!r}: {port!r} is not an output port"
            )
        sections.add_guard(Binary("==", Ref(self.done), Const(1, 1)))
        if not any(
            isinstance(s, InstanceRelease) and s.instance is self for s in leaf.statements
        ):
            leaf.statements.append(InstanceRelease(self))
        return Ref(self.out_wires[port])


class HWModule:
    """One hardware unit: ports, parameters, state elements, submodule
    instances and a root section tree (an implicit serial sequence)."""

    def __init__(self, name: str, params: Optional[dict[str, int]] = None):
        if not naming.is_identifier(name):
            raise ElaborationError(f"{name!r} is not a valid module name")
        self.name = name
        self.params: dict[str, int] = dict(params or {})
        self.in_ports: list[tuple[Signal, Signal]] = []  # (port, latched shadow)
        self.out_ports: list[tuple[Signal, Signal]] = []  # (port, driving shadow)
        self.regs: list[Signal] = []
        self.vars: list[Signal] = []
        self.arrays: list[ArraySignal] = []
        self.loop_vars: list[Signal] = []
        self.instances: list[InstanceRef] = []
        self.fifos: list = []
        self.brams: list = []
        self.root = Serial(ROOT_LABEL)
        self.labels: dict[str, sections.Section] = {ROOT_LABEL: self.root}
        self.signals: dict[str, Union[Signal, ArraySignal]] = {}
        self.state_signals: dict[str, Signal] = {}
        self.top_state: Optional[Signal] = None
        self.plan = None  # schedule.SchedulePlan, set at freeze
        self.frozen = False
        # Names claimed by ports, drives and other emitter-owned wires.
        self._reserved: set[str] = set(naming.INTERFACE_SIGNALS) | {naming.TOP_STATE}
        self._image = None  # sim.ModuleImage cache

    # -- declaration bookkeeping ------------------------------------------

    def _check_open(self):
        if self.frozen:
            raise ElaborationError(f"module {self.name!r} is frozen")

    def _claim_name(self, name: str):
        self._check_open()
        if name in self.signals or name in self._reserved:
            raise ElaborationError(f"name {name!r} is already in use in module {self.name!r}")

    def _register_signal(self, sig: Union[Signal, ArraySignal]):
        self._claim_name(sig.name)
        self.signals[sig.name] = sig
        if isinstance(sig, Signal) and sig.kind is Kind.LOOP_VAR:
            self.loop_vars.append(sig)

    def _reserve(self, *names: str):
        for name in names:
            self._claim_name(name)
            self._reserved.add(name)

    def _register_label(self, label: str):
        self._check_open()
        if not naming.is_identifier(label):
            raise ElaborationError(f"{label!r} is not a valid section label")
        if label in self.labels:
            raise ElaborationError(f"duplicate section label {label!r}")
        self.labels[label] = None  # filled by the section itself

    def _add_root_child(self, section):
        self.root.children.append(section)

    def _check_assignable(self, target: Signal):
        if target.kind in (Kind.IN_PORT, Kind.OUT_PORT, Kind.CONST):
            raise ElaborationError(f"{target.name!r} is not assignable")
        if target.kind is Kind.LOOP_VAR:
            raise ElaborationError(f"loop variable {target.name!r} is read-only")
        if target.kind is Kind.WIRE:
            raise ElaborationError(f"wire {target.name!r} is not assignable")
        if target.role == "in_shadow":
            raise ElaborationError(
                f"{target.name!r} is a latched input and cannot be assigned"
            )
        if target.name not in self.signals:
            raise ElaborationError(
                f"signal {target.name!r} is not declared in module {self.name!r}"
            )

    # -- instances ---------------------------------------------------------

    def _instantiate(self, child: "HWModule", instance_name: str) -> InstanceRef:
        self._check_open()
        if not child.frozen:
            raise ElaborationError(
                f"module {child.name!r} must be frozen before instantiation"
            )
        if child.name == self.name:
            raise ElaborationError("a module cannot instantiate itself")
        if not naming.is_identifier(instance_name):
            raise ElaborationError(f"{instance_name!r} is not a valid instance name")
        if any(inst.name == instance_name for inst in self.instances):
            raise ElaborationError(f"duplicate instance name {instance_name!r}")
        inst = InstanceRef(instance_name, child, self)
        # Readable side of the child interface.
        self._register_signal(inst.ready)
        self._register_signal(inst.done)
        for wire in inst.out_wires.values():
            self._register_signal(wire)
        # Parent-driven side (pulses and input data).
        self._reserve(
            naming.instance_wire(instance_name, "START"),
            naming.instance_wire(instance_name, "get_done"),
            *(naming.instance_wire(instance_name, port.name) for port, _ in child.in_ports),
        )
        self.instances.append(inst)
        return inst

    # -- freeze -------------------------------------------------------------

    def _freeze(self, library: Library) -> "HWModule":
        from . import schedule

        self._check_open()
        if not self.root.children:
            raise ElaborationError(f"module {self.name!r} has an empty body")
        # Fill the label map and create FSM state registers.
        for section in iter_sections(self.root):
            if section is not self.root:
                self.labels[section.label] = section
            if isinstance(section, (Leaf, WhileLoop)):
                state = Signal(naming.state_reg(section.label), 2, Kind.REG, role="state")
                self._claim_name(state.name)
                self.signals[state.name] = state
                self.state_signals[section.label] = state
        self.top_state = Signal(naming.TOP_STATE, 2, Kind.REG, role="state")
        self.signals[naming.TOP_STATE] = self.top_state
        self._check_references()
        self._audit_generated_names()
        self.plan = schedule.build_plan(self)
        self.frozen = True
        library.register(self)
        return self

    def _check_references(self):
        """Every referenced signal must be declared here; loop variables may
        only be read inside their own loop."""

        def visit(section, scope: frozenset[str]):
            if isinstance(section, sections.ForLoop):
                scope = scope | {section.var.name}
            exprs: list[Expression] = []
            if isinstance(section, WhileLoop):
                exprs.append(section.cond)
            if isinstance(section, Leaf):
                exprs.extend(section.guards)
                for stmt in section.statements:
                    exprs.extend(_statement_exprs(stmt))
            for e in exprs:
                for sig in referenced_signals(e):
                    name = sig.name
                    if isinstance(sig, Signal) and sig.kind is Kind.LOOP_VAR:
                        if name not in scope:
                            raise ElaborationError(
                                f"loop variable {name!r} used outside its loop "
                                f"(section {section.label!r})"
                            )
                        continue
                    if self.signals.get(name) is not sig:
                        raise ElaborationError(
                            f"signal {name!r} used in section {section.label!r} is not "
                            f"declared in module {self.name!r}"
                        )
            for child in section.children:
                visit(child, scope)

        visit(self.root, frozenset())

    def _audit_generated_names(self):
        """Emission derives extra names; none may collide with user names."""
        generated: list[str] = [naming.RESET_LOOP_VAR]
        for sig in self.signals.values():
            if isinstance(sig, Signal) and _is_clocked(sig):
                generated.append(naming.companion_wire(sig.name))
        for array, occurrence, _leaf, _stmt in iter_array_writes(self.root):
            for role in ("we", "wa", "wd"):
                generated.append(naming.array_port(array.name, occurrence, role))
        seen: set[str] = set()
        for name in generated:
            if name in self.signals or name in self._reserved or name in seen:
                raise ElaborationError(
                    f"module {self.name!r}: name {name!r} collides with a "
                    "generated signal; rename the conflicting declaration"
                )
            seen.add(name)

    # -- queries used by the emitter and simulator --------------------------

    def state_of(self, label: str) -> Signal:
        return self.state_signals[label]

    def port_inputs(self) -> list[Signal]:
        return [port for port, _ in self.in_ports]

    def __repr__(self):
        state = "frozen" if self.frozen else "open"
        return f"HWModule({self.name!r}, {state})"


def _is_clocked(sig: Signal) -> bool:
    """Signals that get a _WIRE companion and a clocked commit."""
    return sig.kind in (Kind.REG, Kind.LOOP_VAR)


def _statement_exprs(stmt) -> list[Expression]:
    if isinstance(stmt, Assign):
        exprs = [stmt.rhs]
        if isinstance(stmt.target, Index):
            exprs.append(stmt.target.index)
            exprs.append(Ref(stmt.target.base) if isinstance(stmt.target.base, Signal) else stmt.target)
            if isinstance(stmt.target.base, ArraySignal):
                exprs = [stmt.rhs, stmt.target.index]
        return exprs
    if isinstance(stmt, Display):
        return list(stmt.args)
    if isinstance(stmt, FifoPush):
        return [stmt.value]
    if isinstance(stmt, BramAccess):
        return [stmt.addr] + ([stmt.data] if stmt.data is not None else [])
    if isinstance(stmt, InstanceStart):
        return [e for _, e in stmt.bindings]
    return []


def iter_array_writes(root):
    """Deterministic enumeration of array-write occurrences, in tree order.

    Yields (array, occurrence_index, leaf, statement); the emitter derives
    one staging-port name triple per occurrence.
    """
    counters: dict[str, int] = {}
    for leaf in sections.iter_leaves(root):
        for stmt in leaf.statements:
            if isinstance(stmt, Assign) and isinstance(stmt.target, Index) and isinstance(
                stmt.target.base, ArraySignal
            ):
                array = stmt.target.base
                occ = counters.get(array.name, 0)
                counters[array.name] = occ + 1
                yield array, occ, leaf, stmt


# ---------------------------------------------------------------------------
# User-facing operations


def begin_module(name: str, params: Optional[dict[str, int]] = None) -> HWModule:
    """Open a fresh module as the active elaboration context."""
    ctx = sections.context()
    if ctx.module is not None:
        raise ElaborationError(
            f"cannot begin module {name!r}: module {ctx.module.name!r} is still open"
        )
    if ctx.library is None:
        ctx.library = Library()
    module = HWModule(name, params)
    ctx.module = module
    ctx.stack = []
    return module


def end_module() -> HWModule:
    """Close and freeze the active module; registers it in the library."""
    ctx = sections.context()
    module = current_module()
    if ctx.stack:
        open_labels = ", ".join(s.label for s in ctx.stack)
        raise ElaborationError(f"cannot end module: section(s) still open: {open_labels}")
    frozen = module._freeze(ctx.library)
    ctx.module = None
    return frozen


def Reg(name: str, width: int, initial: int = 0) -> Signal:
    """Declare a register: assigned values become visible next cycle."""
    mod = current_module()
    sig = Signal(name, width, Kind.REG, initial)
    mod._register_signal(sig)
    mod.regs.append(sig)
    return sig


def Var(name: str, width: int) -> Signal:
    """Declare a combinational variable: assignments are visible to later
    statements in the same cycle; holds 0 at the start of every cycle."""
    mod = current_module()
    sig = Signal(name, width, Kind.VAR)
    mod._register_signal(sig)
    mod.vars.append(sig)
    return sig


def RegIn(name: str, width: int) -> Signal:
    """Declare an input port; returns the latched ``<name>_inreg`` copy the
    module body reads (START captures the port into it)."""
    mod = current_module()
    port = Signal(name, width, Kind.IN_PORT)
    shadow = Signal(naming.in_shadow(name), width, Kind.REG, role="in_shadow")
    mod._register_signal(shadow)
    mod._reserve(port.name)
    mod.in_ports.append((port, shadow))
    return shadow


def RegOut(name: str, width: int) -> Signal:
    """Declare an output port; returns the ``<name>_outreg`` register that
    drives it."""
    mod = current_module()
    port = Signal(name, width, Kind.OUT_PORT)
    shadow = Signal(naming.out_shadow(name), width, Kind.REG, role="out_shadow")
    mod._register_signal(shadow)
    mod._reserve(port.name)
    mod.out_ports.append((port, shadow))
    return shadow


def RegArray(name: str, width: int, depth: int) -> ArraySignal:
    """Declare a register array: element reads are combinational, element
    writes land next cycle.  Elements start at 0."""
    mod = current_module()
    arr = ArraySignal(name, width, depth)
    mod._register_signal(arr)
    mod.arrays.append(arr)
    return arr


def instantiate(child: HWModule, instance_name: str) -> InstanceRef:
    """Place a frozen module inside the active one."""
    return current_module()._instantiate(child, instance_name)
