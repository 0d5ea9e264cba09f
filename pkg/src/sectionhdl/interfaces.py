"""Standard building blocks: stream FIFOs and synchronous block memories.

These are elaboration-time models: calling ``fifo.read()`` inside a leaf
contributes a readiness guard and an enable pulse to that leaf, and maps to
a bundled Verilog module on emission.  Their runtime behaviour lives in the
simulator.

Timing contracts:

* FIFO: show-ahead.  ``read()`` guards on ``read_ready`` (non-empty) and
  returns the head value, valid in the firing cycle; the dequeue commits at
  the cycle edge.  ``write()`` guards on ``write_ready`` (not full).
* BRAM: one port operation per cycle (a read issue or a write).  Read data
  is valid exactly one cycle after the issue; a write also loads the read
  register with the *old* contents of the addressed cell (read-first).
"""

from __future__ import annotations

from . import naming, sections
from .errors import ElaborationError
from .expr import Binary, Const, Expression, Kind, Ref, Signal
from .sections import BramAccess, FifoPop, FifoPush, current_leaf, current_module

DEFAULT_FIFO_DEPTH = 16


def _coerce(value, width: int) -> Expression:
    if isinstance(value, int):
        return Const(width, value)
    return sections._to_expr(value)


class SimpleFifo:
    """First-in-first-out stream of ``width``-bit words.

    Sides not used inside the declaring module are exposed as module ports,
    so an external producer or consumer (a testbench, or simulation
    stimuli) can drive them.
    """

    def __init__(self, name: str, width: int, depth: int = DEFAULT_FIFO_DEPTH):
        if depth < 1:
            raise ElaborationError(f"fifo {name!r}: depth must be >= 1")
        mod = current_module()
        self.name = name
        self.width = width
        self.depth = depth
        self.module = mod
        self.read_data = Signal(
            naming.instance_wire(name, "read_data"), width, Kind.WIRE, role="fifo"
        )
        self.read_ready = Signal(
            naming.instance_wire(name, "read_ready"), 1, Kind.WIRE, role="fifo"
        )
        self.write_ready = Signal(
            naming.instance_wire(name, "write_ready"), 1, Kind.WIRE, role="fifo"
        )
        mod._claim_name(name)
        mod._reserved.add(name)
        mod._register_signal(self.read_data)
        mod._register_signal(self.read_ready)
        mod._register_signal(self.write_ready)
        mod._reserve(
            naming.instance_wire(name, "read_enable"),
            naming.instance_wire(name, "write_enable"),
            naming.instance_wire(name, "write_data"),
        )
        self.reads_internally = False
        self.writes_internally = False
        mod.fifos.append(self)

    def read(self) -> Expression:
        """Dequeue one word; the leaf stalls until the FIFO is non-empty."""
        leaf = current_leaf()
        if any(isinstance(s, FifoPop) and s.fifo is self for s in leaf.statements):
            raise ElaborationError(
                f'fifo {self.name!r}: one dequeue per cycle; leaf "{leaf.label}" '
                "already reads it"
            )
        sections.add_guard(Binary("==", Ref(self.read_ready), Const(1, 1)))
        leaf.statements.append(FifoPop(self))
        self.reads_internally = True
        return Ref(self.read_data)

    def write(self, value) -> None:
        """Enqueue one word; the leaf stalls until the FIFO has space."""
        leaf = current_leaf()
        if any(isinstance(s, FifoPush) and s.fifo is self for s in leaf.statements):
            raise ElaborationError(
                f'fifo {self.name!r}: one enqueue per cycle; leaf "{leaf.label}" '
                "already writes it"
            )
        sections.add_guard(Binary("==", Ref(self.write_ready), Const(1, 1)))
        leaf.statements.append(FifoPush(self, _coerce(value, self.width)))
        self.writes_internally = True


class SimpleBram:
    """Synchronous-read block memory with a single access port."""

    def __init__(self, name: str, width: int, depth: int):
        if depth < 1:
            raise ElaborationError(f"bram {name!r}: depth must be >= 1")
        mod = current_module()
        self.name = name
        self.width = width
        self.depth = depth
        self.module = mod
        self.addr_bits = max(1, (depth - 1).bit_length())
        self.dout = Signal(
            naming.instance_wire(name, "DOUT"), width, Kind.WIRE, role="bram"
        )
        mod._claim_name(name)
        mod._reserved.add(name)
        mod._register_signal(self.dout)
        mod._reserve(
            naming.instance_wire(name, "ADDR"),
            naming.instance_wire(name, "DIN"),
            naming.instance_wire(name, "WE"),
        )
        mod.brams.append(self)

    def _claim_port(self, leaf):
        if any(isinstance(s, BramAccess) and s.bram is self for s in leaf.statements):
            raise ElaborationError(
                f'bram {self.name!r}: one port operation per cycle; leaf '
                f'"{leaf.label}" already accesses it'
            )

    def write(self, addr, value) -> None:
        """Store ``value`` at ``addr``; committed at the cycle edge."""
        leaf = current_leaf()
        self._claim_port(leaf)
        leaf.statements.append(
            BramAccess(self, _coerce(addr, self.addr_bits), _coerce(value, self.width))
        )

    def read_issue(self, addr) -> None:
        """Present an address; ``read_data()`` is valid in the next cycle."""
        leaf = current_leaf()
        self._claim_port(leaf)
        leaf.statements.append(BramAccess(self, _coerce(addr, self.addr_bits), None))

    def read_data(self) -> Expression:
        """The registered read value (one cycle after the matching issue)."""
        return Ref(self.dout)
