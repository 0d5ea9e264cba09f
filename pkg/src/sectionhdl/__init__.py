"""sectionhdl: model synchronous circuits as trees of clock-cycle sections.

A design is written as ordinary Python: ``with`` blocks arrange leaf
sections in series, parallel and loops; overloaded operators build the
expressions inside them.  A frozen module hierarchy can then be emitted as
synthesizable Verilog or executed by the bundled cycle-accurate
interpreter, which follows the identical schedule.
"""

from .errors import (
    AddressError,
    ConflictError,
    DeadlockError,
    ElaborationError,
    EmitError,
    EvalError,
    HdlError,
    SimulationError,
)
from .expr import (
    ArraySignal,
    Const,
    Expression,
    Kind,
    Mux,
    Signal,
    evaluate,
    make_binary,
    render,
)
from .interfaces import SimpleBram, SimpleFifo
from .module import (
    HWModule,
    InstanceRef,
    Library,
    Reg,
    RegArray,
    RegIn,
    RegOut,
    Var,
    begin_module,
    end_module,
    fresh_library,
    instantiate,
    use_library,
)
from .schedule import predicted_cycles
from .sections import (
    ForLoopSection,
    LeafSection,
    ParallelSections,
    SerialSections,
    WhileLoopSection,
    add_guard,
    assign,
    close_section,
    display,
    open_section,
)
from .sim import SimReport, Simulation, run
from .verilog import EmittedModule, emit_hierarchy, emit_module

__version__ = "0.1.0"

__all__ = [
    "AddressError",
    "ArraySignal",
    "ConflictError",
    "Const",
    "DeadlockError",
    "ElaborationError",
    "EmitError",
    "EmittedModule",
    "EvalError",
    "Expression",
    "ForLoopSection",
    "HWModule",
    "HdlError",
    "InstanceRef",
    "Kind",
    "LeafSection",
    "Library",
    "Mux",
    "ParallelSections",
    "Reg",
    "RegArray",
    "RegIn",
    "RegOut",
    "SerialSections",
    "SimReport",
    "SimpleBram",
    "SimpleFifo",
    "Signal",
    "Simulation",
    "SimulationError",
    "Var",
    "WhileLoopSection",
    "add_guard",
    "assign",
    "begin_module",
    "close_section",
    "display",
    "emit_hierarchy",
    "emit_module",
    "end_module",
    "evaluate",
    "fresh_library",
    "instantiate",
    "make_binary",
    "open_section",
    "predicted_cycles",
    "render",
    "run",
    "use_library",
]
