"""Exception hierarchy shared across the elaborator, emitter and simulator."""


class HdlError(Exception):
    """Base class for all errors raised by this package."""


class ElaborationError(HdlError):
    """Raised while building a module: bad nesting, duplicate names, etc."""


class EvalError(HdlError):
    """Raised when an expression cannot be evaluated (e.g. unbound signal)."""


class EmitError(HdlError):
    """Raised when Verilog emission fails."""


class SimulationError(HdlError):
    """Base class for runtime simulation failures."""


class ConflictError(SimulationError):
    """Two leaves committed a write to the same state element in one cycle."""


class AddressError(SimulationError):
    """An array or BRAM access went out of range at simulation time."""


class DeadlockError(SimulationError):
    """Watchdog expired; carries a report of every stalled leaf."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
