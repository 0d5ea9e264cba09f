"""Deterministic name construction for everything the emitter synthesizes.

Both the emitter and the freeze-time collision audit go through these
helpers so that generated names have exactly one source of truth.
"""

from __future__ import annotations

import re

IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# Implicitly present on every module, in port-list order.
INTERFACE_SIGNALS = ("CLK", "RST", "START", "Done", "get_done", "Ready")

# The module-level state register (idle / running / done).
TOP_STATE = "state_st"

RESET_LOOP_VAR = "rst_i"


def is_identifier(name: str) -> bool:
    return bool(IDENT_RE.match(name))


def companion_wire(name: str) -> str:
    """Next-value shadow of a clocked register."""
    return f"{name}_WIRE"


def state_reg(label: str) -> str:
    """Per-leaf (and per-while-loop) FSM state register."""
    return f"state_{label}"


def in_shadow(port: str) -> str:
    """Latched copy of an input port."""
    return f"{port}_inreg"


def out_shadow(port: str) -> str:
    """Register driving an output port."""
    return f"{port}_outreg"


def instance_wire(instance: str, signal: str) -> str:
    """Parent-side wire for one signal of a submodule instance."""
    return f"{instance}_{signal}"


def array_port(array: str, occurrence: int, role: str) -> str:
    """Per-write-occurrence staging register for a register array."""
    return f"{array}__{role}{occurrence}"


FIFO_WIRES = (
    "read_data",
    "read_enable",
    "read_ready",
    "write_data",
    "write_enable",
    "write_ready",
)

BRAM_WIRES = ("ADDR", "DIN", "DOUT", "WE")
