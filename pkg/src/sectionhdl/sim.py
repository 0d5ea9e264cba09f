"""Cycle-accurate reference interpreter for frozen module hierarchies.

One step models one clock cycle:

1. derived wires refresh (FIFO readiness, submodule Done/Ready/outputs);
2. every active leaf's guards are evaluated against pre-cycle state;
3. leaves whose guards all hold *fire*, in deterministic tree order:
   Var writes are visible immediately to later statements, everything else
   (Reg, array, FIFO, BRAM, submodule handshake) is staged;
4. each fired leaf's completion actions from the schedule plan run against
   the staged next-cycle state (so serial successors, loop back edges and
   parallel joins cost no extra cycle);
5. staged effects commit atomically at the cycle edge.

Two distinct leaves staging a write to the same register or array element
in one cycle is a ConflictError; the same applies to double use of a FIFO
side or a BRAM port.  A watchdog turns silent stalls into a DeadlockError
that names every stalled leaf and its failing guard.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Union

from . import evalcore
from .errors import AddressError, ConflictError, DeadlockError, ElaborationError, SimulationError
from .evalcore.program import Program, compile_expr
from .expr import ArraySignal, Index, Kind, Signal, mask_of, render
from .module import HWModule
from .schedule import ACTIVE, DONE, IDLE, AssignNext, Branch, Mark
from .sections import (
    Assign,
    BramAccess,
    Display,
    FifoPop,
    FifoPush,
    InstanceRelease,
    InstanceStart,
    iter_leaves,
)

DEFAULT_WATCHDOG = 1_000_000


# ---------------------------------------------------------------------------
# Compiled module image (shared by every instance of a module)


@dataclass
class _FifoImage:
    obj: object
    name: str
    data_slot: int
    ready_slot: int
    space_slot: int
    mask: int
    depth: int


@dataclass
class _BramImage:
    obj: object
    name: str
    dout_slot: int
    mask: int
    depth: int


@dataclass
class _InstImage:
    name: str
    child: HWModule
    ready_slot: int
    done_slot: int
    out_links: list[tuple[int, int, int]]  # (parent_slot, child_slot, mask)
    in_targets: list[tuple[int, int]]  # (child_shadow_slot, mask), port order


@dataclass
class _LeafImage:
    label: str
    state_slot: int
    guards: list[tuple[Program, str]]
    stmts: list[tuple]
    completion: tuple
    consumed_brams: list[int]


class ModuleImage:
    """Slot table and compiled programs for one frozen module."""

    def __init__(self, module: HWModule):
        if not module.frozen:
            raise SimulationError(f"module {module.name!r} is not frozen")
        self.module = module
        self.slots: dict[str, int] = {}
        self.slot_names: list[str] = []
        self.slot_masks: list[int] = []
        self.slot_inits: list[int] = []
        for name, sig in module.signals.items():
            if isinstance(sig, Signal):
                self.slots[name] = len(self.slot_names)
                self.slot_names.append(name)
                self.slot_masks.append(mask_of(sig.width))
                init = sig.initial if sig.kind is Kind.REG and sig.role == "" else 0
                self.slot_inits.append(init)
        self.var_slots = [self.slots[v.name] for v in module.vars]
        self.top_state_slot = self.slots[module.top_state.name]
        self.out_slots = [
            (port.name, self.slots[shadow.name]) for port, shadow in module.out_ports
        ]
        self.in_targets = [
            (self.slots[shadow.name], mask_of(shadow.width))
            for _port, shadow in module.in_ports
        ]

        self.arrays = list(module.arrays)
        self.arr_ids = {a.name: i for i, a in enumerate(self.arrays)}
        self.arr_off: list[int] = []
        self.arr_len: list[int] = []
        offset = 0
        for a in self.arrays:
            self.arr_off.append(offset)
            self.arr_len.append(a.depth)
            offset += a.depth
        self.arena_size = offset
        self._arr_tables_np = None

        self.fifos = [
            _FifoImage(
                f,
                f.name,
                self.slots[f.read_data.name],
                self.slots[f.read_ready.name],
                self.slots[f.write_ready.name],
                mask_of(f.width),
                f.depth,
            )
            for f in module.fifos
        ]
        self._fifo_ids = {id(f.obj): i for i, f in enumerate(self.fifos)}
        self.brams = [
            _BramImage(b, b.name, self.slots[b.dout.name], mask_of(b.width), b.depth)
            for b in module.brams
        ]
        self._bram_ids = {id(b.obj): i for i, b in enumerate(self.brams)}
        self.instances = []
        for inst in module.instances:
            child_image = build_image(inst.module)
            self.instances.append(
                _InstImage(
                    inst.name,
                    inst.module,
                    self.slots[inst.ready.name],
                    self.slots[inst.done.name],
                    [
                        (
                            self.slots[inst.out_wires[port.name].name],
                            child_image.slots[shadow.name],
                            mask_of(port.width),
                        )
                        for port, shadow in inst.module.out_ports
                    ],
                    child_image.in_targets,
                )
            )
        self._inst_ids = {inst.name: i for i, inst in enumerate(module.instances)}

        self.max_stack = 1
        self.kernel_ok = all(m <= (1 << 64) - 1 for m in self.slot_masks) and all(
            mask_of(a.width) <= (1 << 64) - 1 for a in self.arrays
        )
        plan = module.plan
        self.leaves = []
        leaf_by_label = {leaf.label: leaf for leaf in iter_leaves(module.root)}
        dout_slot_to_bram = {b.dout_slot: i for i, b in enumerate(self.brams)}
        for label in plan.leaf_order:
            leaf = leaf_by_label[label]
            guards = [(self._compile(g), render(g)) for g in leaf.guards]
            stmts = [self._compile_stmt(s, label) for s in leaf.statements]
            consumed: list[int] = []
            for s in stmts:
                for prog in _stmt_programs(s):
                    for slot in prog.load_slots:
                        bram_id = dout_slot_to_bram.get(slot)
                        if bram_id is not None and bram_id not in consumed:
                            consumed.append(bram_id)
            self.leaves.append(
                _LeafImage(
                    label,
                    self.slots[module.state_of(label).name],
                    guards,
                    stmts,
                    self._compile_actions(plan.completion[label]),
                    consumed,
                )
            )
        self.start_program = self._compile_actions(plan.start_actions)
        self.release_program = self._compile_actions(plan.release_actions)

    # -- compilation helpers -------------------------------------------------

    def _compile(self, expr) -> Program:
        prog = compile_expr(expr, self.slots, self.arr_ids)
        self.max_stack = max(self.max_stack, prog.max_stack)
        if not prog.kernel_ok:
            self.kernel_ok = False
        return prog

    def _compile_stmt(self, stmt, label: str) -> tuple:
        if isinstance(stmt, Assign):
            if isinstance(stmt.target, Index) and isinstance(stmt.target.base, ArraySignal):
                arr = stmt.target.base
                return (
                    "arr",
                    self.arr_ids[arr.name],
                    self._compile(stmt.target.index),
                    self._compile(stmt.rhs),
                    mask_of(arr.width),
                    arr.depth,
                    arr.name,
                )
            target: Signal = stmt.target  # type: ignore[assignment]
            slot = self.slots[target.name]
            prog = self._compile(stmt.rhs)
            if target.kind is Kind.VAR:
                return ("var", slot, prog, mask_of(target.width))
            return ("reg", slot, prog, mask_of(target.width), target.name)
        if isinstance(stmt, Display):
            segments = _parse_format(stmt.format)
            progs = [self._compile(a) for a in stmt.args]
            widths = [a.width for a in stmt.args]
            return ("disp", segments, progs, widths)
        if isinstance(stmt, FifoPop):
            return ("pop", self._fifo_ids[id(stmt.fifo)], stmt.fifo.name)
        if isinstance(stmt, FifoPush):
            fifo = stmt.fifo
            return (
                "push",
                self._fifo_ids[id(fifo)],
                self._compile(stmt.value),
                mask_of(fifo.width),
                fifo.name,
            )
        if isinstance(stmt, BramAccess):
            bram = stmt.bram
            return (
                "bram",
                self._bram_ids[id(bram)],
                self._compile(stmt.addr),
                self._compile(stmt.data) if stmt.data is not None else None,
                mask_of(bram.width),
                bram.depth,
                bram.name,
            )
        if isinstance(stmt, InstanceStart):
            inst_id = self._inst_ids[stmt.instance.name]
            image = self.instances[inst_id]
            values = [
                (self._compile(expr), target_slot, mask)
                for (_name, expr), (target_slot, mask) in zip(stmt.bindings, image.in_targets)
            ]
            return ("start", inst_id, values, stmt.instance.name)
        if isinstance(stmt, InstanceRelease):
            return ("release", self._inst_ids[stmt.instance.name], stmt.instance.name)
        raise TypeError(f"unknown statement {stmt!r}")

    def _compile_actions(self, actions) -> tuple:
        compiled = []
        for act in actions:
            if isinstance(act, AssignNext):
                compiled.append(
                    (
                        "set",
                        self.slots[act.target.name],
                        self._compile(act.value),
                        mask_of(act.target.width),
                    )
                )
            elif isinstance(act, Branch):
                compiled.append(
                    (
                        "br",
                        self._compile(act.cond),
                        self._compile_actions(act.then),
                        self._compile_actions(act.orelse),
                    )
                )
            elif isinstance(act, Mark):
                compiled.append(("mark", act.label, act.event))
            else:
                raise TypeError(f"unknown action {act!r}")
        return tuple(compiled)

    def arr_tables_np(self):
        if self._arr_tables_np is None:
            import numpy as np

            self._arr_tables_np = (
                np.array(self.arr_off or [0], dtype=np.int64),
                np.array(self.arr_len or [0], dtype=np.int64),
            )
        return self._arr_tables_np


def build_image(module: HWModule) -> ModuleImage:
    if module._image is None:
        module._image = ModuleImage(module)
    return module._image


def _stmt_programs(stmt: tuple):
    tag = stmt[0]
    if tag in ("var", "reg"):
        yield stmt[2]
    elif tag == "arr":
        yield stmt[2]
        yield stmt[3]
    elif tag == "disp":
        yield from stmt[2]
    elif tag == "push":
        yield stmt[2]
    elif tag == "bram":
        yield stmt[2]
        if stmt[3] is not None:
            yield stmt[3]
    elif tag == "start":
        for prog, _slot, _mask in stmt[2]:
            yield prog


def _parse_format(fmt: str) -> list[tuple[str, object]]:
    segments: list[tuple[str, object]] = []
    literal = []
    arg = 0
    i = 0
    while i < len(fmt):
        ch = fmt[i]
        if ch == "%":
            spec = fmt[i + 1]
            if spec == "%":
                literal.append("%")
            else:
                if literal:
                    segments.append(("lit", "".join(literal)))
                    literal = []
                segments.append((spec, arg))
                arg += 1
            i += 2
        else:
            literal.append(ch)
            i += 1
    if literal:
        segments.append(("lit", "".join(literal)))
    return segments


# ---------------------------------------------------------------------------
# Per-instance runtime state


class InstanceSim:
    def __init__(self, image: ModuleImage, path: str, backend: str):
        self.image = image
        self.path = path
        if backend == "native":
            if not evalcore.NATIVE_AVAILABLE:
                raise SimulationError("compiled evaluation kernel is not available")
            if not image.kernel_ok:
                raise SimulationError(
                    f"module {image.module.name!r} uses signals wider than 64 bits; "
                    "the compiled kernel cannot run it"
                )
            lane = "native"
        elif backend == "pure":
            lane = "pure"
        else:
            lane = "native" if evalcore.NATIVE_AVAILABLE and image.kernel_ok else "pure"
        self.lane = lane
        if lane == "native":
            import numpy as np

            self._vbuf = [
                np.array(image.slot_inits, dtype=np.uint64),
                np.array(image.slot_inits, dtype=np.uint64),
            ]
            self._abuf = [
                np.zeros(max(1, image.arena_size), dtype=np.uint64),
                np.zeros(max(1, image.arena_size), dtype=np.uint64),
            ]
            self._phase = 0  # which physical buffer is the current cycle
            self.cur, self.nxt = self._vbuf
            self.arena_cur, self.arena_nxt = self._abuf
            off, length = image.arr_tables_np()
            self._evaluator = evalcore.Evaluator(
                self._vbuf[0], self._vbuf[1], self._abuf[0], self._abuf[1],
                off, length, image.max_stack + 1,
            )
            self._handles: dict[int, int] = {}
        else:
            self.cur = list(image.slot_inits)
            self.nxt = list(self.cur)
            self.arena_cur = [0] * max(1, image.arena_size)
            self.arena_nxt = list(self.arena_cur)
            self._evaluator = None
        self.queues: list[deque] = [deque() for _ in image.fifos]
        self.bram_mem: list[list[int]] = [[0] * b.depth for b in image.brams]
        self.bram_valid_cycle: list[int] = [-1] * len(image.brams)
        self.children = [
            InstanceSim(build_image(ii.child), f"{path}.{ii.name}" if path else ii.name, backend)
            for ii in image.instances
        ]
        self.timings: dict[str, list] = {}
        self._reset_staging()

    def _reset_staging(self):
        self.staged_regs: dict[int, str] = {}
        self.staged_arr: dict[tuple[int, int], str] = {}
        self.staged_pops: dict[int, str] = {}
        self.staged_pushes: dict[int, tuple[int, str]] = {}
        self.staged_bram: dict[int, tuple[int, Optional[int], str]] = {}
        self.staged_starts: dict[int, tuple[list[int], str]] = {}
        self.staged_releases: dict[int, str] = {}

    # -- evaluation ----------------------------------------------------------

    def _eval(self, prog: Program, next_view: bool, context: str) -> int:
        """Evaluate against the pre-cycle state, or (for schedule actions)
        against the staged next-cycle state."""
        try:
            if self._evaluator is not None:
                handle = self._handles.get(id(prog))
                if handle is None:
                    handle = self._evaluator.prepare(prog.steps)
                    self._handles[id(prog)] = handle
                phase = (1 - self._phase) if next_view else self._phase
                return self._evaluator.run(handle, phase, phase)
            values = self.nxt if next_view else self.cur
            arena = self.arena_nxt if next_view else self.arena_cur
            return evalcore.run_pure(prog, values, arena, self.image.arr_off, self.image.arr_len)
        except IndexError as exc:
            arr_id, idx = exc.args[0]
            arr = self.image.arrays[arr_id]
            raise AddressError(
                f"{self._where(context)}: array {arr.name!r} index {idx} out of "
                f"range (depth {arr.depth})"
            ) from None

    def _where(self, context: str) -> str:
        mod = self.image.module.name
        loc = self.path or "top"
        return f"{loc} ({mod}), {context}"

    # -- cycle phases ----------------------------------------------------------

    def begin_cycle(self):
        if self.lane == "native":
            import numpy as np

            np.copyto(self.nxt, self.cur)
            np.copyto(self.arena_nxt, self.arena_cur)
        else:
            self.nxt[:] = self.cur
            self.arena_nxt[:] = self.arena_cur
        for slot in self.image.var_slots:
            self.cur[slot] = 0
            self.nxt[slot] = 0
        for i, fifo in enumerate(self.image.fifos):
            q = self.queues[i]
            head = q[0] if q else 0
            for view in (self.cur, self.nxt):
                view[fifo.data_slot] = head
                view[fifo.ready_slot] = 1 if q else 0
                view[fifo.space_slot] = 1 if len(q) < fifo.depth else 0
        for inst, child in zip(self.image.instances, self.children):
            child_state = int(child.cur[child.image.top_state_slot])
            ready = 1 if child_state == IDLE else 0
            done = 1 if child_state == DONE else 0
            for view in (self.cur, self.nxt):
                view[inst.ready_slot] = ready
                view[inst.done_slot] = done
                for parent_slot, child_slot, mask in inst.out_links:
                    view[parent_slot] = int(child.cur[child_slot]) & mask
        self._reset_staging()

    def fired_leaves(self) -> list[_LeafImage]:
        fired = []
        for leaf in self.image.leaves:
            if int(self.cur[leaf.state_slot]) != ACTIVE:
                continue
            ok = True
            for prog, _text in leaf.guards:
                if self._eval(prog, False, f"guard of leaf {leaf.label!r}") == 0:
                    ok = False
                    break
            if ok:
                fired.append(leaf)
        return fired

    def execute(self, leaf: _LeafImage, cycle: int, log: list):
        label = leaf.label
        ctx = f"leaf {label!r}"
        for bram_id in leaf.consumed_brams:
            if self.bram_valid_cycle[bram_id] != cycle:
                bram = self.image.brams[bram_id]
                raise SimulationError(
                    f"{self._where(ctx)}: {bram.name!r} read data consumed without "
                    "a read issue in the previous cycle"
                )
        for stmt in leaf.stmts:
            tag = stmt[0]
            if tag == "var":
                _t, slot, prog, mask = stmt
                self.cur[slot] = self._eval(prog, False, ctx) & mask
            elif tag == "reg":
                _t, slot, prog, mask, name = stmt
                prev = self.staged_regs.get(slot)
                if prev is not None and prev != label:
                    raise ConflictError(
                        f"{self._where(ctx)}: leaves {prev!r} and {label!r} both "
                        f"write {name!r} in cycle {cycle}"
                    )
                self.staged_regs[slot] = label
                self.nxt[slot] = self._eval(prog, False, ctx) & mask
            elif tag == "arr":
                _t, arr_id, idx_prog, rhs_prog, mask, depth, name = stmt
                idx = self._eval(idx_prog, False, ctx)
                if idx >= depth:
                    raise AddressError(
                        f"{self._where(ctx)}: array {name!r} index {idx} out of "
                        f"range (depth {depth})"
                    )
                key = (arr_id, idx)
                prev = self.staged_arr.get(key)
                if prev is not None and prev != label:
                    raise ConflictError(
                        f"{self._where(ctx)}: leaves {prev!r} and {label!r} both "
                        f"write {name}[{idx}] in cycle {cycle}"
                    )
                self.staged_arr[key] = label
                value = self._eval(rhs_prog, False, ctx) & mask
                self.arena_nxt[self.image.arr_off[arr_id] + idx] = value
            elif tag == "disp":
                _t, segments, progs, widths = stmt
                parts = []
                for kind, payload in segments:
                    if kind == "lit":
                        parts.append(payload)
                    else:
                        value = self._eval(progs[payload], False, ctx)
                        if kind == "d":
                            parts.append(str(value))
                        else:  # hex, zero-padded to the argument width
                            digits = (widths[payload] + 3) // 4
                            parts.append(format(value, f"0{digits}x"))
                log.append((cycle, "".join(parts)))
            elif tag == "pop":
                _t, fifo_id, name = stmt
                prev = self.staged_pops.get(fifo_id)
                if prev is not None and prev != label:
                    raise ConflictError(
                        f"{self._where(ctx)}: leaves {prev!r} and {label!r} both "
                        f"read fifo {name!r} in cycle {cycle}"
                    )
                self.staged_pops[fifo_id] = label
            elif tag == "push":
                _t, fifo_id, prog, mask, name = stmt
                prev = self.staged_pushes.get(fifo_id)
                if prev is not None and prev[1] != label:
                    raise ConflictError(
                        f"{self._where(ctx)}: leaves {prev[1]!r} and {label!r} both "
                        f"write fifo {name!r} in cycle {cycle}"
                    )
                value = self._eval(prog, False, ctx) & mask
                self.staged_pushes[fifo_id] = (value, label)
            elif tag == "bram":
                _t, bram_id, addr_prog, data_prog, mask, depth, name = stmt
                prev = self.staged_bram.get(bram_id)
                if prev is not None and prev[2] != label:
                    raise ConflictError(
                        f"{self._where(ctx)}: leaves {prev[2]!r} and {label!r} both "
                        f"use the port of bram {name!r} in cycle {cycle}"
                    )
                addr = self._eval(addr_prog, False, ctx)
                if addr >= depth:
                    raise AddressError(
                        f"{self._where(ctx)}: bram {name!r} address {addr} out of "
                        f"range (depth {depth})"
                    )
                data = (
                    self._eval(data_prog, False, ctx) & mask
                    if data_prog is not None
                    else None
                )
                self.staged_bram[bram_id] = (addr, data, label)
            elif tag == "start":
                _t, inst_id, values, name = stmt
                prev = self.staged_starts.get(inst_id)
                if prev is not None and prev[1] != label:
                    raise ConflictError(
                        f"{self._where(ctx)}: leaves {prev[1]!r} and {label!r} both "
                        f"start instance {name!r} in cycle {cycle}"
                    )
                evaluated = [
                    (slot, self._eval(prog, False, ctx) & mask)
                    for prog, slot, mask in values
                ]
                self.staged_starts[inst_id] = (evaluated, label)
            elif tag == "release":
                _t, inst_id, _name = stmt
                self.staged_releases[inst_id] = label
            else:
                raise TypeError(f"bad statement tag {tag}")

    def run_actions(self, actions: tuple, cycle: int):
        for act in actions:
            tag = act[0]
            if tag == "set":
                _t, slot, prog, mask = act
                self.nxt[slot] = self._eval(prog, True, "schedule") & mask
            elif tag == "br":
                _t, prog, then, orelse = act
                if self._eval(prog, True, "schedule"):
                    self.run_actions(then, cycle)
                else:
                    self.run_actions(orelse, cycle)
            else:  # mark
                _t, label, event = act
                slot = self.timings.setdefault(label, [None, None])
                if event == "activate":
                    if slot[0] is None:
                        slot[0] = cycle + 1
                else:
                    slot[1] = cycle

    def commit(self, cycle: int):
        for fifo_id in self.staged_pops:
            self.queues[fifo_id].popleft()
        for fifo_id, (value, _label) in self.staged_pushes.items():
            self.queues[fifo_id].append(value)
        for bram_id, (addr, data, _label) in self.staged_bram.items():
            bram = self.image.brams[bram_id]
            mem = self.bram_mem[bram_id]
            self.nxt[bram.dout_slot] = mem[addr]  # read-first: old contents
            self.bram_valid_cycle[bram_id] = cycle + 1
            if data is not None:
                mem[addr] = data
        for inst_id, (values, _label) in self.staged_starts.items():
            child = self.children[inst_id]
            for slot, value in values:
                child.nxt[slot] = value
            child.run_actions(child.image.start_program, cycle)
        for inst_id in self.staged_releases:
            child = self.children[inst_id]
            child.run_actions(child.image.release_program, cycle)

    def flip(self):
        self.cur, self.nxt = self.nxt, self.cur
        self.arena_cur, self.arena_nxt = self.arena_nxt, self.arena_cur
        if self._evaluator is not None:
            self._phase ^= 1

    def stalled_leaves(self) -> list[tuple[str, str, list[str]]]:
        """(path, label, failing guard texts) for every active leaf."""
        out = []
        for leaf in self.image.leaves:
            if int(self.cur[leaf.state_slot]) != ACTIVE:
                continue
            failing = [
                text
                for prog, text in leaf.guards
                if self._eval(prog, False, f"guard of {leaf.label!r}") == 0
            ]
            out.append((self.path or "top", leaf.label, failing))
        return out


# ---------------------------------------------------------------------------
# Whole-design simulation


@dataclass
class SimReport:
    design: str
    done: bool
    done_cycle: Optional[int]
    cycles_to_done: Optional[int]
    total_cycles: int
    display: list[tuple[int, str]]
    sections: dict[str, dict[str, int]]
    outputs: dict[str, int]
    fifos: dict[str, list[int]]

    def display_lines(self) -> list[str]:
        return [text for _cycle, text in self.display]

    def section_cycles(self, label: str) -> int:
        return self.sections[label]["cycles"]

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "done": self.done,
            "done_cycle": self.done_cycle,
            "cycles_to_done": self.cycles_to_done,
            "total_cycles": self.total_cycles,
            "display": [[c, t] for c, t in self.display],
            "sections": self.sections,
            "outputs": self.outputs,
            "fifos": self.fifos,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


class Simulation:
    """One run of a frozen top module with optional stimuli.

    ``stimuli`` maps a top-level FIFO name to its initial contents (at most
    ``depth`` words).  ``port_inputs`` maps input port names to the values
    START latches.  ``backend`` picks the expression evaluator: ``auto``
    (compiled kernel when available), ``pure`` or ``native``.
    """

    def __init__(
        self,
        top: HWModule,
        stimuli: Optional[dict[str, list[int]]] = None,
        port_inputs: Optional[dict[str, int]] = None,
        backend: str = "auto",
    ):
        if backend not in ("auto", "pure", "native"):
            raise ValueError(f"unknown backend {backend!r}")
        image = build_image(top)
        self.top = InstanceSim(image, "", backend)
        self.instances: list[InstanceSim] = []

        def flatten(inst: InstanceSim):
            self.instances.append(inst)
            for child in inst.children:
                flatten(child)

        flatten(self.top)
        self.cycle = 0
        self.display_log: list[tuple[int, str]] = []
        self._load_stimuli(stimuli or {})
        self._pending_inputs = self._resolve_inputs(port_inputs or {})
        self._started = False

    def _load_stimuli(self, stimuli: dict[str, list[int]]):
        by_name = {f.name: i for i, f in enumerate(self.top.image.fifos)}
        for name, values in stimuli.items():
            if name not in by_name:
                known = ", ".join(by_name) or "none"
                raise SimulationError(f"no fifo named {name!r} (known: {known})")
            fifo = self.top.image.fifos[by_name[name]]
            if len(values) > fifo.depth:
                raise SimulationError(
                    f"fifo {name!r}: {len(values)} initial words exceed depth {fifo.depth}"
                )
            for v in values:
                if v < 0 or v & ~fifo.mask:
                    raise SimulationError(
                        f"fifo {name!r}: value {v} does not fit in the fifo width"
                    )
            self.top.queues[by_name[name]].extend(int(v) for v in values)

    def _resolve_inputs(self, port_inputs: dict[str, int]) -> list[tuple[int, int]]:
        module = self.top.image.module
        known = {port.name for port, _ in module.in_ports}
        unknown = sorted(set(port_inputs) - known)
        if unknown:
            raise SimulationError(
                f"module {module.name!r} has no input port(s): {', '.join(unknown)}"
            )
        resolved = []
        for (port, _shadow), (slot, mask) in zip(module.in_ports, self.top.image.in_targets):
            resolved.append((slot, int(port_inputs.get(port.name, 0)) & mask))
        return resolved

    def step(self) -> None:
        """Advance one clock cycle."""
        cycle = self.cycle + 1
        for inst in self.instances:
            inst.begin_cycle()
        fired: list[tuple[InstanceSim, _LeafImage]] = []
        for inst in self.instances:
            for leaf in inst.fired_leaves():
                fired.append((inst, leaf))
        for inst, leaf in fired:
            inst.execute(leaf, cycle, self.display_log)
            inst.run_actions(leaf.completion, cycle)
        if not self._started and int(self.top.cur[self.top.image.top_state_slot]) == IDLE:
            for slot, value in self._pending_inputs:
                self.top.nxt[slot] = value
            self.top.run_actions(self.top.image.start_program, cycle)
            self._started = True
        for inst in self.instances:
            inst.commit(cycle)
        for inst in self.instances:
            inst.flip()
        self.cycle = cycle

    @property
    def done(self) -> bool:
        return int(self.top.cur[self.top.image.top_state_slot]) == DONE

    def run(self, max_cycles: int = DEFAULT_WATCHDOG) -> SimReport:
        if max_cycles < 1:
            raise ValueError("max_cycles must be positive")
        while self.cycle < max_cycles:
            self.step()
            if self.done:
                return self._report(done_cycle=self.cycle + 1)
        report = self._report(done_cycle=None)
        stalls = []
        for inst in self.instances:
            stalls.extend(inst.stalled_leaves())
        lines = [
            f"watchdog expired after {self.cycle} cycles; design did not assert Done"
        ]
        for path, label, failing in stalls:
            if failing:
                guards = "; ".join(f"guard {t} is 0" for t in failing)
            else:
                guards = "waiting on successors"
            lines.append(f"  stalled: {path} leaf {label!r}: {guards}")
        if not stalls:
            lines.append("  no leaf is active (module may never have been started)")
        raise DeadlockError("\n".join(lines), report)

    def _report(self, done_cycle: Optional[int]) -> SimReport:
        sections: dict[str, dict[str, int]] = {}
        for inst in self.instances:
            for label, (first, completed) in inst.timings.items():
                key = label if inst.path == "" else f"{inst.path}.{label}"
                if first is None or completed is None:
                    continue
                sections[key] = {
                    "first_active": first,
                    "completed": completed,
                    "cycles": completed - first + 1,
                }
        outputs = {
            name: int(self.top.cur[slot]) for name, slot in self.top.image.out_slots
        }
        fifos = {
            f.name: [int(v) for v in self.top.queues[i]]
            for i, f in enumerate(self.top.image.fifos)
        }
        return SimReport(
            design=self.top.image.module.name,
            done=done_cycle is not None,
            done_cycle=done_cycle,
            cycles_to_done=(done_cycle - 1) if done_cycle is not None else None,
            total_cycles=self.cycle,
            display=list(self.display_log),
            sections=sections,
            outputs=outputs,
            fifos=fifos,
        )


def run(
    top: HWModule,
    stimuli: Optional[dict[str, list[int]]] = None,
    port_inputs: Optional[dict[str, int]] = None,
    max_cycles: int = DEFAULT_WATCHDOG,
    backend: str = "auto",
) -> SimReport:
    """Simulate ``top`` until Done or watchdog expiry (DeadlockError)."""
    return Simulation(top, stimuli, port_inputs, backend).run(max_cycles)
