"""Behavioural, synthesizable Verilog-2001 emission.

One file per module, hierarchy preserved, user names kept verbatim.  Each
module becomes:

* declarations: ports, ``_inreg``/``_outreg`` shadows, registers with their
  ``_WIRE`` next-value companions, a 2-bit ``state_<leaf>`` FSM register
  per leaf, unpacked register arrays;
* one combinational block: every ``_WIRE`` defaults to its held value
  (no latches), then one ``if (state_<leaf> == 1)`` branch per leaf, in
  tree order, containing the guard-wrapped statement translations and the
  successor actions from the schedule plan;
* one clocked block: synchronous reset, then ``x <= x_WIRE`` commits;
* submodule, FIFO and BRAM instantiations with ``<instance>_<signal>``
  wires.

Emission is a pure function of the frozen module: byte-identical across
runs.
"""

from __future__ import annotations

import shutil
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import naming
from .errors import EmitError
from .expr import Index, Kind, Signal, render
from .module import HWModule, iter_array_writes
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


@dataclass
class EmittedModule:
    module_name: str
    ports: str
    declarations: str
    combinational: str
    sequential: str
    instances: str

    @property
    def text(self) -> str:
        parts = [self.ports, self.declarations, self.combinational, self.sequential]
        if self.instances:
            parts.append(self.instances)
        return "\n".join(parts) + "\nendmodule\n"


def _range(width: int) -> str:
    return f"[{width - 1}:0] " if width > 1 else ""


def _const(width: int, value: int) -> str:
    return f"{width}'d{value}"


def _is_clocked(sig: Signal) -> bool:
    return sig.kind in (Kind.REG, Kind.LOOP_VAR)


def _wire_view(sig: Signal) -> str:
    """Name of a signal as scheduling logic sees it: the staged next value
    for anything clocked, the plain wire otherwise."""
    if _is_clocked(sig):
        return naming.companion_wire(sig.name)
    return sig.name


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _display_format(fmt: str) -> str:
    # %d prints unpadded (matches the interpreter); %x keeps Verilog's
    # width/4 zero padding, which the interpreter reproduces.
    return _escape(fmt).replace("%d", "%0d")


class _ModuleWriter:
    def __init__(self, module: HWModule):
        if not module.frozen:
            raise EmitError(f"module {module.name!r} is not frozen")
        self.m = module
        self.array_ports: dict[int, tuple[str, str, str]] = {}
        for array, occ, _leaf, stmt in iter_array_writes(module.root):
            self.array_ports[id(stmt)] = (
                naming.array_port(array.name, occ, "we"),
                naming.array_port(array.name, occ, "wa"),
                naming.array_port(array.name, occ, "wd"),
            )

    # -- ports ---------------------------------------------------------------

    def _exposed_fifo_ports(self) -> list[tuple[str, str, int]]:
        """(name, direction, width) for FIFO sides driven from outside."""
        ports = []
        for fifo in self.m.fifos:
            if not fifo.reads_internally:
                ports.append((fifo.read_data.name, "output", fifo.width))
                ports.append((naming.instance_wire(fifo.name, "read_enable"), "input", 1))
                ports.append((fifo.read_ready.name, "output", 1))
            if not fifo.writes_internally:
                ports.append((naming.instance_wire(fifo.name, "write_data"), "input", fifo.width))
                ports.append((naming.instance_wire(fifo.name, "write_enable"), "input", 1))
                ports.append((fifo.write_ready.name, "output", 1))
        return ports

    def ports(self) -> str:
        names = list(naming.INTERFACE_SIGNALS)
        names += [port.name for port, _ in self.m.in_ports]
        names += [port.name for port, _ in self.m.out_ports]
        names += [name for name, _dir, _w in self._exposed_fifo_ports()]
        lines = [f"module {self.m.name} ("]
        lines.append("  CLK, RST,")
        lines.append("  START, Done, get_done, Ready" + ("," if len(names) > 6 else ""))
        user = names[6:]
        if user:
            lines.append("  " + ", ".join(user))
        lines.append(");")
        return "\n".join(lines)

    # -- declarations ----------------------------------------------------------

    def declarations(self) -> str:
        m = self.m
        out = []
        out.append("  input CLK;")
        out.append("  input RST;")
        out.append("  input START;")
        out.append("  output Done;")
        out.append("  input get_done;")
        out.append("  output Ready;")
        for port, _shadow in m.in_ports:
            out.append(f"  input {_range(port.width)}{port.name};")
        for port, _shadow in m.out_ports:
            out.append(f"  output {_range(port.width)}{port.name};")
        for name, direction, width in self._exposed_fifo_ports():
            out.append(f"  {direction} {_range(width)}{name};")
        out.append("")
        for sig in m.signals.values():
            if not isinstance(sig, Signal):
                continue
            if sig.kind is Kind.REG:
                init = sig.initial if sig.role == "" else 0
                out.append(
                    f"  reg {_range(sig.width)}{sig.name} = {_const(sig.width, init)};"
                )
                out.append(f"  reg {_range(sig.width)}{naming.companion_wire(sig.name)};")
            elif sig.kind is Kind.LOOP_VAR:
                out.append(f"  reg {_range(sig.width)}{sig.name} = {_const(sig.width, 0)};")
                out.append(f"  reg {_range(sig.width)}{naming.companion_wire(sig.name)};")
            elif sig.kind is Kind.VAR:
                out.append(f"  reg {_range(sig.width)}{sig.name};")
        top = m.top_state
        for arr in m.arrays:
            out.append(f"  reg {_range(arr.width)}{arr.name} [0:{arr.depth - 1}];")
        for we, wa, wd in self.array_ports.values():
            arr_name = we.rsplit("__", 1)[0]
            arr = next(a for a in m.arrays if a.name == arr_name)
            addr_bits = max(1, (arr.depth - 1).bit_length())
            out.append(f"  reg {we};")
            out.append(f"  reg {_range(addr_bits)}{wa};")
            out.append(f"  reg {_range(arr.width)}{wd};")
        if m.arrays:
            out.append(f"  integer {naming.RESET_LOOP_VAR};")
        for fifo in m.fifos:
            if fifo.reads_internally:
                out.append(f"  wire {_range(fifo.width)}{fifo.read_data.name};")
                out.append(f"  wire {fifo.read_ready.name};")
                out.append(f"  reg {naming.instance_wire(fifo.name, 'read_enable')};")
            if fifo.writes_internally:
                out.append(f"  wire {fifo.write_ready.name};")
                out.append(f"  reg {naming.instance_wire(fifo.name, 'write_enable')};")
                out.append(
                    f"  reg {_range(fifo.width)}{naming.instance_wire(fifo.name, 'write_data')};"
                )
        for bram in m.brams:
            out.append(f"  reg {_range(bram.addr_bits)}{naming.instance_wire(bram.name, 'ADDR')};")
            out.append(f"  reg {_range(bram.width)}{naming.instance_wire(bram.name, 'DIN')};")
            out.append(f"  reg {naming.instance_wire(bram.name, 'WE')};")
            out.append(f"  wire {_range(bram.width)}{bram.dout.name};")
        for inst in m.instances:
            out.append(f"  reg {naming.instance_wire(inst.name, 'START')};")
            out.append(f"  reg {naming.instance_wire(inst.name, 'get_done')};")
            out.append(f"  wire {inst.done.name};")
            out.append(f"  wire {inst.ready.name};")
            for port, _shadow in inst.module.in_ports:
                out.append(
                    f"  reg {_range(port.width)}{naming.instance_wire(inst.name, port.name)};"
                )
            for port, _shadow in inst.module.out_ports:
                out.append(f"  wire {_range(port.width)}{inst.out_wires[port.name].name};")
        out.append("")
        out.append(f"  assign Done = ({top.name} == {_const(2, DONE)});")
        out.append(f"  assign Ready = ({top.name} == {_const(2, IDLE)});")
        for port, shadow in m.out_ports:
            out.append(f"  assign {port.name} = {shadow.name};")
        return "\n".join(out)

    # -- combinational block ------------------------------------------------

    def combinational(self) -> str:
        m = self.m
        out = ["", "  always @(*) begin"]
        for sig in m.signals.values():
            if isinstance(sig, Signal) and _is_clocked(sig):
                out.append(
                    f"    {naming.companion_wire(sig.name)} = {sig.name};"
                )
            elif isinstance(sig, Signal) and sig.kind is Kind.VAR:
                out.append(f"    {sig.name} = {_const(sig.width, 0)};")
        for we, wa, wd in self.array_ports.values():
            out.append(f"    {we} = 1'd0;")
            out.append(f"    {wa} = 0;")
            out.append(f"    {wd} = 0;")
        for fifo in m.fifos:
            if fifo.reads_internally:
                out.append(f"    {naming.instance_wire(fifo.name, 'read_enable')} = 1'd0;")
            if fifo.writes_internally:
                out.append(f"    {naming.instance_wire(fifo.name, 'write_enable')} = 1'd0;")
                out.append(f"    {naming.instance_wire(fifo.name, 'write_data')} = 0;")
        for bram in m.brams:
            out.append(f"    {naming.instance_wire(bram.name, 'ADDR')} = 0;")
            out.append(f"    {naming.instance_wire(bram.name, 'DIN')} = 0;")
            out.append(f"    {naming.instance_wire(bram.name, 'WE')} = 1'd0;")
        for inst in m.instances:
            out.append(f"    {naming.instance_wire(inst.name, 'START')} = 1'd0;")
            out.append(f"    {naming.instance_wire(inst.name, 'get_done')} = 1'd0;")
            for port, _shadow in inst.module.in_ports:
                out.append(f"    {naming.instance_wire(inst.name, port.name)} = 0;")
        out.append("")
        # Handshake: START latches the inputs and launches the root section;
        # get_done releases the module back to Ready.
        top = m.top_state
        out.append(f"    if (({top.name} == {_const(2, IDLE)}) && (START == 1'd1)) begin")
        for port, shadow in m.in_ports:
            out.append(f"      {naming.companion_wire(shadow.name)} = {port.name};")
        out.extend(self._actions(m.plan.start_actions, indent="      "))
        out.append("    end")
        out.append(f"    if (({top.name} == {_const(2, DONE)}) && (get_done == 1'd1)) begin")
        out.extend(self._actions(m.plan.release_actions, indent="      "))
        out.append("    end")
        for leaf in iter_leaves(m.root):
            out.append("")
            out.extend(self._leaf_branch(leaf))
        out.append("  end")
        return "\n".join(out)

    def _leaf_branch(self, leaf) -> list[str]:
        m = self.m
        state = m.state_of(leaf.label).name
        out = [f"    if ({state} == {_const(2, ACTIVE)}) begin"]
        indent = "      "
        closers = 1
        if leaf.guards:
            cond = " && ".join(render(g) for g in leaf.guards)
            out.append(f"{indent}if ({cond}) begin")
            indent += "  "
            closers += 1
        for stmt in leaf.statements:
            out.extend(self._statement(stmt, indent))
        out.extend(self._actions(m.plan.completion[leaf.label], indent))
        while closers:
            closers -= 1
            out.append("    " + "  " * closers + "end")
        return out

    def _statement(self, stmt, indent: str) -> list[str]:
        if isinstance(stmt, Assign):
            if isinstance(stmt.target, Index):
                we, wa, wd = self.array_ports[id(stmt)]
                return [
                    f"{indent}{we} = 1'd1;",
                    f"{indent}{wa} = {render(stmt.target.index)};",
                    f"{indent}{wd} = {render(stmt.rhs)};",
                ]
            target: Signal = stmt.target  # type: ignore[assignment]
            if target.kind is Kind.VAR:
                return [f"{indent}{target.name} = {render(stmt.rhs)};"]
            return [f"{indent}{naming.companion_wire(target.name)} = {render(stmt.rhs)};"]
        if isinstance(stmt, Display):
            args = "".join(f", {render(a)}" for a in stmt.args)
            return [f'{indent}$display("{_display_format(stmt.format)}"{args});']
        if isinstance(stmt, FifoPop):
            return [f"{indent}{naming.instance_wire(stmt.fifo.name, 'read_enable')} = 1'd1;"]
        if isinstance(stmt, FifoPush):
            f = stmt.fifo.name
            return [
                f"{indent}{naming.instance_wire(f, 'write_enable')} = 1'd1;",
                f"{indent}{naming.instance_wire(f, 'write_data')} = {render(stmt.value)};",
            ]
        if isinstance(stmt, BramAccess):
            b = stmt.bram.name
            lines = [f"{indent}{naming.instance_wire(b, 'ADDR')} = {render(stmt.addr)};"]
            if stmt.data is not None:
                lines.append(f"{indent}{naming.instance_wire(b, 'WE')} = 1'd1;")
                lines.append(f"{indent}{naming.instance_wire(b, 'DIN')} = {render(stmt.data)};")
            return lines
        if isinstance(stmt, InstanceStart):
            i = stmt.instance.name
            lines = [
                f"{indent}{naming.instance_wire(i, port)} = {render(expr)};"
                for port, expr in stmt.bindings
            ]
            lines.append(f"{indent}{naming.instance_wire(i, 'START')} = 1'd1;")
            return lines
        if isinstance(stmt, InstanceRelease):
            return [f"{indent}{naming.instance_wire(stmt.instance.name, 'get_done')} = 1'd1;"]
        raise EmitError(f"cannot emit statement {stmt!r}")

    def _actions(self, actions, indent: str) -> list[str]:
        out = []
        for act in actions:
            if isinstance(act, AssignNext):
                out.append(
                    f"{indent}{naming.companion_wire(act.target.name)} = "
                    f"{render(act.value, _wire_view)};"
                )
            elif isinstance(act, Branch):
                then = self._actions(act.then, indent + "  ")
                orelse = self._actions(act.orelse, indent + "  ")
                if not then and not orelse:
                    continue
                out.append(f"{indent}if ({render(act.cond, _wire_view)}) begin")
                out.extend(then)
                if orelse:
                    out.append(f"{indent}end else begin")
                    out.extend(orelse)
                out.append(f"{indent}end")
            elif isinstance(act, Mark):
                continue
            else:
                raise EmitError(f"cannot emit action {act!r}")
        return out

    # -- sequential block -----------------------------------------------------

    def sequential(self) -> str:
        m = self.m
        out = ["", "  always @(posedge CLK) begin"]
        out.append("    if (RST == 1'd1) begin")
        for sig in m.signals.values():
            if isinstance(sig, Signal) and _is_clocked(sig):
                init = sig.initial if sig.kind is Kind.REG and sig.role == "" else 0
                out.append(f"      {sig.name} <= {_const(sig.width, init)};")
        for arr in m.arrays:
            i = naming.RESET_LOOP_VAR
            out.append(
                f"      for ({i} = 0; {i} < {arr.depth}; {i} = {i} + 1) begin"
            )
            out.append(f"        {arr.name}[{i}] <= {_const(arr.width, 0)};")
            out.append("      end")
        out.append("    end else begin")
        for sig in m.signals.values():
            if isinstance(sig, Signal) and _is_clocked(sig):
                out.append(f"      {sig.name} <= {naming.companion_wire(sig.name)};")
        for stmt_id, (we, wa, wd) in self.array_ports.items():
            arr_name = we.rsplit("__", 1)[0]
            out.append(f"      if ({we} == 1'd1) begin")
            out.append(f"        {arr_name}[{wa}] <= {wd};")
            out.append("      end")
        out.append("    end")
        out.append("  end")
        return "\n".join(out)

    # -- instances --------------------------------------------------------------

    def instances(self) -> str:
        m = self.m
        out = []
        for fifo in m.fifos:
            addr_bits = max(1, (fifo.depth - 1).bit_length())
            wires = ", ".join(
                f".{w}({naming.instance_wire(fifo.name, w)})" for w in naming.FIFO_WIRES
            )
            out.append(
                f"  simple_fifo #(.WIDTH({fifo.width}), .DEPTH({fifo.depth}), "
                f".ADDR_BITS({addr_bits})) {fifo.name} (.CLK(CLK), .RST(RST), {wires});"
            )
        for bram in m.brams:
            wires = ", ".join(
                f".{w}({naming.instance_wire(bram.name, w)})" for w in naming.BRAM_WIRES
            )
            out.append(
                f"  simple_bram #(.WIDTH({bram.width}), .DEPTH({bram.depth}), "
                f".ADDR_BITS({bram.addr_bits})) {bram.name} (.CLK(CLK), {wires});"
            )
        for inst in m.instances:
            hookups = [
                ".CLK(CLK)",
                ".RST(RST)",
                f".START({naming.instance_wire(inst.name, 'START')})",
                f".Done({inst.done.name})",
                f".get_done({naming.instance_wire(inst.name, 'get_done')})",
                f".Ready({inst.ready.name})",
            ]
            for port, _shadow in inst.module.in_ports:
                hookups.append(f".{port.name}({naming.instance_wire(inst.name, port.name)})")
            for port, _shadow in inst.module.out_ports:
                hookups.append(f".{port.name}({inst.out_wires[port.name].name})")
            out.append(f"  {inst.module.name} {inst.name} ({', '.join(hookups)});")
        if out:
            out.insert(0, "")
        return "\n".join(out)


def emit_module(module: HWModule) -> EmittedModule:
    """Translate one frozen module to Verilog text."""
    writer = _ModuleWriter(module)
    return EmittedModule(
        module_name=module.name,
        ports=writer.ports(),
        declarations=writer.declarations(),
        combinational=writer.combinational(),
        sequential=writer.sequential(),
        instances=writer.instances(),
    )


def _hierarchy_order(top: HWModule) -> list[HWModule]:
    """Distinct modules, children before parents."""
    order: list[HWModule] = []
    seen: dict[str, HWModule] = {}

    def visit(m: HWModule):
        if m.name in seen:
            if seen[m.name] is not m:
                raise EmitError(f"two distinct modules share the name {m.name!r}")
            return
        seen[m.name] = m
        for inst in m.instances:
            visit(inst.module)
        order.append(m)

    visit(top)
    return order


def support_files_needed(top: HWModule) -> list[str]:
    modules = _hierarchy_order(top)
    files = []
    if any(m.fifos for m in modules):
        files.append("simple_fifo.v")
    if any(m.brams for m in modules):
        files.append("simple_bram.v")
    return files


def emit_hierarchy(top: HWModule, outdir) -> list[Path]:
    """Write one ``.v`` file per module (children first) plus the static
    FIFO/BRAM support files the hierarchy needs.  Returns the paths."""
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise EmitError(f"cannot create output directory {outdir}: {exc}") from exc
    written: list[Path] = []
    for name in support_files_needed(top):
        target = outdir / name
        source = resources.files("sectionhdl").joinpath(f"rtl/{name}")
        try:
            with resources.as_file(source) as src_path:
                shutil.copyfile(src_path, target)
        except OSError as exc:
            raise EmitError(f"cannot write support file {target}: {exc}") from exc
        written.append(target)
    for m in _hierarchy_order(top):
        target = outdir / f"{m.name}.v"
        try:
            target.write_text(emit_module(m).text)
        except OSError as exc:
            raise EmitError(f"cannot write {target}: {exc}") from exc
        written.append(target)
    return written
