"""Verilog emission: structure, fragments, determinism, name preservation."""

import re

import pytest

from sectionhdl import (
    EmitError,
    ForLoopSection,
    LeafSection,
    ParallelSections,
    Reg,
    RegArray,
    SerialSections,
    SimpleFifo,
    Var,
    add_guard,
    assign,
    begin_module,
    display,
    emit_hierarchy,
    emit_module,
    end_module,
    fresh_library,
    instantiate,
)
from sectionhdl.designs import REGISTRY
from sectionhdl.designs.add_sub import build_add_sub, build_my_tb

from vlint import check_verilog

SUPPORT_MODULES = {"simple_fifo", "simple_bram"}


def _build_add_sub():
    with fresh_library():
        return build_add_sub()


class TestAddSubListing:
    def test_paper_style_fragments(self):
        text = emit_module(_build_add_sub()).text
        assert "tmp_WIRE = (a_inreg + b_inreg)" in text
        assert "(tmp - c_inreg)" in text
        assert "reg [1:0] state_add = 2'd0;" in text
        assert "reg [1:0] state_add_WIRE;" in text
        assert "if (state_add == 2'd1) begin" in text
        assert "state_add_WIRE = 2'd2;" in text
        assert "state_sub_WIRE = 2'd1;" in text
        assert "state_st_WIRE = 2'd2;" in text

    def test_header_and_interface(self):
        text = emit_module(_build_add_sub()).text
        assert text.startswith("module add_sub (")
        for signal in ("CLK", "RST", "START", "Done", "get_done", "Ready"):
            assert re.search(rf"\b{signal}\b", text)
        assert "assign d = d_outreg;" in text

    def test_unfrozen_module_rejected(self):
        from sectionhdl.module import HWModule

        with pytest.raises(EmitError, match="not frozen"):
            emit_module(HWModule("loose"))


class TestDeterminism:
    def test_emission_is_byte_stable(self):
        mod = _build_add_sub()
        assert emit_module(mod).text == emit_module(mod).text

    def test_rebuilt_designs_emit_identically(self):
        for name, design in sorted(REGISTRY.items()):
            first = emit_module(design.build()).text
            second = emit_module(design.build()).text
            assert first == second, name

    def test_hierarchy_emission_is_byte_stable(self, tmp_path):
        with fresh_library():
            top = build_my_tb()
        first = {p.name: p.read_text() for p in emit_hierarchy(top, tmp_path / "a")}
        second = {p.name: p.read_text() for p in emit_hierarchy(top, tmp_path / "b")}
        assert first == second


class TestHierarchy:
    def test_child_emitted_separately_and_instantiated(self, tmp_path):
        with fresh_library():
            top = build_my_tb()
        files = emit_hierarchy(top, tmp_path)
        names = [p.name for p in files]
        assert names == ["add_sub.v", "my_tb.v"]  # children before parents
        tb = (tmp_path / "my_tb.v").read_text()
        assert re.search(r"\badd_sub m1 \(", tb)
        for wire in ("m1_START", "m1_Done", "m1_get_done", "m1_Ready", "m1_a", "m1_d"):
            assert re.search(rf"\b{wire}\b", tb)

    def test_diamond_hierarchy_emits_child_once(self, tmp_path):
        with fresh_library():
            begin_module("leafmod")
            r = Reg("r", 8)
            with LeafSection("L"):
                assign(r, r + 1)
            child = end_module()

            begin_module("left")
            i1 = instantiate(child, "u")
            with LeafSection("L"):
                i1.start()
            left = end_module()

            begin_module("right")
            i2 = instantiate(child, "u")
            with LeafSection("L"):
                i2.start()
            right = end_module()

            begin_module("top")
            a = instantiate(left, "a")
            b = instantiate(right, "b")
            with ParallelSections("P"):
                with LeafSection("la"):
                    a.start()
                with LeafSection("lb"):
                    b.start()
            top = end_module()
        files = emit_hierarchy(top, tmp_path)
        names = [p.name for p in files]
        assert names.count("leafmod.v") == 1
        assert names.index("leafmod.v") < names.index("left.v") < names.index("top.v")

    def test_support_files_copied_when_used(self, tmp_path):
        design = REGISTRY["matmul"]
        files = emit_hierarchy(design.build({"N": 2, "Q": 2, "M": 2}), tmp_path)
        names = [p.name for p in files]
        assert names == ["simple_fifo.v", "simple_bram.v", "matmul.v"]


class TestWellFormedness:
    def test_all_designs_pass_internal_checks(self):
        for name, design in sorted(REGISTRY.items()):
            text = emit_module(design.build()).text
            problems = check_verilog(text, known_modules=SUPPORT_MODULES | {"add_sub"})
            assert not problems, f"{name}: {problems}"

    def test_support_files_pass_internal_checks(self, tmp_path):
        design = REGISTRY["matmul"]
        for path in emit_hierarchy(design.build(), tmp_path):
            problems = check_verilog(path.read_text(), known_modules=SUPPORT_MODULES)
            assert not problems, f"{path.name}: {problems}"

    def test_checker_catches_planted_defects(self):
        good = emit_module(_build_add_sub()).text
        assert check_verilog("module m (x); input x;\n", set())  # no endmodule
        broken = good.replace("tmp_WIRE = (a_inreg + b_inreg)", "tmp_WIRE = (ghost + b_inreg)")
        assert any("ghost" in p for p in check_verilog(broken, set()))


class TestNamePreservation:
    def test_user_names_survive_verbatim(self):
        with fresh_library():
            begin_module("namecheck")
            width_cfg = Reg("my_counter", 9)
            scratch = Var("scratch_value", 5)
            table = RegArray("lookup_table", 8, 4)
            fifo = SimpleFifo("data_in", 8)
            with ForLoopSection("walk", "step_index", 0, 4) as i:
                with LeafSection("work"):
                    assign(scratch, scratch + table[i])
                    assign(width_cfg, width_cfg + fifo.read() + i)
            mod = end_module()
        text = emit_module(mod).text
        for name in ("my_counter", "scratch_value", "lookup_table", "data_in", "step_index"):
            assert re.search(rf"\b{name}\b", text), name

    def test_design_signals_preserved(self):
        for name, design in sorted(REGISTRY.items()):
            mod = design.build()
            text = emit_module(mod).text
            for signal_name, sig in mod.signals.items():
                if getattr(sig, "role", "") in ("state",):
                    continue
                assert re.search(rf"\b{signal_name}\b", text), f"{name}: {signal_name}"


class TestStructure:
    def test_guards_wrap_statements(self):
        with fresh_library():
            begin_module("m")
            gate = Reg("gate", 1)
            r = Reg("r", 8)
            with LeafSection("L"):
                add_guard(gate == 1)
                assign(r, r + 1)
            mod = end_module()
        text = emit_module(mod).text
        branch = text[text.index("if (state_L == 2'd1)") :]
        assert "if ((gate == 1'd1))" in branch.split("\n")[1]

    def test_array_write_ports_and_reset(self):
        with fresh_library():
            begin_module("m")
            arr = RegArray("mem", 8, 4)
            with ForLoopSection("F", "i", 0, 4) as i:
                with LeafSection("w"):
                    assign(arr[i], i + 1)
            mod = end_module()
        text = emit_module(mod).text
        assert "reg [7:0] mem [0:3];" in text
        assert "mem__we0 = 1'd1;" in text
        assert "if (mem__we0 == 1'd1) begin" in text
        assert "mem[mem__wa0] <= mem__wd0;" in text
        assert "for (rst_i = 0; rst_i < 4; rst_i = rst_i + 1) begin" in text

    def test_fifo_sides_exposed_when_unused_internally(self):
        with fresh_library():
            begin_module("m")
            fin = SimpleFifo("fin", 8)
            with LeafSection("L"):
                display("%d", fin.read())
            mod = end_module()
        text = emit_module(mod).text
        # The design reads fin, so the write side becomes module ports.
        assert "input [7:0] fin_write_data;" in text
        assert "input fin_write_enable;" in text
        assert "output fin_write_ready;" in text
        assert "output" not in [
            line.strip().split()[0]
            for line in text.splitlines()
            if "fin_read_data" in line and line.strip().startswith(("input", "output"))
        ]

    def test_while_loop_condition_reads_staged_state(self):
        from sectionhdl.sections import WhileLoopSection

        with fresh_library():
            begin_module("m")
            r = Reg("r", 4)
            with WhileLoopSection("W", r < 5):
                with LeafSection("inc"):
                    assign(r, r + 1)
            mod = end_module()
        text = emit_module(mod).text
        assert "(r_WIRE < 4'd5)" in text
