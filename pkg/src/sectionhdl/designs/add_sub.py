"""Two-leaf adder/subtractor: d = (a + b) - c, one operation per cycle."""

from __future__ import annotations

from ..module import HWModule, Reg, RegIn, RegOut, begin_module, end_module, instantiate
from ..sections import LeafSection, SerialSections, assign, display


def build_add_sub() -> HWModule:
    begin_module("add_sub")
    a = RegIn("a", 32)
    b = RegIn("b", 32)
    c = RegIn("c", 32)
    d = RegOut("d", 32)
    tmp = Reg("tmp", 32)
    with LeafSection("add"):
        assign(tmp, a + b)
        display("add: a=%d b=%d", a, b)
    with LeafSection("sub"):
        assign(d, tmp - c)
        display("result: %d", tmp - c)
    return end_module()


def build_my_tb() -> HWModule:
    """Testbench as hardware: starts an add_sub instance with constant
    operands and prints the result once it is done."""
    child = build_add_sub()
    begin_module("my_tb")
    m1 = instantiate(child, "m1")
    with SerialSections("S"):
        with LeafSection("S10"):
            m1.start(a=21, b=34, c=5)
        with LeafSection("S11"):
            display("Result = [%d]", m1.get_result("d"))
    return end_module()
