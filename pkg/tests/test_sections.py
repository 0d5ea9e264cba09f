"""Section-tree builder: stack discipline, statement recording, guards."""

import random

import pytest

from sectionhdl import (
    Const,
    ElaborationError,
    ForLoopSection,
    LeafSection,
    ParallelSections,
    Reg,
    RegArray,
    SerialSections,
    Var,
    add_guard,
    assign,
    begin_module,
    close_section,
    display,
    end_module,
    fresh_library,
    open_section,
)
from sectionhdl.sections import Assign, Display, Leaf, Parallel, Serial, WhileLoopSection


def test_serial_of_three_leaves():
    with fresh_library():
        begin_module("m")
        with SerialSections("S1"):
            with LeafSection("a"):
                display("running 'a'")
            with LeafSection("b"):
                display("running 'b' after 'a'")
            with LeafSection("c"):
                display("running 'c' after 'b'")
        mod = end_module()
    (serial,) = mod.root.children
    assert isinstance(serial, Serial)
    assert [child.label for child in serial.children] == ["a", "b", "c"]
    assert all(isinstance(child, Leaf) for child in serial.children)


def test_for_loop_with_two_leaves():
    with fresh_library():
        begin_module("m")
        with ForLoopSection("F1", "i", 0, 3) as i:
            with LeafSection("a"):
                display("i=%d", i)
            with LeafSection("b"):
                display("i=%d", i)
        mod = end_module()
    (loop,) = mod.root.children
    assert loop.var.name == "i"
    assert (loop.start, loop.end_exclusive) == (0, 3)
    assert [c.label for c in loop.children] == ["a", "b"]


def test_leaf_inside_leaf_is_an_error():
    with fresh_library():
        begin_module("m")
        with pytest.raises(ElaborationError, match="leaves hold statements"):
            with LeafSection("outer"):
                with LeafSection("inner"):
                    pass
        end_module_cleanup()


def end_module_cleanup():
    from sectionhdl.sections import context

    ctx = context()
    ctx.module = None
    ctx.stack = []


def test_duplicate_labels_rejected():
    with fresh_library():
        begin_module("m")
        with LeafSection("a"):
            pass
        with pytest.raises(ElaborationError, match="duplicate"):
            with LeafSection("a"):
                pass
        end_module_cleanup()


def test_open_close_ops_follow_stack_discipline():
    with fresh_library():
        begin_module("m")
        s = open_section(Serial("S"))
        l1 = open_section(Leaf("L"))
        close_section(l1)
        l2 = open_section(Leaf("L2"))
        close_section(l2)
        close_section(s)
        mod = end_module()
    assert [c.label for c in mod.root.children[0].children] == ["L", "L2"]


def test_out_of_order_close_rejected():
    with fresh_library():
        begin_module("m")
        s = open_section(Serial("S"))
        open_section(Leaf("L"))
        with pytest.raises(ElaborationError, match="out-of-order"):
            close_section(s)
        end_module_cleanup()


def test_random_nesting_matches_recorded_tree():
    """The recorded tree is exactly the nesting order of open/close calls."""
    rng = random.Random(5)
    for round_no in range(30):
        with fresh_library():
            begin_module(f"m{round_no}")
            spec = _random_tree_spec(rng, depth=3, counter=[0])
            _build_from_spec(spec)
            mod = end_module()
        assert _shape_of(mod.root.children[0]) == spec


def _random_tree_spec(rng, depth, counter):
    label = f"s{counter[0]}"
    counter[0] += 1
    if depth == 0 or rng.random() < 0.4:
        return ("leaf", label, [])
    kind = rng.choice(["serial", "parallel"])
    children = [
        _random_tree_spec(rng, depth - 1, counter) for _ in range(rng.randint(1, 3))
    ]
    return (kind, label, children)


def _build_from_spec(spec):
    kind, label, children = spec
    if kind == "leaf":
        open_section(Leaf(label))
        close_section_top()
        return
    node = Serial(label) if kind == "serial" else Parallel(label)
    open_section(node)
    for child in children:
        _build_from_spec(child)
    close_section(node)


def close_section_top():
    from sectionhdl.sections import context

    close_section(context().stack[-1])


def _shape_of(section):
    if isinstance(section, Leaf):
        return ("leaf", section.label, [])
    kind = "serial" if isinstance(section, Serial) else "parallel"
    return (kind, section.label, [_shape_of(c) for c in section.children])


def test_statement_order_is_call_order():
    with fresh_library():
        begin_module("m")
        r = Reg("r", 8)
        with LeafSection("L"):
            assign(r, r + 1)
            display("x")
            assign(r, r + 2)
        mod = end_module()
    leaf = mod.root.children[0]
    kinds = [type(s) for s in leaf.statements]
    assert kinds == [Assign, Display, Assign]


def test_host_loop_unrolls_to_32_assignments():
    with fresh_library():
        begin_module("m")
        a = Reg("a", 32)
        tmp = Var("tmp", 6)
        with LeafSection("loop1"):
            for i in range(32):
                assign(tmp, tmp + a[i])
        mod = end_module()
    leaf = mod.root.children[0]
    assert len(leaf.statements) == 32
    assert all(isinstance(s, Assign) for s in leaf.statements)


def test_for_loop_requires_nonempty_range():
    with fresh_library():
        begin_module("m")
        with pytest.raises(ElaborationError, match="start must be"):
            ForLoopSection("F", "i", 3, 3)
        end_module_cleanup()


def test_loop_var_width_holds_end():
    with fresh_library():
        begin_module("m")
        with ForLoopSection("F", "i", 0, 8) as i:
            with LeafSection("L"):
                pass
        mod = end_module()
    assert mod.root.children[0].var.width == 4  # must hold the value 8


class TestGuards:
    def test_guard_must_be_one_bit(self):
        with fresh_library():
            begin_module("m")
            r = Reg("r", 8)
            with pytest.raises(ElaborationError, match="1 bit"):
                with LeafSection("L"):
                    add_guard(r + 1)
            end_module_cleanup()

    def test_duplicate_guards_collapse(self):
        with fresh_library():
            begin_module("m")
            r = Reg("r", 8)
            with LeafSection("L"):
                add_guard(r == 1)
                add_guard(r == 1)
                add_guard(r == 2)
            mod = end_module()
        assert len(mod.root.children[0].guards) == 2

    def test_vars_forbidden_in_guards(self):
        with fresh_library():
            begin_module("m")
            v = Var("v", 1)
            with pytest.raises(ElaborationError, match="Var"):
                with LeafSection("L"):
                    add_guard(v == 1)
            end_module_cleanup()

    def test_constant_true_guard_is_legal(self):
        with fresh_library():
            begin_module("m")
            with LeafSection("L"):
                add_guard(Const(1, 1) == 1)
            end_module()


class TestWhileCondition:
    def test_condition_must_be_one_bit(self):
        with fresh_library():
            begin_module("m")
            r = Reg("r", 8)
            with pytest.raises(ElaborationError, match="1 bit"):
                WhileLoopSection("W", r + 1)
            end_module_cleanup()

    def test_vars_forbidden(self):
        with fresh_library():
            begin_module("m")
            v = Var("v", 1)
            with pytest.raises(ElaborationError, match="Var"):
                WhileLoopSection("W", v == 1)
            end_module_cleanup()

    def test_arrays_forbidden(self):
        with fresh_library():
            begin_module("m")
            arr = RegArray("mem", 8, 4)
            with pytest.raises(ElaborationError, match="array"):
                WhileLoopSection("W", arr[0] == 1)
            end_module_cleanup()


class TestDisplay:
    def test_placeholder_count_checked(self):
        with fresh_library():
            begin_module("m")
            r = Reg("r", 8)
            with LeafSection("L"):
                with pytest.raises(ElaborationError, match="placeholder"):
                    display("%d")
                with pytest.raises(ElaborationError, match="placeholder"):
                    display("x", r)
                display("hello")  # zero-arg form is legal
                display("r=%d %x%%", r, r)
            end_module()

    def test_unknown_conversion_rejected(self):
        with fresh_library():
            begin_module("m")
            with LeafSection("L"):
                with pytest.raises(ElaborationError, match="unsupported"):
                    display("%s", Reg("r", 8))
            end_module_cleanup()
