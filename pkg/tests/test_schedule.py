"""Cycle laws: closed-form predictions vs the interpreter, plus while-loop
and handshake timing."""

import random

import pytest

from sectionhdl import (
    Const,
    ForLoopSection,
    LeafSection,
    ParallelSections,
    Reg,
    SerialSections,
    assign,
    begin_module,
    display,
    end_module,
    fresh_library,
    predicted_cycles,
    run,
)
from sectionhdl.errors import ElaborationError
from sectionhdl.sections import Leaf, WhileLoopSection


def _measure(mod, max_cycles=200_000):
    return run(mod, max_cycles=max_cycles).sections["root"]["cycles"]


class TestClosedForm:
    def test_leaf_is_one_cycle(self):
        assert predicted_cycles(Leaf("x")) == 1

    def test_serial_sums(self):
        with fresh_library():
            begin_module("m")
            with SerialSections("S"):
                for label in "abc":
                    with LeafSection(label):
                        pass
            mod = end_module()
        assert predicted_cycles(mod.root) == 3
        assert _measure(mod) == 3

    def test_parallel_is_max(self):
        with fresh_library():
            begin_module("m")
            with ParallelSections("P"):
                with SerialSections("S1"):
                    for label in ("a", "b"):
                        with LeafSection(label):
                            pass
                with LeafSection("c"):
                    pass
            mod = end_module()
        assert predicted_cycles(mod.root) == 2
        assert _measure(mod) == 2

    def test_loop_multiplies(self):
        with fresh_library():
            begin_module("m")
            with ForLoopSection("F", "i", 0, 5):
                with LeafSection("a"):
                    pass
                with LeafSection("b"):
                    pass
            mod = end_module()
        assert predicted_cycles(mod.root) == 10
        assert _measure(mod) == 10

    def test_single_leaf_loop_has_no_dead_cycles(self):
        with fresh_library():
            begin_module("m")
            with ForLoopSection("F", "i", 0, 8):
                with LeafSection("a"):
                    pass
            mod = end_module()
        assert _measure(mod) == 8

    def test_staggered_parallel_loops_guard_free(self):
        # Without guards the three staggered loops all run concurrently:
        # the parallel block is the max of the trip counts.
        n = 8
        with fresh_library():
            begin_module("m")
            with ParallelSections("P"):
                with ForLoopSection("F1", "i", 0, n):
                    with LeafSection("s1"):
                        pass
                with ForLoopSection("F2", "j", 1, n + 1):
                    with LeafSection("s2"):
                        pass
                with ForLoopSection("F3", "k", 2, n + 2):
                    with LeafSection("s3"):
                        pass
            mod = end_module()
        assert predicted_cycles(mod.root) == n
        assert _measure(mod) == n

    def test_guarded_leaf_has_no_closed_form(self):
        with fresh_library():
            begin_module("m")
            r = Reg("r", 1)
            with LeafSection("L"):
                from sectionhdl import add_guard

                add_guard(r == 0)
            mod = end_module()
        with pytest.raises(ElaborationError, match="guards"):
            predicted_cycles(mod.root)


class TestWhileLoop:
    def _counter_module(self, limit):
        begin_module("m")
        r = Reg("r", 8)
        with WhileLoopSection("W", r < limit):
            with LeafSection("inc"):
                assign(r, r + 1)
        with LeafSection("after"):
            display("r=%d", r)
        return end_module()

    def test_false_condition_completes_in_zero_cycles(self):
        with fresh_library():
            mod = self._counter_module(0)
        report = run(mod, max_cycles=100)
        # Only the trailing leaf runs; the loop costs nothing.
        assert report.sections["root"]["cycles"] == 1
        assert report.sections["W"]["cycles"] == 0
        assert report.display_lines() == ["r=0"]

    def test_body_runs_per_true_evaluation(self):
        with fresh_library():
            mod = self._counter_module(5)
        report = run(mod, max_cycles=100)
        assert report.sections["W"]["cycles"] == 5
        assert report.sections["root"]["cycles"] == 6
        assert report.display_lines() == ["r=5"]

    def test_condition_sees_same_cycle_writes(self):
        # The predecessor's write commits at the boundary where the loop
        # (re)checks its condition, so the check must see it.
        with fresh_library():
            begin_module("m")
            r = Reg("r", 8)
            with LeafSection("setup"):
                assign(r, Const(8, 10))
            with WhileLoopSection("W", r < 5):
                with LeafSection("inc"):
                    assign(r, r + 1)
            with LeafSection("after"):
                pass
            mod = end_module()
        report = run(mod, max_cycles=100)
        assert report.sections["W"]["cycles"] == 0
        assert report.sections["root"]["cycles"] == 2


class TestHandshake:
    def test_done_rises_cycle_after_root_completes(self):
        with fresh_library():
            begin_module("m")
            with LeafSection("only"):
                pass
            mod = end_module()
        report = run(mod, max_cycles=10)
        # START in cycle 1, leaf fires in 2, Done observable in 3.
        assert report.sections["only"] == {
            "first_active": 2,
            "completed": 2,
            "cycles": 1,
        }
        assert report.done_cycle == 3
        assert report.cycles_to_done == 2


def random_tree(rng, depth, budget):
    """Random guard-free section spec: ('leaf'|'serial'|'parallel'|'for', trips, children)."""
    if depth == 0 or rng.random() < 0.35:
        return ("leaf", 0, [])
    kind = rng.choice(["serial", "parallel", "for"])
    n_children = rng.randint(1, 3)
    children = [random_tree(rng, depth - 1, budget // n_children) for _ in range(n_children)]
    trips = rng.randint(1, 8) if kind == "for" else 0
    return (kind, trips, children)


def build_tree(spec, counter):
    kind, trips, children = spec
    label = f"s{counter[0]}"
    counter[0] += 1
    if kind == "leaf":
        with LeafSection(label):
            pass
        return
    if kind == "serial":
        with SerialSections(label):
            for child in children:
                build_tree(child, counter)
    elif kind == "parallel":
        with ParallelSections(label):
            for child in children:
                build_tree(child, counter)
    else:
        with ForLoopSection(label, f"v{counter[0]}", 0, trips):
            for child in children:
                build_tree(child, counter)


def test_randomized_trees_match_laws():
    rng = random.Random(2024)
    for case in range(60):
        spec = random_tree(rng, depth=4, budget=512)
        with fresh_library():
            begin_module(f"m{case}")
            build_tree(spec, [0])
            mod = end_module()
        predicted = predicted_cycles(mod.root)
        if predicted > 3000:
            continue
        assert _measure(mod) == predicted, spec
