"""Normative cycle-by-cycle execution rules for a section tree.

Both backends consume the same compiled *activation plan*, so they agree by
construction: the Verilog emitter renders the plan's actions into the
combinational next-state block, and the interpreter executes them against
its staged next-cycle state.

Rules realized here:

* a leaf fires in the first cycle it is active with all guards true, and
  is done that same cycle;
* serial children hand over with no dead cycle (the completing leaf's
  actions activate the successor for the next cycle);
* a parallel section completes in the first cycle by which all children
  have completed;
* a for-loop re-activates its body with no dead cycle while ``var+1 <
  end``; the variable increments on the back edge;
* a while-loop checks its condition whenever it (re)activates, against the
  state as it will read in the next cycle; false completes it without
  spending a cycle.

Guard-free trees therefore obey exact algebraic laws (serial = sum,
parallel = max, loop = trip count x body), which ``predicted_cycles``
computes independently of any simulation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ElaborationError
from .expr import Binary, Const, Expression, Ref, Signal
from .sections import ForLoop, Leaf, Parallel, Section, Serial, WhileLoop, iter_sections

IDLE = 0
ACTIVE = 1
DONE = 2


@dataclass(frozen=True)
class AssignNext:
    """Stage a value that becomes visible next cycle (a _WIRE assignment)."""

    target: Signal
    value: Expression


@dataclass(frozen=True)
class Branch:
    """Conditional actions; the condition reads staged next-cycle state."""

    cond: Expression
    then: tuple["Action", ...]
    orelse: tuple["Action", ...]


@dataclass(frozen=True)
class Mark:
    """Timing annotation for the interpreter; emits nothing in Verilog."""

    label: str
    event: str  # "activate" | "complete"


Action = Union[AssignNext, Branch, Mark]


@dataclass(frozen=True)
class SchedulePlan:
    """Compiled schedule of one module."""

    start_actions: tuple[Action, ...]  # on START: run the root section
    release_actions: tuple[Action, ...]  # on get_done: everything back to idle
    completion: dict[str, tuple[Action, ...]]  # per leaf label, on firing
    leaf_order: tuple[str, ...]  # deterministic pre-order of all leaves


def build_plan(module) -> SchedulePlan:
    builder = _PlanBuilder(module)
    return builder.build()


class _PlanBuilder:
    def __init__(self, module):
        self.module = module
        self.root: Serial = module.root

    def build(self) -> SchedulePlan:
        paths = _paths_of(self.root)
        completion: dict[str, tuple[Action, ...]] = {}
        leaf_order: list[str] = []
        for section in iter_sections(self.root):
            if isinstance(section, Leaf):
                leaf_order.append(section.label)
                actions = [
                    AssignNext(self._state(section), Const(2, DONE)),
                    Mark(section.label, "complete"),
                ]
                actions.extend(self._after_completion(section, paths[id(section)]))
                completion[section.label] = tuple(actions)
        start = [
            AssignNext(self.module.top_state, Const(2, ACTIVE)),
            *self._activate(self.root, ()),
        ]
        release = [
            AssignNext(self.module.top_state, Const(2, IDLE)),
            *(
                AssignNext(sig, Const(2, IDLE))
                for sig in self.module.state_signals.values()
            ),
        ]
        return SchedulePlan(tuple(start), tuple(release), completion, tuple(leaf_order))

    def _state(self, section) -> Signal:
        return self.module.state_of(section.label)

    # -- activation ---------------------------------------------------------

    def _activate(self, section: Section, path) -> list[Action]:
        """Actions making ``section`` run starting next cycle.  A section
        that can complete without running (a false while) chains straight
        into its successor."""
        actions: list[Action] = [Mark(section.label, "activate")]
        if isinstance(section, Leaf):
            actions.append(AssignNext(self._state(section), Const(2, ACTIVE)))
        elif isinstance(section, (Serial, ForLoop)):
            if isinstance(section, ForLoop):
                actions.append(
                    AssignNext(section.var, Const(section.var.width, section.start))
                )
            actions.extend(self._activate(section.children[0], path + ((section, 0),)))
        elif isinstance(section, Parallel):
            for i, child in enumerate(section.children):
                actions.extend(self._activate(child, path + ((section, i),)))
        elif isinstance(section, WhileLoop):
            enter = [
                AssignNext(self._state(section), Const(2, ACTIVE)),
                *self._reset_states(section),
                *self._activate(section.children[0], path + ((section, 0),)),
            ]
            skip = [
                AssignNext(self._state(section), Const(2, DONE)),
                Mark(section.label, "complete"),
                *self._after_completion(section, path),
            ]
            actions.append(Branch(section.cond, tuple(enter), tuple(skip)))
        else:
            raise TypeError(f"unknown section type {type(section).__name__}")
        return actions

    # -- completion ---------------------------------------------------------

    def _after_completion(self, section: Section, path) -> list[Action]:
        """What happens once ``section`` has completed, given its position."""
        if not path:
            return [AssignNext(self.module.top_state, Const(2, DONE))]
        parent, index = path[-1]
        parent_path = path[:-1]
        has_next = index + 1 < len(parent.children)
        if has_next and isinstance(parent, (Serial, ForLoop, WhileLoop)):
            return self._activate(parent.children[index + 1], parent_path + ((parent, index + 1),))
        if isinstance(parent, Serial):
            return self._complete(parent, parent_path)
        if isinstance(parent, ForLoop):
            back_edge = [
                AssignNext(
                    parent.var,
                    Binary("+", Ref(parent.var), Const(parent.var.width, 1)),
                ),
                *self._reset_states(parent),
                *self._activate(parent.children[0], parent_path + ((parent, 0),)),
            ]
            test = Binary(
                "<",
                Binary("+", Ref(parent.var), Const(parent.var.width, 1)),
                Const(parent.var.width, parent.end_exclusive),
            )
            return [Branch(test, tuple(back_edge), tuple(self._complete(parent, parent_path)))]
        if isinstance(parent, WhileLoop):
            again = [
                *self._reset_states(parent),
                *self._activate(parent.children[0], parent_path + ((parent, 0),)),
            ]
            stop = [
                AssignNext(self._state(parent), Const(2, DONE)),
                *self._complete(parent, parent_path),
            ]
            return [Branch(parent.cond, tuple(again), tuple(stop))]
        if isinstance(parent, Parallel):
            joined = self._complete(parent, parent_path)
            return [Branch(self._complete_expr(parent), tuple(joined), ())]
        raise TypeError(f"unknown section type {type(parent).__name__}")

    def _complete(self, section: Section, path) -> list[Action]:
        return [Mark(section.label, "complete"), *self._after_completion(section, path)]

    def _complete_expr(self, section: Section) -> Expression:
        """Has this subtree completed? Read from (staged) FSM states."""
        if isinstance(section, (Leaf, WhileLoop)):
            return Binary("==", Ref(self._state(section)), Const(2, DONE))
        if isinstance(section, (Serial, ForLoop)):
            return self._complete_expr(section.children[-1])
        if isinstance(section, Parallel):
            expr = self._complete_expr(section.children[0])
            for child in section.children[1:]:
                expr = Binary("&", expr, self._complete_expr(child))
            return expr
        raise TypeError(f"unknown section type {type(section).__name__}")

    def _reset_states(self, section: Section) -> list[Action]:
        """Send every leaf/while state in the loop body back to idle."""
        actions = []
        for child in section.children:
            for sub in iter_sections(child):
                if isinstance(sub, (Leaf, WhileLoop)):
                    actions.append(AssignNext(self._state(sub), Const(2, IDLE)))
        return actions


# ---------------------------------------------------------------------------
# Closed-form cycle laws (independent of any simulation)


def predicted_cycles(section: Section) -> int:
    """Exact cycle count of a guard-free section: serial children sum,
    parallel children max, loops multiply by trip count, a leaf is one
    cycle.  While loops are data dependent and unsupported here."""
    if isinstance(section, Leaf):
        if section.guards:
            raise ElaborationError(
                f"leaf {section.label!r} has guards; its cycle count is data dependent"
            )
        return 1
    if isinstance(section, Serial):
        return sum(predicted_cycles(c) for c in section.children)
    if isinstance(section, Parallel):
        return max(predicted_cycles(c) for c in section.children)
    if isinstance(section, ForLoop):
        trips = section.end_exclusive - section.start
        return trips * sum(predicted_cycles(c) for c in section.children)
    if isinstance(section, WhileLoop):
        raise ElaborationError("while loops have no static cycle count")
    raise TypeError(f"unknown section type {type(section).__name__}")


def _paths_of(root: Serial) -> dict[int, tuple]:
    """Map id(section) -> path of (parent, child_index) pairs from the root."""
    paths: dict[int, tuple] = {id(root): ()}

    def walk(section, path):
        for i, child in enumerate(section.children):
            child_path = path + ((section, i),)
            paths[id(child)] = child_path
            walk(child, child_path)

    walk(root, ())
    return paths
