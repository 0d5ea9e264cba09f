"""Three-stage pipeline over a stream: out = (x + 1) * 3 - 2.

The pipelined variant is the staggered-loop idiom: three single-leaf
for-loops under one parallel section, with index ranges 0..N, 1..N+1 and
2..N+2 so each loop variable tracks the global time step of its stage.
Stages hand data through registers; a stage is guarded by the valid flag
of its predecessor, so stage k first fires k cycles after the block
starts.  The block therefore takes N + 2 cycles: 2 to fill, then one
result per cycle.

The serialized variant runs the same three leaves in sequence inside one
loop and takes 3N cycles for the identical output stream.
"""

from __future__ import annotations

from ..errors import ElaborationError
from ..interfaces import SimpleFifo
from ..module import HWModule, Reg, begin_module, end_module
from ..sections import (
    ForLoopSection,
    LeafSection,
    ParallelSections,
    add_guard,
    assign,
)

PAR_LABEL = "stages"
SERIAL_LABEL = "stage_loop"


def build_pipeline_demo(N: int = 8, mode: str = "pipelined") -> HWModule:
    n = N
    if n < 1:
        raise ElaborationError("pipeline_demo: N must be >= 1")
    if mode not in ("pipelined", "serial"):
        raise ElaborationError(f"pipeline_demo: unknown mode {mode!r}")
    begin_module("pipeline_demo", {"N": n})
    fin = SimpleFifo("fin", 32, depth=max(16, n))
    fout = SimpleFifo("fout", 32, depth=max(16, n))
    d0 = Reg("d0", 32)
    d1 = Reg("d1", 32)
    if mode == "pipelined":
        v0 = Reg("v0", 1)
        v1 = Reg("v1", 1)
        with ParallelSections(PAR_LABEL):
            with ForLoopSection("F1", "i", 0, n):
                with LeafSection("stage1"):
                    assign(d0, fin.read() + 1)
                    assign(v0, 1)
            with ForLoopSection("F2", "j", 1, n + 1):
                with LeafSection("stage2"):
                    add_guard(v0 == 1)
                    assign(d1, d0 * 3)
                    assign(v1, 1)
            with ForLoopSection("F3", "k", 2, n + 2):
                with LeafSection("stage3"):
                    add_guard(v1 == 1)
                    fout.write(d1 - 2)
    else:
        with ForLoopSection(SERIAL_LABEL, "i", 0, n):
            with LeafSection("stage1"):
                assign(d0, fin.read() + 1)
            with LeafSection("stage2"):
                assign(d1, d0 * 3)
            with LeafSection("stage3"):
                fout.write(d1 - 2)
    return end_module()


def expected_stream(values: list[int]) -> list[int]:
    return [((v + 1) * 3 - 2) & ((1 << 32) - 1) for v in values]
