"""Integer matrix multiplier: C = A x B through block memories and FIFOs.

A (N x Q) and B (Q x M) stream in through input FIFOs while C is zeroed,
all three loops running in parallel.  The multiply phase walks k/i/j with a
two-leaf body: one cycle issues the three memory reads, the next commits
the multiply-accumulate, so it costs exactly 2*N*M*Q cycles.  A final loop
drains C into the output FIFO (2*N*M cycles).
"""

from __future__ import annotations

from ..errors import ElaborationError
from ..expr import Const
from ..interfaces import SimpleBram, SimpleFifo
from ..module import HWModule, begin_module, end_module
from ..sections import ForLoopSection, LeafSection, ParallelSections

INIT_LABEL = "par_A_B_C"
MUL_LABEL = "L_k"
DRAIN_LABEL = "drain"


def build_matmul(N: int = 4, Q: int = 4, M: int = 4) -> HWModule:
    n, q, m = N, Q, M
    if min(n, q, m) < 1:
        raise ElaborationError("matmul: N, Q, M must be >= 1")
    begin_module("matmul", {"N": n, "Q": q, "M": m})
    fa = SimpleFifo("fA", 32, depth=max(16, n * q))
    fb = SimpleFifo("fB", 32, depth=max(16, q * m))
    fc = SimpleFifo("fC", 32, depth=max(16, n * m))
    a_mem = SimpleBram("A", 32, n * q)
    b_mem = SimpleBram("B", 32, q * m)
    c_mem = SimpleBram("C", 32, n * m)

    def wide(value: int) -> Const:
        # Address arithmetic needs headroom beyond the loop-variable widths.
        return Const(16, value)

    with ParallelSections(INIT_LABEL):
        with ForLoopSection("R_A", "p", 0, n * q) as p:
            with LeafSection("recv_A"):
                a_mem.write(p, fa.read())
        with ForLoopSection("R_B", "s", 0, q * m) as s:
            with LeafSection("recv_B"):
                b_mem.write(s, fb.read())
        with ForLoopSection("R_C", "r", 0, n * m) as r:
            with LeafSection("Initialize_C"):
                c_mem.write(r, 0)
    with ForLoopSection(MUL_LABEL, "k", 0, q) as k:
        with ForLoopSection("L_i", "i", 0, n) as i:
            with ForLoopSection("L_j", "j", 0, m) as j:
                with LeafSection("mac_issue"):
                    a_mem.read_issue(i * wide(q) + k)
                    b_mem.read_issue(k * wide(m) + j)
                    c_mem.read_issue(i * wide(m) + j)
                with LeafSection("mac_commit"):
                    c_mem.write(
                        i * wide(m) + j,
                        a_mem.read_data() * b_mem.read_data() + c_mem.read_data(),
                    )
    with ForLoopSection(DRAIN_LABEL, "t", 0, n * m) as t:
        with LeafSection("c_issue"):
            c_mem.read_issue(t)
        with LeafSection("c_out"):
            fc.write(c_mem.read_data())
    return end_module()


def predicted_section_cycles(n: int, q: int, m: int) -> dict[str, int]:
    """Closed-form schedule: init is the longest of the three parallel
    fills (FIFOs preloaded, so never stalled), the multiply nest costs two
    cycles per iteration, the drain two per element."""
    return {
        INIT_LABEL: max(n * q, q * m, n * m),
        MUL_LABEL: 2 * n * m * q,
        DRAIN_LABEL: 2 * n * m,
    }
