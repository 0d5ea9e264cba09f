"""8-point decimation-in-time transform on Q14 fixed-point integers.

Complex samples (two's-complement components in 32-bit words) stream in
through FIFOs and are stored bit-reversed into a block-memory pair.  Three
serial stage loops then run four butterflies each, ping-ponging between two
memory pairs; each stage multiplies by a quantized twiddle constant and
scales the product back with an arithmetic right shift.  Results drain out
through FIFOs in natural order.

A butterfly takes four cycles: issue the p reads, save p and issue q,
multiply/accumulate and write the p output, write the q output.
"""

from __future__ import annotations

from ..expr import Const, Expression, Mux, Signal
from ..interfaces import SimpleBram, SimpleFifo
from ..module import HWModule, Reg, Var, begin_module, end_module
from ..sections import ForLoopSection, LeafSection, assign
from .oracles import SCALE_BITS, TWIDDLES_Q14, enc32

POINTS = 8
STAGES = 3
WORD = 32

LOAD_LABEL = "load"
DRAIN_LABEL = "drain"


def _bit_reverse(index) -> Expression:
    return ((index & 1) << 2) | (index & 2) | ((index >> 2) & 1)


def _arith_shift(value: Signal) -> Expression:
    """Arithmetic right shift of a 32-bit two's-complement word by the Q14
    scale: shift logically, then replicate the sign into the top bits."""
    fill = ((1 << SCALE_BITS) - 1) << (WORD - SCALE_BITS)
    shifted = value >> SCALE_BITS
    return Mux(value[WORD - 1], shifted | Const(WORD, fill), shifted)


def _twiddle(k: Expression, component: int) -> Expression:
    """Select the Q14 twiddle (component 0 = real, 1 = imaginary) by index."""
    values = [enc32(t[component]) for t in TWIDDLES_Q14]
    out = Const(WORD, values[3])
    for idx in (2, 1, 0):
        out = Mux(k == idx, Const(WORD, values[idx]), out)
    return out


def build_fft8() -> HWModule:
    begin_module("fft8")
    fi_re = SimpleFifo("fi_re", WORD, depth=16)
    fi_im = SimpleFifo("fi_im", WORD, depth=16)
    fo_re = SimpleFifo("fo_re", WORD, depth=16)
    fo_im = SimpleFifo("fo_im", WORD, depth=16)
    rams = [
        (SimpleBram("ram_re0", WORD, POINTS), SimpleBram("ram_im0", WORD, POINTS)),
        (SimpleBram("ram_re1", WORD, POINTS), SimpleBram("ram_im1", WORD, POINTS)),
    ]
    p_re = Reg("p_re", WORD)
    p_im = Reg("p_im", WORD)
    t_re = Reg("t_re", WORD)
    t_im = Reg("t_im", WORD)
    prod_re = Var("prod_re", WORD)
    prod_im = Var("prod_im", WORD)
    sh_re = Var("sh_re", WORD)
    sh_im = Var("sh_im", WORD)

    with ForLoopSection(LOAD_LABEL, "n", 0, POINTS) as n:
        with LeafSection("load_word"):
            rams[0][0].write(_bit_reverse(n), fi_re.read())
            rams[0][1].write(_bit_reverse(n), fi_im.read())

    for stage in range(STAGES):
        src_re, src_im = rams[stage % 2]
        dst_re, dst_im = rams[(stage + 1) % 2]
        span = 1 << stage
        with ForLoopSection(f"stage{stage}", f"j{stage}", 0, POINTS // 2) as j:
            p = ((j >> stage) << (stage + 1)) | (j & (span - 1))
            q = p + span
            k = (j & (span - 1)) << (2 - stage)
            with LeafSection(f"s{stage}_issue_p"):
                src_re.read_issue(p)
                src_im.read_issue(p)
            with LeafSection(f"s{stage}_save_p"):
                assign(p_re, src_re.read_data())
                assign(p_im, src_im.read_data())
                src_re.read_issue(q)
                src_im.read_issue(q)
            with LeafSection(f"s{stage}_mac"):
                q_re = src_re.read_data()
                q_im = src_im.read_data()
                w_re = _twiddle(k, 0)
                w_im = _twiddle(k, 1)
                assign(prod_re, q_re * w_re - q_im * w_im)
                assign(prod_im, q_re * w_im + q_im * w_re)
                assign(sh_re, _arith_shift(prod_re))
                assign(sh_im, _arith_shift(prod_im))
                dst_re.write(p, p_re + sh_re)
                dst_im.write(p, p_im + sh_im)
                assign(t_re, sh_re)
                assign(t_im, sh_im)
            with LeafSection(f"s{stage}_write_q"):
                dst_re.write(q, p_re - t_re)
                dst_im.write(q, p_im - t_im)

    out_re, out_im = rams[STAGES % 2]
    with ForLoopSection(DRAIN_LABEL, "m", 0, POINTS) as m:
        with LeafSection("out_issue"):
            out_re.read_issue(m)
            out_im.read_issue(m)
        with LeafSection("out_word"):
            fo_re.write(out_re.read_data())
            fo_im.write(out_im.read_data())
    return end_module()


def stimuli_from_samples(samples: list[tuple[int, int]]) -> dict[str, list[int]]:
    if len(samples) != POINTS:
        raise ValueError(f"expected {POINTS} samples")
    return {
        "fi_re": [enc32(re) for re, _ in samples],
        "fi_im": [enc32(im) for _, im in samples],
    }


# Cycle budget: load 8, three stage loops of 4 butterflies x 4 cycles,
# drain 2 per point.
TOTAL_CYCLES = POINTS + STAGES * (POINTS // 2) * 4 + 2 * POINTS
