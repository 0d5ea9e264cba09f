"""Host-side reference computations the bundled designs are checked against.

Everything here is plain integer Python, independent of the expression and
simulation machinery: matrix products by triple loop, and the quantized
8-point transform by direct summation plus one quantized twiddle layer.
"""

from __future__ import annotations

MASK32 = (1 << 32) - 1

# Q14 fixed-point eighth roots of unity, k = 0..3 (negative frequencies).
SCALE_BITS = 14
TWIDDLES_Q14 = (
    (16384, 0),
    (11585, -11585),
    (0, -16384),
    (-11585, -11585),
)


def enc32(value: int) -> int:
    """Two's-complement encode into an unsigned 32-bit word."""
    return value & MASK32


def dec32(word: int) -> int:
    """Decode an unsigned 32-bit word as a signed value."""
    return word - (1 << 32) if word >> 31 else word


def matmul_reference(a: list[int], b: list[int], n: int, q: int, m: int) -> list[int]:
    """Row-major integer product of A (n x q) and B (q x m), mod 2**32."""
    out = [0] * (n * m)
    for i in range(n):
        for j in range(m):
            acc = 0
            for k in range(q):
                acc += a[i * q + k] * b[k * m + j]
            out[i * m + j] = acc & MASK32
    return out


def _dft4_exact(vals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Exact 4-point transform by direct summation; the twiddles are the
    Gaussian units 1, -i, -1, i, so no rounding occurs."""
    out = []
    for m in range(4):
        re_acc = 0
        im_acc = 0
        for t, (re, im) in enumerate(vals):
            k = (m * t) % 4
            if k == 0:
                rr, ii = re, im
            elif k == 1:
                rr, ii = im, -re
            elif k == 2:
                rr, ii = -re, -im
            else:
                rr, ii = -im, re
            re_acc += rr
            im_acc += ii
        out.append((re_acc, im_acc))
    return out


def twiddle_mul_q14(value: tuple[int, int], k: int) -> tuple[int, int]:
    """Multiply by the Q14 twiddle for index ``k`` and floor-shift back.

    Python's ``>>`` on a signed int is an arithmetic shift, the same
    operation the hardware datapath performs on its 32-bit encoding.
    """
    re, im = value
    wr, wi = TWIDDLES_Q14[k]
    return ((re * wr - im * wi) >> SCALE_BITS, (re * wi + im * wr) >> SCALE_BITS)


def dft8_quantized(xs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """8-point transform with the Q14 twiddle quantization.

    Splits into exact 4-point transforms of the even and odd samples and
    applies the single layer of quantized twiddles, which is the only place
    rounding can occur (the other twiddles are exact units).  Inputs must
    be small enough that 32-bit intermediates cannot overflow
    (|component| < 2**16 is ample).
    """
    if len(xs) != 8:
        raise ValueError("expected 8 complex samples")
    evens = _dft4_exact([xs[i] for i in (0, 2, 4, 6)])
    odds = _dft4_exact([xs[i] for i in (1, 3, 5, 7)])
    out: list[tuple[int, int]] = [(0, 0)] * 8
    for m in range(4):
        t_re, t_im = twiddle_mul_q14(odds[m], m)
        out[m] = (evens[m][0] + t_re, evens[m][1] + t_im)
        out[m + 4] = (evens[m][0] - t_re, evens[m][1] - t_im)
    return out
