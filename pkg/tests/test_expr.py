"""Expression layer: widths, rendering, reference evaluation."""

import random

import pytest

from sectionhdl.errors import AddressError, ElaborationError, EvalError
from sectionhdl.expr import (
    ArraySignal,
    Binary,
    Const,
    Index,
    Kind,
    Mux,
    Ref,
    Signal,
    Slice,
    Unary,
    evaluate,
    make_binary,
    mask_of,
    render,
)


def sig(name, width):
    return Signal(name, width, Kind.REG)


A = sig("a", 32)
B = sig("b", 32)
C = sig("c", 32)


class TestWidths:
    def test_add_takes_max_width(self):
        e = make_binary("+", A, B)
        assert e.width == 32

    def test_mixed_widths(self):
        assert (sig("x", 8) + sig("y", 20)).width == 20

    def test_compare_is_one_bit(self):
        assert make_binary("==", A, Const(32, 5)).width == 1

    def test_bit_select_is_one_bit(self):
        assert A[3].width == 1

    def test_array_select_has_element_width(self):
        arr = ArraySignal("mem", 16, 8)
        assert arr[2].width == 16

    def test_slice_width(self):
        assert A[7:4].width == 4

    def test_mux_width(self):
        m = Mux(make_binary("==", A, B), A._as_expr(), Const(8, 1))
        assert m.width == 32

    def test_every_node_has_a_width(self):
        rng = random.Random(1)
        for _ in range(200):
            e = _random_expr(rng, depth=4)
            assert e.width >= 1

    def test_unsupported_operator_rejected(self):
        with pytest.raises(ElaborationError):
            Binary("/", A._as_expr(), B._as_expr())
        with pytest.raises(ElaborationError):
            Unary("!", A._as_expr())

    def test_bad_slice_rejected(self):
        with pytest.raises(ElaborationError):
            Slice(A, 32, 0)
        with pytest.raises(ElaborationError):
            Slice(A, 3, 5)

    def test_const_must_fit(self):
        with pytest.raises(ElaborationError):
            Const(4, 16)

    def test_mux_condition_must_be_one_bit(self):
        with pytest.raises(ElaborationError):
            Mux(A._as_expr(), A._as_expr(), B._as_expr())


class TestRender:
    def test_ref_renders_as_name(self):
        assert render(Ref(A)) == "a"

    def test_const_renders_width_and_value(self):
        assert render(Const(32, 5)) == "32'd5"

    def test_nested_sum_is_fully_parenthesized(self):
        assert render(A + B + C) == "((a + b) + c)"

    def test_subtraction_example(self):
        tmp = sig("tmp", 32)
        c_in = sig("c_inreg", 32)
        assert render(tmp - c_in) == "(tmp - c_inreg)"

    def test_misc_nodes(self):
        assert render(~A) == "(~a)"
        assert render(A[5]) == "a[32'd5]"
        assert render(A[7:0]) == "a[7:0]"
        arr = ArraySignal("mem", 8, 4)
        assert render(arr[1]) == "mem[2'd1]"

    def test_injective_on_distinct_trees(self):
        # Same render text implies the same tree (over a fixed signal pool).
        rng = random.Random(7)
        seen = {}
        for _ in range(600):
            e = _random_expr(rng, depth=4)
            text = render(e)
            if text in seen:
                assert _same(seen[text], e), text
            else:
                seen[text] = e

    def test_deterministic(self):
        e = (A + B) * C - Const(32, 9)
        assert render(e) == render(e)


ENV = {"a": 21, "b": 34, "c": 5}


class TestEvaluate:
    def test_basic_addition(self):
        assert evaluate(A + B, ENV) == 55

    def test_add_sub_composition(self):
        assert evaluate((A + B) - C, ENV) == 50

    def test_wraparound(self):
        assert evaluate(A + B, {"a": 2**32 - 1, "b": 1}) == 0

    def test_unsigned_subtraction_wraps(self):
        assert evaluate(A - B, {"a": 0, "b": 1}) == 2**32 - 1

    def test_comparisons_give_bits(self):
        assert evaluate(make_binary("<", A, B), ENV) == 1
        assert evaluate(make_binary(">=", A, B), ENV) == 0

    def test_shift_by_width_or_more_is_zero(self):
        x = sig("x", 8)
        assert evaluate(x << 8, {"x": 255}) == 0
        assert evaluate(x >> 9, {"x": 255}) == 0
        assert evaluate(x << 2, {"x": 3}) == 12

    def test_unary(self):
        x = sig("x", 8)
        assert evaluate(~x, {"x": 0b1010}) == 0b11110101
        assert evaluate(-x, {"x": 1}) == 255

    def test_bit_and_slice(self):
        x = sig("x", 8)
        assert evaluate(x[3], {"x": 0b1000}) == 1
        assert evaluate(x[6:3], {"x": 0b1011000}) == 0b1011

    def test_bit_select_past_width_is_zero(self):
        x = sig("x", 8)
        idx = sig("i", 8)
        assert evaluate(Index(x, Ref(idx)), {"x": 255, "i": 20}) == 0

    def test_mux(self):
        m = Mux(make_binary("==", A, B), A + B, A - B)
        assert evaluate(m, {"a": 4, "b": 4}) == 8
        assert evaluate(m, {"a": 9, "b": 4}) == 5

    def test_array_read(self):
        arr = ArraySignal("mem", 8, 4)
        assert evaluate(arr[2], {"mem": [9, 8, 7, 6]}) == 7

    def test_array_out_of_range(self):
        arr = ArraySignal("mem", 8, 4)
        with pytest.raises(AddressError):
            evaluate(arr[sig("i", 4)], {"mem": [1, 2, 3, 4], "i": 4})

    def test_unbound_name_is_an_error(self):
        with pytest.raises(EvalError, match="nosuch"):
            evaluate(A + sig("nosuch", 32), {"a": 1})

    def test_result_always_fits_width(self):
        rng = random.Random(3)
        for _ in range(400):
            e = _random_expr(rng, depth=4)
            value = evaluate(e, _RAND_ENV)
            assert 0 <= value < (1 << e.width)

    def test_evaluate_distributes_over_make_binary(self):
        rng = random.Random(11)
        reference = {
            "+": lambda x, y: x + y,
            "-": lambda x, y: x - y,
            "*": lambda x, y: x * y,
            "&": lambda x, y: x & y,
            "|": lambda x, y: x | y,
            "^": lambda x, y: x ^ y,
            "==": lambda x, y: int(x == y),
            "!=": lambda x, y: int(x != y),
            "<": lambda x, y: int(x < y),
            "<=": lambda x, y: int(x <= y),
            ">": lambda x, y: int(x > y),
            ">=": lambda x, y: int(x >= y),
        }
        for _ in range(300):
            op = rng.choice(list(reference))
            lhs = _random_expr(rng, depth=2)
            rhs = _random_expr(rng, depth=2)
            e = make_binary(op, lhs, rhs)
            want = reference[op](evaluate(lhs, _RAND_ENV), evaluate(rhs, _RAND_ENV))
            assert evaluate(e, _RAND_ENV) == want & mask_of(e.width)


class TestOperatorSurface:
    def test_int_coercion_uses_operand_width(self):
        e = A + 5
        assert render(e) == "(a + 32'd5)"

    def test_reflected_int(self):
        assert render(5 + A) == "(32'd5 + a)"

    def test_negative_literal_rejected(self):
        with pytest.raises(ElaborationError):
            A + (-5)

    def test_expressions_have_no_truth_value(self):
        with pytest.raises(TypeError):
            bool(A == B)

    def test_signal_validation(self):
        with pytest.raises(ElaborationError):
            Signal("1bad", 8, Kind.REG)
        with pytest.raises(ElaborationError):
            Signal("x", 0, Kind.REG)
        with pytest.raises(ElaborationError):
            Signal("x", 4, Kind.REG, initial=16)


_POOL = [sig("a", 32), sig("b", 32), sig("c", 32), sig("n8", 8), sig("n5", 5)]
_RAND_ENV = {"a": 21, "b": 34, "c": 5, "n8": 200, "n5": 19}
_OPS = ["+", "-", "*", "&", "|", "^", "<<", ">>", "==", "!=", "<", "<=", ">", ">="]


def _random_expr(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return Ref(rng.choice(_POOL))
        width = rng.randint(1, 40)
        return Const(width, rng.randrange(1 << min(width, 48)))
    kind = rng.random()
    if kind < 0.7:
        return Binary(
            rng.choice(_OPS), _random_expr(rng, depth - 1), _random_expr(rng, depth - 1)
        )
    if kind < 0.8:
        return Unary(rng.choice(["~", "-"]), _random_expr(rng, depth - 1))
    if kind < 0.9:
        cond = Binary("==", _random_expr(rng, depth - 1), _random_expr(rng, depth - 1))
        return Mux(cond, _random_expr(rng, depth - 1), _random_expr(rng, depth - 1))
    base = rng.choice(_POOL)
    hi = rng.randrange(base.width)
    lo = rng.randrange(hi + 1)
    return Slice(base, hi, lo)


def _same(x, y) -> bool:
    if type(x) is not type(y):
        return False
    if isinstance(x, Ref):
        return x.signal is y.signal
    if isinstance(x, Const):
        return (x.width, x.value) == (y.width, y.value)
    if isinstance(x, Binary):
        return x.op == y.op and _same(x.lhs, y.lhs) and _same(x.rhs, y.rhs)
    if isinstance(x, Unary):
        return x.op == y.op and _same(x.operand, y.operand)
    if isinstance(x, Slice):
        return x.base is y.base and (x.hi, x.lo) == (y.hi, y.lo)
    if isinstance(x, Index):
        return x.base is y.base and _same(x.index, y.index)
    if isinstance(x, Mux):
        return _same(x.cond, y.cond) and _same(x.then, y.then) and _same(x.orelse, y.orelse)
    raise TypeError(type(x))
