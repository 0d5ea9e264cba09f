"""Bundled designs: every registered check passes; extra end-to-end
exercises for static elaboration patterns."""

import pytest

from sectionhdl import (
    LeafSection,
    Reg,
    RegIn,
    RegOut,
    Var,
    assign,
    begin_module,
    display,
    end_module,
    fresh_library,
    run,
)
from sectionhdl.designs import REGISTRY, get, names
from sectionhdl.designs.oracles import dec32, dft8_quantized, enc32, matmul_reference
from sectionhdl.errors import HdlError


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_registered_checks_pass(name):
    design = get(name)
    if design.check is None:
        pytest.skip("no bundled checks")
    results = design.check()
    failed = [r for r in results if not r.ok]
    assert not failed, "; ".join(f"{r.label}: {r.detail}" for r in failed)


def test_registry_lookup_and_params():
    assert set(names()) == {"add_sub", "fft8", "matmul", "my_tb", "pipeline_demo"}
    with pytest.raises(HdlError, match="unknown design"):
        get("nosuch")
    with pytest.raises(HdlError, match="no parameter"):
        get("matmul").build({"Z": 1})


def test_matmul_rectangular_shapes():
    design = get("matmul")
    a = [1, 2, 3, 4, 5, 6]  # 2x3
    b = [7, 8, 9, 10, 11, 12]  # 3x2
    top = design.build({"N": 2, "Q": 3, "M": 2})
    report = run(top, stimuli={"fA": a, "fB": b}, max_cycles=10_000)
    assert report.fifos["fC"] == matmul_reference(a, b, 2, 3, 2)


def test_fft8_against_oracle_on_structured_inputs():
    from sectionhdl.designs.fft8 import stimuli_from_samples

    design = get("fft8")
    cases = [
        [(100, 0), (-100, 0)] * 4,  # alternating: energy at bin 4
        [(0, 512)] + [(0, 0)] * 7,  # imaginary impulse
        [(31, -17), (5, 9), (-8, 4), (2, -2), (0, 0), (1, 1), (-1, -1), (7, 0)],
    ]
    for samples in cases:
        top = design.build()
        report = run(top, stimuli=stimuli_from_samples(samples), max_cycles=10_000)
        got = [
            (dec32(re), dec32(im))
            for re, im in zip(report.fifos["fo_re"], report.fifos["fo_im"])
        ]
        assert got == dft8_quantized(samples)


def test_popcount_by_host_loop_unrolling():
    # A Python loop over the builder unrolls into one combinational chain.
    with fresh_library():
        begin_module("popcount")
        x = RegIn("x", 32)
        count = RegOut("count", 6)
        acc = Var("acc", 6)
        with LeafSection("fold"):
            for i in range(32):
                assign(acc, acc + x[i])
            assign(count, acc)
        mod = end_module()
    for value in (0, 1, 0xFFFFFFFF, 0xDEADBEEF, 0x80000001):
        report = run(mod, port_inputs={"x": value}, max_cycles=10)
        assert report.outputs["count"] == bin(value).count("1"), hex(value)


def test_fixed_point_roundtrip_helpers():
    assert dec32(enc32(-5)) == -5
    assert dec32(enc32(5)) == 5
    assert enc32(-1) == 0xFFFFFFFF
