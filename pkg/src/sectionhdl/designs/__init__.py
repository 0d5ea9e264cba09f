"""Registry of the bundled example designs.

Each entry knows how to build its module hierarchy, produce default or
randomized stimuli, verify a simulation report against a host-side oracle,
and run its bundled acceptance checks (`cmd_check`).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..errors import HdlError
from ..module import HWModule, fresh_library
from ..sim import SimReport, run
from ..verilog import emit_module
from . import fft8 as fft8_mod
from . import matmul as matmul_mod
from . import oracles
from . import pipeline as pipeline_mod
from .add_sub import build_add_sub, build_my_tb
from .fft8 import TOTAL_CYCLES, build_fft8, stimuli_from_samples
from .matmul import build_matmul, predicted_section_cycles
from .pipeline import build_pipeline_demo, expected_stream


@dataclass
class CheckResult:
    label: str
    ok: bool
    detail: str = ""


@dataclass
class Design:
    name: str
    defaults: dict[str, object]
    builder: Callable[..., HWModule]
    doc: str
    default_stimuli: Optional[Callable[[dict], dict[str, list[int]]]] = None
    random_stimuli: Optional[Callable[[dict, random.Random], dict[str, list[int]]]] = None
    verify: Optional[Callable[[dict, dict, SimReport], CheckResult]] = None
    check: Optional[Callable[..., list[CheckResult]]] = None

    def build(self, params: Optional[dict] = None) -> HWModule:
        merged = self.resolve_params(params)
        with fresh_library():
            return self.builder(**merged)

    def resolve_params(self, params: Optional[dict]) -> dict:
        merged = dict(self.defaults)
        for key, value in (params or {}).items():
            if key not in merged:
                known = ", ".join(merged) or "none"
                raise HdlError(
                    f"design {self.name!r} has no parameter {key!r} (known: {known})"
                )
            merged[key] = type(merged[key])(value) if merged[key] is not None else value
        return merged


# ---------------------------------------------------------------------------
# add_sub / my_tb


def _check_add_sub(backend: str = "auto") -> list[CheckResult]:
    results = []
    top = Design.build(REGISTRY["add_sub"])
    report = run(top, port_inputs={"a": 21, "b": 34, "c": 5}, max_cycles=100, backend=backend)
    results.append(
        CheckResult(
            "add_sub: d == 50 and Done",
            report.done and report.outputs["d"] == 50,
            f"d={report.outputs['d']}, done={report.done}",
        )
    )
    results.append(
        CheckResult(
            "add_sub: prints result 50",
            any("result: 50" in line for line in report.display_lines()),
            "; ".join(report.display_lines()),
        )
    )
    results.append(
        CheckResult(
            "add_sub: START-to-Done latency is 3 cycles",
            report.cycles_to_done == 3,
            f"cycles_to_done={report.cycles_to_done}",
        )
    )
    text = emit_module(top).text
    for fragment in ("tmp_WIRE = (a_inreg + b_inreg)", "(tmp - c_inreg)"):
        results.append(
            CheckResult(f"add_sub.v contains {fragment!r}", fragment in text)
        )
    return results


def _check_my_tb(backend: str = "auto") -> list[CheckResult]:
    top = Design.build(REGISTRY["my_tb"])
    report = run(top, max_cycles=100, backend=backend)
    return [
        CheckResult(
            "my_tb: prints Result = [50]",
            any(line == "Result = [50]" for line in report.display_lines()),
            "; ".join(report.display_lines()),
        )
    ]


# ---------------------------------------------------------------------------
# pipeline_demo


def _pipeline_default_stimuli(params: dict) -> dict[str, list[int]]:
    return {"fin": list(range(1, params["N"] + 1))}


def _pipeline_random_stimuli(params: dict, rng: random.Random) -> dict[str, list[int]]:
    return {"fin": [rng.randrange(0, 1 << 16) for _ in range(params["N"])]}


def _pipeline_verify(params: dict, stimuli: dict, report: SimReport) -> CheckResult:
    want = expected_stream(stimuli["fin"])
    got = report.fifos["fout"]
    return CheckResult(
        "pipeline_demo: output stream matches (x + 1) * 3 - 2",
        got == want,
        f"got={got}, want={want}",
    )


def _check_pipeline(backend: str = "auto") -> list[CheckResult]:
    results = []
    values = list(range(1, 9))
    design = REGISTRY["pipeline_demo"]

    pipelined = design.build({"N": 8, "mode": "pipelined"})
    rep_p = run(pipelined, stimuli={"fin": values}, max_cycles=1000, backend=backend)
    results.append(
        CheckResult(
            "pipeline_demo N=8: parallel stage block takes 10 cycles",
            rep_p.section_cycles(pipeline_mod.PAR_LABEL) == 10,
            f"measured {rep_p.section_cycles(pipeline_mod.PAR_LABEL)}",
        )
    )

    serial = design.build({"N": 8, "mode": "serial"})
    rep_s = run(serial, stimuli={"fin": values}, max_cycles=1000, backend=backend)
    results.append(
        CheckResult(
            "pipeline_demo N=8 serialized: loop takes 24 cycles",
            rep_s.section_cycles(pipeline_mod.SERIAL_LABEL) == 24,
            f"measured {rep_s.section_cycles(pipeline_mod.SERIAL_LABEL)}",
        )
    )
    results.append(
        CheckResult(
            "pipeline_demo: identical output streams",
            rep_p.fifos["fout"] == rep_s.fifos["fout"] == expected_stream(values),
            f"pipelined={rep_p.fifos['fout']}, serial={rep_s.fifos['fout']}",
        )
    )

    single = design.build({"N": 1, "mode": "pipelined"})
    rep_1 = run(single, stimuli={"fin": [5]}, max_cycles=100, backend=backend)
    results.append(
        CheckResult(
            "pipeline_demo N=1: 3 cycles through 3 stages",
            rep_1.section_cycles(pipeline_mod.PAR_LABEL) == 3,
            f"measured {rep_1.section_cycles(pipeline_mod.PAR_LABEL)}",
        )
    )
    return results


# ---------------------------------------------------------------------------
# matmul


def _matmul_default_stimuli(params: dict) -> dict[str, list[int]]:
    n, q, m = params["N"], params["Q"], params["M"]
    identity = [1 if i // q == i % q else 0 for i in range(n * q)]
    return {"fA": identity, "fB": [i + 1 for i in range(q * m)]}


def _matmul_random_stimuli(params: dict, rng: random.Random) -> dict[str, list[int]]:
    n, q, m = params["N"], params["Q"], params["M"]
    return {
        "fA": [rng.randrange(0, 256) for _ in range(n * q)],
        "fB": [rng.randrange(0, 256) for _ in range(q * m)],
    }


def _matmul_verify(params: dict, stimuli: dict, report: SimReport) -> CheckResult:
    n, q, m = params["N"], params["Q"], params["M"]
    want = oracles.matmul_reference(stimuli["fA"], stimuli["fB"], n, q, m)
    got = report.fifos["fC"]
    return CheckResult(
        "matmul: C matches the reference product",
        got == want,
        f"got={got}, want={want}",
    )


def _run_matmul(n: int, q: int, m: int, a: list[int], b: list[int], backend: str) -> SimReport:
    top = REGISTRY["matmul"].build({"N": n, "Q": q, "M": m})
    return run(top, stimuli={"fA": a, "fB": b}, max_cycles=100_000, backend=backend)


def _check_matmul(backend: str = "auto", cases: int = 50) -> list[CheckResult]:
    results = []
    rep = _run_matmul(2, 2, 2, [1, 2, 3, 4], [5, 6, 7, 8], backend)
    results.append(
        CheckResult(
            "matmul 2x2: [[1,2],[3,4]] x [[5,6],[7,8]] == [[19,22],[43,50]]",
            rep.fifos["fC"] == [19, 22, 43, 50],
            f"got {rep.fifos['fC']}",
        )
    )

    identity = [1 if i // 4 == i % 4 else 0 for i in range(16)]
    b = list(range(3, 19))
    rep = _run_matmul(4, 4, 4, identity, b, backend)
    results.append(
        CheckResult("matmul 4x4: identity x B == B", rep.fifos["fC"] == b)
    )

    rng = random.Random(20240)
    bad = 0
    for _ in range(cases):
        a = [rng.randrange(0, 256) for _ in range(16)]
        b = [rng.randrange(0, 256) for _ in range(16)]
        rep = _run_matmul(4, 4, 4, a, b, backend)
        if rep.fifos["fC"] != oracles.matmul_reference(a, b, 4, 4, 4):
            bad += 1
    results.append(
        CheckResult(
            f"matmul 4x4: {cases} random cases match the reference product",
            bad == 0,
            f"{bad} mismatches",
        )
    )

    for size in (2, 3, 4):
        a = [rng.randrange(0, 256) for _ in range(size * size)]
        b = [rng.randrange(0, 256) for _ in range(size * size)]
        rep = _run_matmul(size, size, size, a, b, backend)
        want = predicted_section_cycles(size, size, size)
        got = {label: rep.section_cycles(label) for label in want}
        total_ok = rep.sections["root"]["cycles"] == sum(want.values())
        results.append(
            CheckResult(
                f"matmul {size}x{size}: section cycles match the closed form",
                got == want and total_ok,
                f"got={got}, want={want}, root={rep.sections['root']['cycles']}",
            )
        )
    return results


# ---------------------------------------------------------------------------
# fft8


def _fft8_default_stimuli(params: dict) -> dict[str, list[int]]:
    return stimuli_from_samples([(1000, 0)] + [(0, 0)] * 7)


def _fft8_random_stimuli(params: dict, rng: random.Random) -> dict[str, list[int]]:
    samples = [(rng.randint(-1024, 1023), rng.randint(-1024, 1023)) for _ in range(8)]
    return stimuli_from_samples(samples)


def _fft8_outputs(report: SimReport) -> list[tuple[int, int]]:
    return [
        (oracles.dec32(re), oracles.dec32(im))
        for re, im in zip(report.fifos["fo_re"], report.fifos["fo_im"])
    ]


def _fft8_verify(params: dict, stimuli: dict, report: SimReport) -> CheckResult:
    samples = [
        (oracles.dec32(re), oracles.dec32(im))
        for re, im in zip(stimuli["fi_re"], stimuli["fi_im"])
    ]
    want = oracles.dft8_quantized(samples)
    got = _fft8_outputs(report)
    return CheckResult(
        "fft8: outputs match the quantized reference transform",
        got == want,
        f"got={got}, want={want}",
    )


def _run_fft8(samples: list[tuple[int, int]], backend: str) -> SimReport:
    top = REGISTRY["fft8"].build()
    return run(top, stimuli=stimuli_from_samples(samples), max_cycles=10_000, backend=backend)


def _check_fft8(backend: str = "auto", cases: int = 50) -> list[CheckResult]:
    results = []
    rep = _run_fft8([(1000, 0)] + [(0, 0)] * 7, backend)
    results.append(
        CheckResult(
            "fft8 impulse: flat spectrum, every bin equals the impulse",
            _fft8_outputs(rep) == [(1000, 0)] * 8,
            f"got {_fft8_outputs(rep)}",
        )
    )
    results.append(
        CheckResult(
            "fft8: completes in the documented cycle budget",
            rep.sections["root"]["cycles"] == TOTAL_CYCLES,
            f"{rep.sections['root']['cycles']} vs {TOTAL_CYCLES}",
        )
    )

    rep = _run_fft8([(7, 0)] * 8, backend)
    want = [(56, 0)] + [(0, 0)] * 7
    results.append(
        CheckResult(
            "fft8 constant input: single nonzero bin at index 0",
            _fft8_outputs(rep) == want,
            f"got {_fft8_outputs(rep)}",
        )
    )

    rng = random.Random(915)
    bad = 0
    for _ in range(cases):
        samples = [(rng.randint(-1024, 1023), rng.randint(-1024, 1023)) for _ in range(8)]
        rep = _run_fft8(samples, backend)
        if _fft8_outputs(rep) != oracles.dft8_quantized(samples):
            bad += 1
    results.append(
        CheckResult(
            f"fft8: {cases} random inputs match the quantized reference",
            bad == 0,
            f"{bad} mismatches",
        )
    )
    return results


# ---------------------------------------------------------------------------


REGISTRY: dict[str, Design] = {}


def _register(design: Design):
    REGISTRY[design.name] = design


_register(
    Design(
        name="add_sub",
        defaults={},
        builder=build_add_sub,
        doc="two-leaf (a + b) - c datapath",
        check=_check_add_sub,
    )
)
_register(
    Design(
        name="my_tb",
        defaults={},
        builder=build_my_tb,
        doc="testbench module driving an add_sub instance",
        check=_check_my_tb,
    )
)
_register(
    Design(
        name="pipeline_demo",
        defaults={"N": 8, "mode": "pipelined"},
        builder=build_pipeline_demo,
        doc="three staggered single-leaf loop stages under one parallel section",
        default_stimuli=_pipeline_default_stimuli,
        random_stimuli=_pipeline_random_stimuli,
        verify=_pipeline_verify,
        check=_check_pipeline,
    )
)
_register(
    Design(
        name="matmul",
        defaults={"N": 4, "Q": 4, "M": 4},
        builder=build_matmul,
        doc="integer matrix multiplier over FIFOs and block memories",
        default_stimuli=_matmul_default_stimuli,
        random_stimuli=_matmul_random_stimuli,
        verify=_matmul_verify,
        check=_check_matmul,
    )
)
_register(
    Design(
        name="fft8",
        defaults={},
        builder=build_fft8,
        doc="8-point fixed-point transform with memory ping-pong",
        default_stimuli=_fft8_default_stimuli,
        random_stimuli=_fft8_random_stimuli,
        verify=_fft8_verify,
        check=_check_fft8,
    )
)


def get(name: str) -> Design:
    try:
        return REGISTRY[name]
    except KeyError:
        raise HdlError(
            f"unknown design {name!r}; registered: {', '.join(sorted(REGISTRY))}"
        ) from None


def names() -> list[str]:
    return sorted(REGISTRY)
