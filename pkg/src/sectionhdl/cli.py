"""Command-line entry point: emit Verilog, simulate, and check designs.

The CLI is a thin shell over the registry and library APIs; every command
is reachable programmatically.

Exit codes: 0 success, 1 simulation/check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import designs
from .errors import HdlError, SimulationError
from .sim import DEFAULT_WATCHDOG, run
from .verilog import emit_hierarchy


def _parse_params(tokens: list[str]) -> dict[str, str]:
    params = {}
    for token in tokens:
        if "=" not in token:
            raise HdlError(f"expected KEY=VALUE design parameter, got {token!r}")
        key, value = token.split("=", 1)
        params[key] = value
    return params


def _parse_port_inputs(tokens: list[str]) -> dict[str, int]:
    inputs = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--"):
            raise HdlError(f"unexpected argument {token!r}")
        name = token[2:]
        if "=" in name:
            name, value = name.split("=", 1)
        else:
            if i + 1 >= len(tokens):
                raise HdlError(f"flag --{name} needs a value")
            i += 1
            value = tokens[i]
        try:
            inputs[name] = int(value, 0)
        except ValueError:
            raise HdlError(f"--{name} expects an integer, got {value!r}") from None
        i += 1
    return inputs


def _load_stimuli(design: designs.Design, params: dict, spec: str | None, seed: int):
    if spec is None:
        if design.default_stimuli is not None:
            return design.default_stimuli(params), False
        return None, False
    if spec == "random":
        if design.random_stimuli is None:
            raise HdlError(f"design {design.name!r} has no randomized stimuli")
        return design.random_stimuli(params, random.Random(seed)), True
    path = Path(spec)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise HdlError(f"cannot read stimuli file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise HdlError(f"stimuli file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or not all(
        isinstance(v, list) and all(isinstance(x, int) for x in v) for v in data.values()
    ):
        raise HdlError("stimuli must be a JSON object mapping fifo names to integer lists")
    return data, False


def cmd_emit(args) -> int:
    design = designs.get(args.design)
    top = design.build(_parse_params(args.params))
    files = emit_hierarchy(top, args.outdir)
    for path in files:
        print(path)
    return 0


def cmd_sim(args, extra: list[str]) -> int:
    design = designs.get(args.design)
    params = design.resolve_params(_parse_params(args.params))
    port_inputs = _parse_port_inputs(extra)
    stimuli, randomized = _load_stimuli(design, params, args.stimuli, args.seed)
    with designs.fresh_library():
        top = design.builder(**params)
    report = run(
        top,
        stimuli=stimuli,
        port_inputs=port_inputs,
        max_cycles=args.max_cycles,
        backend=args.backend,
    )
    for cycle, text in report.display:
        print(f"[{cycle:>5}] {text}")
    print(f"Done after {report.cycles_to_done} cycles (START to Done).")
    for label, timing in report.sections.items():
        print(f"section {label}: {timing['cycles']} cycles")
    for name, values in report.fifos.items():
        if values:
            print(f"fifo {name}: {values}")
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n")
        print(f"report written to {args.report}")
    if design.verify is not None and stimuli is not None:
        result = design.verify(params, stimuli, report)
        print(("PASS " if result.ok else "FAIL ") + result.label)
        if not result.ok:
            print("  " + result.detail)
            return 1
    _ = randomized
    return 0


def cmd_check(args) -> int:
    design = designs.get(args.design)
    if design.check is None:
        print(f"design {design.name!r} has no bundled checks")
        return 0
    results = design.check(backend=args.backend)
    failures = 0
    for result in results:
        print(("PASS " if result.ok else "FAIL ") + result.label)
        if not result.ok:
            failures += 1
            if result.detail:
                print("  " + result.detail)
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 0 if failures == 0 else 1


def cmd_list(_args) -> int:
    for name in designs.names():
        design = designs.get(name)
        params = ", ".join(f"{k}={v}" for k, v in design.defaults.items()) or "-"
        print(f"{name:15} {design.doc}  (params: {params})")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sectionhdl",
        description="Emit Verilog for, simulate, and check the registered designs.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_emit = sub.add_parser("emit", help="generate the Verilog file tree for a design")
    p_emit.add_argument("design")
    p_emit.add_argument("params", nargs="*", help="design parameters as KEY=VALUE")
    p_emit.add_argument("-o", "--outdir", default="verilog_out")

    p_sim = sub.add_parser("sim", help="run the cycle-accurate interpreter")
    p_sim.add_argument("design")
    p_sim.add_argument("params", nargs="*", help="design parameters as KEY=VALUE")
    p_sim.add_argument("--stimuli", help="JSON file of fifo preloads, or 'random'")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--max-cycles", type=int, default=DEFAULT_WATCHDOG)
    p_sim.add_argument("--report", help="write the simulation report as JSON")
    p_sim.add_argument("--backend", choices=("auto", "pure", "native"), default="auto")

    p_check = sub.add_parser("check", help="run a design's bundled acceptance checks")
    p_check.add_argument("design")
    p_check.add_argument("--backend", choices=("auto", "pure", "native"), default="auto")

    sub.add_parser("list", help="list registered designs")
    return parser


_SIM_FLAGS = {"--stimuli", "--seed", "--max-cycles", "--report", "--backend"}


def _split_port_flags(argv: list[str]) -> tuple[list[str], list[str]]:
    """Separate ``--<port> value`` input bindings from the sim options
    (argparse would otherwise prefix-match them against its own flags)."""
    known: list[str] = []
    extra: list[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        takes_value = token in _SIM_FLAGS
        is_option = token.startswith("--") and token.split("=", 1)[0] not in _SIM_FLAGS
        if is_option and token not in ("--help",):
            extra.append(token)
            if "=" not in token and i + 1 < len(argv):
                i += 1
                extra.append(argv[i])
        else:
            known.append(token)
            if takes_value and i + 1 < len(argv):
                i += 1
                known.append(argv[i])
        i += 1
    return known, extra


def main(argv=None) -> int:
    parser = _build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "sim":
            known, extra = _split_port_flags(argv)
            args = parser.parse_args(known)
            return cmd_sim(args, extra)
        args = parser.parse_args(argv)
        if args.command == "emit":
            return cmd_emit(args)
        if args.command == "check":
            return cmd_check(args)
        if args.command == "list":
            return cmd_list(args)
    except SimulationError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1
    except HdlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
