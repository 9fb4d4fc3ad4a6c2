"""Command-line front end: ``srfsc {code,compile,decode,simulate,report}``.

Exit codes: 0 success, 1 usage error, 2 invalid data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .channel_sim import SimConfig, export, parse_range, run_trials
from .cycles import DEFAULT_COST_MODEL, CostModel, throughput_report
from .fixedpoint import parse_quant, quantize_channel
from .polar_code import (
    RELIABILITY_ASSET_VERSION,
    build_code_spec,
    load_reliability_sequence,
    read_code_spec,
    write_code_spec,
)
from .sr_compiler import SR, derive_selectors, emit_program, pack_instruction, read_program, write_program, write_program_bin
from .srfsc_decoder import srfsc_decode


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _load_cost_model(path):
    return CostModel.from_file(path) if path else DEFAULT_COST_MODEL


def cmd_code(args) -> None:
    order = load_reliability_sequence(args.reliability, N=args.n)
    write_code_spec(build_code_spec(args.n, args.k, order), args.out)


def cmd_compile(args) -> None:
    spec = read_code_spec(args.code)
    prog = emit_program(spec, args.p, _load_cost_model(args.cost_model))
    write_program(prog, args.out)
    if args.bin:
        write_program_bin(prog, args.bin)
    print(f"{len(prog.instructions)} instructions, {prog.total_cycles} cycles")


def _read_llrs(path) -> np.ndarray:
    try:
        vals = np.loadtxt(path, dtype=np.float64, ndmin=1)
    except ValueError as exc:
        raise ValueError(f"malformed LLR file {path}: {exc}") from exc
    return vals


def cmd_decode(args) -> None:
    spec = read_code_spec(args.code) if args.code else None
    prog = read_program(args.program, spec)
    q = parse_quant(args.quant)
    llrs = _read_llrs(args.llrs)
    if llrs.size != prog.spec.N:
        raise ValueError(f"LLR file has {llrs.size} values, program expects {prog.spec.N}")
    out = srfsc_decode(prog, quantize_channel(llrs, q), q, trace=True)
    result = {
        "u_hat": out.u_hat.astype(int).tolist(),
        "x_hat": out.x_hat.astype(int).tolist(),
        "cycles": out.cycles,
        "selected_sequences": out.selected_sequences,
    }
    if args.trace:
        result["trace"] = [
            {k: (int(np.ravel(v)[0]) if isinstance(v, (np.ndarray, np.generic)) else v) for k, v in t.items()} for t in out.trace
        ]
    json.dump(result, sys.stdout)
    sys.stdout.write("\n")


def cmd_simulate(args) -> None:
    spec = read_code_spec(args.code)
    cfg = SimConfig(
        spec=spec,
        decoder=args.decoder,
        q=parse_quant(args.quant),
        ebn0_points=parse_range(args.ebn0),
        max_frames=args.max_frames,
        max_frame_errors=args.max_errors,
        seed=args.seed,
        workers=args.workers,
        P=args.p,
        llr_gain=args.llr_gain,
        all_zero=args.all_zero,
    )
    result = run_trials(cfg)
    fmt = args.format or ("json" if args.out.endswith(".json") else "csv")
    export(result, fmt, args.out)
    for row in result.rows():
        print("{:6.2f} dB  frames={:<8d} fe={:<6d} fer={:.3e} ber={:.3e}".format(row[0], row[1], row[2], row[4], row[5]))


def cmd_report(args) -> None:
    prog = read_program(args.program)
    if args.cost_model:
        from dataclasses import replace

        prog = replace(prog, cost_model=_load_cost_model(args.cost_model))
    print(f"{'#':>3} {'op':<5} {'start':>5} {'stage':>5} {'src':>3} {'fro':>3} {'seq':>3} {'type':>4} {'word':>6} {'cmd1..4':>12}")
    for k, ins in enumerate(prog.instructions):
        sel = derive_selectors(ins, prog.P) if ins.opcode == SR else None
        cmds = f"{sel.cmd1},{sel.cmd2},{sel.cmd3},{sel.cmd4}" if sel else "-"
        print(
            f"{k:>3} {ins.opcode:<5} {ins.start:>5} {ins.sr_stage:>5} {ins.source_stage:>3} {ins.fro_num:>3} "
            f"{ins.seq_num:>3} {ins.node_type:>4} {pack_instruction(ins):>6} {cmds:>12}"
        )
    cycles = prog.total_cycles
    print(f"instructions: {len(prog.instructions)}")
    print(f"total cycles: {cycles}")
    if cycles:
        tp = throughput_report(cycles, prog.spec.N, args.fmax_mhz * 1e6)
        print(f"throughput:   {tp / 1e6:.1f} Mbps at {args.fmax_mhz} MHz")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="srfsc", description=__doc__.splitlines()[0])
    p.add_argument(
        "--version", action="version", version=f"srfsc {__version__}; reliability data: {RELIABILITY_ASSET_VERSION}"
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("code", help="write a code-spec JSON from a reliability sequence")
    c.add_argument("--n", type=int, required=True, help="code length N")
    c.add_argument("--k", type=int, required=True, help="information length K")
    c.add_argument("--reliability", help="sequence file (default: bundled 5G NR sequence)")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_code)

    c = sub.add_parser("compile", help="compile a code spec into an instruction stream")
    c.add_argument("--code", required=True)
    c.add_argument("--p", type=int, default=64, help="processing elements (default: 64)")
    c.add_argument("--out", required=True)
    c.add_argument("--bin", help="also write packed 13-bit words")
    c.add_argument("--cost-model", help="cost model JSON (default: built-in)")
    c.set_defaults(func=cmd_compile)

    c = sub.add_parser("decode", help="decode one frame of channel LLRs")
    c.add_argument("--program", required=True)
    c.add_argument("--llrs", required=True, help="text file, one real LLR per line")
    c.add_argument("--code", help="code spec (default: recovered from the program)")
    c.add_argument("--quant", default="float", help="'float' or 'Qi,Qc,Qf' (default: float)")
    c.add_argument("--trace", action="store_true")
    c.set_defaults(func=cmd_decode)

    c = sub.add_parser("simulate", help="Monte-Carlo FER/BER over BPSK/AWGN")
    c.add_argument("--config", help="JSON file of option defaults; flags override it")
    c.add_argument("--code", required=True)
    c.add_argument("--decoder", choices=("sc", "srfsc"), default="srfsc")
    c.add_argument("--p", type=int, default=64)
    c.add_argument("--quant", default="float", help="'float' or 'Qi,Qc,Qf' (default: float)")
    c.add_argument("--ebn0", default="1.0:0.5:3.5", help="start:step:stop or comma list (default: 1.0:0.5:3.5)")
    c.add_argument("--max-frames", type=int, default=100_000)
    c.add_argument("--max-errors", type=int, default=100)
    c.add_argument("--seed", type=int, default=42)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--llr-gain", type=float, default=1.0)
    c.add_argument("--all-zero", action="store_true", help="transmit the all-zero codeword")
    c.add_argument("--format", choices=("csv", "json"))
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_simulate)

    c = sub.add_parser("report", help="instruction table, cycles and throughput")
    c.add_argument("--program", required=True)
    c.add_argument("--fmax-mhz", type=float, default=109.6)
    c.add_argument("--cost-model")
    c.set_defaults(func=cmd_report)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Load ``--config`` values as subcommand defaults so explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file")
    with open(argv[i + 1]) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed config file: {exc}") from exc
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    cmd = next((a for a in argv if a in sub.choices), None)
    if cmd is None:
        return argv
    sp = sub.choices[cmd]
    known = {a.dest for a in sp._actions}
    bad = set(k.replace("-", "_") for k in cfg) - known
    if bad:
        raise ValueError(f"unknown config keys: {sorted(bad)}")
    sp.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
    for a in sp._actions:
        if a.dest in cfg or a.dest.replace("_", "-") in cfg:
            a.required = False
    return argv


def dispatch(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"srfsc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
