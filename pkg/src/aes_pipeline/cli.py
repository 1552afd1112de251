"""Command-line front end.

Subcommands: encrypt, decrypt, model, simulate, tables, sweep.

Exit codes: 0 success (and audit clean), 1 usage error, 2 table audit
mismatch, 3 internal cross-check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import aes_core, paper_tables, sched_sim
from .cost_model import (
    DECRYPT, ENCRYPT, ConfigError, PipelineConfig, flowshop_makespan,
    metrics, paper_pipeline_time, sequential_time, stage_times,
)
from .timing import CostParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_AUDIT = 2
EXIT_CROSSCHECK = 3

MODE_NAMES = {"enc": ENCRYPT, "dec": DECRYPT}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt_exact(x: Fraction) -> str:
    """Exact rendering: integer, terminating decimal, or num/den."""
    if x.denominator == 1:
        return str(x.numerator)
    n = x.denominator
    twos = fives = 0
    while n % 2 == 0:
        n //= 2
        twos += 1
    while n % 5 == 0:
        n //= 5
        fives += 1
    if n == 1:
        digits = max(twos, fives)
        scaled = x.numerator * 10 ** digits // x.denominator
        sign = "-" if scaled < 0 else ""
        s = str(abs(scaled)).rjust(digits + 1, "0")
        return f"{sign}{s[:-digits]}.{s[-digits:]}"
    return f"{x.numerator}/{x.denominator}"


def rational_pair(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


def _parse_hex(name: str, text: str) -> bytes:
    t = text.lower()
    if len(t) != 32 or any(c not in "0123456789abcdef" for c in t):
        raise UsageError(f"argument {name}: expected 32 hex characters, got {text!r}")
    return bytes.fromhex(t)


def _parse_rational(name: str, text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"argument {name}: not a rational number: {text!r}")
    if value < 0:
        raise UsageError(f"argument {name}: must be non-negative")
    return value


def _config_from_args(args) -> PipelineConfig:
    params = CostParams(t_ov=_parse_rational("--t-ov", args.t_ov),
                        t_byte_sub=_parse_rational("--t-byte-sub", args.t_byte_sub))
    return PipelineConfig(mode=MODE_NAMES[args.mode],
                          num_blocks=args.blocks_count,
                          pe_per_stage=args.pe,
                          inner_parallel=args.inner_parallel,
                          params=params)


def _write_out(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- encrypt / decrypt -----------------------------------------------------

def cmd_cipher(args, encrypting: bool) -> int:
    key = _parse_hex("key", args.key)
    round_keys = aes_core.key_expand(key)
    op = aes_core.encrypt_block if encrypting else aes_core.decrypt_block
    for i, block_hex in enumerate(args.blocks):
        block = _parse_hex(f"block #{i + 1}", block_hex)
        print(op(block, round_keys).hex())
    return EXIT_OK


# --- model ------------------------------------------------------------------

def cmd_model(args) -> int:
    config = _config_from_args(args)
    params = config.params
    seq = sequential_time(config.mode, config.num_blocks, params)
    st = stage_times(config.mode, config.pe_per_stage, config.inner_parallel,
                     params)
    pipe = paper_pipeline_time(config)
    flow = flowshop_makespan(config)

    seq_base = metrics(seq, pipe, config.pe_per_stage)
    single_pe = PipelineConfig(config.mode, config.num_blocks, 1, False, params)
    pipe_base = metrics(paper_pipeline_time(single_pe), pipe,
                        config.pe_per_stage)

    def xu(tq) -> Fraction:
        return params.xor_units(tq)

    if args.format == "json":
        doc = {
            "mode": config.mode, "L": config.num_blocks,
            "M_r": config.pe_per_stage,
            "inner_parallel": config.inner_parallel,
            "t_ov": rational_pair(params.t_ov),
            "sequential_txor": rational_pair(xu(seq)),
            "stage_times_txor": {
                "initial": rational_pair(xu(st.t_initial)),
                "standard": rational_pair(xu(st.t_standard)),
                "final": rational_pair(xu(st.t_final)),
            },
            "paper_pipeline_txor": rational_pair(xu(pipe)),
            "flowshop_txor": rational_pair(xu(flow)),
            "vs_sequential": {
                "speedup": rational_pair(seq_base.speedup),
                "efficiency": rational_pair(seq_base.efficiency),
                "improvement": rational_pair(seq_base.improvement),
            },
            "vs_single_pe_pipeline": {
                "speedup": rational_pair(pipe_base.speedup),
                "efficiency": rational_pair(pipe_base.efficiency),
                "improvement": rational_pair(pipe_base.improvement),
            },
        }
        print(json.dumps(doc, indent=2, sort_keys=True))
        return EXIT_OK

    mode_label = "encrypt" if config.mode == ENCRYPT else "decrypt"
    print(f"mode={mode_label} L={config.num_blocks} M_r={config.pe_per_stage} "
          f"inner_parallel={'yes' if config.inner_parallel else 'no'} "
          f"t_ov={fmt_exact(params.t_ov)}")
    if config.outside_published_range:
        print("warning: PE count outside the published per-stage range; "
              "formulas evaluated literally")
    print(f"sequential time:       {fmt_exact(xu(seq))} T_XOR")
    print(f"stage times (T_XOR):   initial={fmt_exact(xu(st.t_initial))} "
          f"standard={fmt_exact(xu(st.t_standard))} "
          f"final={fmt_exact(xu(st.t_final))}")
    print(f"pipeline time (closed form): {fmt_exact(xu(pipe))} T_XOR")
    print(f"flow-shop makespan:          {fmt_exact(xu(flow))} T_XOR")
    for label, m in (("vs sequential", seq_base),
                     ("vs single-PE pipeline", pipe_base)):
        print(f"{label}: speedup={fmt_exact(m.speedup)} ({float(m.speedup):.2f})"
              f" efficiency={fmt_exact(m.efficiency)} ({float(m.efficiency):.2f})"
              f" improvement={float(m.improvement) * 100:.2f}%")
    return EXIT_OK


# --- simulate ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    config = _config_from_args(args)
    params = config.params
    functional = args.functional
    if functional:
        if not args.key or not args.blocks:
            raise UsageError("--functional requires --key and --blocks")
        if len(args.blocks) != config.num_blocks:
            raise UsageError(
                f"--functional needs exactly {config.num_blocks} blocks, "
                f"got {len(args.blocks)}")
        key = _parse_hex("--key", args.key)
        blocks = [_parse_hex(f"--blocks #{i + 1}", b)
                  for i, b in enumerate(args.blocks)]

    collect = bool(args.trace)
    try:
        if functional:
            result, outputs = sched_sim.simulate_functional(
                config, blocks, key, collect_trace=collect)
        else:
            result = sched_sim.simulate(config, collect_trace=collect)
    except sched_sim.CrossCheckError as exc:
        print(f"functional: FAILED ({exc})", file=sys.stderr)
        return EXIT_CROSSCHECK

    analytic = flowshop_makespan(config)
    agree = result.makespan == analytic
    xu = params.xor_units
    print(f"makespan: {fmt_exact(xu(result.makespan))} T_XOR")
    for s in range(len(result.pe_utilization)):
        utils = " ".join(f"{float(u) * 100:.1f}%" for u in result.pe_utilization[s])
        print(f"stage {s:2d}: busy={fmt_exact(xu(result.per_stage_busy[s]))} T_XOR"
              f"  pe_utilization: {utils}")
    print(f"analytical makespan check: "
          f"{'PASS' if agree else 'FAIL'} "
          f"(flow-shop {fmt_exact(xu(analytic))} T_XOR)")
    if functional:
        print("functional: OK (reference cipher match)")
        for out in result.outputs:
            print(out.hex())
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(sched_sim.format_trace(result))
    if not agree:
        return EXIT_CROSSCHECK
    return EXIT_OK


# --- tables -------------------------------------------------------------------

def _tables_markdown(cells) -> str:
    lines = []
    for tid in paper_tables.TABLE_ORDER:
        table_cells = [c for c in cells if c.table == tid]
        lines.append(f"## Table {tid}")
        lines.append("")
        lines.append("| row | column | published | recomputed | status | note |")
        lines.append("| --- | --- | --- | --- | --- | --- |")
        for c in table_cells:
            lines.append(f"| {c.row} | {c.column} | {c.paper_text} | "
                         f"{fmt_exact(c.model_value)} | {c.status} | {c.note} |")
        lines.append("")
    return "\n".join(lines) + "\n"


def _tables_csv(cells) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["table", "row", "column", "published", "recomputed",
                     "status", "note"])
    for c in cells:
        writer.writerow([c.table, c.row, c.column, c.paper_text,
                         fmt_exact(c.model_value), c.status, c.note])
    return buf.getvalue()


def _tables_json(cells) -> str:
    doc = [{"table": c.table, "row": c.row, "column": c.column,
            "published": c.paper_text,
            "recomputed": rational_pair(c.model_value),
            "status": c.status, "note": c.note} for c in cells]
    return json.dumps(doc, indent=2) + "\n"


def cmd_tables(args) -> int:
    cells = paper_tables.build_audit()
    render = {"markdown": _tables_markdown, "csv": _tables_csv,
              "json": _tables_json}[args.format]
    text = render(cells)
    ok, unexpected, missing = paper_tables.audit_closure(cells)
    summary = []
    if ok:
        summary.append("audit: clean (errata set matches the documented catalog)")
    else:
        summary.append("audit: MISMATCH")
        for key in sorted(unexpected):
            summary.append(f"  unexpected errata: {key}")
        for key in sorted(missing):
            summary.append(f"  vanished errata: {key}")
    if args.format == "markdown":
        text += "\n".join(summary) + "\n"
        _write_out(text, args.out)
    else:
        _write_out(text, args.out)
        print("\n".join(summary), file=sys.stderr)
    return EXIT_OK if ok else EXIT_AUDIT


# --- sweep --------------------------------------------------------------------

SWEEP_COLUMNS = ["mode", "L", "M_r", "inner_parallel", "t_ov", "seq_txor",
                 "paper_pipeline_txor", "flowshop_txor", "speedup",
                 "efficiency", "improvement"]


def _sweep_rows(args) -> list[dict]:
    t_ov = _parse_rational("--t-ov", args.t_ov)
    params = CostParams(t_ov=t_ov)
    inner_flags = {"on": (True,), "off": (False,),
                   "both": (False, True)}[args.inner_parallel]
    rows = []
    for mode_name in sorted(set(args.modes)):
        mode = MODE_NAMES[mode_name]
        for L in sorted(set(args.blocks_counts)):
            for m_r in sorted(set(args.pes)):
                for inner in inner_flags:
                    try:
                        config = PipelineConfig(mode, L, m_r, inner, params)
                    except ConfigError as exc:
                        raise UsageError(str(exc))
                    seq = sequential_time(mode, L, params)
                    pipe = paper_pipeline_time(config)
                    flow = flowshop_makespan(config)
                    m = metrics(seq, pipe, m_r)
                    row = {
                        "mode": mode_name, "L": L, "M_r": m_r,
                        "inner_parallel": inner,
                        "t_ov": t_ov,
                        "seq_txor": params.xor_units(seq),
                        "paper_pipeline_txor": params.xor_units(pipe),
                        "flowshop_txor": params.xor_units(flow),
                        "speedup": m.speedup,
                        "efficiency": m.efficiency,
                        "improvement": m.improvement,
                    }
                    if args.simulate:
                        sim = sched_sim.simulate(config)
                        row["simulated_makespan_txor"] = params.xor_units(
                            sim.makespan)
                    rows.append(row)
    return rows


def _sweep_value_str(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return fmt_exact(value)
    return str(value)


def cmd_sweep(args) -> int:
    rows = _sweep_rows(args)
    columns = list(SWEEP_COLUMNS)
    if args.simulate:
        columns.append("simulated_makespan_txor")
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_sweep_value_str(row[c]) for c in columns])
        text = buf.getvalue()
    elif args.format == "json":
        doc = []
        for row in rows:
            item = {}
            for c in columns:
                v = row[c]
                item[c] = rational_pair(v) if isinstance(v, Fraction) else v
            doc.append(item)
        text = json.dumps(doc, indent=2) + "\n"
    else:
        lines = ["| " + " | ".join(columns) + " |",
                 "| " + " | ".join("---" for _ in columns) + " |"]
        for row in rows:
            lines.append("| " + " | ".join(_sweep_value_str(row[c])
                                           for c in columns) + " |")
        text = "\n".join(lines) + "\n"
    try:
        _write_out(text, args.out)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


# --- parser -------------------------------------------------------------------

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("enc", "dec"), required=True)
    p.add_argument("--blocks-count", type=int, required=True, metavar="L")
    p.add_argument("--pe", type=int, default=1, metavar="M_R",
                   help="processing elements per stage")
    p.add_argument("--inner-parallel", action="store_true",
                   help="parallelize key addition and column mixing inside each stage")
    p.add_argument("--t-ov", default="0", metavar="RATIONAL",
                   help="combine overhead per element (shift units)")
    p.add_argument("--t-byte-sub", default="0", metavar="RATIONAL",
                   help="byte-substitution cost per round (shift units)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aes-pipeline",
                     description="AES-128 cipher, pipeline cost model, "
                                 "simulator, and published-table audit")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("encrypt", "encrypt blocks (hex in, hex out)"),
                            ("decrypt", "decrypt blocks (hex in, hex out)")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("key", help="16-byte key, 32 hex characters")
        p.add_argument("blocks", nargs="+", help="16-byte blocks, 32 hex chars each")

    p = sub.add_parser("model", help="analytical timing for one configuration")
    _add_config_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("simulate", help="discrete-event pipeline simulation")
    _add_config_flags(p)
    p.add_argument("--functional", action="store_true",
                   help="carry real byte values and check them against the cipher")
    p.add_argument("--key", help="key for --functional (32 hex chars)")
    p.add_argument("--blocks", nargs="+", help="input blocks for --functional")
    p.add_argument("--trace", metavar="PATH",
                   help="write the line-delimited event trace here")

    p = sub.add_parser("tables",
                       help="regenerate the published tables and audit them")
    p.add_argument("--format", choices=("markdown", "csv", "json"),
                   default="markdown")
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("sweep", help="evaluate a grid of configurations")
    p.add_argument("--modes", nargs="+", choices=("enc", "dec"), required=True)
    p.add_argument("--blocks-counts", nargs="+", type=int, required=True,
                   metavar="L")
    p.add_argument("--pes", nargs="+", type=int, required=True, metavar="M_R")
    p.add_argument("--inner-parallel", choices=("on", "off", "both"),
                   default="off")
    p.add_argument("--t-ov", default="0", metavar="RATIONAL")
    p.add_argument("--simulate", action="store_true",
                   help="also run the simulator at every point")
    p.add_argument("--format", choices=("csv", "json", "markdown"),
                   default="csv")
    p.add_argument("--out", metavar="PATH")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "encrypt":
            return cmd_cipher(args, encrypting=True)
        if args.command == "decrypt":
            return cmd_cipher(args, encrypting=False)
        if args.command == "model":
            return cmd_model(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "tables":
            return cmd_tables(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        raise UsageError(f"unknown command {args.command!r}")
    except (UsageError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
