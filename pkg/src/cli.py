"""
src/cli.py
Command-line front end: gen, analyze, sweep, report and defaults subcommands
Exit status: 0 success, 1 usage/configuration error, 2 model error
RELEVANT FILES: netgen.py, descriptor.py, costmodel.py, explorer.py, reports.py, config.py
"""

import os
import sys
import logging
import argparse
from typing import Dict, List

from rapidfuzz import process

from config import DESCRIPTIONS, REFERENCE_VALUES, ModelDefaults, load_defaults
from costmodel import network_cost
from descriptor import load_network, save_network
from errors import ConfigurationError, CoverageError, DescriptorError, ModelError
from explorer import (SweepGrid, alternative_comparison, full_grid, rows_from_frame,
                      rows_to_frame, run_sweep, takeaway_report, utilization_spread)
from mapping import PRESET_GBUF_KIB, ArrayConfig
from netgen import generate_mobilenet_v1, network_counts, scaling_rule_counts
from reports import (cost_frame, counts_frame, format_for, kinds_frame, mapping_frame, read_table,
                     write_json, write_table, write_workbook)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MODEL = 2

PRESET_NAMES = [str(s) for s in PRESET_GBUF_KIB] + [f"{s}x{s}" for s in PRESET_GBUF_KIB]


class UsageError(Exception):
    pass


class CliArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _csv_list(cast):
    def parse(value: str):
        try:
            return [cast(v) for v in value.split(',') if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list '{value}'")
    return parse


def parse_array(value: str) -> int:
    """'64' or '64x64' -> 64; unknown names get the closest preset suggested"""
    text = str(value).strip().lower()
    side = text.split('x')[0]
    if side.isdigit() and int(side) in PRESET_GBUF_KIB and text in PRESET_NAMES:
        return int(side)
    match = process.extractOne(text, PRESET_NAMES)
    hint = f" (did you mean '{match[0]}'?)" if match else ''
    raise ConfigurationError(f"unknown array preset '{value}'{hint}")


def resolve_defaults(args) -> ModelDefaults:
    return load_defaults(
        clock_hz=getattr(args, 'clock_hz', None),
        dram_bytes_per_cycle=getattr(args, 'bandwidth', None),
        word_bytes=getattr(args, 'word_bytes', None),
        alu_pj=getattr(args, 'alu_pj', None),
        sweep_workers=getattr(args, 'workers', None),
    )


def config_echo(args, defaults: ModelDefaults, **extra) -> Dict:
    echo = {'command': args.command, **defaults.model_dump()}
    for key in ('alpha', 'rho', 'g', 'array', 'rows', 'cols', 'format', 'double_memory'):
        if getattr(args, key, None) is not None:
            echo[key] = getattr(args, key)
    echo.update(extra)
    return echo


def cmd_gen(args) -> int:
    net = generate_mobilenet_v1(args.alpha, args.rho, args.g)
    counts = network_counts(net)
    if args.out:
        save_network(net, args.out)
    if args.table:
        config = {'command': 'gen', 'network': net.name}
        if format_for(args.table) == 'xlsx':
            write_workbook({'data': counts_frame(net), 'kinds': kinds_frame(net)}, args.table, config)
        else:
            stem, ext = os.path.splitext(args.table)
            write_table(counts_frame(net), args.table, config)
            write_table(kinds_frame(net), f"{stem}_kinds{ext}", config)

    line = f"MACs: {counts.macs / 1e6:.0f}M, Params: {counts.params / 1e6:.2f}M"
    print(line)
    rule = scaling_rule_counts(args.alpha, args.rho, args.g)
    rule_line = f"MACs: {rule.macs / 1e6:.0f}M, Params: {rule.params / 1e6:.2f}M"
    if rule_line != line:
        print(f"Scaling rule: {rule_line}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    defaults = resolve_defaults(args)
    net = load_network(args.network)
    if not net.layers:
        raise DescriptorError('layers', 'network has no layers')

    double_memory = args.double_memory if args.double_memory is not None else net.rho > 1
    array = ArrayConfig.preset(parse_array(args.array), double_memory=double_memory,
                               defaults=defaults)
    array = array.with_overrides(rows=args.rows, cols=args.cols)
    if args.rows or args.cols:
        array = array.with_overrides(label=f"{array.rows}x{array.cols}")

    cost = network_cost(net, array, defaults)
    summary = cost.summary()
    config = config_echo(args, defaults, network=net.name, array_config=array.to_dict())

    prefix = args.out_prefix or os.path.splitext(args.network)[0]
    fmt = args.format or 'csv'
    if fmt == 'xlsx':
        write_workbook({'mapping': mapping_frame(cost), 'cost': cost_frame(cost)},
                       f"{prefix}.xlsx", config)
    else:
        write_table(mapping_frame(cost), f"{prefix}_mapping.{fmt}", config, fmt)
        write_table(cost_frame(cost), f"{prefix}_cost.{fmt}", config, fmt)
    write_json({'config': config, 'summary': summary}, f"{prefix}_summary.json")

    print(f"{net.name} on {array.label}: avg utilization {summary['avg_utilization']:.3f}, "
          f"latency {summary['latency_ms']:.3f} ms, energy {summary['energy_mj']:.3f} mJ")
    return EXIT_OK


def cmd_sweep(args) -> int:
    defaults = resolve_defaults(args)
    if args.full:
        grid = full_grid()
    else:
        arrays = [parse_array(a) for a in args.arrays]
        grid = SweepGrid(arrays=arrays, g_values=args.g, alphas=args.alpha, rhos=args.rho)

    rows = run_sweep(grid, defaults)
    frame = rows_to_frame(rows)
    config = config_echo(args, defaults, grid={
        'arrays': grid.arrays, 'g_values': grid.g_values, 'alphas': grid.alphas,
        'rhos': grid.rhos, 'max_g': {str(k): v for k, v in grid.max_g.items()}})
    write_table(frame, args.out, config, args.format)

    for row in rows:
        if not row.ok:
            print(f"skipped {row.array_label} alpha={row.alpha:g} rho={row.rho:g} "
                  f"G={row.G}: {row.notice}")
    evaluated = sum(1 for r in rows if r.ok)
    print(f"{evaluated} rows evaluated, {len(rows) - evaluated} skipped -> {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    defaults = resolve_defaults(args)
    sweep_config, frame = read_table(args.sweep)
    rows = rows_from_frame(frame)
    report = takeaway_report(rows, defaults)

    payload = {
        'config': config_echo(args, defaults, sweep_config=sweep_config),
        'takeaways': report.to_dict(),
    }
    rhos = sorted({r.rho for r in rows if r.ok})
    payload['alpha_invariance'] = {
        'tolerance': defaults.alpha_tolerance,
        'max_spread': utilization_spread(rows),
        'by_rho': {f"rho={rho:g}": utilization_spread(rows, rhos=[rho]) for rho in rhos},
    }
    try:
        comparison = alternative_comparison(rows, defaults=defaults)
        payload['comparison'] = comparison.to_dict(orient='records')
    except CoverageError as e:
        payload['comparison'] = {'status': 'not_evaluable', 'reason': str(e)}

    out = args.out or f"{os.path.splitext(args.sweep)[0]}_report.json"
    write_json(payload, out)
    for check in report.checks:
        print(f"{check.check_id}: {check.status}")
    return EXIT_OK


def cmd_defaults(args) -> int:
    defaults = load_defaults()
    width = max(len(k) for k in DESCRIPTIONS)
    for key, value in defaults.model_dump().items():
        line = f"{key:<{width}}  {value!s:<12}  {DESCRIPTIONS[key]}"
        if key in REFERENCE_VALUES:
            nominal, note = REFERENCE_VALUES[key]
            line += f" [nominal {nominal:g} = {note}]"
        print(line)
    return EXIT_OK


def _add_hardware_flags(parser):
    parser.add_argument('--clock-hz', type=float, help='array clock (Hz)')
    parser.add_argument('--bandwidth', type=float, help='DRAM bytes per cycle')
    parser.add_argument('--word-bytes', type=int, help='bytes per word')
    parser.add_argument('--alu-pj', type=float, help='ALU energy per MAC (pJ)')


def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(prog='dnn-array-model',
                               description='Analytical cost model for grouped-conv DNNs on PE arrays')
    parser.add_argument('--log-level', default=os.getenv('LOG_LEVEL', 'INFO'))
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', help='generate a MobileNetV1 descriptor')
    gen.add_argument('--alpha', type=float, default=1.0)
    gen.add_argument('--rho', type=float, default=1.0)
    gen.add_argument('--g', type=int, default=1)
    gen.add_argument('--out', help='descriptor JSON path')
    gen.add_argument('--table', help='per-layer counts table (csv, json or xlsx by extension)')
    gen.set_defaults(handler=cmd_gen)

    analyze = sub.add_parser('analyze', help='map and cost a network on one array')
    analyze.add_argument('network', help='descriptor JSON path')
    analyze.add_argument('--array', default='64')
    analyze.add_argument('--rows', type=int)
    analyze.add_argument('--cols', type=int)
    analyze.add_argument('--double-memory', action=argparse.BooleanOptionalAction, default=None)
    analyze.add_argument('--out-prefix')
    analyze.add_argument('--format', choices=['csv', 'json', 'xlsx'])
    _add_hardware_flags(analyze)
    analyze.set_defaults(handler=cmd_analyze)

    sweep = sub.add_parser('sweep', help='sweep arrays x G x alpha x rho')
    sweep.add_argument('--arrays', type=_csv_list(str), default=['16', '32', '64', '128'])
    sweep.add_argument('--g', type=_csv_list(int), default=[1, 2, 4, 8, 16, 32])
    sweep.add_argument('--alpha', type=_csv_list(float), default=[1.0])
    sweep.add_argument('--rho', type=_csv_list(float), default=[1.0])
    sweep.add_argument('--full', action='store_true', help='use the full standard grid')
    sweep.add_argument('--workers', type=int)
    sweep.add_argument('--out', default='sweep.csv')
    sweep.add_argument('--format', choices=['csv', 'json', 'xlsx'])
    _add_hardware_flags(sweep)
    sweep.set_defaults(handler=cmd_sweep)

    report = sub.add_parser('report', help='takeaway checks and variant comparison')
    report.add_argument('sweep', help='sweep CSV or JSON path')
    report.add_argument('--out')
    report.set_defaults(handler=cmd_report)

    defaults = sub.add_parser('defaults', help='print the defaults table')
    defaults.set_defaults(handler=cmd_defaults)
    return parser


def main(argv: List[str] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )

    try:
        return args.handler(args)
    except (UsageError, ConfigurationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, OSError) as e:
        print(f"model error: {e}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == '__main__':
    sys.exit(main())
