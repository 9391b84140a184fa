"""Command line front end: design LUT sets, simulate BLER, inspect schedules.

Exit codes: 0 success, 2 configuration/usage error, 3 I/O error.
"""

import argparse
import json
import sys

from .codes import CodeConstructionError
from .listdec import ListConfig
from .lutdesign import LutDesignError, design_lutset, load_lutset, save_lutset
from .sim import DecoderSpec, SimResult, code_from_options, sweep, write_csv, write_json
from .tree import ALL_NODE_KINDS, build_tree, dump_schedule, parse_kinds, sc_tree, table_counts

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _add_code_options(parser):
    parser.add_argument("--n", type=int, required=True, help="block length (power of two)")
    parser.add_argument("--k", type=int, required=True, help="payload bits")
    parser.add_argument("--crc", type=int, default=0, help="CRC bits (default 0)")
    parser.add_argument("--rate-profile", default=None, metavar="FILE",
                        help="reliability sequence file (default: packaged 5G NR sequence)")
    parser.add_argument("--crc-poly", default=None, metavar="HEX",
                        help="CRC polynomial, e.g. 0x1021 (default: CCITT family)")


def _tree_for(args, code):
    if getattr(args, "schedule", "fast") == "sc":
        return sc_tree(code)
    kinds = ALL_NODE_KINDS if args.nodes is None else parse_kinds(args.nodes)
    return build_tree(code, kinds)


def _cmd_tree(args):
    code = code_from_options(args.n, args.k, args.crc, args.rate_profile,
                             args.crc_poly)
    tree = _tree_for(args, code)
    print("i_v\td\tkind\tN_v\tspan_start")
    for row in dump_schedule(tree):
        print("\t".join(str(v) for v in row))
    return EXIT_OK


def _cmd_tables(args):
    lutset = load_lutset(args.lut)
    decoding, translation = lutset.table_counts()
    print(f"variant {lutset.variant}, w={lutset.w}, "
          f"N={lutset.block_len}, K={lutset.payload_len}, CRC={lutset.crc_len}")
    print(f"decoding {decoding}, translation {translation}")
    return EXIT_OK


def _cmd_design(args):
    code = code_from_options(args.n, args.k, args.crc, args.rate_profile,
                             args.crc_poly)
    tree = _tree_for(args, code)
    lutset = design_lutset(code, tree, args.variant, args.ebn0, args.w,
                           grid_cells=args.grid)
    save_lutset(lutset, args.out)
    decoding, translation = lutset.table_counts()
    print(f"wrote {args.out}: decoding {decoding}, translation {translation}")
    return EXIT_OK


def _cmd_simulate(args):
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
        for key, value in overrides.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr):
                raise ValueError(f"unknown config key {key!r}")
            setattr(args, attr, value)
    if args.n is None or args.k is None:
        if args.decoder != "llr" and args.lut:
            lutset = load_lutset(args.lut)
            args.n = lutset.block_len
            args.k = lutset.payload_len
            args.crc = lutset.crc_len
        else:
            raise ValueError("--n and --k are required (or use --lut / --config)")
    code = code_from_options(args.n, args.k, args.crc, args.rate_profile,
                             args.crc_poly)
    ListConfig(list_size=args.list, metric_mode=args.metric)  # validate early
    nodes = args.nodes if args.nodes is not None else "r0,r1,rep,spc"
    spec = DecoderSpec(
        family=args.decoder,
        schedule=args.schedule,
        metric_mode=args.metric,
        list_size=args.list,
        node_kinds=nodes,
        lut_path=args.lut or "",
    )
    points = [float(tok) for tok in str(args.ebn0_list).split(",") if tok != ""]
    if not points:
        result = SimResult(code.block_len, code.payload_len, code.crc_len, spec,
                           args.seed, "empty")
    else:
        result = sweep(code, spec, points, seed=args.seed, max_frames=args.max_frames,
                       min_errors=args.min_errors, workers=args.workers)
    if args.out:
        write_csv(result, args.out)
    if args.json_out:
        write_json(result, args.json_out)
    for p in result.points:
        print(f"{p.ebn0_db:g} dB: bler {p.bler:.4g} ({p.block_errors}/{p.frames})")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="fapolar",
                                     description="polar code list decoding toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_tree = sub.add_parser("tree", help="print the pruned decode schedule as TSV")
    _add_code_options(p_tree)
    p_tree.add_argument("--nodes", default=None,
                        help='enabled special nodes, e.g. "r0,rep" (default all)')
    p_tree.set_defaults(func=_cmd_tree)

    p_tables = sub.add_parser("tables", help="print table counts of a LUT file")
    p_tables.add_argument("--lut", required=True, metavar="FILE")
    p_tables.set_defaults(func=_cmd_tables)

    p_design = sub.add_parser("design", help="design a LUT set offline")
    _add_code_options(p_design)
    p_design.add_argument("--variant", choices=("ib", "msib"), required=True)
    p_design.add_argument("--schedule", choices=("sc", "fast"), default="fast")
    p_design.add_argument("--nodes", default=None,
                          help="special nodes for the fast schedule (default all)")
    p_design.add_argument("--ebn0", type=float, required=True,
                          help="design Eb/N0 in dB")
    p_design.add_argument("--w", type=int, default=4, help="message bit width")
    p_design.add_argument("--grid", type=int, default=2000,
                          help="channel quantizer grid cells")
    p_design.add_argument("--out", required=True, metavar="FILE")
    p_design.set_defaults(func=_cmd_design)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo BLER sweep")
    p_sim.add_argument("--config", default=None, metavar="FILE",
                       help="JSON file with any of the other options")
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument("--k", type=int, default=None)
    p_sim.add_argument("--crc", type=int, default=0)
    p_sim.add_argument("--rate-profile", default=None, metavar="FILE")
    p_sim.add_argument("--crc-poly", default=None, metavar="HEX")
    p_sim.add_argument("--decoder", choices=("llr", "ib", "msib"), default="llr")
    p_sim.add_argument("--lut", default=None, metavar="FILE")
    p_sim.add_argument("--schedule", choices=("sc", "fast"), default="fast")
    p_sim.add_argument("--metric", choices=("exact", "approx"), default="approx")
    p_sim.add_argument("--list", type=int, default=8)
    p_sim.add_argument("--nodes", default=None)
    p_sim.add_argument("--ebn0-list", default="", help="comma separated dB values")
    p_sim.add_argument("--max-frames", type=int, default=10000)
    p_sim.add_argument("--min-errors", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.add_argument("--out", default=None, metavar="CSV")
    p_sim.add_argument("--json-out", default=None, metavar="JSON")
    p_sim.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CodeConstructionError, LutDesignError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
