"""Command line front end: ``bmst-tbcc <command> [options]``.

Options can also come from a ``key=value`` file given with ``--config``;
keys are option names without the leading dashes (``l-max`` or ``l_max``).
Flags on the command line win over the file.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import ensemble_wef, fer_bound_check
from .bmst import BmstConfig, DecoderConfig, bmst_decode, bmst_encode
from .channel import ChannelModel, QuadratureError, reference_stats
from .experiment import ExperimentConfig, emit_csv, format_csv, run_experiment
from .gf2 import bits_to_str, str_to_bits
from .learn import REFERENCE_THRESHOLDS, Policy, ThresholdTable, learn_table
from .tbcc import DEFAULT_GENERATORS, EnumerationTooLarge, TbccCode, weight_enumerator


class ConfigError(Exception):
    pass


def float_list(text: str) -> list[float]:
    return [float(x) for x in str(text).replace(" ", "").split(",") if x]


def read_config_file(path) -> dict[str, str]:
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{no}: expected key=value")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def _code_opts(p):
    p.add_argument("--generators", default=",".join(DEFAULT_GENERATORS),
                   help="binary generator strings, D^0 first (default %(default)s)")
    p.add_argument("--k", type=int, default=32, help="information bits per sub-frame")


def _bmst_opts(p):
    _code_opts(p)
    p.add_argument("--L", type=int, default=49, help="data sub-frames per frame")
    p.add_argument("--r-seed", type=int, default=1, help="seed of the random transform R")


def _io_opts(p):
    p.add_argument("--input", "-i", help="input file (default stdin)")
    p.add_argument("--output", "-o", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bmst-tbcc", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value option file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.commands = sub.choices

    p = sub.add_parser("encode", help="info words (L lines of k bits) -> L+1 sub-frames")
    _bmst_opts(p)
    _io_opts(p)

    p = sub.add_parser("decode", help="L+1 lines of comma separated reals -> L info words")
    _bmst_opts(p)
    _io_opts(p)
    p.add_argument("--threshold", type=float, required=False)
    p.add_argument("--l-max", type=int, default=64)
    p.add_argument("--snr-db", type=float, required=False)
    p.add_argument("--log", help="write per-sub-frame list size and metric to this CSV")

    p = sub.add_parser("simulate", help="Monte Carlo error rates and list sizes")
    _bmst_opts(p)
    p.add_argument("--snr-db", type=float_list, default=[2.0, 2.5, 3.0, 3.5, 4.0])
    p.add_argument("--thresholds",
                   help="comma separated, one per SNR; 'A' or 'B' for the published sets; "
                        "omit to look them up in --threshold-table")
    p.add_argument("--threshold-table", help="CSV written by the learn command")
    p.add_argument("--l-max", type=int, default=64)
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--max-errors", type=int, default=None,
                   help="stop a point early once this many sub-frames were wrong")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--bounds", action="store_true", help="print error-rate bound checks to stderr")
    p.add_argument("--output", "-o", help="CSV path (default stdout)")

    p = sub.add_parser("learn", help="learn thresholds from labelled soft metrics")
    _bmst_opts(p)
    p.add_argument("--snr-db", type=float_list, default=[2.0, 2.5, 3.0, 3.5, 4.0])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--policy", default="quantile:0.99",
                   help="quantile:A | midpoint:A | accept:A (default %(default)s)")
    p.add_argument("--l-max", type=int, default=64)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--output", "-o", help="threshold table CSV (default stdout)")

    p = sub.add_parser("wef", help="weight enumerator A_d and ensemble B_d")
    _code_opts(p)
    p.add_argument("--output", "-o")

    p = sub.add_parser("mi", help="BPSK/AWGN mutual information and random-word EDF mean")
    p.add_argument("--snr-db", type=float_list, required=True)
    p.add_argument("--output", "-o")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            values = read_config_file(known.config)
        except ConfigError as exc:
            parser.error(str(exc))
        dests = set()
        for sub in parser.commands.values():
            mine = {}
            for a in sub._actions:
                if a.dest not in values:
                    continue
                dests.add(a.dest)
                a.required = False
                val = values[a.dest]
                if isinstance(a, argparse._StoreTrueAction):
                    val = val.lower() in ("1", "true", "yes", "on")
                mine[a.dest] = val
            sub.set_defaults(**mine)
        unknown = sorted(set(values) - dests)
        if unknown:
            parser.error(f"unknown keys in {known.config}: {', '.join(unknown)}")
    return parser.parse_args(argv)


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _read_lines(path) -> list[str]:
    text = Path(path).read_text() if path else sys.stdin.read()
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


def _bmst_cfg(args) -> BmstConfig:
    return BmstConfig(TbccCode(args.generators, args.k), args.L, args.r_seed)


def cmd_encode(args):
    cfg = _bmst_cfg(args)
    words = [str_to_bits(s) for s in _read_lines(args.input)]
    frames = bmst_encode(cfg, words)
    out = _open_out(args.output)
    for c in frames:
        out.write(bits_to_str(c) + "\n")
    out.flush()


def cmd_decode(args):
    if args.threshold is None or args.snr_db is None:
        raise ConfigError("decode needs --threshold and --snr-db")
    cfg = _bmst_cfg(args)
    dcfg = DecoderConfig(args.threshold, args.l_max, ChannelModel.from_snr_db(args.snr_db))
    y = [np.array(float_list(s)) for s in _read_lines(args.input)]
    words, flog = bmst_decode(cfg, dcfg, y)
    out = _open_out(args.output)
    for u in words:
        out.write(bits_to_str(u) + "\n")
    out.flush()
    if args.log:
        with open(args.log, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "list_size", "m_max", "passed_threshold"])
            for t, s in enumerate(flog.subframes):
                w.writerow([t, s.list_size, repr(s.m_max), int(s.passed_threshold)])


def _resolve_thresholds(args, snrs) -> tuple[list[float], str]:
    if args.thresholds:
        key = args.thresholds.strip().upper()
        if key in REFERENCE_THRESHOLDS:
            table = dict(zip((2.0, 2.5, 3.0, 3.5, 4.0), REFERENCE_THRESHOLDS[key]))
            missing = [s for s in snrs if s not in table]
            if missing:
                raise ConfigError(f"published set {key} has no threshold for SNR {missing}")
            return [table[s] for s in snrs], f"preset-{key}"
        return float_list(args.thresholds), "given"
    if args.threshold_table:
        table = ThresholdTable.read(args.threshold_table)
        try:
            return [table.lookup(s, args.k, args.l_max) for s in snrs], "table"
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from exc
    raise ConfigError("simulate needs --thresholds or --threshold-table")


def cmd_simulate(args):
    thresholds, policy = _resolve_thresholds(args, args.snr_db)
    cfg = ExperimentConfig(
        snr_db=args.snr_db, thresholds=thresholds, generators=args.generators, k=args.k,
        L=args.L, l_max=args.l_max, frames=args.frames, master_seed=args.master_seed,
        r_seed=args.r_seed, max_errors=args.max_errors, noiseless=args.noiseless,
        workers=args.workers, policy=policy, output=args.output,
    )

    def flush(result):
        if args.output:
            emit_csv(result, args.output)

    result = run_experiment(cfg, on_point=flush)
    flush(result)
    if not args.output:
        sys.stdout.write(format_csv(result))
    if args.bounds:
        for pt in result.points:
            for line in fer_bound_check(pt.counters).lines():
                print(f"[{pt.snr_db} dB] {line}", file=sys.stderr)
    return 130 if result.partial else 0


def cmd_learn(args):
    cfg = _bmst_cfg(args)
    table = learn_table(cfg, args.snr_db, args.trials, Policy.parse(args.policy),
                        args.l_max, args.master_seed)
    if args.output:
        table.write(args.output)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(ThresholdTable.FIELDS)
        for snr, k, lm, T, pol in table.rows():
            w.writerow([repr(snr), k, lm, repr(T), pol])


def cmd_wef(args):
    code = TbccCode(args.generators, args.k)
    A = weight_enumerator(code)
    B = ensemble_wef(A, code.n, code.k)
    out = _open_out(args.output)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["d", "A_d", "B_d"])
    for d in range(B.size):
        w.writerow([d, int(A[d]) if d < A.size else 0, repr(float(B[d]))])
    out.flush()


def cmd_mi(args):
    out = _open_out(args.output)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["snr_db", "mi", "d_rand_mean"])
    for snr in args.snr_db:
        mi, d_rand = reference_stats(ChannelModel.from_snr_db(snr))
        w.writerow([repr(snr), f"{mi:.6f}", f"{d_rand:.6f}"])
    out.flush()


COMMANDS = {
    "encode": cmd_encode, "decode": cmd_decode, "simulate": cmd_simulate,
    "learn": cmd_learn, "wef": cmd_wef, "mi": cmd_mi,
}


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args) or 0
    except (ConfigError, ValueError, EnumerationTooLarge, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
