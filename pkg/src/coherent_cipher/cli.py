"""Command-line front end.

Subcommands write CSV (or a flat ``key = value`` report) to ``--out``
(``-`` for standard output). Exit codes: 0 success, 1 numerical failure or
failed validation, 2 invalid flags.
"""
import argparse
import contextlib
import math
import sys

from . import fock_oracle, helstrom
from .errors import ConvergenceError, OracleDimensionError, UnsupportedConfigurationError
from .helstrom import Priors
from .keystream import DEFAULT_TAPS, bits_per_index
from .protocol_sim import SimConfig, run_session
from .states import EncodingKind

DEFAULT_NBARS = (1.0, 10.0, 100.0, 1000.0)
VALIDATE_NBARS = (0.25, 1.0, 2.0)
VALIDATE_THRESHOLD = 1e-8


def _fmt(x):
    return format(float(x), ".17g")


def _float_list(values):
    out = []
    for v in values:
        for part in str(v).split(","):
            part = part.strip()
            if not part:
                continue
            try:
                x = float(part)
            except ValueError:
                raise argparse.ArgumentTypeError(f"not a number: {part!r}") from None
            if not math.isfinite(x) or x < 0:
                raise argparse.ArgumentTypeError(f"values must be finite and >= 0, got {part}")
            out.append(x)
    return out


def _int_list(values):
    out = []
    for v in values:
        out.extend(int(p) for p in str(v).split(",") if p.strip())
    return out


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def build_parser():
    parser = argparse.ArgumentParser(
        prog="coherent-cipher",
        description="Error probabilities and Monte Carlo runs for the keyed M-ary coherent-state cipher.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    encodings = [e.value for e in EncodingKind]

    p = sub.add_parser("pe-curve", help="eavesdropper and receiver error versus M")
    p.add_argument("--nbar", nargs="+", default=[",".join(map(str, DEFAULT_NBARS))])
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, default=200)
    p.add_argument("--m-step", type=int, default=1)
    p.add_argument("--encoding", choices=encodings, default="phase")
    p.add_argument("--p0", type=float, default=0.5)
    p.add_argument("--rank-tol", type=float, default=helstrom.DEFAULT_RANK_TOL)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-")

    p = sub.add_parser("bob-error", help="key holder's closed-form error")
    p.add_argument("--nbar", nargs="+", required=True)
    p.add_argument("--out", default="-")

    p = sub.add_parser("simulate", help="Monte Carlo session with heterodyne receivers")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--nbar", type=float, required=True)
    p.add_argument("--bits", type=int, default=100000)
    p.add_argument("--loss-db", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lfsr-seed", default="ace1", help="hex register seed")
    p.add_argument("--lfsr-taps", nargs="+", default=[",".join(map(str, DEFAULT_TAPS))])
    p.add_argument("--encoding", choices=encodings, default="phase")
    p.add_argument("--p0", type=float, default=0.5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-")

    p = sub.add_parser("validate", help="Gram-subspace engine versus the Fock-space oracle")
    p.add_argument("--max-m", type=int, default=8)
    p.add_argument("--nbar", nargs="+", default=[",".join(map(str, VALIDATE_NBARS))])
    p.add_argument("--tail-tol", type=float, default=fock_oracle.DEFAULT_TAIL_TOL)
    p.add_argument("--encoding", choices=encodings, default="phase")
    p.add_argument("--out", default="-")
    return parser


def _priors(parser, p0):
    if not 0.0 <= p0 <= 1.0:
        parser.error(f"--p0 must lie in [0, 1], got {p0}")
    return Priors.from_p0(p0)


def _nbars(parser, raw):
    try:
        values = _float_list(raw)
    except argparse.ArgumentTypeError as exc:
        parser.error(f"--nbar: {exc}")
    if not values:
        parser.error("--nbar needs at least one value")
    return values


def cmd_pe_curve(args, parser):
    nbars = _nbars(parser, args.nbar)
    if args.m_min < 1:
        parser.error("--m-min must be >= 1")
    if args.m_max < args.m_min:
        parser.error(f"--m-max ({args.m_max}) must be >= --m-min ({args.m_min})")
    if args.m_step < 1:
        parser.error("--m-step must be >= 1")
    if not 0.0 < args.rank_tol < 1.0:
        parser.error("--rank-tol must lie in (0, 1)")
    priors = _priors(parser, args.p0)
    rows = helstrom.pe_curve(
        range(args.m_min, args.m_max + 1, args.m_step),
        nbars,
        args.encoding,
        priors,
        args.rank_tol,
        workers=max(1, args.workers),
    )
    with _output(args.out) as out:
        out.write("m,nbar,pe_eve,pe_bob,rank\n")
        for r in rows:
            out.write(f"{r.m},{_fmt(r.nbar)},{_fmt(r.pe_eve)},{_fmt(r.pe_bob)},{r.rank}\n")
    return 0


def cmd_bob_error(args, parser):
    nbars = _nbars(parser, args.nbar)
    with _output(args.out) as out:
        out.write("nbar,pe_bob\n")
        for nb in nbars:
            out.write(f"{_fmt(nb)},{_fmt(helstrom.bob_error(nb))}\n")
    return 0


def cmd_simulate(args, parser):
    try:
        bits_per_index(args.m)
    except UnsupportedConfigurationError as exc:
        parser.error(f"--m: {exc}")
    if args.bits < 1:
        parser.error("--bits must be >= 1")
    if not math.isfinite(args.nbar) or args.nbar < 0:
        parser.error("--nbar must be >= 0")
    if not math.isfinite(args.loss_db) or args.loss_db < 0:
        parser.error("--loss-db must be >= 0")
    if not 0 <= args.seed < 2**64:
        parser.error("--seed must be a 64-bit unsigned integer")
    try:
        taps = _int_list(args.lfsr_taps)
        lfsr_seed = int(args.lfsr_seed, 16)
        config = SimConfig(
            m=args.m,
            nbar=args.nbar,
            bits=args.bits,
            encoding=args.encoding,
            loss_db=args.loss_db,
            seed=args.seed,
            lfsr_seed=lfsr_seed,
            lfsr_taps=tuple(taps),
            priors=_priors(parser, args.p0),
        )
    except ValueError as exc:
        parser.error(str(exc))
    report = run_session(config, workers=max(1, args.workers))
    with _output(args.out) as out:
        out.write(report.to_text())
        out.write("\n")
        out.write(report.csv_header() + "\n")
        out.write(report.csv_row() + "\n")
    return 0


def cmd_validate(args, parser):
    nbars = _nbars(parser, args.nbar)
    if args.max_m < 1:
        parser.error("--max-m must be >= 1")
    if not 0.0 < args.tail_tol < 1.0:
        parser.error("--tail-tol must lie in (0, 1)")
    for nb in nbars:
        cutoff, dim = fock_oracle.required_dimension(nb, args.encoding, args.tail_tol)
        if dim > fock_oracle.MAX_DIMENSION:
            parser.error(
                f"nbar={_fmt(nb)} needs cutoff {cutoff}, i.e. Fock dimension {dim} "
                f"> {fock_oracle.MAX_DIMENSION}"
            )
    ok = True
    with _output(args.out) as out:
        out.write("m,nbar,pe_gram,pe_oracle,abs_diff,cutoff,status\n")
        for nb in nbars:
            for m in range(1, args.max_m + 1):
                gram_pe = helstrom.eve_error(m, nb, args.encoding).pe
                oracle = fock_oracle.oracle_min_error(m, nb, args.encoding, tail_tol=args.tail_tol)
                diff = abs(gram_pe - oracle.pe)
                good = diff < VALIDATE_THRESHOLD
                ok &= good
                out.write(
                    f"{m},{_fmt(nb)},{_fmt(gram_pe)},{_fmt(oracle.pe)},{_fmt(diff)},"
                    f"{oracle.cutoff},{'pass' if good else 'FAIL'}\n"
                )
        out.write(f"# {'PASS' if ok else 'FAIL'}: all |gram - oracle| < {VALIDATE_THRESHOLD:g}\n")
    return 0 if ok else 1


COMMANDS = {
    "pe-curve": cmd_pe_curve,
    "bob-error": cmd_bob_error,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except (ConvergenceError, FloatingPointError, OracleDimensionError) as exc:
        print(f"coherent-cipher: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
