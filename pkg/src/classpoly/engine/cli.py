"""Command line interface: ``classpoly -D -23``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import Optional, Sequence

from ..classgroup import DiscriminantError, check_discriminant, class_group
from ..heightbound import PrecisionPolicy, asymptotic_bound, heuristic_estimate, proven_bound, working_precision
from .pipeline import STRATEGIES, RetriesExhaustedError, compute_class_polynomial
from .verify import DEFAULT_MIN_BITS, DEFAULT_TRIALS, Verdict, all_consistent, verify_polynomial

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ROUNDING = 3
EXIT_VERIFY = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _discriminant(text: str) -> int:
    try:
        D = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    try:
        return check_discriminant(D)
    except DiscriminantError as err:
        raise argparse.ArgumentTypeError(str(err))


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="classpoly", description="Compute Hilbert class polynomials H_D(X).")
    p.add_argument("-D", "--discriminant", type=_discriminant,
                   help="negative discriminant, D = 0 or 1 mod 4")
    p.add_argument("--strategy", choices=STRATEGIES, default="sparse",
                   help="how j is evaluated at the CM points (default: sparse)")
    p.add_argument("--enumeration", choices=("naive", "factored", "prime"), default="factored",
                   help="class group enumeration; 'prime' builds the group from small prime "
                        "forms and is GRH-conditional (default: factored)")
    p.add_argument("--precision", type=_positive_int, help="working precision in bits (overrides the bound)")
    p.add_argument("--safety-factor", type=float, default=1.01, help="multiplier on the height in bits")
    p.add_argument("--guard-bits", type=int, default=32, help="bits added after scaling")
    p.add_argument("--emit-height-bound", action="store_true",
                   help="print the height bounds and exit without computing H_D")
    p.add_argument("--verify", type=int, default=0, metavar="N", help="check H_D modulo N CM primes")
    p.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS, help="random points per curve")
    p.add_argument("--prime-bits", type=int, default=DEFAULT_MIN_BITS, help="minimum size of the CM primes")
    p.add_argument("--seed", type=int, default=0, help="seed for verification randomness")
    p.add_argument("--output", choices=("text", "structured"), default="text")
    p.add_argument("--chunked-multipoint", type=_positive_int, metavar="K",
                   help="split multipoint evaluation into K chunks sorted by |q|")
    p.add_argument("--retries", type=int, default=3, help="precision increases after a rounding failure")
    p.add_argument("--bench", metavar="FILE", help="benchmark the discriminants listed in FILE")
    p.add_argument("--bench-strategies", default=",".join(STRATEGIES),
                   help="comma separated strategies to benchmark")
    p.add_argument("--report-dir", default="bench_report", help="where --bench writes its table and figures")
    p.add_argument("--delimiter", choices=("tab", "comma"), default="tab", help="benchmark table delimiter")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _policy(args) -> PrecisionPolicy:
    return PrecisionPolicy(Fraction(args.safety_factor).limit_denominator(10**6), args.guard_bits)


def _emit_bounds(D: int, args, out) -> int:
    group = class_group(D, args.enumeration)
    proven = proven_bound(D, group.h)
    heur = heuristic_estimate(D, group)
    policy = _policy(args)
    if args.output == "structured":
        json.dump({
            "D": D, "h": group.h,
            "proven_nats": proven.nats, "proven_bits": proven.bits,
            "heuristic_nats": heur.nats, "heuristic_bits": heur.bits,
            "asymptotic_nats": asymptotic_bound(D),
            "precision_bits": working_precision(max(proven, heur, key=lambda b: b.bits), policy),
        }, out)
        out.write("\n")
    else:
        out.write(f"{D} {group.h}\n")
        out.write(f"proven {proven.nats:.6f} nats {proven.bits} bits\n")
        out.write(f"heuristic {heur.nats:.6f} nats {heur.bits} bits\n")
    return EXIT_OK


def _run_bench(args, out) -> int:
    from .bench import benchmark_suite, format_table, read_discriminants, write_report

    strategies = [s.strip() for s in args.bench_strategies.split(",") if s.strip()]
    bad = [s for s in strategies if s not in STRATEGIES]
    if bad:
        sys.stderr.write(f"classpoly: error: unknown strategy {bad[0]!r}\n")
        return EXIT_USAGE
    try:
        Ds = [check_discriminant(D) for D in read_discriminants(args.bench)]
    except (OSError, ValueError) as err:
        sys.stderr.write(f"classpoly: error: {err}\n")
        return EXIT_USAGE
    delim = "\t" if args.delimiter == "tab" else ","
    reports = benchmark_suite(Ds, strategies, _policy(args), args.enumeration, args.chunked_multipoint)
    out.write(format_table(reports, delim))
    for path in write_report(reports, args.report_dir, delim):
        sys.stderr.write(f"wrote {path}\n")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.bench:
        return _run_bench(args, out)
    if args.discriminant is None:
        parser.error("-D/--discriminant is required")
    if args.safety_factor < 1 or args.guard_bits < 0 or args.verify < 0:
        parser.error("safety factor must be >= 1, guard bits and --verify >= 0")
    D = args.discriminant
    if args.emit_height_bound:
        return _emit_bounds(D, args, out)
    try:
        H, report = compute_class_polynomial(
            D, args.strategy, args.enumeration, _policy(args), args.precision,
            retries=args.retries, chunks=args.chunked_multipoint,
        )
    except RetriesExhaustedError as err:
        sys.stderr.write(f"classpoly: {err}\n")
        return EXIT_ROUNDING
    verified = None
    code = EXIT_OK
    if args.verify:
        results = verify_polynomial(D, H.coeffs, args.verify, args.trials, args.seed, args.prime_bits)
        verified = all_consistent(results, args.verify)
        for r in results:
            logging.info("p=%d U=%d V=%d: %s", r.prime.p, r.prime.U, r.prime.V, r.verdict.value)
        if not verified:
            bad = [r for r in results if r.verdict is Verdict.INCONSISTENT]
            where = f" modulo {bad[0].prime.p}" if bad else ""
            sys.stderr.write(f"classpoly: verification failed{where}\n")
            code = EXIT_VERIFY
    if args.output == "structured":
        json.dump(H.to_structured(verified), out)
        out.write("\n")
    else:
        out.write(H.to_text())
    logging.info("precision %d bits, %d attempt(s), %.3f s", report.precision, report.attempts, report.total)
    return code


if __name__ == "__main__":
    sys.exit(main())
