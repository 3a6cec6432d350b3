"""Command line interface.

Exit codes: 0 success, 1 a check or invariant failed, 2 bad configuration.
Resource limits can be raised with ``POISSONGEN_MAX_CELLS`` (histogram
cells) and ``POISSONGEN_MAX_SYMBOLS`` (source prefix length).
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from fractions import Fraction
from typing import Optional, Sequence

from . import debruijn as db
from .construction import (
    CapacityError,
    Construction,
    ProbabilityProfile,
    ProfileError,
    ScheduleError,
    StepSchedule,
    load_profile,
    validate_profile,
)
from .exactnum import LambdaSpec, PrecisionExhausted
from .stats import (
    DEFAULT_MAX_CELLS,
    StreamTooShort,
    badset_count,
    normality_table,
    write_normality_csv,
    write_z_csv,
    z_table,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from None


def _limits():
    return _env_int("POISSONGEN_MAX_CELLS", DEFAULT_MAX_CELLS), _env_int(
        "POISSONGEN_MAX_SYMBOLS", db.DEFAULT_MAX_SYMBOLS
    )


def _atomic_write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="ascii") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _atomic_csv(path: str, writer, *args) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    os.close(fd)
    try:
        writer(*args, tmp)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# shared option handling


def _add_construction_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--base", "-b", type=int, required=True)
    p.add_argument("--profile", default=None, help="'poisson' or a profile file")
    p.add_argument("--lambda", dest="lam", default=None, help="p/q or ln(p/q)")
    p.add_argument("--g", dest="schedule", default="half", help="half, identity, sqrt or table:<file>")
    p.add_argument("--source", default=None, help="digit file with a de Bruijn prefix (default: generated)")


def _build_profile(args) -> ProbabilityProfile:
    if args.base < 2 or args.base > len(db.ALPHABET):
        raise ConfigError(f"--base must be in 2..{len(db.ALPHABET)}")
    if args.profile in (None, "poisson"):
        if args.lam is None:
            raise ConfigError("a poisson profile needs --lambda")
        try:
            return ProbabilityProfile.poisson(args.base, LambdaSpec.parse(args.lam))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if args.lam is not None:
        raise ConfigError("--lambda is implied by a finite profile file")
    try:
        return load_profile(args.profile, args.base)
    except OSError as exc:
        raise ConfigError(f"cannot read profile: {exc}") from None


def _build_construction(args, max_symbols: int) -> Construction:
    profile = _build_profile(args)
    report = validate_profile(profile)
    if not report.ok:
        raise ConfigError(f"invalid profile {profile.describe()}\n{report}")
    schedule = StepSchedule.parse(args.schedule)
    if args.source:
        try:
            word = db.read_digits(args.source, args.base)
        except OSError as exc:
            raise ConfigError(f"cannot read source: {exc}") from None
        source = db.DeBruijnStream(args.base, word, max_symbols=max_symbols)
        if not source.certified_orders:
            raise ConfigError("source file is not a de Bruijn prefix of any certified order")
    else:
        source = db.DeBruijnStream(args.base, max_symbols=max_symbols)
    return Construction(profile, schedule, source)


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    _, max_symbols = _limits()
    if args.length < 0:
        raise ConfigError("--length must be non-negative")
    con = _build_construction(args, max_symbols)
    word = con.prefix(args.length)
    _atomic_write(args.output, db.to_text(word) + "\n")
    return EXIT_OK


def cmd_analyze(args) -> int:
    max_cells, max_symbols = _limits()
    if args.k_min < 1 or args.k_max < args.k_min:
        raise ConfigError("need 1 <= --k-min <= --k-max")
    if args.base**args.k_max > max_cells:
        raise ConfigError(f"{args.base}^{args.k_max} cells exceeds POISSONGEN_MAX_CELLS={max_cells}")
    targets = None
    if args.input:
        if args.lam is None:
            raise ConfigError("analyzing a file needs --lambda")
        stream = db.read_digits(args.input, args.base)
        lam = LambdaSpec.parse(args.lam)
    elif args.debruijn:
        stream = db.DeBruijnStream(args.base, max_symbols=max_symbols)
        lam = LambdaSpec.parse(args.lam or "1")
    else:
        con = _build_construction(args, max_symbols)
        stream, lam = con, con.lam
        if con.profile.kind == "finite":
            targets = con.profile.p
    ks = range(args.k_min, args.k_max + 1)

    try:
        rows = z_table(stream, args.base, lam, ks, args.i_limit, targets=targets)
    except AssertionError as exc:
        print(f"FAIL {exc}", file=sys.stderr)
        return EXIT_FAIL
    failed = False
    if args.output:
        _atomic_csv(args.output, write_z_csv, rows)
    else:
        write_z_csv(rows, sys.stdout)
    if args.normality:
        table = normality_table(stream, args.base, args.normality, args.l_max)
        for length in range(1, args.l_max + 1):
            if int(table.counts[length].sum()) != args.normality - length + 1:
                failed = True
        if args.normality_output:
            _atomic_csv(args.normality_output, write_normality_csv, table)
        for length in range(1, args.l_max + 1):
            print(f"l={length} max |freq - b^-l| = {table.max_deviation(length):.6g}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_verify_example(args) -> int:
    from .example import SOURCE, verify_example

    source = SOURCE
    if args.source:
        try:
            source = db.read_digits(args.source, 3)
        except OSError as exc:
            raise ConfigError(f"cannot read source: {exc}") from None
        if len(source) < 27:
            raise ConfigError(f"the example needs at least 27 source symbols, got {len(source)}")
    profile = None
    if args.profile:
        try:
            profile = load_profile(args.profile, 3)
        except OSError as exc:
            raise ConfigError(f"cannot read profile: {exc}") from None
    try:
        report = verify_example(profile, source)
    except ProfileError as exc:
        print(f"FAIL {exc}")
        return EXIT_FAIL
    print(report)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_debruijn(args) -> int:
    _, max_symbols = _limits()
    b, n = args.base, args.order
    if b < 2 or b > len(db.ALPHABET) or n < 1:
        raise ConfigError("need 2 <= --base <= 36 and --order >= 1")
    if b**n > max_symbols:
        raise ConfigError(f"{b}^{n} symbols exceeds POISSONGEN_MAX_SYMBOLS={max_symbols}")
    if args.extend:
        word = db.read_digits(args.extend, b)
        if len(word) != b**n or not db.is_cyclic_debruijn(word, n, b):
            raise ConfigError(f"{args.extend} is not a cyclic de Bruijn word of order {n}")
        result = db.extend_debruijn(word, n, b, max_symbols)
    elif args.canonical:
        result = db.generate_debruijn(b, n, max_symbols)
    else:
        if b == 2 and n % 2 == 0:
            raise ConfigError(
                "binary infinite de Bruijn sequences certify odd orders only "
                "(extension goes n -> n+2); use --canonical for a standalone word"
            )
        stream = db.DeBruijnStream(b, max_symbols=max_symbols)
        result = stream.prefix(b**n)
    _atomic_write(args.output, db.to_text(result) + "\n")
    return EXIT_OK


def cmd_badset(args) -> int:
    max_cells, _ = _limits()
    try:
        eps = Fraction(args.eps)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"bad --eps {args.eps!r}") from None
    try:
        result = badset_count(args.base, args.k, args.word, eps, max_words=max(max_cells, 2**22))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(f"count={result.count}")
    print(f"bound={float(result.bound):.6g}")
    print(f"holds={'yes' if result.holds else 'no'}")
    return EXIT_OK if result.holds else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poissongen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write the first N symbols of the constructed sequence")
    _add_construction_args(p)
    p.add_argument("--length", "-n", type=int, required=True)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze", help="occupancy table (CSV) of a stream")
    _add_construction_args(p)
    p.add_argument("--input", default=None, help="analyze a digit file instead of constructing")
    p.add_argument("--debruijn", action="store_true", help="analyze the generated de Bruijn stream")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=8)
    p.add_argument("--i-limit", type=int, default=6)
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--normality", type=int, default=None, metavar="N", help="also count words in x[1..N]")
    p.add_argument("--l-max", type=int, default=2)
    p.add_argument("--normality-output", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify-example", help="replay the three-step worked example")
    p.add_argument("--source", default=None)
    p.add_argument("--profile", default=None, help="override the example profile")
    p.set_defaults(func=cmd_verify_example)

    p = sub.add_parser("debruijn", help="write a de Bruijn word")
    p.add_argument("--base", "-b", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--extend", default=None, help="extend this order-N word from a digit file")
    p.add_argument("--canonical", action="store_true", help="lexicographically least word of this order")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_debruijn)

    p = sub.add_parser("badset", help="count Bad(k, w, eps) and compare with its bound")
    p.add_argument("--base", "-b", type=int, required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", required=True)
    p.set_defaults(func=cmd_badset)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, ProfileError, ScheduleError, db.DeBruijnError, StreamTooShort) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PrecisionExhausted, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
