"""Occupancy, frequency and bad-set statistics of digit streams.

A *stream* is either a word (``bytes`` of symbol values) or anything with a
``prefix(n)`` method, such as :class:`~poissongen.construction.Construction`
or :class:`~poissongen.debruijn.DeBruijnStream`, which extend on demand.
"""

from __future__ import annotations

import csv
import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np

from .debruijn import ResourceLimitError, as_word, to_text, window_codes
from .exactnum import (
    LambdaSpec,
    RealEnclosure,
    as_fraction,
    compare,
    exp_neg_rational,
    floor_scaled,
    poisson_pmf,
)

#: dense multiplicity tables are refused above this many cells
DEFAULT_MAX_CELLS = 2**24
#: exhaustive bad-set scans are refused above this many words
DEFAULT_MAX_WORDS = 2**22


class StreamTooShort(ValueError):
    pass


def take(stream, n: int, b: int = 36) -> bytes:
    """First ``n`` symbols of a stream or word (text words are read in base ``b``)."""
    if hasattr(stream, "prefix"):
        return stream.prefix(n)
    word = as_word(stream, b)
    if len(word) < n:
        raise StreamTooShort(f"need {n} symbols, stream has {len(word)}")
    return word[:n]


def _as_lambda(lam) -> LambdaSpec:
    if isinstance(lam, LambdaSpec):
        return lam
    if isinstance(lam, str):
        return LambdaSpec.parse(lam)
    return LambdaSpec.rational(lam)


def count_occurrences(v, w, b: int = 36) -> int:
    """Number of (possibly overlapping) positions where ``w`` occurs in ``v``."""
    v, w = as_word(v, b), as_word(w, b)
    if not w:
        raise ValueError("w must be non-empty")
    count = 0
    pos = v.find(w)
    while pos != -1:
        count += 1
        pos = v.find(w, pos + 1)
    return count


# ---------------------------------------------------------------------------
# occupancy


@dataclass(frozen=True)
class OccupancyHistogram:
    base: int
    k: int
    lam: LambdaSpec
    window_count: int  # floor(lambda b^k)
    counts: dict  # i -> N_i, number of words seen exactly i times

    @property
    def cells(self) -> int:
        return self.base**self.k

    def z(self, i: int) -> Fraction:
        return Fraction(self.counts.get(i, 0), self.cells)

    @property
    def zs(self) -> dict:
        return {i: self.z(i) for i in self.counts}

    def check(self) -> bool:
        """Both partition identities, exactly."""
        return (
            sum(self.counts.values()) == self.cells
            and sum(i * n for i, n in self.counts.items()) == self.window_count
        )


def window_count(b: int, k: int, lam) -> int:
    return floor_scaled(_as_lambda(lam).enclosure(), b**k)


def occupancy(stream, b: int, k: int, lam, max_cells: int = DEFAULT_MAX_CELLS) -> OccupancyHistogram:
    """Occupancy of length-``k`` words in ``x[1 .. floor(lambda b^k) + k - 1]``."""
    if k < 1:
        raise ValueError("k must be positive")
    if b**k > max_cells:
        raise ResourceLimitError(f"{b}^{k} cells exceeds limit {max_cells}")
    lam = _as_lambda(lam)
    n = window_count(b, k, lam)
    if n == 0:
        raise ValueError(f"floor(lambda b^k) = 0 for lambda={lam}, k={k}: no windows")
    word = take(stream, n + k - 1, b)
    codes = window_codes(word, b, k)
    mult = np.bincount(codes, minlength=b**k)
    hist = np.bincount(mult)
    counts = {i: int(c) for i, c in enumerate(hist) if c}
    return OccupancyHistogram(b, k, lam, n, counts)


def pmf_targets(lam) -> Callable[[int], RealEnclosure]:
    lam = _as_lambda(lam)
    return lambda i: poisson_pmf(lam, i)


@dataclass(frozen=True)
class ZRow:
    k: int
    i: int
    z: Fraction
    target: float
    abs_error: float


def z_table(
    stream,
    b: int,
    lam,
    k_range: Iterable[int],
    i_limit: int,
    targets: Optional[Callable[[int], RealEnclosure]] = None,
    digits: int = 12,
) -> list:
    """One row per ``(k, i)``, ``0 <= i <= i_limit``, with exact ``Z^lambda_{i,k}``.

    ``targets(i)`` defaults to the Poisson pmf; targets are rounded to
    ``digits`` decimals for reporting only.
    """
    lam = _as_lambda(lam)
    if targets is None:
        targets = pmf_targets(lam)
    width = Fraction(1, 10**digits)
    cached = {}
    rows = []
    for k in k_range:
        hist = occupancy(stream, b, k, lam)
        if not hist.check():
            raise AssertionError(f"occupancy partition identities fail at k={k}")
        for i in range(i_limit + 1):
            if i not in cached:
                lo, hi = targets(i).interval(width)
                cached[i] = (lo + hi) / 2
            z = hist.z(i)
            rows.append(ZRow(k, i, z, round(float(cached[i]), digits), float(abs(z - cached[i]))))
    return rows


@contextmanager
def _text_out(target):
    if hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="") as fh:
            yield fh


def write_z_csv(rows: Iterable[ZRow], target, digits: int = 12) -> None:
    """Write z-table rows to a path or an open text stream."""
    with _text_out(target) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "i", "z_num", "z_den", "target", "abs_error"])
        for r in rows:
            writer.writerow([r.k, r.i, r.z.numerator, r.z.denominator, f"{r.target:.{digits}f}", f"{r.abs_error:.{digits}f}"])


def quasi_debruijn_metric(stream, b: int, k: int) -> Fraction:
    """``Z^1_{1,k}``: share of length-``k`` words seen exactly once."""
    return occupancy(stream, b, k, 1).z(1)


# ---------------------------------------------------------------------------
# normality


@dataclass(frozen=True)
class FrequencyTable:
    base: int
    n: int
    counts: dict  # l -> numpy array of counts indexed by word code

    def frequency(self, length: int) -> np.ndarray:
        return self.counts[length] / self.n

    def max_deviation(self, length: int) -> float:
        return float(np.max(np.abs(self.frequency(length) - float(self.base) ** -length)))

    def rows(self):
        """``(l, word, count, freq, deviation)`` for every word."""
        b = self.base
        for length, arr in sorted(self.counts.items()):
            expected = Fraction(1, b**length)
            for code, cnt in enumerate(arr.tolist()):
                digits = []
                c = code
                for _ in range(length):
                    c, d = divmod(c, b)
                    digits.append(d)
                freq = Fraction(cnt, self.n)
                yield length, to_text(reversed(digits)), cnt, freq, freq - expected


def normality_table(stream, b: int, n: int, l_max: int, max_cells: int = DEFAULT_MAX_CELLS) -> FrequencyTable:
    """Exact counts of every word of length ``1..l_max`` in ``x[1..n]``."""
    if n < l_max:
        raise ValueError("need n >= l_max")
    if b**l_max > max_cells:
        raise ResourceLimitError(f"{b}^{l_max} cells exceeds limit {max_cells}")
    word = take(stream, n, b)
    counts = {}
    for length in range(1, l_max + 1):
        counts[length] = np.bincount(window_codes(word, b, length), minlength=b**length)
    return FrequencyTable(b, n, counts)


def write_normality_csv(table: FrequencyTable, target, digits: int = 12) -> None:
    with _text_out(target) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["l", "word", "count", "freq", "deviation"])
        for length, word, cnt, freq, dev in table.rows():
            writer.writerow([length, word, cnt, f"{float(freq):.{digits}f}", f"{float(dev):.{digits}f}"])


# ---------------------------------------------------------------------------
# bad sets


@dataclass(frozen=True)
class BadSetResult:
    base: int
    k: int
    word: str
    epsilon: Fraction
    count: int
    bound: Fraction  # upper enclosure of the exponential bound

    @property
    def holds(self) -> bool:
        return self.count < self.bound


def badset_hypothesis(b: int, k: int, length: int, epsilon) -> bool:
    eps = as_fraction(epsilon)
    blocks = k // length
    return blocks >= 1 and Fraction(6, blocks) <= eps <= Fraction(1, b**length)


def badset_bound(b: int, k: int, length: int, epsilon) -> Fraction:
    """Upper end of an enclosure of ``4 l b^(k+l) exp(-b^l eps^2 k / (6 l))``."""
    eps = as_fraction(epsilon)
    rate = b**length * eps * eps * k / (6 * length)
    _, hi = exp_neg_rational(rate).interval(Fraction(1, 10**30))
    return 4 * length * b ** (k + length) * hi


def occurrence_histogram(b: int, k: int, w, max_words: int = DEFAULT_MAX_WORDS, chunk: int = 2**20) -> np.ndarray:
    """``h[c]`` = number of ``v`` in ``Omega^k`` with ``|v|_w = c``, by enumeration."""
    word = as_word(w, b)
    length = len(word)
    if length < 1 or length > k:
        raise ValueError("need 1 <= |w| <= k")
    total = b**k
    if total > max_words:
        raise ResourceLimitError(f"{b}^{k} words exceeds limit {max_words}")
    wcode = 0
    for s in word:
        wcode = wcode * b + s
    mod = b**length
    hist = np.zeros(k - length + 2, dtype=np.int64)
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        occ = np.zeros(len(codes), dtype=np.int64)
        for pos in range(k - length + 1):
            occ += (codes // b ** (k - length - pos)) % mod == wcode
        hist += np.bincount(occ, minlength=len(hist))
    return hist


def badset_count(b: int, k: int, w, epsilon, max_words: int = DEFAULT_MAX_WORDS, chunk: int = 2**20) -> BadSetResult:
    """Count ``v`` in ``Omega^k`` with ``| |v|_w - k b^-|w| | >= eps k`` by enumeration."""
    word = as_word(w, b)
    length = len(word)
    eps = as_fraction(epsilon)
    if length < 1 or length > k:
        raise ValueError("need 1 <= |w| <= k")
    if not badset_hypothesis(b, k, length, eps):
        raise ValueError(f"epsilon={eps} outside 6/floor(k/l) <= eps <= 1/b^l for k={k}, l={length}")
    hist = occurrence_histogram(b, k, word, max_words, chunk)
    return BadSetResult(b, k, to_text(word), eps, badset_tally(hist, b, k, length, eps), badset_bound(b, k, length, eps))


def badset_tally(hist: np.ndarray, b: int, k: int, length: int, epsilon) -> int:
    """Bad-set size from an :func:`occurrence_histogram`, exactly."""
    eps = as_fraction(epsilon)
    mod = b**length
    # |occ - k/b^l| >= eps k  <=>  |occ b^l - k| * den >= num * k * b^l
    rhs = eps.numerator * k * mod
    return sum(int(n) for occ, n in enumerate(hist.tolist()) if abs(occ * mod - k) * eps.denominator >= rhs)


# ---------------------------------------------------------------------------
# lambda scaling


@dataclass(frozen=True)
class ScalingRow:
    k: int
    i: int
    z_scaled: Fraction  # Z^{1/b}_{i,k+1}
    z_unit: Fraction  # Z^1_{i,k}
    difference: Fraction  # |z_scaled - z_unit / b|


def lambda_scaling_check(stream, b: int, k_range: Iterable[int], i_limit: int) -> list:
    """``|Z^{1/b}_{i,k+1} - Z^1_{i,k} / b|`` for a stream built with lambda = 1."""
    if b < 3:
        raise ValueError("the scaling diagnostic needs b >= 3")
    rows = []
    for k in k_range:
        unit = occupancy(stream, b, k, 1)
        scaled = occupancy(stream, b, k + 1, Fraction(1, b))
        for i in range(1, i_limit + 1):
            zs, zu = scaled.z(i), unit.z(i)
            rows.append(ScalingRow(k, i, zs, zu, abs(zs - zu / b)))
    return rows


def poisson_scaling_sign(b: int, i: int) -> int:
    """Sign of ``e^{-1/b} / (b^i i!) - e^{-1} / (b i!)``; nonzero means the two laws differ."""
    fact = math.factorial(i)
    left = exp_neg_rational(Fraction(1, b)).scaled(Fraction(1, b**i * fact))
    right = exp_neg_rational(1).scaled(Fraction(1, b * fact))
    return compare(left, right)
