"""Exact rationals, computable-real enclosures and base-b truncation.

Every quantity the construction needs is either a :class:`fractions.Fraction`
or a :class:`RealEnclosure`: an oracle that, asked for a width, returns a
closed rational interval of at most that width containing the real.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Tuple, Union

Interval = Tuple[Fraction, Fraction]
RationalLike = Union[int, Fraction, str]

#: refinement stops (with :class:`PrecisionExhausted`) below this width
DEFAULT_MIN_WIDTH = Fraction(1, 10**60)


class PrecisionExhausted(ArithmeticError):
    """An enclosure could not decide a floor/digit before the minimum width.

    Raised when the represented real is (or cannot be told apart from) a
    boundary rational and no exact value was supplied.
    """


def as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class RealEnclosure:
    """A computable real given by a width-driven interval oracle.

    ``oracle(width)`` must return ``(lo, hi)`` with ``hi - lo <= width`` and
    ``lo <= x <= hi``.  Answers are intersected with the tightest interval seen
    so far, so successive queries are nested regardless of the oracle.
    """

    def __init__(
        self,
        oracle: Optional[Callable[[Fraction], Interval]] = None,
        exact: Optional[RationalLike] = None,
        name: str = "",
    ):
        if oracle is None and exact is None:
            raise ValueError("need an oracle or an exact value")
        self.exact = None if exact is None else as_fraction(exact)
        self._oracle = oracle
        self._best: Optional[Interval] = None
        self.name = name

    @classmethod
    def rational(cls, value: RationalLike, name: str = "") -> "RealEnclosure":
        return cls(exact=value, name=name or str(as_fraction(value)))

    def interval(self, width: RationalLike) -> Interval:
        width = as_fraction(width)
        if width <= 0:
            raise ValueError("width must be positive")
        if self.exact is not None:
            return self.exact, self.exact
        best = self._best
        if best is not None and best[1] - best[0] <= width:
            return best
        lo, hi = self._oracle(width)
        if hi - lo > width or lo > hi:
            raise AssertionError(f"oracle {self.name!r} broke its width contract")
        if best is not None:
            lo, hi = max(lo, best[0]), min(hi, best[1])
        self._best = (lo, hi)
        return lo, hi

    def scaled(self, factor: RationalLike) -> "RealEnclosure":
        """The real ``factor * self`` for an exact non-negative ``factor``."""
        factor = as_fraction(factor)
        if factor < 0:
            raise ValueError("factor must be non-negative")
        if self.exact is not None:
            return RealEnclosure.rational(self.exact * factor)
        if factor == 0:
            return RealEnclosure.rational(0)

        def oracle(width: Fraction) -> Interval:
            lo, hi = self.interval(width / factor)
            return lo * factor, hi * factor

        return RealEnclosure(oracle, name=f"{factor}*{self.name}")

    def approx(self, digits: int = 15) -> float:
        lo, hi = self.interval(Fraction(1, 10**digits))
        return float((lo + hi) / 2)

    def __repr__(self) -> str:
        if self.exact is not None:
            return f"RealEnclosure(exact={self.exact})"
        return f"RealEnclosure({self.name or '?'})"


def _as_enclosure(y: Union[RealEnclosure, RationalLike]) -> RealEnclosure:
    return y if isinstance(y, RealEnclosure) else RealEnclosure.rational(y)


# ---------------------------------------------------------------------------
# ln and exp on rationals


def _ln_reduced(q: Fraction, width: Fraction) -> Interval:
    # ln q = 2 atanh(z), z = (q-1)/(q+1); tail after J terms is bounded by a
    # geometric series in z^2.
    z = (q - 1) / (q + 1)
    z2 = z * z
    total = Fraction(0)
    power = z
    j = 0
    while True:
        total += power / (2 * j + 1)
        j += 1
        power *= z2
        tail = 2 * power / ((2 * j + 1) * (1 - z2))
        if tail <= width:
            lo = 2 * total
            return lo, lo + tail


def ln_rational(q: RationalLike) -> RealEnclosure:
    """Enclosure of the natural logarithm of a rational ``q > 1``."""
    q = as_fraction(q)
    if q <= 1:
        raise ValueError(f"ln_rational needs q > 1, got {q}")
    # q = 2^m * r with 1 <= r < 2, so every series has z <= 1/3
    m = q.numerator.bit_length() - q.denominator.bit_length()
    if Fraction(2) ** m > q:
        m -= 1
    r = q / Fraction(2) ** m

    def oracle(width: Fraction) -> Interval:
        if r == 1:
            lo2, hi2 = _ln_reduced(Fraction(2), width / m)
            return m * lo2, m * hi2
        if m == 0:
            return _ln_reduced(r, width)
        lo2, hi2 = _ln_reduced(Fraction(2), width / (2 * m))
        lor, hir = _ln_reduced(r, width / 2)
        return m * lo2 + lor, m * hi2 + hir

    return RealEnclosure(oracle, name=f"ln({q})")


def _exp_positive(lam: Fraction, width: Fraction) -> Interval:
    # Partial sums of e^lam; once n + 1 > 2*lam the tail is at most 2 * term.
    total = Fraction(0)
    term = Fraction(1)
    n = 0
    while True:
        total += term
        n += 1
        term = term * lam / n
        if n + 1 > 2 * lam:
            ratio = lam / (n + 1)
            tail = term / (1 - ratio)
            if tail <= width:
                return total, total + tail


def exp_neg_rational(r: RationalLike) -> RealEnclosure:
    """Enclosure of ``e^{-r}`` for a rational ``r >= 0``."""
    r = as_fraction(r)
    if r < 0:
        raise ValueError("exp_neg_rational needs r >= 0")
    if r == 0:
        return RealEnclosure.rational(1)

    def oracle(width: Fraction) -> Interval:
        # 1/x maps [lo, hi] (lo >= 1) to an interval no wider than hi - lo
        lo, hi = _exp_positive(r, width)
        return 1 / hi, 1 / lo

    return RealEnclosure(oracle, name=f"exp(-{r})")


# ---------------------------------------------------------------------------
# lambda


_LN_RE = re.compile(r"^\s*ln\s*\(\s*([^)]+?)\s*\)\s*$")


@dataclass(frozen=True)
class LambdaSpec:
    """``lambda = value`` (kind ``"rational"``) or ``lambda = ln(value)``."""

    kind: str
    value: Fraction

    def __post_init__(self):
        if self.kind not in ("rational", "ln"):
            raise ValueError(f"unknown lambda kind {self.kind!r}")
        object.__setattr__(self, "value", as_fraction(self.value))
        if self.kind == "rational" and self.value <= 0:
            raise ValueError("lambda must be positive")
        if self.kind == "ln" and self.value <= 1:
            raise ValueError("ln(q) lambda needs q > 1")

    @classmethod
    def rational(cls, value: RationalLike) -> "LambdaSpec":
        return cls("rational", as_fraction(value))

    @classmethod
    def log_of(cls, q: RationalLike) -> "LambdaSpec":
        return cls("ln", as_fraction(q))

    @classmethod
    def parse(cls, text: str) -> "LambdaSpec":
        """Parse ``"p/q"``, an integer, or ``"ln(p/q)"``."""
        m = _LN_RE.match(text)
        try:
            if m:
                return cls.log_of(m.group(1))
            return cls.rational(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad lambda {text!r}: {exc}") from None

    @property
    def exact(self) -> Optional[Fraction]:
        return self.value if self.kind == "rational" else None

    def enclosure(self) -> RealEnclosure:
        if self.kind == "rational":
            return RealEnclosure.rational(self.value)
        return ln_rational(self.value)

    def __str__(self) -> str:
        return str(self.value) if self.kind == "rational" else f"ln({self.value})"


def poisson_pmf(lam: LambdaSpec, i: int) -> RealEnclosure:
    """Enclosure of ``e^{-lambda} lambda^i / i!``."""
    if i < 0:
        raise ValueError("i must be non-negative")
    fact = math.factorial(i)
    if lam.kind == "rational":
        coeff = lam.value**i / fact
        enc = exp_neg_rational(lam.value).scaled(coeff)
        enc.name = f"pmf({lam},{i})"
        return enc

    q = lam.value
    if i == 0:
        return RealEnclosure.rational(1 / q)
    log_q = ln_rational(q)
    # ln q <= q - 1 bounds the derivative of t -> t^i on the enclosure
    slope = i * (q - 1) ** (i - 1) / (q * fact)

    def oracle(width: Fraction) -> Interval:
        lo, hi = log_q.interval(width / slope if slope > 0 else width)
        return lo**i / (q * fact), hi**i / (q * fact)

    return RealEnclosure(oracle, name=f"pmf({lam},{i})")


# ---------------------------------------------------------------------------
# floors and truncation


def floor_scaled(
    y: Union[RealEnclosure, RationalLike],
    scale: int,
    min_width: Fraction = DEFAULT_MIN_WIDTH,
) -> int:
    """``floor(y * scale)`` decided exactly or by refinement."""
    y = _as_enclosure(y)
    if scale <= 0:
        raise ValueError("scale must be positive")
    if y.exact is not None:
        if y.exact < 0:
            raise ValueError("floor_scaled needs y >= 0")
        return math.floor(y.exact * scale)
    width = Fraction(1, 16 * scale)
    while True:
        lo, hi = y.interval(width)
        if hi < 0:
            raise ValueError("floor_scaled needs y >= 0")
        flo, fhi = math.floor(lo * scale), math.floor(hi * scale)
        if flo == fhi:
            return max(flo, 0)
        if width < min_width:
            raise PrecisionExhausted(
                f"{y.name or 'value'} * {scale} straddles an integer at width "
                f"{float(width):.3g}; supply an exact value"
            )
        width /= 2**32


def digits_of(value: Fraction, m: int, b: int) -> list[int]:
    """Base-b digits of ``value = n / b^m`` for ``0 <= n < b^m``."""
    n = value * b**m
    if n.denominator != 1 or not 0 <= n < b**m:
        raise ValueError(f"{value} is not an m-digit base-{b} fraction")
    n = n.numerator
    out = [0] * m
    for pos in range(m - 1, -1, -1):
        n, out[pos] = divmod(n, b)
    return out


def truncate_digits(
    y: Union[RealEnclosure, RationalLike],
    m: int,
    b: int,
    min_width: Fraction = DEFAULT_MIN_WIDTH,
) -> tuple[list[int], Fraction]:
    """First ``m`` base-b digits of ``y`` in ``[0, 1]`` and their value.

    Uses the expansion without an infinite tail of ``b-1``; ``y = 1`` maps to
    ``1 - b^-m`` (all digits ``b-1``).
    """
    if b < 2:
        raise ValueError("base must be at least 2")
    if m < 1:
        raise ValueError("m must be positive")
    y = _as_enclosure(y)
    scale = b**m
    if y.exact is not None:
        if not 0 <= y.exact <= 1:
            raise ValueError(f"truncate_digits needs y in [0, 1], got {y.exact}")
        if y.exact == 1:
            value = 1 - Fraction(1, scale)
            return [b - 1] * m, value
    n = floor_scaled(y, scale, min_width)
    if n >= scale:
        raise ValueError("truncate_digits needs y in [0, 1]")
    value = Fraction(n, scale)
    return digits_of(value, m, b), value


def compare(
    a: Union[RealEnclosure, RationalLike],
    c: Union[RealEnclosure, RationalLike],
    min_width: Fraction = DEFAULT_MIN_WIDTH,
) -> int:
    """Sign of ``a - c``; raises :class:`PrecisionExhausted` if undecided."""
    a, c = _as_enclosure(a), _as_enclosure(c)
    if a.exact is not None and c.exact is not None:
        return (a.exact > c.exact) - (a.exact < c.exact)
    width = Fraction(1, 2**10)
    while True:
        alo, ahi = a.interval(width)
        clo, chi = c.interval(width)
        if ahi < clo:
            return -1
        if alo > chi:
            return 1
        if width < min_width:
            raise PrecisionExhausted(f"cannot separate {a!r} from {c!r}")
        width /= 2**32
