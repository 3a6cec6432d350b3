"""Block-selection construction of sequences with prescribed occupancy.

Given a probability profile ``(p_i)`` with mean ``lambda`` and an infinite de
Bruijn sequence ``A``, step ``k`` copies blocks out of ``A[1..b^k]`` and
repeats each block ``i`` times, so that the share of length-``k`` words seen
exactly ``i`` times tends to ``p_i``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Optional, Sequence, Union

from .debruijn import DeBruijnStream
from .exactnum import (
    DEFAULT_MIN_WIDTH,
    LambdaSpec,
    RealEnclosure,
    as_fraction,
    compare,
    ln_rational,
    poisson_pmf,
    truncate_digits,
)


class ProfileError(ValueError):
    """The probability profile violates a hypothesis of the construction."""

    def __init__(self, message: str, report: Optional["ValidationReport"] = None):
        super().__init__(message)
        self.report = report


class ScheduleError(ValueError):
    pass


class CapacityError(RuntimeError):
    """A step needed more source symbols than its region holds."""


# ---------------------------------------------------------------------------
# profiles


@dataclass
class ProbabilityProfile:
    """The target occupancy probabilities ``p_0, p_1, ...`` over base ``b``.

    Use :meth:`finite` for a finitely supported rational profile (``p_0`` is
    implied as ``1 - sum(p_i, i >= 1)`` when omitted) or :meth:`poisson` for
    ``p_i = e^-lambda lambda^i / i!``.
    """

    base: int
    kind: str
    lam: LambdaSpec
    probs: dict = field(default_factory=dict)
    p0_implied: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def finite(cls, base: int, probs: Mapping[int, object]) -> "ProbabilityProfile":
        table = {int(i): as_fraction(p) for i, p in probs.items()}
        if any(i < 0 for i in table):
            raise ProfileError("indices must be non-negative")
        implied = 0 not in table
        if implied:
            table[0] = 1 - sum(p for i, p in table.items() if i >= 1)
        mean = sum(i * p for i, p in table.items())
        if mean <= 0:
            raise ProfileError("lambda = sum(i p_i) must be positive")
        return cls(base, "finite", LambdaSpec.rational(mean), dict(sorted(table.items())), implied)

    @classmethod
    def poisson(cls, base: int, lam: Union[LambdaSpec, str, Fraction, int]) -> "ProbabilityProfile":
        if not isinstance(lam, LambdaSpec):
            lam = LambdaSpec.parse(str(lam))
        return cls(base, "poisson", lam)

    @property
    def max_index(self) -> Optional[int]:
        """Largest index with ``p_i > 0`` for finite profiles, else ``None``."""
        if self.kind != "finite":
            return None
        return max((i for i, p in self.probs.items() if p != 0), default=0)

    def p(self, i: int) -> RealEnclosure:
        if i not in self._cache:
            if self.kind == "finite":
                self._cache[i] = RealEnclosure.rational(self.probs.get(i, Fraction(0)))
            else:
                self._cache[i] = poisson_pmf(self.lam, i)
        return self._cache[i]

    def describe(self) -> str:
        if self.kind == "poisson":
            return f"poisson(lambda={self.lam}), b={self.base}"
        parts = ", ".join(f"p_{i}={p}" for i, p in self.probs.items() if p)
        return f"finite({parts}), lambda={self.lam}, b={self.base}"


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)  # (name, passed, detail)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append((name, bool(passed), detail))

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def __str__(self) -> str:
        return "\n".join(
            f"{'PASS' if passed else 'FAIL'} {name}" + (f": {detail}" if detail else "")
            for name, passed, detail in self.checks
        )


def validate_profile(profile: ProbabilityProfile, min_width: Fraction = DEFAULT_MIN_WIDTH) -> ValidationReport:
    """Check the hypotheses the construction needs.

    Raises :class:`PrecisionExhausted` only if the binary condition
    ``p_0 >= 1/2`` cannot be decided.
    """
    report = ValidationReport()
    b = profile.base
    report.add("base >= 2", b >= 2, f"b={b}")
    if profile.kind == "finite":
        probs = profile.probs
        negative = [i for i, p in probs.items() if p < 0]
        report.add("p_i >= 0", not negative, f"negative at {negative}" if negative else "")
        total = sum(probs.values())
        detail = f"sum={total}" + (" (p_0 implied)" if profile.p0_implied else "")
        report.add("sum p_i = 1", total == 1, detail)
        mean = sum(i * p for i, p in probs.items())
        report.add("sum i p_i = lambda", mean == profile.lam.exact, f"lambda={mean}")
        if b == 2:
            p0 = probs.get(0, Fraction(0))
            report.add("p_0 >= 1/2 (b=2)", p0 >= Fraction(1, 2), f"p_0={p0}")
    else:
        lam = profile.lam
        report.add("lambda > 0", True, f"lambda={lam}")
        if b == 2:
            if lam.kind == "ln":
                p0 = 1 / lam.value
                report.add("p_0 >= 1/2 (b=2)", p0 >= Fraction(1, 2), f"p_0={p0} exactly")
            else:
                # e^-lambda >= 1/2  <=>  lambda <= ln 2
                sign = compare(lam.value, ln_rational(2), min_width)
                report.add("p_0 >= 1/2 (b=2)", sign <= 0, f"lambda={lam} vs ln 2")
    return report


def load_profile(path: Union[str, os.PathLike], base: int) -> ProbabilityProfile:
    """Read a profile file.

    Either lines ``i p/q`` (``#`` starts a comment) or a single line
    ``poisson <lambda>`` where lambda is ``p/q`` or ``ln(p/q)``.
    """
    with open(path, encoding="utf-8") as fh:
        return parse_profile(fh.read(), base)


def parse_profile(text: str, base: int) -> ProbabilityProfile:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ProfileError("empty profile")
    if lines[0].lower().startswith("poisson"):
        if len(lines) != 1:
            raise ProfileError("a poisson profile is a single line")
        parts = lines[0].split(None, 1)
        if len(parts) != 2:
            raise ProfileError("expected 'poisson <lambda>'")
        return ProbabilityProfile.poisson(base, LambdaSpec.parse(parts[1]))
    probs = {}
    for ln in lines:
        parts = ln.split()
        if len(parts) != 2:
            raise ProfileError(f"bad profile line {ln!r}")
        try:
            i, p = int(parts[0]), Fraction(parts[1])
        except (ValueError, ZeroDivisionError):
            raise ProfileError(f"bad profile line {ln!r}") from None
        if i in probs:
            raise ProfileError(f"index {i} given twice")
        probs[i] = p
    return ProbabilityProfile.finite(base, probs)


# ---------------------------------------------------------------------------
# step schedules


@dataclass
class StepSchedule:
    """The digit budget ``g(k)`` used at step ``k``."""

    name: str
    func: Callable[[int], int]
    m: Fraction = Fraction(3, 2)

    def __call__(self, k: int) -> int:
        if k < 1:
            raise ScheduleError("steps start at 1")
        value = self.func(k)
        if value < 1:
            raise ScheduleError(f"g({k}) = {value} is not a positive integer")
        return value

    @classmethod
    def half(cls) -> "StepSchedule":
        return cls("half", lambda k: (k + 1) // 2)

    @classmethod
    def identity(cls) -> "StepSchedule":
        return cls("identity", lambda k: k)

    @classmethod
    def sqrt(cls) -> "StepSchedule":
        return cls("sqrt", lambda k: math.isqrt(k - 1) + 1)

    @classmethod
    def table(cls, values: Sequence[int], m: Union[Fraction, int] = Fraction(3, 2), name: str = "table") -> "StepSchedule":
        values = [int(v) for v in values]
        if not values or values[0] != 1:
            raise ScheduleError("a schedule table must start with g(1) = 1")

        def func(k: int) -> int:
            if k > len(values):
                raise ScheduleError(f"schedule table has no entry for k={k}")
            return values[k - 1]

        return cls(name, func, as_fraction(m))

    @classmethod
    def parse(cls, text: str) -> "StepSchedule":
        """``half``, ``identity``, ``sqrt`` or ``table:<file>``."""
        if text in ("half", "identity", "sqrt"):
            return getattr(cls, text)()
        if text.startswith("table:"):
            path = text[len("table:") :]
            with open(path, encoding="utf-8") as fh:
                tokens = [t for ln in fh for t in ln.split("#", 1)[0].split()]
            try:
                return cls.table([int(t) for t in tokens], name=text)
            except ValueError as exc:
                raise ScheduleError(f"bad schedule table {path}: {exc}") from None
        raise ScheduleError(f"unknown schedule {text!r}")

    def check(self, b: int, k_max: int = 40, k_from: int = 3) -> ValidationReport:
        """Finite-range check of the three growth conditions on ``g``.

        The decay of ``k / b^g(k)`` is asymptotic, so it is only declared
        here: we check ``2k / b^g(2k) < k / b^g(k)`` on the range.
        """
        report = ValidationReport()
        ks = range(1, k_max + 1)
        bad_step = [k for k in ks[:-1] if self(k + 1) > self(k) + 1]
        report.add("g(k+1) <= g(k) + 1", not bad_step, f"fails at {bad_step[:5]}" if bad_step else "")
        bad_ratio = [k for k in range(k_from, k_max + 1) if self(k) > k / self.m]
        report.add(
            f"g(k) <= k/{self.m} for k >= {k_from}",
            not bad_ratio,
            f"fails at {bad_ratio[:5]}" if bad_ratio else "",
        )

        def decay(k: int) -> Fraction:
            return Fraction(k, b ** self(k))

        bad_decay = [k for k in range(k_from, k_max // 2 + 1) if not decay(2 * k) < decay(k)]
        report.add(
            "k/b^g(k) -> 0 (declared, not proven)",
            not bad_decay,
            f"fails at {bad_decay[:5]}" if bad_decay else "",
        )
        return report


# ---------------------------------------------------------------------------
# ladder


def _step_digit_source(profile: ProbabilityProfile, k: int) -> Callable[[int], RealEnclosure]:
    # step 1 truncates p_i itself, later steps truncate (b-1)/b * p_i
    b = profile.base
    if k == 1:
        return profile.p
    factor = Fraction(b - 1, b)
    return lambda i: profile.p(i).scaled(factor)


def _step_threshold(b: int, g: int, k: int) -> Fraction:
    # the step-k digit string of p_i is nonzero iff p_i >= this
    if k == 1:
        return Fraction(1, b) ** g
    return Fraction(b, b - 1) * Fraction(1, b) ** g


def active_support(
    profile: ProbabilityProfile,
    schedule: StepSchedule,
    k: int,
    min_width: Fraction = DEFAULT_MIN_WIDTH,
) -> int:
    """Largest ``i >= 1`` whose step-``k`` digits are not all zero (0 if none)."""
    b = profile.base
    threshold = _step_threshold(b, schedule(k), k)
    if profile.kind == "finite":
        return max((i for i, p in profile.probs.items() if i >= 1 and p >= threshold), default=0)
    # Poisson pmf decreases past the mode, so stop at the first small i > lambda
    lam_hi = profile.lam.enclosure().interval(Fraction(1, 1000))[1]
    last = 0
    i = 1
    while True:
        if compare(profile.p(i), threshold, min_width) >= 0:
            last = i
        elif i > lam_hi:
            return last
        i += 1


@dataclass(frozen=True)
class LadderRow:
    k: int
    entries: dict  # i -> p_i^k for 1 <= i <= i_max
    p0: Fraction

    def get(self, i: int) -> Fraction:
        if i == 0:
            return self.p0
        return self.entries.get(i, Fraction(0))

    @property
    def i_max(self) -> int:
        return max(self.entries, default=0)


def step_digits(
    profile: ProbabilityProfile,
    schedule: StepSchedule,
    k: int,
    min_width: Fraction = DEFAULT_MIN_WIDTH,
) -> dict:
    """``{i: (digits, value)}`` of the truncations used at step ``k``, nonzero ``i`` only."""
    g = schedule(k)
    if k == 1 and g != 1:
        raise ScheduleError("step 1 needs g(1) = 1")
    source = _step_digit_source(profile, k)
    out = {}
    for i in range(1, active_support(profile, schedule, k, min_width) + 1):
        digits, value = truncate_digits(source(i), g, profile.base, min_width)
        if value:
            out[i] = (digits, value)
    return out


def ladder_rows(profile: ProbabilityProfile, schedule: StepSchedule, k_max: int) -> list:
    """Ladder rows for steps ``1..k_max``."""
    b = profile.base
    rows = []
    prev: dict = {}
    for k in range(1, k_max + 1):
        fresh = step_digits(profile, schedule, k)
        entries = {i: p / b for i, p in prev.items()}
        for i, (_, value) in fresh.items():
            entries[i] = entries.get(i, Fraction(0)) + value
        entries = dict(sorted(entries.items()))
        rows.append(LadderRow(k, entries, 1 - sum(entries.values())))
        prev = entries
    return rows


def ladder_row(profile: ProbabilityProfile, schedule: StepSchedule, k: int) -> LadderRow:
    if k < 1:
        raise ValueError("k must be at least 1")
    return ladder_rows(profile, schedule, k)[-1]


# ---------------------------------------------------------------------------
# the construction


@dataclass(frozen=True)
class PlanItem:
    i: int  # repetition count
    j: int  # scale index; block has relative length b^-j
    start: int  # 0-based position in A
    length: int

    @property
    def stop(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class BlockPlan:
    step: int
    items: tuple
    cursor_after: int
    truncations: dict  # i -> exact value of the step's truncated digits

    @property
    def relative_total(self) -> Fraction:
        return sum((Fraction(it.length) for it in self.items), Fraction(0))


@dataclass(frozen=True)
class Segment:
    """A constituent segment: ``source[start:start+length]`` repeated ``i`` times."""

    step: int
    i: int
    j: int
    start: int
    length: int
    out_start: int


class Construction:
    """Incremental, pull-driven state of the construction.

    ``output`` grows by one step at a time; everything emitted so far is
    final.  Not safe for concurrent mutation.
    """

    def __init__(
        self,
        profile: ProbabilityProfile,
        schedule: Optional[StepSchedule] = None,
        source: Optional[DeBruijnStream] = None,
        min_width: Fraction = DEFAULT_MIN_WIDTH,
    ):
        report = validate_profile(profile, min_width)
        if not report.ok:
            raise ProfileError(f"invalid profile {profile.describe()}:\n{report}", report)
        self.profile = profile
        self.base = profile.base
        self.schedule = schedule or StepSchedule.half()
        if source is None:
            source = DeBruijnStream(self.base)
        if source.base != self.base:
            raise ProfileError(f"source base {source.base} != profile base {self.base}")
        self.source = source
        self.min_width = min_width
        self.k = 0
        self.cursor = 0
        self.output = bytearray()
        self.segments: list = []
        self.ladder: list = []
        self.lengths: list = [0]  # |x_k|
        self.run_counts: list = [0]  # B_k

    # -- planning

    def plan_step(self) -> BlockPlan:
        """Blocks for step ``k+1``: scale ``j`` ascending, then ``i`` ascending."""
        b = self.base
        step = self.k + 1
        digits = step_digits(self.profile, self.schedule, step, self.min_width)
        cursor = self.cursor
        if step > 1 and b >= 3:
            cursor = max(cursor, b ** (step - 1))
        g = self.schedule(step)
        items = []
        for j in range(1, g + 1):
            length = b ** (step - j)
            for i in sorted(digits):
                for _ in range(digits[i][0][j - 1]):
                    items.append(PlanItem(i, j, cursor, length))
                    cursor += length
        if cursor > b**step:
            raise CapacityError(f"step {step} needs A[1..{cursor}] but only A_{step} = A[1..{b**step}] may be used")
        values = {i: v for i, (_, v) in digits.items()}
        return BlockPlan(step, tuple(items), cursor, values)

    def execute_step(self, plan: Optional[BlockPlan] = None) -> BlockPlan:
        if plan is None:
            plan = self.plan_step()
        if plan.step != self.k + 1:
            raise ValueError(f"plan is for step {plan.step}, expected {self.k + 1}")
        step = plan.step
        self.source.ensure(self.base**step)
        buf = self.source.buffer
        for it in plan.items:
            block = buf[it.start : it.stop]
            self.segments.append(Segment(step, it.i, it.j, it.start, it.length, len(self.output)))
            self.output += block * it.i
        self.cursor = plan.cursor_after
        self.k = step
        prev = self.ladder[-1].entries if self.ladder else {}
        entries = {i: p / self.base for i, p in prev.items()}
        for i, v in plan.truncations.items():
            entries[i] = entries.get(i, Fraction(0)) + v
        entries = dict(sorted(entries.items()))
        self.ladder.append(LadderRow(step, entries, 1 - sum(entries.values())))
        self.lengths.append(len(self.output))
        self.run_counts.append(self.run_counts[-1] + len(plan.items))
        return plan

    def run_to(self, k: int) -> "Construction":
        while self.k < k:
            self.execute_step()
        return self

    # -- pulling symbols

    def prefix(self, n: int) -> bytes:
        """First ``n`` symbols of the output stream, running steps as needed."""
        stalled = 0
        while len(self.output) < n:
            before = len(self.output)
            self.execute_step()
            stalled = stalled + 1 if len(self.output) == before else 0
            if stalled > 64:
                raise RuntimeError("construction stopped producing output")
        return bytes(self.output[:n])

    def symbol(self, n: int) -> int:
        """The symbol at 1-based position ``n``."""
        if n < 1:
            raise IndexError("positions start at 1")
        return self.prefix(n)[n - 1]

    def __iter__(self) -> Iterator[int]:
        pos = 0
        while True:
            if pos >= len(self.output):
                self.prefix(pos + 1)
            yield self.output[pos]
            pos += 1

    @property
    def lam(self) -> LambdaSpec:
        return self.profile.lam

    # -- reporting

    def ledger(self, k: Optional[int] = None) -> list:
        """Constituent segments placed up to step ``k`` (default: all)."""
        k = self.k if k is None else k
        return [s for s in self.segments if s.step <= k]

    def segment_report(self) -> list:
        return segment_report(self)


def digit_stream(
    profile: ProbabilityProfile,
    schedule: Optional[StepSchedule] = None,
    source: Optional[DeBruijnStream] = None,
) -> Construction:
    return Construction(profile, schedule, source)


@dataclass(frozen=True)
class StepSummary:
    k: int
    run_segments: int  # B_k
    relative_lengths: dict  # i -> total relative length w.r.t. A_k
    length: int  # |x_k|


def segment_report(state: Construction) -> list:
    """Per completed step: ``B_k``, per-``i`` relative length and ``|x_k|``."""
    b = state.base
    out = []
    totals: dict = {}
    by_step: dict = {}
    for seg in state.segments:
        by_step.setdefault(seg.step, []).append(seg)
    for k in range(1, state.k + 1):
        for seg in by_step.get(k, []):
            totals[seg.i] = totals.get(seg.i, 0) + seg.length
        rel = {i: Fraction(n, b**k) for i, n in sorted(totals.items())}
        out.append(StepSummary(k, state.run_counts[k], rel, state.lengths[k]))
    return out
