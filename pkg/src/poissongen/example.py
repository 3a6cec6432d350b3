"""The three-step worked example: b=3, g(k)=k, p = (0, 1/2, 5/18, 2/9)."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .construction import Construction, ProbabilityProfile, StepSchedule
from .debruijn import DeBruijnStream, as_word, to_text

SOURCE = "012110022010200011120212221"
PROBS = {1: Fraction(1, 2), 2: Fraction(5, 18), 3: Fraction(2, 9)}
LAMBDA = Fraction(31, 18)

OUTPUTS = {
    1: "0",
    2: "011000222",
    3: "011000222" + "010200011" + "120120" + "212212212" + "2222" + "111",
}

LADDER = {
    1: {1: Fraction(1, 3), 2: Fraction(0), 3: Fraction(0)},
    2: {1: Fraction(4, 9), 2: Fraction(1, 9), 3: Fraction(1, 9)},
    3: {1: Fraction(13, 27), 2: Fraction(6, 27), 3: Fraction(5, 27)},
}

# (i, 1-based start in A, length) per step
BLOCKS = {
    1: [(1, 1, 1)],
    2: [(1, 4, 3), (2, 7, 1), (3, 8, 1)],
    3: [(1, 10, 9), (2, 19, 3), (3, 22, 3), (2, 25, 1), (2, 26, 1), (3, 27, 1)],
}


def example_profile() -> ProbabilityProfile:
    return ProbabilityProfile.finite(3, PROBS)


def example_construction(profile: Optional[ProbabilityProfile] = None, source=SOURCE) -> Construction:
    word = as_word(source, 3)
    if len(word) < 27:
        raise ValueError(f"the example needs at least 27 source symbols, got {len(word)}")
    return Construction(profile or example_profile(), StepSchedule.identity(), DeBruijnStream(3, word))


@dataclass
class ExampleReport:
    lines: list = field(default_factory=list)
    failures: int = 0

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        self.lines.append(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
        if not ok:
            self.failures += 1

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def __str__(self) -> str:
        return "\n".join(self.lines + ["PASS" if self.ok else f"FAIL ({self.failures} checks)"])


def _first_divergence(got: str, want: str) -> str:
    for pos, (a, c) in enumerate(zip(got, want), start=1):
        if a != c:
            return f"first divergence at position {pos}: got {a!r}, expected {c!r}"
    if len(got) != len(want):
        return f"lengths differ: got {len(got)}, expected {len(want)}"
    return ""


def verify_example(profile: Optional[ProbabilityProfile] = None, source=SOURCE) -> ExampleReport:
    """Replay the worked example and compare every intermediate value."""
    report = ExampleReport()
    c = example_construction(profile, source)
    report.check("lambda = 31/18", c.lam.exact == LAMBDA, f"lambda={c.lam}")
    for k in (1, 2, 3):
        plan = c.execute_step()
        got = [(it.i, it.start + 1, it.length) for it in plan.items]
        report.check(f"step {k} blocks", got == BLOCKS[k], "" if got == BLOCKS[k] else f"got {got}")
        row = c.ladder[-1]
        want_row = LADDER[k]
        row_ok = all(row.get(i) == p for i, p in want_row.items()) and row.i_max <= 3
        report.check(f"ladder row {k}", row_ok, ", ".join(f"p_{i}={row.get(i)}" for i in (1, 2, 3)))
        text = to_text(c.output)
        report.check(f"x_{k}", text == OUTPUTS[k], _first_divergence(text, OUTPUTS[k]) or text)
    return report
