"""Exact finite-k invariants of a completed construction, as named checks."""

from fractions import Fraction

from poissongen.construction import ladder_rows, segment_report
from poissongen.exactnum import compare
from poissongen.stats import occupancy, window_count


def construction_checks(c, with_histograms=True):
    """``[(name, ok, detail)]`` over every completed step of ``c``."""
    b = c.base
    profile = c.profile
    out = []

    def add(name, bad):
        out.append((name, not bad, f"fails at {bad[:3]}" if bad else ""))

    # the ladder carried by the state equals the independent recursion
    fresh = ladder_rows(profile, c.schedule, c.k)
    add("ladder recursion", [r.k for r, f in zip(c.ladder, fresh) if r != f])

    report = segment_report(c)
    add(
        "segment lengths equal ladder",
        [
            (s.k, i)
            for s, row in zip(report, c.ladder)
            for i in set(s.relative_lengths) | set(row.entries)
            if s.relative_lengths.get(i, 0) != row.get(i)
        ],
    )

    bad_bounds = []
    for row in c.ladder:
        slack = Fraction(row.k, b ** c.schedule(row.k))
        for i in range(1, row.i_max + 4):
            pik = row.get(i)
            if pik < 0 or compare(pik, profile.p(i)) > 0 or compare(pik + slack, profile.p(i)) < 0:
                bad_bounds.append((row.k, i))
    add("p_i - k/b^g(k) <= p_i^k <= p_i", bad_bounds)

    add("sum p_i^k = 1", [r.k for r in c.ladder if r.p0 < 0 or r.p0 + sum(r.entries.values()) != 1])
    add(
        "|x_k| = b^k sum i p_i^k",
        [r.k for r in c.ladder if c.lengths[r.k] != b**r.k * sum(i * p for i, p in r.entries.items())],
    )

    spans = sorted((s.start, s.start + s.length) for s in c.segments)
    add("blocks disjoint", [a for a, nxt in zip(spans, spans[1:]) if a[1] > nxt[0]])
    add("blocks inside A_k", [s.step for s in c.segments if s.start + s.length > b**s.step])
    if b == 2:
        add("blocks inside A[1..2^(k-1)]", [s.step for s in c.segments if s.start + s.length > 2 ** (s.step - 1)])

    bad_capacity = []
    for k in range(2, c.k + 1):
        total = sum(Fraction(s.length, b**k) for s in c.segments if s.step == k)
        if total > Fraction(b - 1, b):
            bad_capacity.append(k)
    add("capacity <= (b-1)/b", bad_capacity)

    if with_histograms:
        # only levels whose windows are already generated; never pulls more steps
        levels = histogram_levels(c)
        bad = [k for k in levels if not occupancy(c, b, k, c.lam).check()]
        out.append(("histogram identities", not bad, f"levels {levels}" if not bad else f"fails at {bad[:3]}"))
    return out


def failed(checks):
    return [f"{name}: {detail}" for name, ok, detail in checks if not ok]


def histogram_levels(c):
    b = c.base
    levels = []
    for k in range(1, len(c.ladder) + 1):
        n = window_count(b, k, c.lam)
        if 0 < n and n + k - 1 <= len(c.output):
            levels.append(k)
    return levels
