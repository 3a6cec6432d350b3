"""Slow, independent reference implementations used to check the fast paths."""

from fractions import Fraction
from itertools import product


def long_division_digits(y: Fraction, m: int, b: int) -> list:
    """First m base-b digits of y in [0, 1) by schoolbook long division."""
    num, den = y.numerator, y.denominator
    out = []
    for _ in range(m):
        num *= b
        d, num = divmod(num, den)
        out.append(d)
    return out


def cyclic_windows(w, n):
    L = len(w)
    return [tuple(w[(t + s) % L] for s in range(n)) for t in range(L)]


def naive_is_debruijn(w, n, b):
    return len(w) == b**n and len(set(cyclic_windows(w, n))) == b**n


def all_debruijn(b, n):
    """Every cyclic de Bruijn word of order n, by exhaustive product."""
    return [w for w in product(range(b), repeat=b**n) if naive_is_debruijn(w, n, b)]


def all_extensions(prefix, b, m, cap=None):
    """Every order-m cyclic de Bruijn word starting with prefix (backtracking)."""
    total = b**m
    prefix = list(prefix)
    found = []
    seen = set()
    for t in range(len(prefix) - m + 1):
        win = tuple(prefix[t : t + m])
        if win in seen:
            return found
        seen.add(win)
    word = prefix[:]

    def rec():
        if cap is not None and len(found) >= cap:
            return
        if len(word) == total:
            wrap = word[-(m - 1):] + word[: m - 1] if m > 1 else []
            tails = {tuple(wrap[t : t + m]) for t in range(len(wrap) - m + 1)}
            if len(tails) == m - 1 and not tails & seen:
                found.append(tuple(word))
            return
        for s in range(b):
            word.append(s)
            win = tuple(word[-m:]) if len(word) >= m else None
            if win is None or win not in seen:
                if win is not None:
                    seen.add(win)
                rec()
                if win is not None:
                    seen.discard(win)
            word.pop()

    rec()
    return found


def naive_count(v, w):
    return sum(1 for p in range(len(v) - len(w) + 1) if tuple(v[p : p + len(w)]) == tuple(w))


def naive_occupancy(x, b, k, n_windows):
    """{i: N_i} for the first n_windows length-k windows of x, by dictionary counting."""
    seen = {}
    for p in range(n_windows):
        word = tuple(x[p : p + k])
        seen[word] = seen.get(word, 0) + 1
    counts = {}
    for word in product(range(b), repeat=k):
        i = seen.get(word, 0)
        counts[i] = counts.get(i, 0) + 1
    return counts


def naive_badset(b, k, w, eps):
    eps = Fraction(eps)
    expected = Fraction(k, b ** len(w))
    return sum(1 for v in product(range(b), repeat=k) if abs(naive_count(v, w) - expected) >= eps * k)
