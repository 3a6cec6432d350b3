"""Cyclic de Bruijn words and infinite de Bruijn sequences.

Words are ``bytes`` objects whose items are symbol values ``0..b-1`` (not
ASCII characters); :func:`from_text` and :func:`to_text` convert to the
digit-file alphabet.
"""

from __future__ import annotations

import os
from typing import Iterable, Optional, Sequence, Union

import numpy as np

ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"

#: generate/extend refuse words longer than this
DEFAULT_MAX_SYMBOLS = 2**26

WordLike = Union[bytes, bytearray, Sequence[int], str]


class DeBruijnError(ValueError):
    pass


class ResourceLimitError(DeBruijnError):
    pass


class ImportTooShort(DeBruijnError):
    pass


# ---------------------------------------------------------------------------
# text conversion


def from_text(text: str, b: int) -> bytes:
    """Parse digit-file text; whitespace is ignored."""
    if not 2 <= b <= len(ALPHABET):
        raise DeBruijnError(f"base must be in 2..{len(ALPHABET)}")
    table = {c: v for v, c in enumerate(ALPHABET[:b])}
    out = bytearray()
    for ch in text:
        if ch.isspace():
            continue
        try:
            out.append(table[ch.lower()])
        except KeyError:
            raise DeBruijnError(f"symbol {ch!r} is not a base-{b} digit") from None
    return bytes(out)


def to_text(word: Iterable[int]) -> str:
    return "".join(ALPHABET[s] for s in word)


def as_word(w: WordLike, b: int) -> bytes:
    if isinstance(w, str):
        return from_text(w, b)
    word = bytes(w)
    if word and max(word) >= b:
        raise DeBruijnError(f"symbol {max(word)} out of range for base {b}")
    return word


def read_digits(path: Union[str, os.PathLike], b: int) -> bytes:
    with open(path, encoding="ascii") as fh:
        return from_text(fh.read(), b)


def write_digits(path: Union[str, os.PathLike], word: Iterable[int]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(to_text(word))
        fh.write("\n")


# ---------------------------------------------------------------------------
# words


def window_codes(word: bytes, b: int, n: int, cyclic: bool = False) -> np.ndarray:
    """Base-b integer code of every length-``n`` window of ``word``."""
    arr = np.frombuffer(bytes(word), dtype=np.uint8).astype(np.int64)
    if cyclic:
        arr = np.concatenate([arr, arr[: n - 1]])
    count = len(arr) - n + 1
    if count <= 0:
        return np.zeros(0, dtype=np.int64)
    codes = np.zeros(count, dtype=np.int64)
    for s in range(n):
        codes = codes * b + arr[s : s + count]
    return codes


def is_cyclic_debruijn(w: WordLike, n: int, b: int) -> bool:
    """True iff every length-``n`` word occurs exactly once in the circular ``w``."""
    word = as_word(w, b)
    if n < 1:
        raise DeBruijnError("order must be positive")
    if len(word) != b**n:
        raise DeBruijnError(f"length {len(word)} != {b}^{n}")
    codes = window_codes(word, b, n, cyclic=True)
    return len(np.unique(codes)) == b**n


def _guard(b: int, n: int, max_symbols: int) -> None:
    if b < 2:
        raise DeBruijnError("base must be at least 2")
    if n < 1:
        raise DeBruijnError("order must be positive")
    if b**n > max_symbols:
        raise ResourceLimitError(f"{b}^{n} symbols exceeds limit {max_symbols}")


def generate_debruijn(b: int, n: int, max_symbols: int = DEFAULT_MAX_SYMBOLS) -> bytes:
    """Lexicographically least cyclic de Bruijn word of order ``n``.

    Concatenation of the Lyndon words over ``0..b-1`` whose length divides
    ``n``, in lexicographic order.
    """
    _guard(b, n, max_symbols)
    out = bytearray()
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if n % m == 0:
            out.extend(w)
        while len(w) < n:
            w.append(w[-m])
        while w and w[-1] == b - 1:
            w.pop()
    return bytes(out)


def complete_debruijn(prefix: WordLike, b: int, m: int, max_symbols: int = DEFAULT_MAX_SYMBOLS) -> bytes:
    """Some cyclic de Bruijn word of order ``m`` that starts with ``prefix``.

    The order-``m`` word is an Eulerian circuit of the graph on ``Omega^(m-1)``
    whose edges are ``Omega^m``.  The prefix fixes the opening trail; the rest
    is completed with Hierholzer's algorithm, always trying the smallest
    unused symbol first.  Raises :class:`DeBruijnError` if no completion
    exists.
    """
    _guard(b, m, max_symbols)
    word = as_word(prefix, b)
    d = m - 1
    total = b**m
    if len(word) < d:
        raise DeBruijnError(f"prefix of length {len(word)} too short to pin a start vertex")
    if len(word) > total:
        raise DeBruijnError("prefix longer than the target word")
    nverts = b**d

    used = bytearray(total)
    if len(word) >= m:
        codes = window_codes(word, b, m)
        if len(np.unique(codes)) != len(codes):
            raise DeBruijnError(f"prefix repeats a word of length {m}")
        used_np = np.frombuffer(used, dtype=np.uint8)
        used_np[codes] = 1
        del used_np
    remaining = total - (len(word) - d)

    cur = 0
    for s in word[len(word) - d :]:
        cur = cur * b + s

    # iterative Hierholzer; each stack entry is (vertex, symbol of edge in)
    ptr = [0] * nverts
    stack_v = [cur]
    stack_s = [-1]
    trail: list[int] = []
    while stack_v:
        v = stack_v[-1]
        p = ptr[v]
        base_code = v * b
        while p < b and used[base_code + p]:
            p += 1
        if p < b:
            ptr[v] = p + 1
            used[base_code + p] = 1
            stack_v.append((base_code + p) % nverts)
            stack_s.append(p)
        else:
            ptr[v] = b
            stack_v.pop()
            trail.append(stack_s.pop())
    trail.pop()  # sentinel of the start vertex
    trail.reverse()

    if len(trail) != remaining:
        raise DeBruijnError(f"no order-{m} de Bruijn word extends this prefix")
    body = trail[: remaining - d]
    wrap = bytes(trail[remaining - d :]) if d else b""
    if wrap != word[:d]:
        raise DeBruijnError(f"no order-{m} de Bruijn word extends this prefix")
    return word + bytes(body)


def extend_debruijn(w: WordLike, n: int, b: int, max_symbols: int = DEFAULT_MAX_SYMBOLS) -> bytes:
    """Extend an order-``n`` cyclic de Bruijn word to order ``n+1`` (``n+2`` if b=2)."""
    word = as_word(w, b)
    if len(word) != b**n or not is_cyclic_debruijn(word, n, b):
        raise DeBruijnError(f"input is not a cyclic de Bruijn word of order {n}")
    target = n + 2 if b == 2 else n + 1
    result = complete_debruijn(word, b, target, max_symbols)
    if not is_cyclic_debruijn(result, target, b):
        raise AssertionError("extension produced an invalid word")
    return result


def next_order(b: int, n: int) -> int:
    return n + 2 if b == 2 else n + 1


def _certified_orders(word: bytes, b: int) -> list[int]:
    orders = []
    n = 1
    while b**n <= len(word):
        if not is_cyclic_debruijn(word[: b**n], n, b):
            break
        orders.append(n)
        n = next_order(b, n)
    return orders


class DeBruijnStream:
    """A lazily extended infinite de Bruijn sequence.

    For ``b >= 3`` the prefix of length ``b^n`` is certified for orders
    ``1, 2, 3, ...``; for ``b = 2`` only odd orders are certified.  A stream
    either starts from the canonical order-1 word or from an imported prefix;
    extension never changes symbols already in the buffer.
    """

    def __init__(
        self,
        b: int,
        prefix: Optional[WordLike] = None,
        max_symbols: int = DEFAULT_MAX_SYMBOLS,
    ):
        if b < 2:
            raise DeBruijnError("base must be at least 2")
        self.base = b
        self.max_symbols = max_symbols
        if prefix is None:
            self.origin = "generated"
            self._buffer = bytearray(generate_debruijn(b, 1))
            self.certified_orders = [1]
        else:
            self.origin = "imported"
            self._buffer = bytearray(as_word(prefix, b))
            self.certified_orders = _certified_orders(bytes(self._buffer), b)

    def __len__(self) -> int:
        return len(self._buffer)

    @property
    def buffer(self) -> bytes:
        return bytes(self._buffer)

    def _extend_once(self) -> None:
        if not self.certified_orders:
            raise ImportTooShort(
                f"imported prefix of length {len(self._buffer)} has no certified order to extend from"
            )
        b = self.base
        top = self.certified_orders[-1]
        target = next_order(b, top)
        if b**target > self.max_symbols:
            raise ResourceLimitError(f"{b}^{target} symbols exceeds limit {self.max_symbols}")
        try:
            new = complete_debruijn(bytes(self._buffer), b, target, self.max_symbols)
        except DeBruijnError as exc:
            raise ImportTooShort(
                f"imported prefix cannot be extended beyond order {top}: {exc}"
            ) from None
        self._buffer.extend(new[len(self._buffer) :])
        self.certified_orders.append(target)

    def ensure(self, length: int) -> None:
        if length > self.max_symbols:
            raise ResourceLimitError(f"{length} symbols exceeds limit {self.max_symbols}")
        while len(self._buffer) < length:
            self._extend_once()

    def prefix(self, length: int) -> bytes:
        """The first ``length`` symbols, extending the buffer if needed."""
        if length < 0:
            raise ValueError("length must be non-negative")
        self.ensure(length)
        return bytes(self._buffer[:length])

    def slice(self, start: int, stop: int) -> bytes:
        """Symbols at 0-based positions ``start..stop-1``."""
        self.ensure(stop)
        return bytes(self._buffer[start:stop])

    def certify_order(self, n: int) -> None:
        """Extend until the order-``n`` prefix (or the next odd one for b=2) is certified."""
        while not self.certified_orders or self.certified_orders[-1] < n:
            self._extend_once()


def stream_prefix(s: DeBruijnStream, length: int) -> bytes:
    return s.prefix(length)
