import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poissongen.debruijn import (
    DeBruijnError,
    DeBruijnStream,
    ImportTooShort,
    ResourceLimitError,
    complete_debruijn,
    extend_debruijn,
    from_text,
    generate_debruijn,
    is_cyclic_debruijn,
    next_order,
    read_digits,
    to_text,
    write_digits,
)

from oracles import all_debruijn, all_extensions, naive_is_debruijn

ORDER2_WORD = "012110022"
ORDER3_WORD = "012110022010200011120212221"


@pytest.mark.parametrize(
    "w, n, b, expected",
    [
        (ORDER2_WORD, 2, 3, True),
        (ORDER3_WORD, 3, 3, True),
        ("00", 1, 2, False),
        ("01", 1, 2, True),
        ("0011", 2, 2, True),
        ("0101", 2, 2, False),
    ],
)
def test_is_cyclic_debruijn(w, n, b, expected):
    assert is_cyclic_debruijn(w, n, b) is expected


def test_is_cyclic_debruijn_length_mismatch():
    with pytest.raises(DeBruijnError):
        is_cyclic_debruijn("0121", 2, 3)


@pytest.mark.parametrize("b, n, expected", [(2, 1, "01"), (2, 3, "00010111"), (3, 2, "001021122")])
def test_generate_examples(b, n, expected):
    assert to_text(generate_debruijn(b, n)) == expected


@pytest.mark.parametrize("b, n", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1), (2, 4)])
def test_generate_is_lexicographic_minimum(b, n):
    if b**n > 16:
        pytest.skip("exhaustive product too large")
    assert tuple(generate_debruijn(b, n)) == min(all_debruijn(b, n))


@pytest.mark.parametrize("b, n", [(2, 10), (3, 7), (5, 4), (10, 3)])
def test_generate_valid(b, n):
    assert is_cyclic_debruijn(generate_debruijn(b, n), n, b)


def test_generate_resource_guard():
    with pytest.raises(ResourceLimitError):
        generate_debruijn(3, 20, max_symbols=10**6)


def test_extend_paper_word():
    w = extend_debruijn(ORDER2_WORD, 2, 3)
    assert len(w) == 27
    assert to_text(w).startswith(ORDER2_WORD)
    assert is_cyclic_debruijn(w, 3, 3)


def test_extend_binary_skips_an_order():
    w = extend_debruijn("01", 1, 2)
    assert len(w) == 8 and to_text(w).startswith("01")
    assert is_cyclic_debruijn(w, 3, 2)


def test_extend_rejects_non_debruijn():
    with pytest.raises(DeBruijnError):
        extend_debruijn("00", 1, 2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_binary_extension_by_one_matches_exhaustive_search(n):
    # order n -> n+1 works for some binary words and fails for others
    outcomes = []
    for w in all_debruijn(2, n):
        possible = bool(all_extensions(w, 2, n + 1, cap=1))
        try:
            ext = complete_debruijn(bytes(w), 2, n + 1)
        except DeBruijnError:
            outcomes.append(False)
            assert not possible
        else:
            outcomes.append(True)
            assert possible and naive_is_debruijn(tuple(ext), n + 1, 2)
    if n == 3:
        assert True in outcomes and False in outcomes


@pytest.mark.parametrize("b, n", [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2)])
def test_extension_in_exhaustive_set(b, n):
    w = generate_debruijn(b, n)
    m = next_order(b, n)
    valid = set(all_extensions(w, b, m))
    assert tuple(extend_debruijn(w, n, b)) in valid
    assert all(naive_is_debruijn(e, m, b) for e in list(valid)[:50])


def test_extension_from_every_small_word():
    for w in all_debruijn(3, 1) + all_debruijn(2, 2):
        b = 3 if len(w) == 3 else 2
        n = 1 if b == 3 else 2
        ext = extend_debruijn(bytes(w), n, b)
        assert tuple(ext[: len(w)]) == w
        assert is_cyclic_debruijn(ext, next_order(b, n), b)


def test_generated_ternary_stream_orders():
    s = DeBruijnStream(3)
    s.prefix(3**9)
    assert s.certified_orders == list(range(1, 10))
    for n in range(1, 10):
        assert is_cyclic_debruijn(s.prefix(3**n), n, 3)
    assert s.prefix(3) == generate_debruijn(3, 1)


def test_generated_binary_stream_orders():
    s = DeBruijnStream(2)
    s.prefix(2**17)
    assert s.certified_orders == [1, 3, 5, 7, 9, 11, 13, 15, 17]
    for n in s.certified_orders:
        assert is_cyclic_debruijn(s.prefix(2**n), n, 2)


def test_imported_stream():
    s = DeBruijnStream(3, ORDER3_WORD)
    assert s.certified_orders == [1, 2, 3]
    assert to_text(s.prefix(10)) == "0121100220"
    longer = s.prefix(81)
    assert to_text(longer).startswith(ORDER3_WORD)
    assert is_cyclic_debruijn(longer, 4, 3)


def test_imported_stream_not_debruijn():
    s = DeBruijnStream(3, "000111222")
    assert s.certified_orders == []
    assert s.prefix(5) == bytes([0, 0, 0, 1, 1])
    with pytest.raises(ImportTooShort):
        s.prefix(10)


def test_imported_partial_prefix_is_extended_when_possible():
    s = DeBruijnStream(3, ORDER3_WORD + "0")
    assert s.certified_orders == [1, 2, 3]
    w = s.prefix(81)
    assert to_text(w).startswith(ORDER3_WORD + "0") and is_cyclic_debruijn(w, 4, 3)


def test_stream_resource_guard():
    s = DeBruijnStream(3, max_symbols=100)
    s.prefix(81)
    with pytest.raises(ResourceLimitError):
        s.prefix(200)


@settings(max_examples=20, deadline=None)
@given(st.randoms(use_true_random=False))
def test_prefix_stability(rnd):
    b = rnd.choice([2, 3])
    s = DeBruijnStream(b)
    reference = DeBruijnStream(b).prefix(3**7 if b == 3 else 2**11)
    lengths = sorted(rnd.randint(1, len(reference)) for _ in range(50))
    for length in lengths:
        assert s.prefix(length) == reference[:length]


def test_prefix_stability_interleaved_1000():
    rnd = random.Random(7)
    s = DeBruijnStream(3)
    full = DeBruijnStream(3).prefix(3**8)
    seen = b""
    limit = 1
    for _ in range(1000):
        limit = min(len(full), limit + rnd.randint(0, 8))
        got = s.prefix(rnd.randint(1, limit))
        overlap = min(len(got), len(seen))
        assert got[:overlap] == seen[:overlap]
        if len(got) > len(seen):
            seen = got
    assert seen == full[: len(seen)]


def test_digit_file_roundtrip(tmp_path):
    path = tmp_path / "a.txt"
    path.write_text("0121\n1002\n2\n")
    assert to_text(read_digits(path, 3)) == ORDER2_WORD
    write_digits(tmp_path / "b.txt", from_text(ORDER3_WORD, 3))
    assert read_digits(tmp_path / "b.txt", 3) == from_text(ORDER3_WORD, 3)
    assert from_text("0a1z", 36) == bytes([0, 10, 1, 35])
    with pytest.raises(DeBruijnError):
        from_text("0123", 3)
