import numpy as np
import pytest

from memwords.seqcore import (
    EMPTY_WORD,
    ContextIndex,
    Sequence,
    count,
    encode_tokens,
    format_word,
    frequent_words,
    occurrence_times,
    parse_word,
    read_sequence,
    successor_counts,
    write_sequence,
)


def _naive_count(x, w, a, b):
    ell = len(w)
    return sum(1 for t in range(max(a, ell - 1), b + 1) if tuple(x[t - ell + 1 : t + 1]) == tuple(w))


def test_sequence_rejects_negative_symbols():
    with pytest.raises(ValueError, match="nonnegative"):
        Sequence([0, 1, -2])


def test_sequence_is_read_only(alt10):
    with pytest.raises(ValueError):
        alt10.symbols[0] = 5


def test_window_and_prefix(alt10):
    assert alt10.horizon == 9
    assert alt10.window(2, 4) == (0, 1, 0)
    assert alt10.window(5, 3) == EMPTY_WORD
    assert alt10.prefix(3) == Sequence([0, 1, 0, 1])
    assert alt10.suffix(2) == (0, 1)
    with pytest.raises(ValueError, match="exceeds available data"):
        alt10.prefix(10)


def test_count_examples(alt10):
    index = ContextIndex(alt10)
    assert count(index, (0, 1), (1, 9)) == 5
    assert count(index, EMPTY_WORD, (0, 9)) == 10
    assert count(index, (1, 0, 1, 0), (4, 9)) == 3


def test_count_rejects_range_outside_path(alt10):
    with pytest.raises(ValueError, match="outside"):
        count(ContextIndex(alt10), (0,), (0, 10))


def test_count_matches_naive_scan_on_random_paths():
    rng = np.random.default_rng(7)
    for _ in range(40):
        alphabet = int(rng.integers(2, 4))
        x = rng.integers(0, alphabet, size=int(rng.integers(1, 201))).tolist()
        seq = Sequence(x)
        n = seq.horizon
        full = ContextIndex(seq)
        pruned = ContextIndex(seq, threshold=float(rng.integers(0, 10)))
        for _ in range(30):
            ell = int(rng.integers(1, 7))
            w = tuple(rng.integers(0, alphabet, size=ell).tolist())
            a = int(rng.integers(0, n + 1))
            b = int(rng.integers(a, n + 1))
            expected = _naive_count(x, w, a, b)
            assert count(full, w, (a, b)) == expected
            assert count(pruned, w, (a, b)) == expected


def test_prepend_never_increases_count():
    rng = np.random.default_rng(11)
    seq = Sequence(rng.integers(0, 3, size=150))
    index = ContextIndex(seq)
    for w, c in index.retained(2).items():
        for a in range(3):
            assert index.full_count((a,) + w) <= c


def test_occurrence_times_examples(alt10):
    index = ContextIndex(alt10)
    assert occurrence_times(index, (0, 1), 1, "forward") == [3, 5, 7, 9]
    assert occurrence_times(index, (0, 1), 1, "backward") == []
    assert occurrence_times(index, (0, 1), 5, "backward") == [3, 1]


def test_occurrence_times_cover_every_end_position(alt10):
    index = ContextIndex(alt10)
    w = (1, 0)
    anchor = 4
    backward = occurrence_times(index, w, anchor, "backward")
    forward = occurrence_times(index, w, anchor, "forward")
    assert backward[::-1] + [anchor] + forward == index.end_positions(w).tolist()


def test_occurrence_times_requires_occurrence_at_anchor(alt10):
    with pytest.raises(ValueError, match="does not end at position 2"):
        occurrence_times(ContextIndex(alt10), (0, 1), 2)


def test_frequent_words_examples(alt10):
    index = ContextIndex(alt10)
    assert frequent_words(index, 2, 3) == {(0, 1), (1, 0)}
    assert frequent_words(index, 5, 3) == set()
    assert frequent_words(index, 1, alt10.horizon + 1) == set()


def test_frequent_words_empty_level_stays_empty():
    rng = np.random.default_rng(3)
    seq = Sequence(rng.integers(0, 2, size=120))
    index = ContextIndex(seq, threshold=6.0)
    first_empty = next(ell for ell in range(1, 122) if not frequent_words(index, ell, 6.0))
    for ell in range(first_empty, first_empty + 5):
        assert frequent_words(index, ell, 6.0) == set()


def test_level_sizes_on_alternating_path(alt10):
    assert ContextIndex(alt10, threshold=3.0).level_sizes() == [1, 2, 2, 2, 1, 0]


def test_successor_counts(alt10):
    index = ContextIndex(alt10)
    assert successor_counts(index, (0,)) == {1: 5}
    # the occurrence of "1" ending at n has no successor
    assert successor_counts(index, (1,)) == {0: 4}


def test_words_parse_and_format():
    assert parse_word("0101") == (0, 1, 0, 1)
    assert parse_word("3,10,2") == (3, 10, 2)
    assert parse_word("") == EMPTY_WORD
    assert format_word((3, 10, 2)) == "3,10,2"
    assert format_word((1, 0)) == "10"
    with pytest.raises(ValueError, match="Invalid word"):
        parse_word("0a1")


def test_sequence_files(tmp_path):
    path = tmp_path / "seq.txt"
    write_sequence(path, Sequence([3, 0, 12]))
    assert path.read_text() == "3\n0\n12\n"
    assert read_sequence(path) == Sequence([3, 0, 12])

    empty = tmp_path / "empty.txt"
    write_sequence(empty, Sequence())
    assert empty.read_text() == ""
    assert len(read_sequence(empty)) == 0


def test_read_sequence_relabels_tokens(tmp_path):
    path = tmp_path / "tokens.txt"
    path.write_text("a b\na c  b\n")
    assert read_sequence(path, relabel=True) == Sequence([0, 1, 0, 2, 1])
    with pytest.raises(ValueError, match="not a sequence file"):
        read_sequence(path)


def test_encode_tokens_assigns_ids_on_first_appearance():
    seq, ids = encode_tokens(["x", "y", "x", "z"])
    assert ids == {"x": 0, "y": 1, "z": 2}
    assert seq == Sequence([0, 1, 0, 2])
