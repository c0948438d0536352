"""Symbols, sample paths and exact word counting over end-position ranges.

A word of length l "ends at" t when X_{t-l+1}^t equals it. Counting tables are built
level by level: a word of length l is only created by prepending a symbol to a retained
word of length l-1, and only words occurring more than the index threshold are retained.
Prepending never increases a count, so every word above the threshold is found.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

logger = logging.getLogger(__name__)

Symbol = int
Word = tuple[int, ...]

EMPTY_WORD: Word = ()


class Sequence:
    """Immutable sample path X_0..X_n of nonnegative integer symbols."""

    __slots__ = ("_symbols",)

    def __init__(self, symbols: Iterable[int] | np.ndarray = ()) -> None:
        arr = np.array(symbols, dtype=np.int64).reshape(-1)
        if arr.size and int(arr.min()) < 0:
            raise ValueError(f"Symbols must be nonnegative integers, got {int(arr.min())}")
        arr.setflags(write=False)
        self._symbols = arr

    @property
    def symbols(self) -> np.ndarray:
        return self._symbols

    @property
    def horizon(self) -> int:
        """n for a path X_0..X_n (-1 for the empty path)."""
        return len(self._symbols) - 1

    def __len__(self) -> int:
        return len(self._symbols)

    def __getitem__(self, i: int) -> int:
        return int(self._symbols[i])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sequence):
            return NotImplemented
        return np.array_equal(self._symbols, other._symbols)

    def __hash__(self) -> int:
        return hash(self._symbols.tobytes())

    def __repr__(self) -> str:
        head = " ".join(str(s) for s in self._symbols[:12])
        more = " ..." if len(self) > 12 else ""
        return f"Sequence(n={self.horizon}: {head}{more})"

    def window(self, m: int, n: int) -> Word:
        """X_m^n as a word; the empty word when m > n."""
        if m > n:
            return EMPTY_WORD
        if m < 0 or n > self.horizon:
            raise ValueError(f"Window [{m}, {n}] outside [0, {self.horizon}]")
        return tuple(int(s) for s in self._symbols[m : n + 1])

    def prefix(self, n: int) -> "Sequence":
        """X_0^n."""
        if n > self.horizon:
            raise ValueError(f"Prefix horizon {n} exceeds available data (n={self.horizon})")
        return Sequence(self._symbols[: n + 1])

    def suffix(self, length: int) -> Word:
        """The last `length` symbols as a word."""
        if length > len(self):
            raise ValueError(f"Suffix length {length} exceeds sequence length {len(self)}")
        if length == 0:
            return EMPTY_WORD
        return tuple(int(s) for s in self._symbols[-length:])


def parse_word(text: str) -> Word:
    """Parse "0101" (single digits) or "3,10,2" (comma-separated ids); "" is the empty word."""
    text = text.strip()
    if not text:
        return EMPTY_WORD
    parts = text.split(",") if "," in text else list(text)
    try:
        word = tuple(int(p) for p in parts)
    except ValueError as e:
        raise ValueError(f"Invalid word {text!r}: {e}") from e
    if any(s < 0 for s in word):
        raise ValueError(f"Invalid word {text!r}: negative symbol")
    return word


def format_word(word: Word) -> str:
    """Inverse of parse_word: digit string when every symbol is < 10."""
    if all(s < 10 for s in word):
        return "".join(str(s) for s in word)
    return ",".join(str(s) for s in word)


def encode_tokens(tokens: Iterable[str]) -> tuple[Sequence, dict[str, int]]:
    """Dense ids assigned on first appearance."""
    ids: dict[str, int] = {}
    out = []
    for tok in tokens:
        if tok not in ids:
            ids[tok] = len(ids)
        out.append(ids[tok])
    return Sequence(out), ids


def read_sequence(path: str | Path, relabel: bool = False) -> Sequence:
    """Read whitespace/newline-separated nonnegative decimal integers (no header)."""
    tokens = Path(path).read_text(encoding="utf-8").split()
    if relabel:
        return encode_tokens(tokens)[0]
    try:
        values = [int(tok) for tok in tokens]
    except ValueError as e:
        raise ValueError(f"{path}: not a sequence file ({e})") from e
    return Sequence(values)


def write_sequence(path: str | Path, seq: Sequence) -> None:
    """One symbol per line; an empty sequence gives an empty file."""
    text = "\n".join(str(int(s)) for s in seq.symbols)
    Path(path).write_text(text + "\n" if text else "", encoding="utf-8")


@dataclass
class _Level:
    # ids[t] = id of the retained word of this length ending at t, -1 otherwise
    ids: np.ndarray
    words: list[Word]
    counts: np.ndarray
    lookup: dict[Word, int] = field(default_factory=dict)


class ContextIndex:
    """Exact occurrence counts of words in X_0^n, retained above a pruning threshold.

    Levels are materialized lazily in increasing length and cached; the index is
    read-only once built and may be shared across workers.
    """

    def __init__(self, sequence: Sequence, horizon: Optional[int] = None, threshold: float = -1.0) -> None:
        n = sequence.horizon if horizon is None else horizon
        if n < 0:
            raise ValueError("ContextIndex needs at least one symbol")
        if n > sequence.horizon:
            raise ValueError(f"Horizon {n} exceeds available data (n={sequence.horizon})")
        self.source = sequence
        self.horizon = n
        self.threshold = float(threshold)
        self._x = sequence.symbols[: n + 1]
        self._levels: list[_Level] = []
        self._exhausted_at: Optional[int] = None

    def __repr__(self) -> str:
        return f"ContextIndex(n={self.horizon}, threshold={self.threshold:g}, levels={len(self._levels)})"

    def _build_root(self) -> _Level:
        total = self.horizon + 1
        if total > self.threshold:
            return _Level(
                ids=np.zeros(total, dtype=np.int64),
                words=[EMPTY_WORD],
                counts=np.array([total], dtype=np.int64),
                lookup={EMPTY_WORD: 0},
            )
        return _Level(ids=np.full(total, -1, dtype=np.int64), words=[], counts=np.zeros(0, dtype=np.int64))

    def _extend(self, prev: _Level, length: int) -> _Level:
        total = self.horizon + 1
        ids = np.full(total, -1, dtype=np.int64)
        if not prev.words or length > total:
            return _Level(ids=ids, words=[], counts=np.zeros(0, dtype=np.int64))
        # ends t in [length-1, n]: parent is the (length-1)-suffix ending at t, prepended symbol X_{t-length+1}
        parent = prev.ids[length - 1 :]
        first = self._x[: total - length + 1]
        mask = parent >= 0
        codes_parent = parent[mask]
        codes_sym = first[mask]
        base = int(self._x.max()) + 1
        if len(prev.words) * base < 2**62:
            keys = codes_parent * base + codes_sym
            uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
            uniq_parent, uniq_sym = uniq // base, uniq % base
        else:
            pairs = np.stack([codes_parent, codes_sym], axis=1)
            uniq_pairs, inverse, counts = np.unique(pairs, axis=0, return_inverse=True, return_counts=True)
            uniq_parent, uniq_sym = uniq_pairs[:, 0], uniq_pairs[:, 1]
        inverse = np.asarray(inverse).reshape(-1)
        keep = counts > self.threshold
        remap = np.full(len(counts), -1, dtype=np.int64)
        remap[keep] = np.arange(int(keep.sum()), dtype=np.int64)
        tail = ids[length - 1 :]
        tail[mask] = remap[inverse]
        words = [
            (int(s),) + prev.words[int(p)]
            for p, s in zip(uniq_parent[keep], uniq_sym[keep])
        ]
        return _Level(
            ids=ids,
            words=words,
            counts=counts[keep].astype(np.int64),
            lookup={w: i for i, w in enumerate(words)},
        )

    def _level(self, length: int) -> _Level:
        while len(self._levels) <= length:
            size = len(self._levels)
            level = self._build_root() if size == 0 else self._extend(self._levels[-1], size)
            self._levels.append(level)
            logger.debug("level %d: %d words above %.3g", size, len(level.words), self.threshold)
        return self._levels[length]

    def retained(self, length: int) -> dict[Word, int]:
        """Retained words of a given length with their full-range counts."""
        if length < 0:
            raise ValueError(f"Word length must be nonnegative, got {length}")
        if length > self.horizon + 1:
            return {}
        level = self._level(length)
        return {w: int(c) for w, c in zip(level.words, level.counts)}

    def level_sizes(self) -> list[int]:
        """Retained words per level, from the empty word up to the first empty level."""
        sizes = []
        length = 0
        while length <= self.horizon + 1:
            size = len(self._level(length).words)
            sizes.append(size)
            if size == 0:
                break
            length += 1
        return sizes

    def _direct_ends(self, w: Word) -> np.ndarray:
        ell = len(w)
        if ell > self.horizon + 1:
            return np.zeros(0, dtype=np.int64)
        windows = np.lib.stride_tricks.sliding_window_view(self._x, ell)
        hits = np.all(windows == np.asarray(w, dtype=np.int64), axis=1)
        return np.flatnonzero(hits) + ell - 1

    def end_positions(self, w: Word) -> np.ndarray:
        """Sorted end positions t of all occurrences of w in X_0^n."""
        ell = len(w)
        if ell == 0:
            return np.arange(self.horizon + 1, dtype=np.int64)
        if ell <= self.horizon + 1:
            level = self._level(ell)
            idx = level.lookup.get(tuple(w))
            if idx is not None:
                return np.flatnonzero(level.ids == idx)
        return self._direct_ends(tuple(w))

    def full_count(self, w: Word) -> int:
        """Occurrences of w ending anywhere in [|w|-1, n]."""
        ell = len(w)
        if ell > self.horizon + 1:
            return 0
        level = self._level(ell)
        idx = level.lookup.get(tuple(w))
        if idx is not None:
            return int(level.counts[idx])
        return len(self._direct_ends(tuple(w)))

    def ends_at(self, w: Word, t: int) -> bool:
        """True when X_{t-|w|+1}^t = w."""
        ell = len(w)
        if t < ell - 1 or t > self.horizon:
            return False
        return ell == 0 or bool(np.array_equal(self._x[t - ell + 1 : t + 1], np.asarray(w, dtype=np.int64)))


def count(index: ContextIndex, w: Word, end_range: tuple[int, int]) -> int:
    """Exact overlapping occurrences of w with end position in [a, b]."""
    a, b = end_range
    if a < 0 or b > index.horizon:
        raise ValueError(f"Range [{a}, {b}] outside [0, {index.horizon}]")
    if a > b:
        return 0
    w = tuple(w)
    if not w:
        return b - a + 1
    if a <= len(w) - 1 and b == index.horizon:
        return index.full_count(w)
    ends = index.end_positions(w)
    return int(np.searchsorted(ends, b, side="right") - np.searchsorted(ends, a, side="left"))


def occurrence_times(index: ContextIndex, w: Word, anchor: int, direction: str = "forward") -> list[int]:
    """End positions of w strictly after (forward) or before (backward) an occurrence at anchor.

    Ordered by increasing distance from the anchor: the successive return times
    l + lambda+_i and l - lambda-_i.
    """
    w = tuple(w)
    if not index.ends_at(w, anchor):
        raise ValueError(f"Word {format_word(w)!r} does not end at position {anchor}")
    ends = index.end_positions(w)
    if direction == "forward":
        return [int(t) for t in ends[ends > anchor]]
    if direction == "backward":
        return [int(t) for t in ends[ends < anchor][::-1]]
    raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


def frequent_words(index: ContextIndex, length: int, threshold: float) -> set[Word]:
    """Words of the given length occurring strictly more than `threshold` times (range [l-1, n])."""
    if threshold < 0:
        raise ValueError(f"Threshold must be nonnegative, got {threshold}")
    if length > index.horizon + 1:
        return set()
    source = index if threshold >= index.threshold else ContextIndex(index.source, index.horizon, threshold)
    return {w for w, c in source.retained(length).items() if c > threshold}


def successor_counts(index: ContextIndex, w: Word) -> dict[int, int]:
    """Letters observed right after the occurrences of w that end before n."""
    ends = index.end_positions(tuple(w))
    ends = ends[ends < index.horizon]
    letters, counts = np.unique(index.source.symbols[ends + 1], return_counts=True)
    return {int(a): int(c) for a, c in zip(letters, counts)}
