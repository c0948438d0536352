"""Exact ground truth for explicit finite-alphabet order-K Markov chains.

Conditionals, memory-word classification and Delta_k are computed from the kernel and
the stationary K-block law. Extensions are only checked up to total length K: beyond
the order, conditioning never changes the law.
"""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import networkx as nx
import numpy as np

from .seqcore import EMPTY_WORD, Sequence, Word, format_word, parse_word

logger = logging.getLogger(__name__)

ROW_TOL = 1e-12
STATIONARY_TOL = 1e-10
EQUALITY_TOL = 1e-9


class ReducibleChainError(ValueError):
    """The block chain has no unique stationary law."""


class ZeroProbabilityError(ValueError):
    """Conditioning on a word or path of probability zero."""


class ChainSpecError(ValueError):
    """Malformed chain specification."""


class StationaryLawError(ValueError):
    """The solved stationary law does not satisfy pi P = pi within STATIONARY_TOL."""


@dataclass(frozen=True)
class ExplicitChain:
    order: int
    alphabet_size: int
    kernel: Mapping[Word, np.ndarray]
    stationary: Mapping[Word, float]

    @property
    def contexts(self) -> list[Word]:
        return list(itertools.product(range(self.alphabet_size), repeat=self.order))


@dataclass(frozen=True)
class MemoryWordReport:
    minimal_words: frozenset[Word]
    longest_minimal_length: int
    shortest_memory_length: int
    memory_words: frozenset[Word] = frozenset()


def _block_transitions(kernel: Mapping[Word, np.ndarray], order: int, alphabet_size: int) -> tuple[list[Word], np.ndarray]:
    states = list(itertools.product(range(alphabet_size), repeat=order))
    position = {s: i for i, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for s in states:
        row = kernel[s]
        for y in range(alphabet_size):
            nxt = (s + (y,))[1:] if order else EMPTY_WORD
            P[position[s], position[nxt]] += row[y]
    return states, P


def _closed_classes(P: np.ndarray) -> list[set[int]]:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(P)))
    graph.add_edges_from(zip(*(idx.tolist() for idx in np.nonzero(P > 0))))
    return [set(c) for c in nx.attracting_components(graph)]


def _solve_stationary(sub: np.ndarray) -> np.ndarray:
    m = len(sub)
    # pi (P - I) = 0 with sum(pi) = 1
    A = np.vstack([(sub - np.eye(m)).T, np.ones((1, m))])
    b = np.zeros(m + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_block_law(kernel: Mapping[Word, Any], order: int, alphabet_size: int) -> dict[Word, float]:
    """Unique stationary law of the K-block chain; ReducibleChainError if not unique."""
    kernel = {tuple(k): np.asarray(v, dtype=float) for k, v in kernel.items()}
    states, P = _block_transitions(kernel, order, alphabet_size)
    classes = _closed_classes(P)
    if len(classes) != 1:
        raise ReducibleChainError(
            f"Chain is reducible: {len(classes)} closed classes, no unique stationary law"
        )
    members = sorted(classes[0])
    sub = P[np.ix_(members, members)]
    pi_sub = _solve_stationary(sub)
    pi = np.zeros(len(states))
    pi[members] = pi_sub
    residual = float(np.max(np.abs(pi @ P - pi)))
    if residual > STATIONARY_TOL:
        raise StationaryLawError(f"Stationary law residual {residual:.3g} exceeds {STATIONARY_TOL:g}")
    logger.debug("stationary law residual %.3g", residual)
    return {s: float(p) for s, p in zip(states, pi)}


def make_chain(order: int, alphabet_size: int, kernel: Mapping[Word, Any]) -> ExplicitChain:
    """Validate a kernel (one row per context of length `order`) and attach its stationary law."""
    if order < 0:
        raise ChainSpecError(f"order must be nonnegative, got {order}")
    if alphabet_size < 1:
        raise ChainSpecError(f"alphabet_size must be positive, got {alphabet_size}")
    rows: dict[Word, np.ndarray] = {}
    for ctx in itertools.product(range(alphabet_size), repeat=order):
        if ctx not in kernel:
            raise ChainSpecError(f"Missing kernel row for context {format_word(ctx)!r}")
        row = np.asarray(kernel[ctx], dtype=float)
        if row.shape != (alphabet_size,):
            raise ChainSpecError(f"Row {format_word(ctx)!r} has {row.size} entries, expected {alphabet_size}")
        if np.any(row < 0) or abs(row.sum() - 1.0) > ROW_TOL:
            raise ChainSpecError(f"Row {format_word(ctx)!r} is not a probability vector: {row.tolist()}")
        row.setflags(write=False)
        rows[ctx] = row
    extra = set(map(tuple, kernel)) - set(rows)
    if extra:
        raise ChainSpecError(f"Kernel rows for unknown contexts: {sorted(format_word(c) for c in extra)}")
    return ExplicitChain(order, alphabet_size, rows, stationary_block_law(rows, order, alphabet_size))


def load_chain(path: str | Path) -> ExplicitChain:
    """Chain specification JSON: {"order": K, "alphabet_size": A, "kernel": {"<context>": [...]}}."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        order = int(raw["order"])
        alphabet_size = int(raw["alphabet_size"])
        kernel = {parse_word(ctx): row for ctx, row in raw["kernel"].items()}
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ChainSpecError(f"{path}: invalid chain specification ({e})") from e
    return make_chain(order, alphabet_size, kernel)


def chain_to_dict(chain: ExplicitChain) -> dict:
    return {
        "order": chain.order,
        "alphabet_size": chain.alphabet_size,
        "kernel": {format_word(ctx): [float(p) for p in chain.kernel[ctx]] for ctx in chain.contexts},
    }


def word_probability(chain: ExplicitChain, w: Word) -> float:
    """Stationary probability P(X_{-|w|+1}^0 = w)."""
    w = tuple(w)
    if any(s < 0 or s >= chain.alphabet_size for s in w):
        return 0.0
    K = chain.order
    if len(w) <= K:
        tail = len(w)
        return float(sum(p for block, p in chain.stationary.items() if block[K - tail :] == w))
    p = chain.stationary[w[:K]]
    for j in range(K, len(w)):
        if p == 0.0:
            break
        p *= float(chain.kernel[w[j - K : j]][w[j]])
    return float(p)


def exact_conditional(chain: ExplicitChain, w: Word, x: int) -> float:
    """P(X_1 = x | X_{-|w|+1}^0 = w)."""
    w = tuple(w)
    if len(w) >= chain.order:
        if word_probability(chain, w) <= 0.0:
            raise ZeroProbabilityError(f"Word {format_word(w)!r} has probability zero")
        if not 0 <= x < chain.alphabet_size:
            return 0.0
        return float(chain.kernel[w[len(w) - chain.order :]][x])
    pw = word_probability(chain, w)
    if pw <= 0.0:
        raise ZeroProbabilityError(f"Word {format_word(w)!r} has probability zero")
    return word_probability(chain, w + (int(x),)) / pw


def _all_words(alphabet_size: int, length: int) -> list[Word]:
    return list(itertools.product(range(alphabet_size), repeat=length))


def is_memory_word(chain: ExplicitChain, w: Word) -> bool:
    """True iff every positive-probability left extension of w leaves the next-symbol law unchanged."""
    w = tuple(w)
    if word_probability(chain, w) <= 0.0:
        raise ZeroProbabilityError(f"Word {format_word(w)!r} has probability zero")
    A = chain.alphabet_size
    base = [exact_conditional(chain, w, y) for y in range(A)]
    for extra in range(1, chain.order - len(w) + 1):
        for z in _all_words(A, extra):
            zw = z + w
            if word_probability(chain, zw) <= 0.0:
                continue
            for y in range(A):
                if word_probability(chain, zw + (y,)) <= 0.0:
                    continue
                if abs(exact_conditional(chain, zw, y) - base[y]) > EQUALITY_TOL:
                    return False
    return True


def memory_word_report(chain: ExplicitChain) -> MemoryWordReport:
    """Minimal memory words and the two extremal lengths (longest minimal, shortest)."""
    memory: set[Word] = set()
    for length in range(chain.order + 1):
        for w in _all_words(chain.alphabet_size, length):
            if word_probability(chain, w) > 0.0 and is_memory_word(chain, w):
                memory.add(w)
    minimal = {w for w in memory if not any(w[j:] in memory for j in range(1, len(w) + 1))}
    return MemoryWordReport(
        minimal_words=frozenset(minimal),
        longest_minimal_length=max(len(w) for w in minimal),
        shortest_memory_length=min(len(w) for w in minimal),
        memory_words=frozenset(memory),
    )


def delta_exact(chain: ExplicitChain, k: int) -> float:
    """Delta_k over positive-probability extensions up to total length K; 0 for k >= K."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if k >= chain.order:
        return 0.0
    best = 0.0
    for i in range(1, chain.order - k + 1):
        for u in _all_words(chain.alphabet_size, k + i + 1):
            if word_probability(chain, u) <= 0.0:
                continue
            context, x = u[:-1], u[-1]
            best = max(best, abs(exact_conditional(chain, context[i:], x) - exact_conditional(chain, context, x)))
    return best


def delta_profile(chain: ExplicitChain) -> list[float]:
    """[Delta_0, ..., Delta_K]."""
    return [delta_exact(chain, k) for k in range(chain.order + 1)]


def path_is_possible(chain: ExplicitChain, seq: Sequence) -> bool:
    """Positive stationary probability of the whole path."""
    K = chain.order
    x = [int(s) for s in seq.symbols]
    if any(s >= chain.alphabet_size for s in x):
        return False
    if word_probability(chain, tuple(x[:K])) <= 0.0:
        return False
    return all(chain.kernel[tuple(x[t - K : t])][x[t]] > 0.0 for t in range(K, len(x)))


def suffix_memory_length(chain: ExplicitChain, seq: Sequence) -> int:
    """Length of the shortest suffix of the path that is a memory word."""
    if not path_is_possible(chain, seq):
        raise ZeroProbabilityError("Sample path has probability zero under the chain")
    for k in range(min(len(seq), chain.order) + 1):
        if is_memory_word(chain, seq.suffix(k)):
            return k
    raise ValueError(
        f"Path of length {len(seq)} is too short: no suffix is a memory word of the order-{chain.order} chain"
    )
