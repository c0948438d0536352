"""Shared fixtures: fixture chains, alternating paths and naive unpruned references."""
from __future__ import annotations

import itertools
from collections import defaultdict
from pathlib import Path

import pytest

from memwords.markov_oracle import ExplicitChain, load_chain
from memwords.seqcore import Sequence

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def alternating(length: int) -> Sequence:
    return Sequence([t % 2 for t in range(length)])


@pytest.fixture
def alt10() -> Sequence:
    return alternating(10)


@pytest.fixture
def alt100() -> Sequence:
    return alternating(100)


@pytest.fixture
def chain_path():
    def _path(name: str) -> Path:
        return FIXTURES / f"{name}.json"

    return _path


@pytest.fixture
def chain(chain_path):
    def _load(name: str) -> ExplicitChain:
        return load_chain(chain_path(name))

    return _load


class NaiveEstimator:
    """Unpruned estimator over every word of X_0^n, by direct end-position lists."""

    def __init__(self, symbols, n: int) -> None:
        self.x = [int(s) for s in symbols[: n + 1]]
        self.n = n
        self.ends: dict[tuple, list[int]] = defaultdict(list)
        for t in range(n + 1):
            for start in range(t + 1):
                self.ends[tuple(self.x[start : t + 1])].append(t)
        self.by_length: dict[int, list[tuple]] = defaultdict(list)
        for w in self.ends:
            self.by_length[len(w)].append(w)

    def count(self, w, lo: int, hi: int) -> int:
        w = tuple(w)
        if not w:
            return max(0, hi - lo + 1)
        return sum(1 for t in self.ends.get(w, ()) if lo <= t <= hi)

    def p_hat(self, z, x) -> float:
        z = tuple(z)
        k = len(z)
        num = self.count(z + (x,), k, self.n)
        den = self.n + 1 if k == 0 else self.count(z, k - 1, self.n - 1)
        num, den = max(num - 1, 0), max(den - 1, 0)
        return 0.0 if den == 0 else num / den

    def discrepancy(self, k: int, gamma: float) -> float:
        tau = float(self.n) ** (1.0 - gamma)
        best = 0.0
        for i in range(1, self.n + 1):
            length = k + i + 1
            for u in self.by_length.get(length, ()):
                if len(self.ends[u]) <= tau:
                    continue
                context, sym = u[:-1], u[-1]
                best = max(best, abs(self.p_hat(context[i:], sym) - self.p_hat(context, sym)))
        return best

    def chi(self, gamma: float, beta: float) -> int:
        if self.n == 0:
            return 0
        limit = float(self.n) ** (-beta)
        for k in range(self.n):
            if self.discrepancy(k, gamma) <= limit:
                return k
        return self.n


@pytest.fixture
def naive():
    return NaiveEstimator


def brute_force_probability(chain: ExplicitChain, w, total: int) -> float:
    """P(w) by summing stationary path weights of every word of length `total` ending in w."""
    w = tuple(w)
    K, A = chain.order, chain.alphabet_size
    p = 0.0
    for v in itertools.product(range(A), repeat=total - len(w)):
        path = v + w
        weight = chain.stationary[path[:K]]
        for j in range(K, len(path)):
            weight *= float(chain.kernel[path[j - K : j]][path[j]])
        p += weight
    return p


@pytest.fixture
def path_probability():
    return brute_force_probability
