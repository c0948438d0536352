"""Empirical conditionals, discrepancies and the order estimator chi_n.

All statistics are functions of X_0^n held in a ContextIndex pruned at n^(1-gamma);
every word they look up is a factor of a word above that threshold, so pruning is exact.
"""
from __future__ import annotations

import functools
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .seqcore import ContextIndex, Sequence, Word

logger = logging.getLogger(__name__)

DEFAULT_GAMMA = 0.5
DEFAULT_BETA = 0.2
DEFAULT_CHECKPOINT_RATIO = 1.5


@dataclass(frozen=True)
class EstimatorParams:
    gamma: float = DEFAULT_GAMMA
    beta: float = DEFAULT_BETA
    checkpoints: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0.0 < self.beta < (1.0 - self.gamma) / 2.0:
            raise ValueError(
                f"beta must lie in (0, (1-gamma)/2) = (0, {(1.0 - self.gamma) / 2.0:g}), got {self.beta}"
            )
        cps = tuple(int(c) for c in self.checkpoints)
        if any(c < 0 for c in cps):
            raise ValueError(f"Checkpoints must be nonnegative, got {list(cps)}")
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError(f"Checkpoints must be strictly increasing, got {list(cps)}")
        object.__setattr__(self, "checkpoints", cps)

    def support_threshold(self, n: int) -> float:
        """n^(1-gamma): words must occur strictly more often to enter S_k^n."""
        return float(n) ** (1.0 - self.gamma)

    def acceptance_threshold(self, n: int) -> float:
        """n^(-beta)."""
        return float(n) ** (-self.beta)


@dataclass(frozen=True)
class DiscrepancyReport:
    k: int
    value: float = 0.0
    # (long word z_{-k-i+1}^0, next symbol x)
    witness: Optional[tuple[Word, int]] = None


def default_checkpoints(n_max: int, ratio: float = DEFAULT_CHECKPOINT_RATIO) -> tuple[int, ...]:
    """ceil(ratio^t) for t = 0, 1, ... below n_max, then n_max itself."""
    if ratio <= 1.0:
        raise ValueError(f"Checkpoint ratio must exceed 1, got {ratio}")
    if n_max < 1:
        return (n_max,) if n_max == 0 else ()
    out: list[int] = []
    t = 0
    while True:
        c = math.ceil(ratio**t)
        if c >= n_max:
            break
        if not out or c > out[-1]:
            out.append(c)
        t += 1
    out.append(n_max)
    return tuple(out)


def estimation_index(seq: Sequence, n: int, gamma: float) -> ContextIndex:
    """Index of X_0^n pruned at n^(1-gamma)."""
    return ContextIndex(seq, n, float(n) ** (1.0 - gamma))


def _ratio(num: int, den: int) -> float:
    num, den = max(num - 1, 0), max(den - 1, 0)
    return 0.0 if den == 0 else num / den


def empirical_conditional(index: ContextIndex, z: Word, x: int) -> float:
    """p_hat_n(x | z) = (N-1)+ / (D-1)+, 0/0 = 0.

    N counts (z, x) ending at t+1 and D counts z ending at t, for t in [k-1, n-1].
    """
    z = tuple(z)
    n = index.horizon
    numerator = index.full_count(z + (int(x),))
    if not z:
        # k = 0: t ranges over [-1, n-1], n+1 positions
        denominator = n + 1
    else:
        denominator = index.full_count(z) - (1 if index.ends_at(z, n) else 0)
    return _ratio(numerator, denominator)


def support_set(index: ContextIndex, k: int, gamma: float) -> set[Word]:
    """S_k^n: words of length k+1 occurring more than n^(1-gamma) times in X_0^n."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    tau = float(index.horizon) ** (1.0 - gamma)
    if tau < index.threshold:
        raise ValueError(f"Index threshold {index.threshold:g} is above the support threshold {tau:g}")
    return {w for w, c in index.retained(k + 1).items() if c > tau}


def _supports(index: ContextIndex, length: int, gamma: Optional[float]) -> list[Word]:
    if gamma is None:
        return [w for w, c in index.retained(length).items() if c > index.threshold]
    return sorted(support_set(index, length - 1, gamma))


def empirical_discrepancy(index: ContextIndex, k: int, gamma: Optional[float] = None) -> DiscrepancyReport:
    """Delta_hat_k^n: largest gap between p_hat(x | z_{-k+1}^0) and p_hat(x | z_{-k-i+1}^0).

    The i-loop stops at the first empty support level; every longer level is empty too.
    With gamma omitted the index threshold is used as n^(1-gamma).
    """
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    best = 0.0
    witness: Optional[tuple[Word, int]] = None
    for i in itertools.count(1):
        level = _supports(index, k + i + 1, gamma)
        if not level:
            break
        for u in level:
            context, x = u[:-1], u[-1]
            gap = abs(empirical_conditional(index, context[i:], x) - empirical_conditional(index, context, x))
            if witness is None or gap > best:
                best, witness = gap, (context, x)
    return DiscrepancyReport(k=k, value=best, witness=witness)


def discrepancy_profile(index: ContextIndex, params: EstimatorParams) -> tuple[int, list[float]]:
    """(chi_n, [Delta_hat_0 .. Delta_hat_chi]) in one pass."""
    n = index.horizon
    if n == 0:
        return 0, []
    limit = params.acceptance_threshold(n)
    values: list[float] = []
    for k in range(n):
        report = empirical_discrepancy(index, k, params.gamma)
        values.append(report.value)
        if report.value <= limit:
            return k, values
    return n, values


def order_estimate(index: ContextIndex, params: EstimatorParams) -> int:
    """chi_n: smallest k in [0, n) with Delta_hat_k^n <= n^(-beta), n if none; chi_0 = 0."""
    return discrepancy_profile(index, params)[0]


def checkpoint_report(seq: Sequence, n: int, params: EstimatorParams) -> dict:
    """Data of one estimate row: n, chi_n, Delta_hat_0..Delta_hat_chi and support sizes."""
    if n == 0:
        return {"n": 0, "chi": 0, "deltas": [], "support_sizes": []}
    index = estimation_index(seq, n, params.gamma)
    chi, deltas = discrepancy_profile(index, params)
    tau = params.support_threshold(n)
    sizes = []
    for length in itertools.count(1):
        size = sum(1 for c in index.retained(length).values() if c > tau)
        if size == 0:
            break
        sizes.append(size)
    return {"n": n, "chi": chi, "deltas": deltas, "support_sizes": sizes}


def _check_horizons(seq: Sequence, checkpoints: tuple[int, ...]) -> None:
    for n in checkpoints:
        if n > 0 and n > seq.horizon:
            raise ValueError(f"Checkpoint {n} exceeds available data (n={seq.horizon})")


def checkpoint_reports(seq: Sequence, params: EstimatorParams) -> list[dict]:
    """checkpoint_report for every checkpoint of params, in order."""
    _check_horizons(seq, params.checkpoints)
    rows = []
    for n in params.checkpoints:
        row = checkpoint_report(seq, n, params)
        logger.info("checkpoint n=%d chi=%d", n, row["chi"])
        rows.append(row)
    return rows


def order_trajectory(seq: Sequence, params: EstimatorParams) -> list[tuple[int, int]]:
    """(n, chi_n) for each checkpoint, chi_n computed on X_0^n."""
    _check_horizons(seq, params.checkpoints)
    out = []
    for n in params.checkpoints:
        chi = 0 if n == 0 else order_estimate(estimation_index(seq, n, params.gamma), params)
        logger.info("checkpoint n=%d chi=%d", n, chi)
        out.append((n, chi))
    return out


def _local_discrepancy(index: ContextIndex, w: Word, levels: Callable[[int], list[Word]]) -> Optional[float]:
    """Largest gap for contexts ending in w; None when w has no supported one-step extension."""
    k = len(w)
    best: Optional[float] = None
    for i in itertools.count(1):
        level = [u for u in levels(k + i + 1) if u[i:-1] == w]
        if not level:
            break
        for u in level:
            context, x = u[:-1], u[-1]
            gap = abs(empirical_conditional(index, w, x) - empirical_conditional(index, context, x))
            best = gap if best is None else max(best, gap)
    return best


def shortest_word_estimate(index: ContextIndex, params: EstimatorParams) -> int:
    """Plug-in guess of the shortest memory-word length.

    Smallest k such that some supported word w of length k has local discrepancy
    <= n^(-beta) over all supported left extensions; n when no word qualifies.
    No estimator of this quantity is universally consistent; this one is a target
    for the adversarial construction.
    """
    n = index.horizon
    if n == 0:
        return 0
    limit = params.acceptance_threshold(n)
    tau = params.support_threshold(n)

    @functools.lru_cache(maxsize=None)
    def levels(length: int) -> list[Word]:
        return _supports(index, length, params.gamma)

    for k in range(n):
        candidates = sorted(w for w, c in index.retained(k).items() if c > tau)
        if not candidates:
            break
        for w in candidates:
            gap = _local_discrepancy(index, w, levels)
            if gap is not None and gap <= limit:
                return k
    return n


def brute_force_discrepancy(seq: Sequence, n: int, k: int, gamma: float) -> float:
    """Unpruned reference for Delta_hat_k^n: naive scans over every i <= n and every word."""
    x = [int(s) for s in seq.symbols[: n + 1]]
    tau = float(n) ** (1.0 - gamma)

    def ends(word: Word, lo: int, hi: int) -> int:
        ell = len(word)
        return sum(1 for t in range(max(lo, ell - 1), hi + 1) if tuple(x[t - ell + 1 : t + 1]) == word)

    def p_hat(z: Word, sym: int) -> float:
        kk = len(z)
        num = ends(z + (sym,), kk, n)
        den = n + 1 if kk == 0 else ends(z, kk - 1, n - 1)
        return _ratio(num, den)

    best = 0.0
    for i in range(1, n + 1):
        length = k + i + 1
        if length > n + 1:
            break
        words = {tuple(x[t - length + 1 : t + 1]) for t in range(length - 1, n + 1)}
        for u in words:
            if ends(u, length - 1, n) <= tau:
                continue
            context, sym = u[:-1], u[-1]
            best = max(best, abs(p_hat(context[i:], sym) - p_hat(context, sym)))
    return best
