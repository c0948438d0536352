"""Hoeffding's inequality and the summable error bound on P(chi_n > K)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence as Seq

import numpy as np

from .estimator import EstimatorParams

# terms below this are dropped by the direct summation
SUMMATION_FLOOR = 1e-300
_CHUNK = 1 << 16


@dataclass(frozen=True)
class HoeffdingInput:
    """n independent variables with X_i in [a_i, b_i]; one shared range is broadcast."""

    n: int
    ranges: tuple[tuple[float, float], ...]
    epsilon: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")
        ranges = tuple((float(a), float(b)) for a, b in self.ranges)
        if len(ranges) not in (1, self.n):
            raise ValueError(f"Expected 1 or n={self.n} ranges, got {len(ranges)}")
        for a, b in ranges:
            if a > b:
                raise ValueError(f"Range [{a}, {b}] has a > b")
        object.__setattr__(self, "ranges", ranges)

    @classmethod
    def shared(cls, n: int, width: float, epsilon: float) -> "HoeffdingInput":
        return cls(n=n, ranges=((0.0, float(width)),), epsilon=epsilon)

    def widths(self) -> np.ndarray:
        w = np.array([b - a for a, b in self.ranges], dtype=float)
        return np.broadcast_to(w, (self.n,)) if len(w) == 1 else w


def hoeffding_bound(data: HoeffdingInput) -> float:
    """2 exp(-2 n eps^2 / mean((b_i - a_i)^2)); may exceed 1."""
    if data.epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {data.epsilon}")
    mean_sq = float(np.mean(data.widths() ** 2))
    if mean_sq == 0.0:
        raise ValueError("All ranges are degenerate (b_i = a_i); the bound is undefined")
    return 2.0 * math.exp(-2.0 * data.n * data.epsilon**2 / mean_sq)


def hoeffding_margin(replicates: int, alpha: float = 0.05) -> float:
    """eps with 2 exp(-2 R eps^2) = alpha for R variables in [0, 1]."""
    if replicates < 1:
        raise ValueError(f"replicates must be at least 1, got {replicates}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * replicates))


def _tail(x_to_H: float, H: int, x: float, one_minus_x: float) -> float:
    # H - (H-1) x written as H (1-x) + x
    return x_to_H * (H * one_minus_x + x) / one_minus_x**2


def tail_moment_sum(H: int, x: float) -> float:
    """sum_{h >= H} h x^h = x^H (H - (H-1) x) / (1-x)^2 for 0 <= x < 1."""
    if H < 0:
        raise ValueError(f"H must be nonnegative, got {H}")
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x must lie in [0, 1), got {x}")
    if x == 0.0:
        return 0.0
    return _tail(x**H, H, x, 1.0 - x)


def _bound_inputs(n: int, gamma: float, beta: float) -> tuple[int, float]:
    EstimatorParams(gamma=gamma, beta=beta)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    H = math.floor(float(n) ** (1.0 - gamma))
    rate = 0.5 * float(n) ** (-2.0 * beta)
    return H, rate


def chi_error_bound(n: int, gamma: float, beta: float) -> float:
    """4 n^3 sum_{h >= floor(n^(1-gamma))} h exp(-0.5 n^(-2 beta) h), unclamped."""
    H, rate = _bound_inputs(n, gamma, beta)
    one_minus_x = -math.expm1(-rate)
    tail = _tail(math.exp(-rate * H), H, 1.0 - one_minus_x, one_minus_x)
    return 4.0 * float(n) ** 3 * tail


def chi_error_bound_summed(n: int, gamma: float, beta: float) -> float:
    """Same quantity by direct summation, dropping terms below 1e-300 past the peak."""
    H, rate = _bound_inputs(n, gamma, beta)
    floor = math.log(SUMMATION_FLOOR)
    peak = max(H, math.ceil(1.0 / rate))
    total = 0.0
    start = H
    while True:
        h = np.arange(start, start + _CHUNK, dtype=float)
        h = h[h > 0]
        log_terms = np.log(h) - rate * h
        keep = log_terms >= floor
        total += float(np.sum(np.exp(log_terms[keep])))
        start += _CHUNK
        if start > peak and len(h) and log_terms[-1] < floor:
            break
    return 4.0 * float(n) ** 3 * total


def clamp_probability(value: float) -> float:
    return min(1.0, max(0.0, float(value)))


def bound_table(grid: Seq[int], gamma: float, beta: float) -> list[dict]:
    """Rows (n, bound, clamped) over an n grid."""
    rows = []
    for n in grid:
        value = chi_error_bound(int(n), gamma, beta)
        rows.append({"n": int(n), "bound": value, "clamped": clamp_probability(value)})
    return rows
