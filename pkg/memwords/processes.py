"""Samplers for explicit chains and the Ryabko chain, staged relabelings, and the adversary.

The Ryabko chain lives on {0, 1, 2, ...}: 0 -> 1 -> 2 surely, and from s >= 2 it moves
to 0 or to s+1 with probability 1/2 each. Its stationary law is pi(0) = pi(1) = 1/4 and
pi(s) = 2^-s for s >= 2. Relabelings of it are the substrate of the adversarial
construction against shortest-memory-word estimators.
"""
from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional

import numpy as np

from . import bounds
from .estimator import EstimatorParams, estimation_index, order_estimate, shortest_word_estimate
from .markov_oracle import ExplicitChain
from .seqcore import ContextIndex, Sequence, Word, format_word

logger = logging.getLogger(__name__)

Estimator = Callable[[Sequence], int]

DEFAULT_HORIZON_CAP = 2**20
DEFAULT_MAX_REJECTIONS = 1000


class AdversarySearchError(RuntimeError):
    """Doubling search for a stage horizon exceeded the cap."""

    def __init__(self, message: str, plan: "StagePlan") -> None:
        super().__init__(message)
        self.plan = plan


def _rng(seed: int | np.random.SeedSequence | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_explicit(
    chain: ExplicitChain,
    length: int,
    seed: int | np.random.SeedSequence | np.random.Generator,
    initial: Optional[Word] = None,
) -> Sequence:
    """Stationary path: first K-block from the block law (or `initial`), then kernel steps."""
    if length < 0:
        raise ValueError(f"length must be nonnegative, got {length}")
    if length == 0:
        return Sequence()
    rng = _rng(seed)
    K, A = chain.order, chain.alphabet_size
    blocks = chain.contexts
    if initial is None:
        weights = np.array([chain.stationary[b] for b in blocks])
        block = blocks[int(rng.choice(len(blocks), p=weights / weights.sum()))]
    else:
        block = tuple(initial)
        if len(block) != K or any(not 0 <= s < A for s in block):
            raise ValueError(f"Initial block {format_word(block)!r} is not a context of the order-{K} chain")
    out = list(block[:length])
    cdf = {ctx: np.cumsum(chain.kernel[ctx]).tolist() for ctx in blocks}
    uniforms = rng.random(max(length - K, 0)).tolist()
    for u in uniforms:
        row = cdf[block]
        y = min(bisect.bisect_right(row, u), A - 1)
        out.append(y)
        block = (block + (y,))[1:] if K else block
    return Sequence(out)


def ryabko_stationary(state: int) -> float:
    """pi(0) = pi(1) = 1/4, pi(s) = 2^-s for s >= 2."""
    if state < 0:
        return 0.0
    return 0.25 if state < 2 else 2.0 ** (-state)


def _initial_ryabko_state(u: float) -> int:
    # inverse CDF: P(M <= m) = 1 - 2^-m for m >= 2
    if u < 0.25:
        return 0
    if u < 0.5:
        return 1
    return max(2, math.ceil(-math.log2(1.0 - u)))


def sample_ryabko(length: int, seed: int | np.random.SeedSequence | np.random.Generator) -> np.ndarray:
    """Stationary state path of the Ryabko chain."""
    if length < 1:
        raise ValueError(f"length must be at least 1, got {length}")
    rng = _rng(seed)
    state = _initial_ryabko_state(float(rng.random()))
    coins = rng.random(length - 1) < 0.5
    path = np.empty(length, dtype=np.int64)
    path[0] = state
    for t, reset in enumerate(coins.tolist(), start=1):
        if state == 0:
            state = 1
        elif state == 1:
            state = 2
        else:
            state = 0 if reset else state + 1
        path[t] = state
    return path


@dataclass(frozen=True)
class Relabeling:
    """State -> letter map: an explicit table on [0, cutoff], identity above."""

    table: tuple[int, ...]

    @property
    def cutoff(self) -> int:
        return len(self.table) - 1

    def __call__(self, state: int) -> int:
        return self.table[state] if state <= self.cutoff else state

    def apply(self, path: np.ndarray) -> np.ndarray:
        path = np.asarray(path, dtype=np.int64)
        lookup = np.asarray(self.table, dtype=np.int64)
        low = path <= self.cutoff
        out = path.copy()
        out[low] = lookup[path[low]]
        return out

    @classmethod
    def identity(cls) -> "Relabeling":
        return cls(table=(0,))

    @classmethod
    def initial(cls) -> "Relabeling":
        """f0: states 0 and 1 share the letter 0, identity elsewhere."""
        return cls(table=(0, 0))


def relabel(path: np.ndarray, f: Relabeling) -> Sequence:
    return Sequence(f.apply(path))


def fold_stage(prev: Relabeling, cutoff: int, horizon: int) -> tuple[Relabeling, int]:
    """Mirror the band (n, 2n - N] onto [N+1, n]: f(s) = n - (s - n) + 1 there.

    Agrees with `prev` on [0, n] and above 2n - N; returns the new cutoff 2n - N.
    """
    if horizon <= cutoff:
        raise ValueError(f"Stage horizon {horizon} must exceed the cutoff {cutoff}")
    if prev.cutoff > horizon:
        raise ValueError(f"Previous relabeling is explicit up to {prev.cutoff}, beyond horizon {horizon}")
    new_cutoff = 2 * horizon - cutoff
    table = [prev(s) for s in range(horizon + 1)]
    table.extend(horizon - (s - horizon) + 1 for s in range(horizon + 1, new_cutoff + 1))
    return Relabeling(table=tuple(table)), new_cutoff


def staged_relabeling(horizons: Iterable[int]) -> tuple[Relabeling, int]:
    """f^(J) and N_J after folding at the given stage horizons, starting from f0, N0 = 1."""
    f, cutoff = Relabeling.initial(), 1
    for n in horizons:
        f, cutoff = fold_stage(f, cutoff, int(n))
    return f, cutoff


@dataclass(frozen=True)
class ParityRelabeling(Relabeling):
    """s -> s mod 2 on every state."""

    def __call__(self, state: int) -> int:
        return state % 2

    def apply(self, path: np.ndarray) -> np.ndarray:
        return np.asarray(path, dtype=np.int64) % 2


def parity_relabeling() -> ParityRelabeling:
    """The Ryabko chain observed through s mod 2; not Markov of any finite order."""
    return ParityRelabeling(table=(0, 1))


def stationary_window(relabeling: Relabeling, length: int, rng: np.random.Generator, past: int = 0) -> Sequence:
    """Relabeled stationary window; index `past` of the result is time 0."""
    return relabel(sample_ryabko(length + past, rng), relabeling)


def conditioning_event(window: Sequence, past: int) -> bool:
    """X_i = X_{i+1} = 0 for some -past <= i <= 0 (window index `past` is time 0)."""
    x = window.symbols
    return any(x[i] == 0 and x[i + 1] == 0 for i in range(0, past + 1) if i + 1 < len(x))


@dataclass(frozen=True)
class StageRecord:
    index: int
    cutoff: int
    relabeling: Relabeling
    horizon: Optional[int] = None
    target: Optional[float] = None
    success: Optional[float] = None
    margin: Optional[float] = None
    replicates: int = 0
    draws: int = 0
    searched: tuple[tuple[int, float], ...] = ()


@dataclass(frozen=True)
class StagePlan:
    """Searched stages 0..J-1 plus the delivered stage-J relabeling (horizon None)."""

    stages: tuple[StageRecord, ...]
    estimator: str = ""
    seed: int = 0
    complete: bool = True

    @property
    def delivered(self) -> StageRecord:
        return self.stages[-1]

    @property
    def targets(self) -> list[float]:
        return [s.target for s in self.stages if s.target is not None]


def clamp_guess(value: int) -> int:
    """Harness view of an estimate: values are clamped into {1, 2}."""
    return min(max(int(value), 1), 2)


def conditional_success(
    estimator: Estimator,
    relabeling: Relabeling,
    horizon: int,
    past: int,
    replicates: int,
    seed_seq: np.random.SeedSequence,
    max_rejections: int = DEFAULT_MAX_REJECTIONS,
) -> tuple[float, int]:
    """Monte Carlo P(h(X_0..X_{horizon-past}) = 1 | pair 00 within [-past, 0]).

    Draws stationary windows of length past + 2 + horizon and rejects those outside
    the event. Returns (success fraction, total draws).
    """
    hits = 0
    draws = 0
    for child in seed_seq.spawn(replicates):
        rng = np.random.default_rng(child)
        for _ in range(max_rejections):
            draws += 1
            window = stationary_window(relabeling, horizon + 2, rng, past=past)
            if conditioning_event(window, past):
                break
        else:
            logger.warning("no conditioning event in %d draws (horizon=%d)", max_rejections, horizon)
            continue
        observed = Sequence(window.symbols[past : horizon + 1])
        if clamp_guess(estimator(observed)) == 1:
            hits += 1
    return hits / replicates, draws


def build_adversary(
    estimator: Estimator,
    stages: int,
    replicates: int,
    margin: Optional[float] = None,
    seed: int = 0,
    horizon_cap: int = DEFAULT_HORIZON_CAP,
    max_rejections: int = DEFAULT_MAX_REJECTIONS,
    name: str = "",
) -> StagePlan:
    """Staged relabeling that fools `estimator` at horizons n_0 < n_1 < ... .

    Stage j doubles n from N_j + j + 1 until the conditional success of the clamped
    estimate exceeds 1 - 2^-(j+1) + margin, then folds the band above n_j.
    """
    if stages < 0:
        raise ValueError(f"stages must be nonnegative, got {stages}")
    if replicates < 1:
        raise ValueError(f"replicates must be at least 1, got {replicates}")
    if margin is None:
        margin = bounds.hoeffding_margin(replicates)
    f, cutoff = Relabeling.initial(), 1
    records: list[StageRecord] = []
    for j in range(stages):
        target = 1.0 - 0.5 ** (j + 1)
        n = cutoff + j + 1
        searched: list[tuple[int, float]] = []
        while True:
            if n > horizon_cap:
                partial = StagePlan(
                    stages=tuple(records) + (StageRecord(j, cutoff, f, target=target, searched=tuple(searched)),),
                    estimator=name,
                    seed=seed,
                    complete=False,
                )
                raise AdversarySearchError(
                    f"Stage {j}: no horizon up to {horizon_cap} reaches success {target + margin:.4f}", partial
                )
            seq = np.random.SeedSequence([seed, j, n])
            success, draws = conditional_success(estimator, f, n, j, replicates, seq, max_rejections)
            searched.append((n, success))
            logger.info("stage %d horizon %d: success %.3f (need > %.3f)", j, n, success, target + margin)
            if success > target + margin:
                break
            n *= 2
        records.append(
            StageRecord(
                index=j,
                cutoff=cutoff,
                relabeling=f,
                horizon=n,
                target=target,
                success=success,
                margin=margin,
                replicates=replicates,
                draws=draws,
                searched=tuple(searched),
            )
        )
        f, cutoff = fold_stage(f, cutoff, n)
    records.append(StageRecord(index=stages, cutoff=cutoff, relabeling=f))
    return StagePlan(stages=tuple(records), estimator=name, seed=seed)


def stopping_reduction(
    stopped: Estimator,
    stopping_times: Iterable[int],
    seq: Sequence,
    n: int,
) -> Optional[int]:
    """min of stopped(X_0^{lambda_k}) over 0.5n < lambda_k < n; None when no time falls there."""
    best: Optional[int] = None
    last = -1
    for lam in stopping_times:
        lam = int(lam)
        if lam <= last:
            raise ValueError(f"Stopping times must be strictly increasing, got {lam} after {last}")
        last = lam
        if lam >= n:
            break
        if lam <= 0.5 * n:
            continue
        value = int(stopped(seq.prefix(lam)))
        best = value if best is None else min(best, value)
    return best


def occurrence_stopping_times(seq: Sequence, w: Word) -> list[int]:
    """Successive end positions of w: a strictly increasing sequence of stopping times."""
    return [int(t) for t in ContextIndex(seq).end_positions(tuple(w))]


def plug_in(name: str, params: Optional[EstimatorParams] = None) -> Estimator:
    """Named estimator plug-ins: shortest_word, order, constant-one, constant-two."""
    params = params or EstimatorParams()

    def shortest_word(seq: Sequence) -> int:
        if seq.horizon < 1:
            return 1
        return shortest_word_estimate(estimation_index(seq, seq.horizon, params.gamma), params)

    def order(seq: Sequence) -> int:
        if seq.horizon < 1:
            return 0
        return order_estimate(estimation_index(seq, seq.horizon, params.gamma), params)

    registry: Mapping[str, Estimator] = {
        "shortest_word": shortest_word,
        "order": order,
        "constant-one": lambda seq: 1,
        "constant-two": lambda seq: 2,
    }
    if name not in registry:
        raise ValueError(f"Unknown estimator {name!r}; choose from {sorted(registry)}")
    return registry[name]


def relabeling_bands(f: Relabeling, cutoff: int) -> list[dict]:
    """Folded bands of f on (1, cutoff]: maximal runs where f(s) != s."""
    bands: list[dict] = []
    start: Optional[int] = None
    for s in range(2, cutoff + 2):
        folded = s <= cutoff and f(s) != s
        if folded and start is None:
            start = s
        elif not folded and start is not None:
            bands.append({"start": start, "end": s - 1, "images": [f(start), f(s - 1)]})
            start = None
    return bands


def plan_to_dict(plan: StagePlan) -> dict:
    stages = []
    for s in plan.stages:
        stages.append(
            {
                "index": s.index,
                "cutoff": s.cutoff,
                "horizon": s.horizon,
                "target": s.target,
                "success": s.success,
                "margin": s.margin,
                "replicates": s.replicates,
                "draws": s.draws,
                "searched": [{"horizon": h, "success": p} for h, p in s.searched],
                "table": list(s.relabeling.table),
                "bands": relabeling_bands(s.relabeling, s.cutoff),
            }
        )
    return {"estimator": plan.estimator, "seed": plan.seed, "complete": plan.complete, "stages": stages}


def plan_from_dict(raw: dict) -> StagePlan:
    stages = tuple(
        StageRecord(
            index=int(s["index"]),
            cutoff=int(s["cutoff"]),
            relabeling=Relabeling(table=tuple(int(v) for v in s["table"])),
            horizon=s.get("horizon"),
            target=s.get("target"),
            success=s.get("success"),
            margin=s.get("margin"),
            replicates=int(s.get("replicates", 0)),
            draws=int(s.get("draws", 0)),
            searched=tuple((int(r["horizon"]), float(r["success"])) for r in s.get("searched", [])),
        )
        for s in raw["stages"]
    )
    return StagePlan(stages=stages, estimator=raw.get("estimator", ""), seed=int(raw.get("seed", 0)), complete=bool(raw.get("complete", True)))
