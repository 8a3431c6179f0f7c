"""Regret accounting, gap statistics, and scaling-exponent fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .core import ContextRound, Group


class Restriction(Enum):
    """Which rounds a cumulative sum ranges over."""

    ALL = "all"
    MINORITY_ONLY = "minority_only"
    MAJORITY_ONLY = "majority_only"
    CUSTOM_SET = "custom_set"


def instantaneous_regret(theta: np.ndarray, round_: ContextRound, chosen: int) -> float:
    """Best available mean reward minus the chosen action's mean reward."""
    if not round_.is_available(chosen):
        raise ValueError(f"chosen action {chosen} is unavailable in round {round_.round_index}")
    theta = np.asarray(theta, dtype=float)
    vals = [float(theta @ round_.contexts[a]) for a in round_.available_indices()]
    return max(vals) - float(theta @ round_.contexts[chosen])


def gap(theta: np.ndarray, round_: ContextRound) -> float:
    """Margin between the best and second-best available actions; inf if fewer than two."""
    theta = np.asarray(theta, dtype=float)
    vals = sorted(
        (float(theta @ round_.contexts[a]) for a in round_.available_indices()),
        reverse=True,
    )
    if len(vals) < 2:
        return math.inf
    return vals[0] - vals[1]


@dataclass
class RegretLedger:
    """Per-round regret records with group tags and a restriction flag."""

    ts: list = field(default_factory=list)
    regrets: list = field(default_factory=list)
    prediction_regrets: list = field(default_factory=list)
    groups: list = field(default_factory=list)
    restricted: list = field(default_factory=list)

    def append(
        self,
        t: int,
        regret: float,
        prediction_regret: Optional[float],
        group: Group,
        restricted: bool,
    ) -> None:
        if t < 1:
            raise ValueError("round index starts at 1")
        if self.ts and t <= self.ts[-1]:
            raise ValueError("rounds must be appended in increasing order")
        if regret < 0 or (prediction_regret is not None and prediction_regret < 0):
            raise ValueError("instantaneous regret cannot be negative")
        self.ts.append(t)
        self.regrets.append(float(regret))
        self.prediction_regrets.append(None if prediction_regret is None else float(prediction_regret))
        self.groups.append(group)
        self.restricted.append(bool(restricted))

    def __len__(self) -> int:
        return len(self.ts)

    def _mask(self, restriction: Restriction) -> np.ndarray:
        if restriction is Restriction.ALL:
            return np.ones(len(self.ts), dtype=bool)
        if restriction is Restriction.MINORITY_ONLY:
            return np.array([g is Group.MINORITY for g in self.groups], dtype=bool)
        if restriction is Restriction.MAJORITY_ONLY:
            return np.array([g is Group.MAJORITY for g in self.groups], dtype=bool)
        return np.array(self.restricted, dtype=bool)


def cumulative_regret(ledger: RegretLedger, restriction: Restriction = Restriction.ALL) -> float:
    """Sum of instantaneous regrets over the selected rounds."""
    mask = ledger._mask(restriction)
    return float(np.sum(np.asarray(ledger.regrets, dtype=float)[mask]))


def prediction_regret(ledger: RegretLedger, restriction: Restriction = Restriction.ALL) -> float:
    """Sum of prediction regrets over the selected rounds."""
    mask = ledger._mask(restriction)
    vals = np.array(
        [math.nan if p is None else p for p in ledger.prediction_regrets], dtype=float
    )[mask]
    if np.isnan(vals).any():
        raise ValueError("ledger carries rounds without predictions")
    return float(np.sum(vals))


def bayesian_regret(replicate_regrets) -> tuple:
    """Mean and standard error of per-replicate regrets."""
    vals = np.asarray(list(replicate_regrets), dtype=float)
    if vals.size == 0:
        raise ValueError("need at least one replicate")
    mean = float(np.mean(vals))
    if vals.size == 1:
        return mean, 0.0
    return mean, float(np.std(vals, ddof=1) / math.sqrt(vals.size))


def scaling_exponent(points) -> tuple:
    """Least-squares slope and intercept of log regret against log horizon.

    ``points`` is an iterable of (horizon, regret) pairs with at least three
    distinct horizons and strictly positive regrets.
    """
    pts = [(float(t), float(r)) for t, r in points]
    if len(pts) < 3:
        raise ValueError("need at least three (horizon, regret) points")
    ts = np.array([p[0] for p in pts])
    rs = np.array([p[1] for p in pts])
    if len(np.unique(ts)) != len(ts):
        raise ValueError("horizons must be distinct")
    if np.any(ts <= 0):
        raise ValueError("horizons must be positive")
    if np.any(rs <= 0):
        raise ValueError("regrets must be positive to fit a power law")
    slope, intercept = np.polyfit(np.log(ts), np.log(rs), 1)
    return float(slope), float(intercept)


def scaling_exponent_bootstrap(
    per_horizon_regrets: dict,
    rng: np.random.Generator,
    n_boot: int = 200,
) -> tuple:
    """Scaling exponent of mean regrets plus a bootstrap percentile interval.

    ``per_horizon_regrets`` maps horizon -> array of per-replicate regrets.
    Returns (exponent, lo, hi) with a 2.5/97.5 percentile interval over
    ``n_boot`` resamples of the replicates at each horizon.
    """
    horizons = sorted(per_horizon_regrets)
    means = [(t, float(np.mean(per_horizon_regrets[t]))) for t in horizons]
    exponent, _ = scaling_exponent(means)
    draws = []
    for _ in range(n_boot):
        resampled = []
        for t in horizons:
            vals = np.asarray(per_horizon_regrets[t], dtype=float)
            sample = vals[rng.integers(vals.size, size=vals.size)]
            resampled.append((t, max(float(np.mean(sample)), 1e-300)))
        slope, _ = scaling_exponent(resampled)
        draws.append(slope)
    lo, hi = np.percentile(draws, [2.5, 97.5])
    return exponent, float(lo), float(hi)
