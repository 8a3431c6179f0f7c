"""Generic per-round simulation loop used by tests and small-scale runs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ContextRound, Group, History, NoiseKind
from .environments import realize_reward
from .metrics import RegretLedger, instantaneous_regret
from .policies import policy_step


@dataclass
class RunResult:
    ledger: RegretLedger
    history: History
    policy: object
    actions: np.ndarray
    predictions: np.ndarray


def run_rounds(
    sample_round: Callable[[int], ContextRound],
    policy,
    theta: np.ndarray,
    noise: NoiseKind,
    horizon: int,
    rng_rewards: np.random.Generator,
    batch_size: int = 1,
    restricted_flag: Optional[Callable[[ContextRound], bool]] = None,
) -> RunResult:
    """Simulate ``horizon`` rounds of one policy against a context process.

    ``sample_round`` maps a round index to its ContextRound; ``restricted_flag``
    marks membership in the restricted round set (defaults to minority rounds).
    """
    theta = np.asarray(theta, dtype=float)
    ledger = RegretLedger()
    history = History(batch_size=batch_size)
    actions = np.empty(horizon, dtype=np.int64)
    predictions = np.empty(horizon, dtype=np.int64)
    for t in range(1, horizon + 1):
        round_ = sample_round(t)
        a, prediction = policy_step(policy, round_)
        x = round_.contexts[a]
        r = realize_reward(theta, x, noise, rng_rewards)
        policy.observe(x, r)
        history.append(x, r)
        regret = instantaneous_regret(theta, round_, a)
        pred_regret = instantaneous_regret(theta, round_, prediction)
        if restricted_flag is None:
            restricted = round_.group is Group.MINORITY
        else:
            restricted = restricted_flag(round_)
        ledger.append(t, regret, pred_regret, round_.group, restricted)
        actions[t - 1] = a
        predictions[t - 1] = prediction
    return RunResult(ledger, history, policy, actions, predictions)
