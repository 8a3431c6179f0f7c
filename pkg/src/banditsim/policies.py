"""Action-selection policies: LinUCB, the batched greedy family, and baselines."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ContextRound, last_batch_end
from .estimators import (
    SINGULAR_CUTOFF,
    SufficientStats,
    bayes_posterior_mean,
    ols_estimate,
    stats_from_data,
    update_stats,
)

# Incremental statistics are rebuilt from raw rows this often to cap drift.
RECOMPUTE_EVERY = 10_000


@dataclass(frozen=True)
class LinUCBParams:
    """Confidence-interval parameters for LinUCB.

    ``width_floor`` lower-bounds the interval multiplier f(t); the default 0
    leaves the standard self-normalized width untouched.
    """

    L: float
    S: float
    horizon: int
    c0: float = 1.0
    ridge: float = 0.0
    width_floor: float = 0.0

    def __post_init__(self):
        if self.horizon < 2:
            raise ValueError("horizon must be at least 2")
        if self.L < 1.0:
            raise ValueError("L must be at least 1")
        if not 0.0 < self.S < self.horizon:
            raise ValueError("S must be positive and smaller than the horizon")
        if self.c0 < 1.0:
            raise ValueError("c0 must be at least 1")
        if self.ridge < 0.0:
            raise ValueError("ridge must be nonnegative")
        if self.width_floor < 0.0:
            raise ValueError("width_floor must be nonnegative")

    @classmethod
    def for_two_bridge(cls, horizon: int, ridge: float = 0.0, enforce_floor: bool = True) -> "LinUCBParams":
        """Bounds for the two-bridge instance: unit basis contexts, d = 2.

        S follows the usual norm-bound recipe ||theta|| + sqrt(3 d ln T) with
        ||theta|| <= 1/sqrt(2) on this instance.  ``enforce_floor`` keeps
        f(t) >= 2 sqrt(ln horizon), the regime in which the top bridge is
        provably preferred once minority data accumulates.
        """
        floor = 2.0 * math.sqrt(math.log(horizon)) if enforce_floor else 0.0
        big_s = 1.0 / math.sqrt(2.0) + math.sqrt(6.0 * math.log(horizon))
        return cls(L=1.0, S=big_s, horizon=horizon, ridge=ridge, width_floor=floor)

    @classmethod
    def for_perturbed(
        cls,
        d: int,
        n_actions: int,
        horizon: int,
        rho: float,
        prior_mean: np.ndarray,
        ridge: float = 1.0,
    ) -> "LinUCBParams":
        """Default bounds for perturbed-context instances.

        L bounds context norms with high probability and S bounds the latent
        weight norm under a unit-covariance prior.
        """
        big_l = 1.0 + rho * math.sqrt(2.0 * d * math.log(2.0 * horizon**3 * n_actions * d))
        big_s = float(np.linalg.norm(prior_mean)) + math.sqrt(3.0 * d * math.log(horizon))
        return cls(L=max(1.0, big_l), S=big_s, horizon=horizon, ridge=ridge)


def interval_width(t_obs: int, params: LinUCBParams, d: int) -> float:
    """Confidence multiplier f after ``t_obs`` observations in dimension ``d``."""
    if t_obs < 0:
        raise ValueError("observation count must be nonnegative")
    if d < 1:
        raise ValueError("dimension must be at least 1")
    t_total = params.horizon
    val = params.S + math.sqrt(
        d * params.c0 * math.log(t_total + t_obs * t_total * params.L**2)
    )
    return max(params.width_floor, val)


def _ucb_terms(stats: SufficientStats, ridge: float):
    """Point estimate and a quadratic-form evaluator for the width term.

    With ridge 0 and singular Z the evaluator returns ``inf`` for any vector
    touching the null space of Z, which forces exploration of unseen
    directions.
    """
    d = stats.dim
    if ridge > 0.0:
        A = stats.Z + ridge * np.eye(d)
        A_inv = np.linalg.inv(A)
        A_inv = 0.5 * (A_inv + A_inv.T)
        theta_hat = A_inv @ stats.xr

        def quad(x: np.ndarray) -> float:
            return float(x @ A_inv @ x)

        return theta_hat, quad

    vals, vecs = np.linalg.eigh(stats.Z)
    cutoff = SINGULAR_CUTOFF * max(float(vals.max(initial=0.0)), 1e-300)
    keep = vals > cutoff
    inv_vals = np.zeros_like(vals)
    inv_vals[keep] = 1.0 / vals[keep]
    theta_hat = (vecs * inv_vals) @ (vecs.T @ stats.xr)

    def quad(x: np.ndarray) -> float:
        comps = vecs.T @ x
        null_mass = float(np.linalg.norm(comps[~keep])) if (~keep).any() else 0.0
        if null_mass > 1e-9 * max(1.0, float(np.linalg.norm(x))):
            return math.inf
        return float(np.sum(comps[keep] ** 2 * inv_vals[keep]))

    return theta_hat, quad


def linucb_scores(round_: ContextRound, stats: SufficientStats, f: float, ridge: float) -> np.ndarray:
    """Upper confidence bounds per action slot; unavailable slots score -inf."""
    theta_hat, quad = _ucb_terms(stats, ridge)
    scores = np.full(round_.n_actions, -math.inf)
    for a in round_.available_indices():
        x = round_.contexts[a]
        q = quad(x)
        if math.isinf(q):
            scores[a] = math.inf
        else:
            scores[a] = float(x @ theta_hat) + f * math.sqrt(max(q, 0.0))
    return scores


def linucb_select(round_: ContextRound, stats: SufficientStats, params: LinUCBParams) -> int:
    """LinUCB action: maximize estimate plus width; ties go to the lowest index."""
    f = interval_width(stats.n, params, round_.dim)
    scores = linucb_scores(round_, stats, f, params.ridge)
    return int(np.argmax(scores))


def greedy_select(round_: ContextRound, estimate: np.ndarray) -> int:
    """Greedy action under a point estimate; ties go to the lowest index."""
    estimate = np.asarray(estimate, dtype=float)
    best, best_val = -1, -math.inf
    for a in round_.available_indices():
        val = float(round_.contexts[a] @ estimate)
        if val > best_val:
            best, best_val = a, val
    return best


def suggested_batch_size(
    rho: float,
    d: int,
    horizon: int,
    delta: float,
    n_actions: int | None = None,
    context_bound: float | None = None,
) -> int:
    """Batch length above which one batch is diverse enough to simulate rewards.

    Evaluates ceil of
    ``(R/rho)^2 * (8 e^2/(e-1)^2) * (1 + log(2d/delta)) * log T
    + (4 e/(e-1)) * log(2/delta)``.
    ``context_bound`` overrides the high-probability context-norm bound R;
    otherwise R is computed from the instance as
    ``1 + rho * sqrt(2 log(2 T K d / delta_R)) * sqrt(d)`` with
    ``delta_R = T^-2``.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    if context_bound is None:
        if n_actions is None:
            raise ValueError("need n_actions to derive the context-norm bound")
        context_bound = context_norm_bound(rho, d, horizon, n_actions)
    e = math.e
    log_t = math.log(horizon)
    term1 = (context_bound / rho) ** 2 * (8 * e**2 / (e - 1) ** 2)
    term1 *= (1.0 + math.log(2.0 * d / delta)) * log_t
    term2 = (4 * e / (e - 1)) * math.log(2.0 / delta)
    return int(math.ceil(term1 + term2))


def context_norm_bound(rho: float, d: int, horizon: int, n_actions: int) -> float:
    """High-probability bound R on perturbed context norms at failure rate T^-2."""
    delta_r = float(horizon) ** -2
    r_hat = rho * math.sqrt(2.0 * math.log(2.0 * horizon * n_actions * d / delta_r))
    return 1.0 + r_hat * math.sqrt(d)


class LinUCBPolicy:
    """Optimism under a self-normalized confidence ellipsoid."""

    name = "linucb"

    def __init__(self, d: int, params: LinUCBParams):
        self.d = d
        self.params = params
        self.stats = SufficientStats.empty(d)
        self._xs: list = []
        self._rs: list = []

    def select(self, round_: ContextRound) -> tuple:
        a = linucb_select(round_, self.stats, self.params)
        return a, a

    def observe(self, x: np.ndarray, r: float) -> None:
        self.stats = update_stats(self.stats, x, r)
        self._xs.append(np.asarray(x, dtype=float))
        self._rs.append(float(r))
        if self.stats.n % RECOMPUTE_EVERY == 0:
            self.stats = stats_from_data(np.array(self._xs), np.array(self._rs))


class OraclePolicy:
    """Plays the best available action under the true weights."""

    name = "oracle"

    def __init__(self, theta: np.ndarray):
        self.theta = np.asarray(theta, dtype=float)

    def select(self, round_: ContextRound) -> tuple:
        a = greedy_select(round_, self.theta)
        return a, a

    def observe(self, x: np.ndarray, r: float) -> None:
        pass


class UniformRandomPolicy:
    """Uniform choice among available actions."""

    name = "uniform_random"

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def select(self, round_: ContextRound) -> tuple:
        avail = round_.available_indices()
        a = int(avail[self.rng.integers(len(avail))])
        return a, a

    def observe(self, x: np.ndarray, r: float) -> None:
        pass


class _BatchedPolicy:
    """Shared bookkeeping for batch-frozen greedy policies.

    The acting estimate refreshes only when a round crosses a batch boundary,
    so every decision in a batch uses data from completed batches alone.  A
    Bayesian-greedy prediction is tracked alongside the action from the same
    frozen data.
    """

    def __init__(self, d: int, batch_size: int, prior_mean: np.ndarray, prior_cov: np.ndarray):
        if batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        self.d = d
        self.batch_size = batch_size
        self.prior_mean = np.asarray(prior_mean, dtype=float)
        self.prior_cov = np.asarray(prior_cov, dtype=float)
        self.stats = SufficientStats.empty(d)
        self._frozen_t0 = -1
        self._acting_estimate = np.zeros(d)
        self._bayes_estimate = self.prior_mean.copy()
        self._xs: list = []
        self._rs: list = []

    def _refresh(self, t: int) -> None:
        t0 = last_batch_end(t, self.batch_size)
        if t0 != self._frozen_t0:
            if self.stats.n != t0:
                raise RuntimeError(
                    f"batch refresh at round {t} expected {t0} observations, have {self.stats.n}"
                )
            self._frozen_t0 = t0
            self._bayes_estimate = bayes_posterior_mean(self.stats, self.prior_mean, self.prior_cov)
            self._acting_estimate = self._acting_estimate_from(self.stats)

    def _acting_estimate_from(self, stats: SufficientStats) -> np.ndarray:
        raise NotImplementedError

    def frozen_estimates(self) -> tuple:
        """Current (acting, bayes) frozen estimates."""
        return self._acting_estimate.copy(), self._bayes_estimate.copy()

    def select(self, round_: ContextRound) -> tuple:
        self._refresh(round_.round_index)
        a = self._choose(round_)
        prediction = greedy_select(round_, self._bayes_estimate)
        return a, prediction

    def _choose(self, round_: ContextRound) -> int:
        return greedy_select(round_, self._acting_estimate)

    def observe(self, x: np.ndarray, r: float) -> None:
        self.stats = update_stats(self.stats, x, r)
        self._xs.append(np.asarray(x, dtype=float))
        self._rs.append(float(r))
        if self.stats.n % RECOMPUTE_EVERY == 0:
            self.stats = stats_from_data(np.array(self._xs), np.array(self._rs))


class BatchBayesGreedyPolicy(_BatchedPolicy):
    """Greedy on the batch-frozen posterior mean; its action is its own prediction."""

    name = "batch_bayes_greedy"

    def _acting_estimate_from(self, stats: SufficientStats) -> np.ndarray:
        return self._bayes_estimate.copy()

    def select(self, round_: ContextRound) -> tuple:
        self._refresh(round_.round_index)
        a = greedy_select(round_, self._acting_estimate)
        return a, a


class BatchFreqGreedyPolicy(_BatchedPolicy):
    """Greedy on the batch-frozen least-squares estimate.

    Cold start (first batch, no data) acts uniformly at random among the
    available actions, drawn from the policy stream.
    """

    name = "batch_freq_greedy"

    def __init__(self, d, batch_size, prior_mean, prior_cov, rng: np.random.Generator):
        super().__init__(d, batch_size, prior_mean, prior_cov)
        self.rng = rng

    def _acting_estimate_from(self, stats: SufficientStats) -> np.ndarray:
        return ols_estimate(stats)

    def _choose(self, round_: ContextRound) -> int:
        if self._frozen_t0 == 0 and not self._acting_estimate.any():
            avail = round_.available_indices()
            return int(avail[self.rng.integers(len(avail))])
        return greedy_select(round_, self._acting_estimate)


def policy_step(policy, round_: ContextRound) -> tuple:
    """Run one selection step: returns (action, prediction).

    The caller realizes the reward for the chosen context and feeds it back
    through ``policy.observe``.
    """
    a, prediction = policy.select(round_)
    if not round_.is_available(a):
        raise RuntimeError(f"policy chose unavailable action {a}")
    return a, prediction


def make_policy(
    kind: str,
    d: int,
    *,
    params: LinUCBParams | None = None,
    batch_size: int | None = None,
    prior_mean: np.ndarray | None = None,
    prior_cov: np.ndarray | None = None,
    theta: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
):
    """Construct a policy by name; unused keyword arguments may stay None."""
    if kind == "linucb":
        if params is None:
            raise ValueError("linucb needs params")
        return LinUCBPolicy(d, params)
    if kind == "batch_bayes_greedy":
        return BatchBayesGreedyPolicy(d, batch_size, prior_mean, prior_cov)
    if kind == "batch_freq_greedy":
        return BatchFreqGreedyPolicy(d, batch_size, prior_mean, prior_cov, rng)
    if kind == "oracle":
        if theta is None:
            raise ValueError("oracle needs the true weights")
        return OraclePolicy(theta)
    if kind == "uniform_random":
        if rng is None:
            raise ValueError("uniform_random needs a policy stream")
        return UniformRandomPolicy(rng)
    raise ValueError(f"unknown policy kind: {kind}")
