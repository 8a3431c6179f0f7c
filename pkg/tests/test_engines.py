"""Vectorized engines against per-round reference loops.

Each reference below consumes the replicate streams in the engine's exact
order but re-derives every decision through the generic building blocks
(sufficient statistics, interval widths, greedy/UCB selection, posterior
means) instead of the engines' closed-form shortcuts.
"""

import math

import numpy as np
import pytest

from banditsim.core import ContextRound, Group, NoiseKind, last_batch_end
from banditsim.engines import (
    _A,
    _B,
    _C,
    CatalogArrays,
    _coin_mask,
    _draw_entry_indices,
    _kind_codes,
    _lambda_min_curve,
    _seg_sums,
    _single_rewards,
    run_perturbed_batch_greedy,
    run_perturbed_linucb,
    run_two_bridge_batch_freq,
    run_two_bridge_policy,
)
from banditsim.environments import (
    BOTTOM,
    TOP,
    CatalogEntry,
    PerturbedConfig,
    TwoBridgeConfig,
)
from banditsim.estimators import SufficientStats, bayes_posterior_mean, ols_estimate
from banditsim.metrics import instantaneous_regret
from banditsim.policies import LinUCBParams, greedy_select, interval_width, linucb_scores
from banditsim.rng import Purpose, stream

MASTER = 20260814
B_ROUND = ContextRound((TOP, BOTTOM), Group.MINORITY, None, 1)


def _two_bridge_draws(cfg, master_seed, replicate, inject_rate):
    """Replay the engine's stream consumption; return kinds and reward draws."""
    theta = cfg.theta
    horizon = cfg.horizon
    ctx = stream(master_seed, replicate, Purpose.CONTEXTS)
    rew = stream(master_seed, replicate, Purpose.REWARDS)
    pol = stream(master_seed, replicate, Purpose.POLICY)

    kinds = _kind_codes(cfg, ctx, horizon)
    if inject_rate > 0.0:
        injected = ctx.geometric(1.0 - inject_rate, size=horizon) - 1
    else:
        injected = np.zeros(horizon, dtype=np.int64)

    b_pos = np.flatnonzero(kinds == _B)
    cum_a = np.concatenate([[0], np.cumsum(kinds == _A)])
    cum_c = np.concatenate([[0], np.cumsum(kinds == _C)])
    cum_g = np.concatenate([[0], np.cumsum(injected)])
    top_inc = np.diff(np.concatenate([[0], cum_a[b_pos] + cum_g[b_pos + 1]]))
    bot_inc = np.diff(np.concatenate([[0], cum_c[b_pos]]))

    seg_top = _seg_sums(top_inc, float(theta[0]), cfg.noise, rew)
    seg_bot = _seg_sums(bot_inc, float(theta[1]), cfg.noise, rew)
    cand_top = _single_rewards(b_pos.size, float(theta[0]), cfg.noise, rew)
    cand_bot = _single_rewards(b_pos.size, float(theta[1]), cfg.noise, rew)
    return kinds, b_pos, top_inc, bot_inc, seg_top, seg_bot, cand_top, cand_bot, pol


def reference_two_bridge_linucb(cfg, master_seed, replicate, params, inject_rate=0.0):
    """Decide every B round with generic stats + UCB scores on the B pattern."""
    theta = cfg.theta
    top_best = bool(theta[0] > theta[1])
    (_, b_pos, top_inc, bot_inc, seg_top, seg_bot, cand_top, cand_bot, _) = _two_bridge_draws(
        cfg, master_seed, replicate, inject_rate
    )
    n1 = n2 = 0
    s1 = s2 = 0.0
    wrong_mask = np.zeros(b_pos.size, dtype=bool)
    for k in range(b_pos.size):
        n1 += int(top_inc[k])
        s1 += float(seg_top[k])
        n2 += int(bot_inc[k])
        s2 += float(seg_bot[k])
        stats = SufficientStats(
            Z=np.diag([float(n1), float(n2)]), xr=np.array([s1, s2]), n=n1 + n2
        )
        f = interval_width(n1 + n2, params, 2)
        scores = linucb_scores(B_ROUND, stats, f=f, ridge=params.ridge)
        pick = int(np.argmax(scores))
        if pick == 0:
            n1 += 1
            s1 += float(cand_top[k])
            wrong_mask[k] = not top_best
        else:
            n2 += 1
            s2 += float(cand_bot[k])
            wrong_mask[k] = top_best
    return b_pos, wrong_mask


def reference_two_bridge_batch_freq(cfg, master_seed, replicate, batch_size):
    """Decide each batch by greedy selection on a generic least-squares estimate."""
    theta = cfg.theta
    horizon = cfg.horizon
    top_best = bool(theta[0] > theta[1])

    ctx = stream(master_seed, replicate, Purpose.CONTEXTS)
    rew = stream(master_seed, replicate, Purpose.REWARDS)
    pol = stream(master_seed, replicate, Purpose.POLICY)

    kinds = _kind_codes(cfg, ctx, horizon)
    starts = np.arange(0, horizon, batch_size)
    count_a = np.add.reduceat(kinds == _A, starts)
    count_c = np.add.reduceat(kinds == _C, starts)
    count_b = np.add.reduceat(kinds == _B, starts)
    seg_top = _seg_sums(count_a, float(theta[0]), cfg.noise, rew)
    seg_bot = _seg_sums(count_c, float(theta[1]), cfg.noise, rew)

    n1 = n2 = 0
    s1 = s2 = 0.0
    wrong = 0
    for b in range(len(starts)):
        nb = int(count_b[b])
        if n1 + n2 == 0:
            picks_top = int(pol.binomial(nb, 0.5)) if nb else 0
            picks_bot = nb - picks_top
        else:
            stats = SufficientStats(
                Z=np.diag([float(n1), float(n2)]), xr=np.array([s1, s2]), n=n1 + n2
            )
            est = ols_estimate(stats)
            if greedy_select(B_ROUND, est) == 0:
                picks_top, picks_bot = nb, 0
            else:
                picks_top, picks_bot = 0, nb
        wrong += picks_bot if top_best else picks_top
        if picks_top:
            n1 += picks_top
            s1 += float(_seg_sums(np.array([picks_top]), float(theta[0]), cfg.noise, rew)[0])
        if picks_bot:
            n2 += picks_bot
            s2 += float(_seg_sums(np.array([picks_bot]), float(theta[1]), cfg.noise, rew)[0])
        n1 += int(count_a[b])
        s1 += float(seg_top[b])
        n2 += int(count_c[b])
        s2 += float(seg_bot[b])
    return wrong, int(count_b.sum())


def _round_from_row(cat, entry_idx, x_block, t):
    contexts = tuple(
        x_block[a] if cat.avail[entry_idx, a] else None for a in range(x_block.shape[0])
    )
    group = Group.MINORITY if cat.minority[entry_idx] else Group.MAJORITY
    return ContextRound(contexts, group, None, t)


def reference_perturbed_greedy(
    cfg, prior_mean, prior_cov, theta, horizon, batch_size, master_seed, replicate,
    acting, context_bound, probe_rounds,
):
    """Per-round loop: greedy selection + regret via the metrics module."""
    cat = CatalogArrays.from_config(cfg)
    k = cfg.n_actions
    d = cfg.dim
    ctx = stream(master_seed, replicate, Purpose.CONTEXTS)
    pert = stream(master_seed, replicate, Purpose.PERTURBATIONS)
    rew = stream(master_seed, replicate, Purpose.REWARDS)
    pol = stream(master_seed, replicate, Purpose.POLICY)

    Z = np.zeros((d, d))
    xr = np.zeros(d)
    n_obs = 0
    theta_freq = np.zeros(d)
    theta_bay = np.asarray(prior_mean, dtype=float).copy()
    cold = True

    total = minority_total = pred_total = allowance = 0.0
    probes = {}
    done = 0
    while done < horizon:
        y = min(batch_size, horizon - done)
        idx = _draw_entry_indices(cat, cfg.minority_prob, y, ctx)
        noise = pert.normal(0.0, cfg.rho, size=(y, k, d))
        cold_scores = pol.random((y, k)) if cold and acting == "freq" else None
        acting_est = theta_bay if acting == "bayes" else theta_freq

        chosen = np.empty((y, d))
        for i in range(y):
            x_block = cat.means[idx[i]] + noise[i]
            round_ = _round_from_row(cat, idx[i], x_block, done + i + 1)
            if cold_scores is not None:
                masked = np.where(cat.avail[idx[i]], cold_scores[i], -np.inf)
                a = int(np.argmax(masked))
            else:
                a = greedy_select(round_, acting_est)
            pred_a = greedy_select(round_, theta_bay)
            inst = instantaneous_regret(theta, round_, a)
            total += inst
            if round_.group is Group.MINORITY:
                minority_total += inst
            pred_total += instantaneous_regret(theta, round_, pred_a)
            chosen[i] = x_block[a]

        rewards = chosen @ theta + rew.standard_normal(y)
        if context_bound is not None:
            allowance += 2.0 * context_bound * float(np.linalg.norm(theta_bay - theta_freq)) * y
        for p in probe_rounds:
            if done < p <= done + y:
                probes[p] = last_batch_end(p, batch_size) * float(
                    np.linalg.norm(theta_bay - theta_freq)
                )
        Z += chosen.T @ chosen
        xr += chosen.T @ rewards
        n_obs += y
        stats = SufficientStats(0.5 * (Z + Z.T), xr, n_obs)
        theta_freq = ols_estimate(stats)
        theta_bay = bayes_posterior_mean(stats, prior_mean, prior_cov)
        cold = False
        done += y
    return total, minority_total, pred_total, allowance, probes


def reference_perturbed_linucb(cfg, params, theta, horizon, master_seed, replicate):
    """Per-round UCB loop with a freshly inverted Gram matrix every round."""
    cat = CatalogArrays.from_config(cfg)
    k, d = cfg.n_actions, cfg.dim
    ctx = stream(master_seed, replicate, Purpose.CONTEXTS)
    pert = stream(master_seed, replicate, Purpose.PERTURBATIONS)
    rew = stream(master_seed, replicate, Purpose.REWARDS)

    idx = _draw_entry_indices(cat, cfg.minority_prob, horizon, ctx)
    noise = pert.normal(0.0, cfg.rho, size=(horizon, k, d))
    reward_noise = rew.standard_normal(horizon)

    Z = np.zeros((d, d))
    xr = np.zeros(d)
    total = minority_total = 0.0
    theta = np.asarray(theta, dtype=float)
    for t in range(horizon):
        x = cat.means[idx[t]] + noise[t]
        avail = cat.avail[idx[t]]
        W = np.linalg.inv(0.5 * (Z + Z.T) + params.ridge * np.eye(d))
        theta_hat = W @ xr
        f = interval_width(t, params, d)
        widths = np.sqrt(np.maximum(np.einsum("ad,de,ae->a", x, W, x), 0.0))
        scores = np.where(avail, x @ theta_hat + f * widths, -np.inf)
        a = int(np.argmax(scores))

        true_vals = np.where(avail, x @ theta, -np.inf)
        inst = float(true_vals.max() - true_vals[a])
        total += inst
        if cat.minority[idx[t]]:
            minority_total += inst
        chosen = x[a]
        r = float(chosen @ theta) + float(reward_noise[t])
        Z += np.outer(chosen, chosen)
        xr += r * chosen
    return total, minority_total


class TestTwoBridgePolicyEngine:
    @pytest.mark.parametrize("variant", ["theta0", "theta1"])
    @pytest.mark.parametrize("noise", [NoiseKind.GAUSSIAN_UNIT, NoiseKind.BERNOULLI])
    @pytest.mark.parametrize(
        "p_majority,inject", [(0.95, 0.0), (0.0, 0.0), (0.0, 0.95)]
    )
    def test_linucb_matches_generic_reference(self, variant, noise, p_majority, inject):
        horizon = 4000
        cfg = TwoBridgeConfig(
            horizon=horizon, theta_variant=variant, noise=noise, p_majority=p_majority
        )
        params = LinUCBParams.for_two_bridge(horizon)
        res = run_two_bridge_policy(
            cfg, "linucb", MASTER, 3, params=params,
            inject_majority_rate=inject, track_curve=True,
        )
        b_pos, wrong_mask = reference_two_bridge_linucb(cfg, MASTER, 3, params, inject)
        assert res.b_rounds == b_pos.size
        assert res.wrong_b_rounds == int(wrong_mask.sum())
        assert res.regret_total == pytest.approx(cfg.epsilon * wrong_mask.sum())
        gap_size = abs(float(cfg.theta[0] - cfg.theta[1]))
        expected_curve = np.zeros(horizon)
        expected_curve[b_pos[wrong_mask]] = gap_size
        np.testing.assert_array_equal(res.curve, np.cumsum(expected_curve))

    def test_oracle_never_wrong(self):
        cfg = TwoBridgeConfig(horizon=5000, p_majority=0.0)
        res = run_two_bridge_policy(cfg, "oracle", MASTER, 0)
        assert res.wrong_b_rounds == 0
        assert res.regret_total == 0.0
        assert res.b_rounds > 0

    def test_uniform_random_wrong_rate(self):
        cfg = TwoBridgeConfig(horizon=40_000, p_majority=0.0)
        wrongs, totals = 0, 0
        for rep in range(20):
            res = run_two_bridge_policy(cfg, "uniform_random", MASTER, rep)
            assert res.regret_total == pytest.approx(cfg.epsilon * res.wrong_b_rounds)
            assert res.regret_minority == res.regret_total
            wrongs += res.wrong_b_rounds
            totals += res.b_rounds
        assert wrongs / totals == pytest.approx(0.5, abs=3 * 0.5 / math.sqrt(totals))

    def test_unknown_policy_rejected(self):
        cfg = TwoBridgeConfig(horizon=100)
        with pytest.raises(ValueError):
            run_two_bridge_policy(cfg, "thompson", MASTER, 0)

    def test_deterministic_and_replicate_sensitive(self):
        cfg = TwoBridgeConfig(horizon=20_000)
        a = run_two_bridge_policy(cfg, "uniform_random", MASTER, 1)
        b = run_two_bridge_policy(cfg, "uniform_random", MASTER, 1)
        c = run_two_bridge_policy(cfg, "uniform_random", MASTER, 2)
        assert a == b
        assert (a.regret_total, a.b_rounds) != (c.regret_total, c.b_rounds)

    def test_coin_restriction_counts_flagged_wrong_rounds(self):
        cfg = TwoBridgeConfig(horizon=30_000, p_majority=0.0)
        base = run_two_bridge_policy(cfg, "uniform_random", MASTER, 5, track_curve=True)
        coin = run_two_bridge_policy(
            cfg, "uniform_random", MASTER, 5, track_curve=True,
            restriction="coin", restriction_p=0.25,
        )
        assert coin.regret_total == base.regret_total
        np.testing.assert_array_equal(coin.curve, base.curve)
        coins = _coin_mask(MASTER, 5, cfg.horizon, 0.25)
        increments = np.diff(base.curve, prepend=0.0)
        assert coin.regret_minority == pytest.approx(float(increments[coins].sum()))
        assert coin.regret_minority < base.regret_minority


class TestTwoBridgeBatchFreqEngine:
    @pytest.mark.parametrize("variant", ["theta0", "theta1"])
    @pytest.mark.parametrize("noise", [NoiseKind.GAUSSIAN_UNIT, NoiseKind.BERNOULLI])
    @pytest.mark.parametrize("batch_size", [50, 333])
    @pytest.mark.parametrize("p_majority", [0.95, 0.0])
    def test_matches_generic_reference(self, variant, noise, batch_size, p_majority):
        cfg = TwoBridgeConfig(
            horizon=3000, theta_variant=variant, noise=noise, p_majority=p_majority
        )
        res = run_two_bridge_batch_freq(cfg, MASTER, 2, batch_size)
        wrong, n_b = reference_two_bridge_batch_freq(cfg, MASTER, 2, batch_size)
        assert res.wrong_b_rounds == wrong
        assert res.b_rounds == n_b
        assert res.regret_total == pytest.approx(cfg.epsilon * wrong)
        assert res.regret_minority == res.regret_total

    def test_curve_reaches_total(self):
        cfg = TwoBridgeConfig(horizon=3000, p_majority=0.0)
        res = run_two_bridge_batch_freq(cfg, MASTER, 4, 100, track_curve=True)
        assert res.curve.shape == (3000,)
        assert res.curve[-1] == pytest.approx(res.regret_total)
        assert np.all(np.diff(res.curve) >= 0)

    def test_coin_restriction_identity(self):
        cfg = TwoBridgeConfig(horizon=3000, p_majority=0.0)
        base = run_two_bridge_batch_freq(cfg, MASTER, 6, 100, track_curve=True)
        coin = run_two_bridge_batch_freq(
            cfg, MASTER, 6, 100, track_curve=True, restriction="coin", restriction_p=0.5
        )
        assert coin.regret_total == base.regret_total
        coins = _coin_mask(MASTER, 6, cfg.horizon, 0.5)
        increments = np.diff(base.curve, prepend=0.0)
        assert coin.regret_minority == pytest.approx(float(increments[coins].sum()))


def _one_group_catalog() -> PerturbedConfig:
    entries = (
        CatalogEntry(
            weight=0.5,
            means=(np.array([0.5, 0.1]), np.array([0.1, 0.5])),
            group=Group.MAJORITY,
        ),
        CatalogEntry(
            weight=0.3,
            means=(np.array([0.3, 0.3]), None),
            group=Group.MAJORITY,
        ),
        CatalogEntry(
            weight=0.2,
            means=(np.array([0.0, 0.6]), np.array([0.6, 0.0])),
            group=Group.MAJORITY,
        ),
    )
    return PerturbedConfig(entries=entries, rho=0.3, minority_prob=0.0)


def _two_group_catalog() -> PerturbedConfig:
    entries = (
        CatalogEntry(
            weight=0.6,
            means=(np.array([0.5, 0.1]), np.array([0.1, 0.5])),
            group=Group.MAJORITY,
        ),
        CatalogEntry(
            weight=0.4,
            means=(np.array([0.2, 0.4]), np.array([0.4, 0.2])),
            group=Group.MAJORITY,
        ),
        CatalogEntry(
            weight=1.0,
            means=(np.array([0.1, 0.6]), np.array([0.6, 0.1])),
            group=Group.MINORITY,
        ),
    )
    return PerturbedConfig(entries=entries, rho=0.3, minority_prob=0.3)


PRIOR_MEAN = np.array([0.4, 0.2])
PRIOR_COV = np.eye(2)
THETA = np.array([0.7, -0.3])


class TestPerturbedGreedyEngine:
    @pytest.mark.parametrize("acting", ["freq", "bayes"])
    @pytest.mark.parametrize("two_group", [False, True])
    def test_matches_per_round_reference(self, acting, two_group):
        cfg = _two_group_catalog() if two_group else _one_group_catalog()
        kwargs = dict(
            prior_mean=PRIOR_MEAN, prior_cov=PRIOR_COV, theta=THETA,
            horizon=900, batch_size=150, master_seed=MASTER, replicate=1,
            acting=acting, context_bound=2.0, probe_rounds=(100, 800),
        )
        res = run_perturbed_batch_greedy(cfg, **kwargs)
        total, minority, pred, allowance, probes = reference_perturbed_greedy(cfg, **kwargs)
        assert res.regret_total == pytest.approx(total, abs=1e-9)
        assert res.regret_minority == pytest.approx(minority, abs=1e-9)
        assert res.regret_prediction == pytest.approx(pred, abs=1e-9)
        assert res.gap_allowance == pytest.approx(allowance, abs=1e-9)
        assert set(res.probe_values) == {100, 800}
        for p, v in probes.items():
            assert res.probe_values[p] == pytest.approx(v, abs=1e-9)

    def test_one_group_minority_regret_is_zero(self):
        res = run_perturbed_batch_greedy(
            _one_group_catalog(), PRIOR_MEAN, PRIOR_COV, THETA,
            horizon=600, batch_size=200, master_seed=MASTER, replicate=0,
        )
        assert res.regret_minority == 0.0
        assert res.regret_total > 0.0

    def test_probe_uses_frozen_batch_boundary(self):
        res = run_perturbed_batch_greedy(
            _one_group_catalog(), PRIOR_MEAN, PRIOR_COV, THETA,
            horizon=600, batch_size=200, master_seed=MASTER, replicate=0,
            probe_rounds=(150,),
        )
        # Probe round falls in the cold batch: frozen data size is zero, so
        # the probe value must vanish regardless of the estimate distance.
        assert res.probe_values[150] == 0.0

    def test_lambda_curve_matches_eigendecomposition(self):
        res = run_perturbed_batch_greedy(
            _one_group_catalog(), PRIOR_MEAN, PRIOR_COV, THETA,
            horizon=300, batch_size=100, master_seed=MASTER, replicate=2,
            track_lambda=True, track_rows=True,
        )
        gram = np.zeros((2, 2))
        for t, row in enumerate(res.chosen_rows):
            gram += np.outer(row, row)
            lam = np.linalg.eigvalsh(gram)[0]
            assert res.lambda_curve[t] == pytest.approx(lam, abs=1e-8)

    def test_final_stats_match_rows(self):
        res = run_perturbed_batch_greedy(
            _two_group_catalog(), PRIOR_MEAN, PRIOR_COV, THETA,
            horizon=400, batch_size=100, master_seed=MASTER, replicate=3,
            track_rows=True,
        )
        np.testing.assert_allclose(
            res.final_stats.Z, res.chosen_rows.T @ res.chosen_rows, atol=1e-9
        )
        assert res.final_stats.n == 400

    def test_coin_restriction_identity(self):
        cfg = _two_group_catalog()
        kwargs = dict(
            prior_mean=PRIOR_MEAN, prior_cov=PRIOR_COV, theta=THETA,
            horizon=600, batch_size=150, master_seed=MASTER, replicate=4,
        )
        base = run_perturbed_batch_greedy(cfg, track_curve=True, **kwargs)
        coin = run_perturbed_batch_greedy(
            cfg, track_curve=True, restriction="coin", restriction_p=0.25, **kwargs
        )
        assert coin.regret_total == pytest.approx(base.regret_total)
        np.testing.assert_allclose(coin.curve, base.curve)
        coins = _coin_mask(MASTER, 4, 600, 0.25)
        increments = np.diff(base.curve, prepend=0.0)
        assert coin.regret_minority == pytest.approx(
            float(increments[coins].sum()), abs=1e-9
        )


class TestPerturbedLinUCBEngine:
    @pytest.mark.parametrize("two_group", [False, True])
    def test_matches_direct_inverse_reference(self, two_group):
        cfg = _two_group_catalog() if two_group else _one_group_catalog()
        horizon = 400
        params = LinUCBParams.for_perturbed(
            d=2, n_actions=2, horizon=horizon, rho=cfg.rho, prior_mean=PRIOR_MEAN
        )
        res = run_perturbed_linucb(cfg, params, THETA, horizon, MASTER, 1)
        total, minority = reference_perturbed_linucb(cfg, params, THETA, horizon, MASTER, 1)
        assert res.regret_total == pytest.approx(total, abs=1e-9)
        assert res.regret_minority == pytest.approx(minority, abs=1e-9)

    def test_cached_inverse_matches_per_round_refresh(self):
        cfg = _one_group_catalog()
        horizon = 3000
        params = LinUCBParams.for_perturbed(
            d=2, n_actions=2, horizon=horizon, rho=cfg.rho, prior_mean=PRIOR_MEAN
        )
        cached = run_perturbed_linucb(cfg, params, THETA, horizon, MASTER, 2)
        exact = run_perturbed_linucb(
            cfg, params, THETA, horizon, MASTER, 2, refresh_every=1
        )
        assert cached.regret_total == pytest.approx(exact.regret_total, abs=1e-9)
        np.testing.assert_allclose(cached.final_stats.Z, exact.final_stats.Z, atol=1e-7)

    def test_requires_positive_ridge(self):
        params = LinUCBParams(L=1.0, S=1.0, horizon=100, ridge=0.0)
        with pytest.raises(ValueError):
            run_perturbed_linucb(_one_group_catalog(), params, THETA, 100, MASTER, 0)

    def test_coin_restriction_identity(self):
        cfg = _two_group_catalog()
        horizon = 500
        params = LinUCBParams.for_perturbed(
            d=2, n_actions=2, horizon=horizon, rho=cfg.rho, prior_mean=PRIOR_MEAN
        )
        base = run_perturbed_linucb(
            cfg, params, THETA, horizon, MASTER, 3, track_curve=True
        )
        coin = run_perturbed_linucb(
            cfg, params, THETA, horizon, MASTER, 3, track_curve=True,
            restriction="coin", restriction_p=0.5,
        )
        assert coin.regret_total == pytest.approx(base.regret_total)
        coins = _coin_mask(MASTER, 3, horizon, 0.5)
        increments = np.diff(base.curve, prepend=0.0)
        assert coin.regret_minority == pytest.approx(
            float(increments[coins].sum()), abs=1e-9
        )


class TestCatalogArrays:
    def test_dense_layout(self):
        cfg = _two_group_catalog()
        cat = CatalogArrays.from_config(cfg)
        assert cat.means.shape == (3, 2, 2)
        np.testing.assert_array_equal(cat.minority, [False, False, True])
        assert cat.avail.all()
        one_missing = CatalogArrays.from_config(_one_group_catalog())
        assert not one_missing.avail[1, 1]
        np.testing.assert_array_equal(one_missing.means[1, 1], [0.0, 0.0])

    def test_entry_draw_frequencies(self):
        cat = CatalogArrays.from_config(_one_group_catalog())
        rng = np.random.default_rng(0)
        n = 100_000
        idx = _draw_entry_indices(cat, 0.0, n, rng)
        freq = np.bincount(idx, minlength=3) / n
        for f, w in zip(freq, (0.5, 0.3, 0.2)):
            assert f == pytest.approx(w, abs=3 * math.sqrt(w * (1 - w) / n))

    def test_two_group_draw_respects_minority_rate(self):
        cat = CatalogArrays.from_config(_two_group_catalog())
        rng = np.random.default_rng(1)
        n = 100_000
        idx = _draw_entry_indices(cat, 0.3, n, rng)
        minority_freq = cat.minority[idx].mean()
        assert minority_freq == pytest.approx(0.3, abs=3 * math.sqrt(0.3 * 0.7 / n))
        majority = idx[~cat.minority[idx]]
        freq0 = (majority == 0).mean()
        assert freq0 == pytest.approx(0.6, abs=3 * math.sqrt(0.6 * 0.4 / majority.size))


class TestLambdaMinCurve:
    def test_matches_eigvalsh(self):
        rng = np.random.default_rng(2)
        rows = rng.normal(size=(200, 2))
        curve = _lambda_min_curve(rows)
        gram = np.zeros((2, 2))
        for t, row in enumerate(rows):
            gram += np.outer(row, row)
            assert curve[t] == pytest.approx(np.linalg.eigvalsh(gram)[0], abs=1e-8)

    def test_requires_two_columns(self):
        with pytest.raises(ValueError):
            _lambda_min_curve(np.zeros((5, 3)))
