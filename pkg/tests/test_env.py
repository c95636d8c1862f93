import math

import numpy as np
import pytest
from scipy import stats

from clipfolio import dirichlet
from clipfolio.algo import prepare_data
from clipfolio.data import SyntheticSpec, generate_synthetic
from clipfolio.env import (
    EpisodeSpec,
    RewardComponents,
    aggregate_env_reward,
    compute_reward_components,
    normalized_entropy,
    on_simplex,
    portfolio_step_return,
    rollout_deterministic,
    rollout_stochastic,
    step_reward_components,
)
from clipfolio.errors import (
    DimensionMismatch,
    EpisodeTooShort,
    InvalidSpec,
    NotOnSimplex,
    RangeOutOfBounds,
)
from clipfolio.nn import LayerSpec, init_params


@pytest.fixture(scope="module")
def data():
    return prepare_data(generate_synthetic(SyntheticSpec(3, 200, 0.0003, 0.01, (), seed=1)), 5)


def test_step_return():
    assert portfolio_step_return([0.25, 0.75], [0.04, 0.0]) == pytest.approx(0.01, abs=1e-17)
    with pytest.raises(NotOnSimplex):
        portfolio_step_return([0.5, 0.6], [0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        portfolio_step_return([1.0], [0.0, 0.0])


def test_dirichlet_closed_forms():
    x, a = np.array([0.5, 0.5]), np.array([2.0, 2.0])
    assert dirichlet.logpdf(x, a) == pytest.approx(math.log(6) - 2 * math.log(2), abs=1e-14)
    gen = np.random.default_rng(0)
    for _ in range(20):
        alpha = gen.uniform(0.5, 5.0, 4)
        point = gen.dirichlet(alpha)
        assert dirichlet.logpdf(point, alpha) == pytest.approx(stats.dirichlet.logpdf(point, alpha))
        assert dirichlet.entropy(alpha) == pytest.approx(stats.dirichlet.entropy(alpha))
        h = 1e-6
        for i in range(4):
            e = np.eye(4)[i] * h
            fd = (dirichlet.logpdf(point, alpha + e) - dirichlet.logpdf(point, alpha - e)) / (2 * h)
            assert dirichlet.logpdf_grad_alpha(point, alpha)[i] == pytest.approx(fd, rel=1e-6, abs=1e-8)
            fd = (dirichlet.entropy(alpha + e) - dirichlet.entropy(alpha - e)) / (2 * h)
            assert dirichlet.entropy_grad_alpha(alpha)[i] == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_deterministic_rollout_layout(data):
    spec = LayerSpec((15, 8, 3), "softmax")
    traj = rollout_deterministic(init_params(spec, 0), spec, data.windows, data.returns, EpisodeSpec(10, 50, 21))
    assert traj.n_steps == 3 and traj.n_days == 50
    assert traj.decision_rows.tolist() == [10, 31, 52]
    assert np.array_equal(traj.step_of_day[[0, 20, 21, 42, 49]], [0, 0, 1, 2, 2])
    assert np.array_equal(traj.asset_returns, data.returns.values[10:60])
    expect = (traj.weights[traj.step_of_day] * traj.asset_returns).sum(axis=1)
    assert np.allclose(traj.portfolio_returns, expect, rtol=1e-14, atol=0)
    assert all(on_simplex(w) for w in traj.weights)
    with pytest.raises(RangeOutOfBounds):
        rollout_deterministic(init_params(spec, 0), spec, data.windows, data.returns, EpisodeSpec(190, 21, 21))
    with pytest.raises(RangeOutOfBounds):
        rollout_deterministic(init_params(spec, 0), spec, data.windows, data.returns, EpisodeSpec(2, 21, 21))


def test_stochastic_rollout(data):
    spec = LayerSpec((15, 8, 3), "softplus")
    params = init_params(spec, 2)
    ep = EpisodeSpec(10, 63, 21)
    a = rollout_stochastic(params, spec, data.windows, data.returns, ep, 5)
    b = rollout_stochastic(params, spec, data.windows, data.returns, ep, 5)
    assert np.array_equal(a.weights, b.weights)
    assert np.all(a.concentrations >= 1)
    assert np.allclose(a.log_density, dirichlet.logpdf(a.weights, a.concentrations))
    with pytest.raises(InvalidSpec):
        rollout_stochastic(init_params(LayerSpec((15, 3), "softmax"), 0), LayerSpec((15, 3), "softmax"),
                           data.windows, data.returns, ep, 0)


def test_reward_components(data):
    assert normalized_entropy(np.array([[1 / 3] * 3, [1.0, 0.0, 0.0]])) == pytest.approx([1.0, 0.0])
    assert normalized_entropy(np.array([[1.0]])).tolist() == [1.0]
    spec = LayerSpec((15, 3), "softmax")
    traj = rollout_deterministic(np.zeros(spec.n_params), spec, data.windows, data.returns, EpisodeSpec(5, 42, 21))
    comps = compute_reward_components(traj)
    r = traj.portfolio_returns
    assert comps.return_component == pytest.approx(r.mean())
    assert comps.sharpe_component == pytest.approx(r.mean() / r.std(ddof=1) * np.sqrt(252))
    assert comps.antibias_component == pytest.approx(1.0)
    per_step = step_reward_components(traj)
    assert per_step.shape == (2, 3)
    assert per_step[0, 0] == pytest.approx(r[:21].mean())
    with pytest.raises(EpisodeTooShort):
        compute_reward_components(rollout_deterministic(np.zeros(spec.n_params), spec, data.windows,
                                                        data.returns, EpisodeSpec(5, 1, 1)))


def test_aggregate_reward():
    assert aggregate_env_reward(RewardComponents(0.1, 0.5, 1.0), (1, 0.2, 0.05)) == pytest.approx(0.25)
    with pytest.raises(InvalidSpec):
        aggregate_env_reward(RewardComponents(0, 0, 0), (1, -1, 0))
