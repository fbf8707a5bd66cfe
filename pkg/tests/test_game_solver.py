"""Two-team games: Nash systems, best responses, zero-sum construction."""

import dataclasses

import numpy as np
import pytest

import teamstruct as ts
from conftest import gram, random_game, zero_sum_scalar


def blue_team_problem(game):
    obj = game.objective
    return ts.TeamProblem(
        prior=game.prior,
        structure=game.blue,
        objective=ts.TeamObjective(Q=obj.Q1, P=obj.P1, dims=obj.blue_dims),
    )


def red_team_problem(game):
    obj = game.objective
    return ts.TeamProblem(
        prior=game.prior,
        structure=game.red,
        objective=ts.TeamObjective(Q=obj.Q2, P=obj.P2, dims=obj.red_dims),
    )


def strategy_distance(a, b):
    return max(
        np.abs(np.vstack(a.A) - np.vstack(b.A)).max(),
        np.abs(np.vstack(a.B) - np.vstack(b.B)).max(),
    )


@pytest.mark.parametrize("seed", range(6))
def test_decoupled_game_reduces_to_team_solves(seed):
    game = random_game(seed, coupling=0.0)
    strategy = ts.solve_game(game)
    blue = ts.solve_team(blue_team_problem(game))
    red = ts.solve_team(red_team_problem(game))
    assert strategy_distance(strategy.blue, blue) < 1e-10
    assert strategy_distance(strategy.red, red) < 1e-10
    j1, j2 = ts.nash_values(game)
    assert j1 == pytest.approx(ts.optimal_team_value(blue_team_problem(game)), abs=1e-9)
    assert j2 == pytest.approx(ts.optimal_team_value(red_team_problem(game)), abs=1e-9)


def test_scalar_zero_sum_equilibrium():
    game = zero_sum_scalar()
    strategy = ts.solve_game(game)
    # scalar first-order conditions: b = -q s / (p s + r^2), d = -q r / (p s + r^2)
    assert strategy.blue.B[0][0, 0] == pytest.approx(-0.5, abs=1e-9)
    assert strategy.red.B[0][0, 0] == pytest.approx(-0.5, abs=1e-9)
    full, negated = ts.zero_sum_values(game, strategy)
    assert full == pytest.approx(-0.25, abs=1e-9)
    assert negated == pytest.approx(0.25, abs=1e-9)
    assert full + negated == 0.0


def test_zero_sum_game_without_coupling_decouples():
    obj = ts.zero_sum_game(
        Q=np.array([[1.0]]), Pu=np.array([[2.0]]), Pv=np.array([[3.0]]),
        Rcross=np.zeros((1, 1)), blue_dims=(1,), red_dims=(1,),
    )
    assert np.all(obj.R2 == 0.0)
    assert np.all(obj.Q2 == 0.0)


@pytest.mark.parametrize("seed", range(20))
def test_best_response_fixed_point(seed):
    game = random_game(seed)
    strategy = ts.solve_game(game)
    br_blue = ts.best_response_blue(game, strategy.red)
    br_red = ts.best_response_red(game, strategy.blue)
    assert strategy_distance(br_blue, strategy.blue) <= 1e-8
    assert strategy_distance(br_red, strategy.red) <= 1e-8


def test_best_response_against_zero_red_is_team_solve():
    game = random_game(3)
    n = game.prior.n
    zero_red = ts.TeamStrategy(
        A=tuple(np.zeros((m, n)) for m in game.objective.red_dims),
        B=tuple(np.zeros((m, n)) for m in game.objective.red_dims),
    )
    response = ts.best_response_blue(game, zero_red)
    team = ts.solve_team(blue_team_problem(game))
    assert strategy_distance(response, team) < 1e-10


def test_best_response_independent_of_red_when_uncoupled():
    game = random_game(4)
    uncoupled = dataclasses.replace(
        game,
        objective=dataclasses.replace(game.objective,
                                      R1=np.zeros_like(game.objective.R1)),
    )
    rng = np.random.default_rng(0)
    n = game.prior.n
    red_a = ts.TeamStrategy(
        A=tuple(rng.standard_normal((m, n)) for m in game.objective.red_dims),
        B=tuple(rng.standard_normal((m, n)) for m in game.objective.red_dims),
    )
    red_b = ts.TeamStrategy(
        A=tuple(rng.standard_normal((m, n)) for m in game.objective.red_dims),
        B=tuple(rng.standard_normal((m, n)) for m in game.objective.red_dims),
    )
    resp_a = ts.best_response_blue(uncoupled, red_a)
    resp_b = ts.best_response_blue(uncoupled, red_b)
    assert strategy_distance(resp_a, resp_b) == 0.0


def test_nash_values_is_composition():
    game = random_game(8)
    strategy = ts.solve_game(game)
    assert ts.nash_values(game) == ts.game_values(game, strategy)


def test_game_values_zero_strategies():
    game = random_game(9)
    n = game.prior.n
    zero = ts.GameStrategy(
        blue=ts.TeamStrategy(
            A=tuple(np.zeros((m, n)) for m in game.objective.blue_dims),
            B=tuple(np.zeros((m, n)) for m in game.objective.blue_dims),
        ),
        red=ts.TeamStrategy(
            A=tuple(np.zeros((m, n)) for m in game.objective.red_dims),
            B=tuple(np.zeros((m, n)) for m in game.objective.red_dims),
        ),
    )
    assert ts.game_values(game, zero) == (0.0, 0.0)


def test_equilibrium_residuals_are_small():
    game = random_game(10)
    strategy = ts.solve_game(game)
    res = ts.game_residuals(game, strategy)
    assert max(res.values()) <= 1e-8


def test_zero_dimensional_red_team_reduces_to_single_team():
    # a red team with zero decision dimensions leaves blue's problem untouched
    team = blue_team_problem(random_game(12, coupling=0.0))
    n = team.prior.n
    mu = sum(team.objective.dims)
    game = ts.GameProblem(
        prior=team.prior,
        blue=team.structure,
        red=ts.InformationStructure(channels=(
            ts.Channel(H=np.zeros((1, n)), R=np.eye(1)),
        )),
        objective=ts.GameObjective(
            Q1=team.objective.Q,
            P1=team.objective.P,
            R1=np.zeros((0, mu)),
            Q2=np.zeros((0, n)),
            P2=np.zeros((0, 0)),
            R2=np.zeros((0, mu)),
            blue_dims=team.objective.dims,
            red_dims=(0,),
        ),
    )
    strategy = ts.solve_game(game)
    expected = ts.solve_team(team)
    assert strategy_distance(strategy.blue, expected) < 1e-12
    j1, j2 = ts.nash_values(game)
    assert j1 == pytest.approx(ts.optimal_team_value(team), abs=1e-12)
    assert j2 == 0.0


def test_blue_information_advantage_decoupled():
    # with no coupling, extra noiseless blue rows can only improve J1*
    game = random_game(14, coupling=0.0)
    rng = np.random.default_rng(2)
    n = game.prior.n
    better_channels = []
    for ch in game.blue.channels:
        H = np.vstack([ch.H, rng.standard_normal((1, n))])
        R = np.zeros((ch.p + 1, ch.p + 1))
        R[:ch.p, :ch.p] = ch.R
        better_channels.append(ts.Channel(H=H, R=R))
    richer = dataclasses.replace(
        game, blue=ts.InformationStructure(channels=tuple(better_channels))
    )
    assert ts.nash_values(richer)[0] <= ts.nash_values(game)[0] + 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_zero_sum_saddle_point(seed):
    rng = np.random.default_rng(700 + seed)
    n = int(rng.integers(2, 5))
    mu = int(rng.integers(1, 3))
    mv = int(rng.integers(1, 3))
    prior = ts.GaussianPrior(mean=np.zeros(n), covariance=gram(rng, n, reg=0.2))
    blue = ts.InformationStructure(channels=(
        ts.Channel(H=rng.standard_normal((2, n)), R=gram(rng, 2, reg=0.05)),
    ))
    red = ts.InformationStructure(channels=(
        ts.Channel(H=rng.standard_normal((2, n)), R=gram(rng, 2, reg=0.05)),
    ))
    objective = ts.zero_sum_game(
        Q=rng.standard_normal((mu, n)),
        Pu=gram(rng, mu, reg=0.3),
        Pv=gram(rng, mv, reg=0.3),
        Rcross=0.4 * rng.standard_normal((mv, mu)),
        blue_dims=(mu,),
        red_dims=(mv,),
    )
    game = ts.GameProblem(prior=prior, blue=blue, red=red, objective=objective)
    strategy = ts.solve_game(game)
    value, _ = ts.zero_sum_values(game, strategy)
    for _ in range(3):
        delta = rng.standard_normal(strategy.blue.B[0].shape)
        delta *= 1e-3 / np.linalg.norm(delta)
        bumped_blue = ts.GameStrategy(
            blue=ts.TeamStrategy(A=strategy.blue.A,
                                 B=(strategy.blue.B[0] + delta,)),
            red=strategy.red,
        )
        assert ts.zero_sum_values(game, bumped_blue)[0] >= value - 1e-12
        delta = rng.standard_normal(strategy.red.B[0].shape)
        delta *= 1e-3 / np.linalg.norm(delta)
        bumped_red = ts.GameStrategy(
            blue=strategy.blue,
            red=ts.TeamStrategy(A=strategy.red.A, B=(strategy.red.B[0] + delta,)),
        )
        assert ts.zero_sum_values(game, bumped_red)[0] <= value + 1e-12


def test_zero_sum_values_rejects_general_games():
    game = random_game(15)
    strategy = ts.solve_game(game)
    with pytest.raises(ts.InvalidInputError):
        ts.zero_sum_values(game, strategy)
