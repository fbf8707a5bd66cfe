"""Independent sampling and iteration oracles for the game solver."""

import numpy as np
import pytest

import teamstruct as ts
from conftest import random_game


def psd_factor(mat):
    if mat.size == 0:
        return np.zeros_like(mat)
    w, V = np.linalg.eigh(0.5 * (mat + mat.T))
    return V * np.sqrt(np.clip(w, 0.0, None))


def sampled_game_values(game, strategy, samples, seed):
    """Straight-line Monte Carlo estimate of (J1, J2) with standard errors."""
    rng = np.random.default_rng(seed)
    obj = game.objective
    xbar = game.prior.mean
    xs = xbar + rng.standard_normal((samples, game.prior.n)) @ psd_factor(
        game.prior.covariance).T

    def decisions(structure, strat):
        parts = []
        for ch, a, b in zip(structure.channels, strat.A, strat.B):
            z = xs @ ch.H.T
            if ch.p:
                z = z + rng.standard_normal((samples, ch.p)) @ psd_factor(ch.R).T
            gain = ts.posterior_gain(game.prior, ch)
            dev = (z - xbar @ ch.H.T) @ gain.K.T
            parts.append(xbar @ a.T + dev @ b.T)
        return np.hstack(parts)

    u = decisions(game.blue, strategy.blue)
    v = decisions(game.red, strategy.red)
    j1 = (np.sum(u * (xs @ obj.Q1.T), axis=1)
          + 0.5 * np.sum(u * (u @ obj.P1), axis=1)
          + np.sum(v * (u @ obj.R1.T), axis=1))
    j2 = (np.sum(v * (xs @ obj.Q2.T), axis=1)
          + 0.5 * np.sum(v * (v @ obj.P2), axis=1)
          + np.sum(v * (u @ obj.R2.T), axis=1))
    out = []
    for sample in (j1, j2):
        out.append((float(sample.mean()),
                    float(sample.std(ddof=1) / np.sqrt(samples))))
    return out


@pytest.mark.parametrize("seed", range(4))
def test_game_values_match_sampling(seed):
    game = random_game(8000 + seed)
    strategy = ts.solve_game(game)
    exact1, exact2 = ts.game_values(game, strategy)
    (mc1, se1), (mc2, se2) = sampled_game_values(game, strategy,
                                                 samples=400_000,
                                                 seed=8100 + seed)
    assert abs(mc1 - exact1) <= 3.0 * se1
    assert abs(mc2 - exact2) <= 3.0 * se2


def test_game_values_match_sampling_off_equilibrium():
    # the value formulas hold for arbitrary affine strategies, not just Nash
    game = random_game(8500)
    rng = np.random.default_rng(8501)
    n = game.prior.n
    strategy = ts.GameStrategy(
        blue=ts.TeamStrategy(
            A=tuple(rng.standard_normal((m, n)) for m in game.objective.blue_dims),
            B=tuple(rng.standard_normal((m, n)) for m in game.objective.blue_dims),
        ),
        red=ts.TeamStrategy(
            A=tuple(rng.standard_normal((m, n)) for m in game.objective.red_dims),
            B=tuple(rng.standard_normal((m, n)) for m in game.objective.red_dims),
        ),
    )
    exact1, exact2 = ts.game_values(game, strategy)
    (mc1, se1), (mc2, se2) = sampled_game_values(game, strategy,
                                                 samples=400_000, seed=8502)
    assert abs(mc1 - exact1) <= 3.0 * se1
    assert abs(mc2 - exact2) <= 3.0 * se2


@pytest.mark.parametrize("seed", range(4))
def test_best_response_iteration_converges_to_joint_solution(seed):
    # alternating best responses contract when the cross kernels are small
    # against the objective curvature, giving an independent route to the
    # same equilibrium; scale R1, R2 to force that regime
    import dataclasses

    game = random_game(9000 + seed, coupling=1.0)
    obj = game.objective
    p1min = np.linalg.eigvalsh(obj.P1).min()
    p2min = np.linalg.eigvalsh(obj.P2).min()
    cross = np.linalg.norm(obj.R1, 2) * np.linalg.norm(obj.R2, 2)
    scale = np.sqrt(0.25 * p1min * p2min / cross)
    game = dataclasses.replace(
        game,
        objective=dataclasses.replace(obj, R1=scale * obj.R1, R2=scale * obj.R2),
    )
    joint = ts.solve_game(game)
    n = game.prior.n
    red = ts.TeamStrategy(
        A=tuple(np.zeros((m, n)) for m in game.objective.red_dims),
        B=tuple(np.zeros((m, n)) for m in game.objective.red_dims),
    )
    blue = None
    for _ in range(200):
        blue = ts.best_response_blue(game, red)
        red = ts.best_response_red(game, blue)
    dist = max(
        np.abs(np.vstack(blue.A) - np.vstack(joint.blue.A)).max(),
        np.abs(np.vstack(blue.B) - np.vstack(joint.blue.B)).max(),
        np.abs(np.vstack(red.A) - np.vstack(joint.red.A)).max(),
        np.abs(np.vstack(red.B) - np.vstack(joint.red.B)).max(),
    )
    assert dist <= 1e-8
