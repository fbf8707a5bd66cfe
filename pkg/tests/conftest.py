"""Shared random-instance builders for the test suite."""

import numpy as np
import pytest

import teamstruct as ts


def gram(rng, n, reg=0.0):
    f = rng.standard_normal((n, n))
    return f.T @ f + reg * np.eye(n)


def random_team(seed, n=None, agents=None, zero_mean=False):
    """Random team problem with heterogeneous block sizes, n <= 8, N <= 4."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9)) if n is None else n
    agents = int(rng.integers(1, 5)) if agents is None else agents
    dims = tuple(int(rng.integers(1, 4)) for _ in range(agents))
    ps = [int(rng.integers(1, 4)) for _ in range(agents)]
    total = sum(dims)
    mean = np.zeros(n) if zero_mean else rng.standard_normal(n)
    prior = ts.GaussianPrior(mean=mean, covariance=gram(rng, n))
    channels = tuple(
        ts.Channel(H=rng.standard_normal((p, n)), R=gram(rng, p)) for p in ps
    )
    objective = ts.TeamObjective(
        Q=rng.standard_normal((total, n)),
        P=gram(rng, total, reg=0.1),
        dims=dims,
    )
    return ts.TeamProblem(
        prior=prior,
        structure=ts.InformationStructure(channels=channels),
        objective=objective,
    )


def random_candidates(seed, problem, count):
    rng = np.random.default_rng(seed)
    n = problem.prior.n
    agents = problem.structure.agents
    links = tuple(
        ts.CandidateLink(
            id=i,
            agent=int(rng.integers(0, agents)),
            h=rng.standard_normal(n),
            r=float(rng.standard_normal() ** 2),
        )
        for i in range(count)
    )
    return ts.CandidateSet(links=links)


def random_game(seed, coupling=0.5, zero_mean=False):
    """Random two-team game; cross kernels scaled down to keep it well posed."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    nb = int(rng.integers(1, 4))
    nr = int(rng.integers(1, 4))
    bdims = tuple(int(rng.integers(1, 3)) for _ in range(nb))
    rdims = tuple(int(rng.integers(1, 3)) for _ in range(nr))
    mu, mv = sum(bdims), sum(rdims)
    mean = np.zeros(n) if zero_mean else rng.standard_normal(n)
    prior = ts.GaussianPrior(mean=mean, covariance=gram(rng, n))
    blue = ts.InformationStructure(channels=tuple(
        _random_channel(rng, n) for _ in range(nb)
    ))
    red = ts.InformationStructure(channels=tuple(
        _random_channel(rng, n) for _ in range(nr)
    ))
    objective = ts.GameObjective(
        Q1=rng.standard_normal((mu, n)),
        P1=gram(rng, mu, reg=0.1),
        R1=coupling * rng.standard_normal((mv, mu)),
        Q2=rng.standard_normal((mv, n)),
        P2=gram(rng, mv, reg=0.1),
        R2=coupling * rng.standard_normal((mv, mu)),
        blue_dims=bdims,
        red_dims=rdims,
    )
    return ts.GameProblem(prior=prior, blue=blue, red=red, objective=objective)


def _random_channel(rng, n):
    p = int(rng.integers(1, 4))
    return ts.Channel(H=rng.standard_normal((p, n)), R=gram(rng, p))


def zero_sum_scalar():
    """Full-information scalar zero-sum game with unit kernels."""
    prior = ts.GaussianPrior(mean=np.zeros(1), covariance=np.eye(1))
    full = ts.InformationStructure(
        channels=(ts.Channel(H=np.eye(1), R=np.zeros((1, 1))),)
    )
    objective = ts.zero_sum_game(
        Q=np.array([[1.0]]),
        Pu=np.array([[1.0]]),
        Pv=np.array([[1.0]]),
        Rcross=np.array([[1.0]]),
        blue_dims=(1,),
        red_dims=(1,),
    )
    return ts.GameProblem(prior=prior, blue=full, red=full, objective=objective)


@pytest.fixture
def counterexample():
    return ts.counterexample_instance()
