"""Affine Nash equilibria for static two-team LQ games.

Blue minimizes E[u'Q1 x + 0.5 u'P1 u + v'R1 u] and red minimizes
E[v'Q2 x + 0.5 v'P2 v + v'R2 u], each agent acting on its own conditional
state estimate. Differentiating each team's cost conditional on its own
information gives coupled linear systems in the mean coefficients (A, C) and
the estimate coefficients (B, D); both are solved jointly as dense systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import solve_checked
from .model import (
    GaussianPrior,
    InformationStructure,
    TeamStrategy,
    _check_pd,
    _check_symmetric,
    _frozen_array,
    _offsets,
    block,
)
from .team_solver import affine_cost, channel_gains, solve_block_affine, _vec, _unvec


@dataclass(frozen=True, eq=False)
class GameObjective:
    """Quadratic kernels of both teams.

    R1 and R2 hold the cross kernels of v'R1 u and v'R2 u, indexed
    (red block j, blue block i).
    """

    Q1: np.ndarray
    P1: np.ndarray
    R1: np.ndarray
    Q2: np.ndarray
    P2: np.ndarray
    R2: np.ndarray
    blue_dims: tuple[int, ...]
    red_dims: tuple[int, ...]

    def __post_init__(self):
        Q1 = _frozen_array(self.Q1, "Q1", 2)
        P1 = _frozen_array(self.P1, "P1", 2)
        R1 = _frozen_array(self.R1, "R1", 2)
        Q2 = _frozen_array(self.Q2, "Q2", 2)
        P2 = _frozen_array(self.P2, "P2", 2)
        R2 = _frozen_array(self.R2, "R2", 2)
        blue_dims = tuple(int(m) for m in self.blue_dims)
        red_dims = tuple(int(m) for m in self.red_dims)
        if any(m < 0 for m in blue_dims + red_dims):
            raise InvalidInputError("decision dimensions must be >= 0")
        mu = sum(blue_dims)
        mv = sum(red_dims)
        if Q1.shape[0] != mu:
            raise InvalidInputError(f"Q1 has {Q1.shape[0]} rows, blue dims sum to {mu}")
        if Q2.shape[0] != mv:
            raise InvalidInputError(f"Q2 has {Q2.shape[0]} rows, red dims sum to {mv}")
        if Q2.shape[1] != Q1.shape[1]:
            raise InvalidInputError("Q1 and Q2 must share the state dimension")
        if P1.shape != (mu, mu):
            raise InvalidInputError(f"P1 shape {P1.shape}, expected ({mu}, {mu})")
        if P2.shape != (mv, mv):
            raise InvalidInputError(f"P2 shape {P2.shape}, expected ({mv}, {mv})")
        for name, mat in (("R1", R1), ("R2", R2)):
            if mat.shape != (mv, mu):
                raise InvalidInputError(f"{name} shape {mat.shape}, expected ({mv}, {mu})")
        _check_symmetric(P1, "P1")
        _check_pd(P1, "P1")
        _check_symmetric(P2, "P2")
        _check_pd(P2, "P2")
        for name, val in (("Q1", Q1), ("P1", P1), ("R1", R1), ("Q2", Q2),
                          ("P2", P2), ("R2", R2)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "blue_dims", blue_dims)
        object.__setattr__(self, "red_dims", red_dims)


@dataclass(frozen=True, eq=False)
class GameProblem:
    """A fixed-information two-team game."""

    prior: GaussianPrior
    blue: InformationStructure
    red: InformationStructure
    objective: GameObjective

    def __post_init__(self):
        if self.blue.agents != len(self.objective.blue_dims):
            raise InvalidInputError(
                f"blue structure has {self.blue.agents} agents but objective "
                f"has {len(self.objective.blue_dims)} blocks"
            )
        if self.red.agents != len(self.objective.red_dims):
            raise InvalidInputError(
                f"red structure has {self.red.agents} agents but objective "
                f"has {len(self.objective.red_dims)} blocks"
            )
        for name, structure in (("blue", self.blue), ("red", self.red)):
            if structure.n != self.prior.n:
                raise InvalidInputError(
                    f"{name} structure state dimension {structure.n} does not "
                    f"match prior {self.prior.n}"
                )
        if self.objective.Q1.shape[1] != self.prior.n:
            raise InvalidInputError(
                f"Q1 has {self.objective.Q1.shape[1]} columns, expected {self.prior.n}"
            )


@dataclass(frozen=True, eq=False)
class GameStrategy:
    """Affine strategies of both teams; red reuses the TeamStrategy shape."""

    blue: TeamStrategy
    red: TeamStrategy


def _check_game_strategy(problem: GameProblem, strategy: GameStrategy) -> None:
    if strategy.blue.dims != problem.objective.blue_dims:
        raise InvalidInputError(
            f"blue strategy dims {strategy.blue.dims} do not match objective "
            f"{problem.objective.blue_dims}"
        )
    if strategy.red.dims != problem.objective.red_dims:
        raise InvalidInputError(
            f"red strategy dims {strategy.red.dims} do not match objective "
            f"{problem.objective.red_dims}"
        )


def solve_game(problem: GameProblem) -> GameStrategy:
    """The unique affine Nash equilibrium of the game.

    Mean coefficients solve the block system
    ``[[P1, R1'], [R2, P2]] [A; C] = [-Q1; -Q2]``. Estimate coefficients solve
    the vectorized coupled system whose own-team blocks match the single-team
    solver and whose cross-team blocks are ``kron(N_j', R1_ji')`` for blue
    rows and ``kron(M_i', R2_ji)`` for red rows, with M and N the blue and red
    conditional-mean maps.
    """
    return solve_game_with_diagnostics(problem)[0]


def solve_game_with_diagnostics(problem: GameProblem) -> tuple[GameStrategy, dict]:
    """Like solve_game, also returning condition estimates and residuals."""
    obj = problem.objective
    n = problem.prior.n
    bdims = obj.blue_dims
    rdims = obj.red_dims
    nb, nr = len(bdims), len(rdims)
    mu, mv = sum(bdims), sum(rdims)
    gains_b = channel_gains(problem.prior, problem.blue)
    gains_r = channel_gains(problem.prior, problem.red)

    top = np.hstack([obj.P1, obj.R1.T])
    bottom = np.hstack([obj.R2, obj.P2])
    mean_sys = np.vstack([top, bottom])
    mean_rhs = np.vstack([-obj.Q1, -obj.Q2])
    mean_sol, cond_mean = solve_checked(mean_sys, mean_rhs, what="game mean system")
    boffs = _offsets(bdims)
    roffs = _offsets(rdims)
    a_blocks = tuple(mean_sol[boffs[i]:boffs[i + 1]] for i in range(nb))
    c_blocks = tuple(mean_sol[mu + roffs[j]:mu + roffs[j + 1]] for j in range(nr))

    dims = bdims + rdims
    offs = _offsets(dims)
    voffs = [o * n for o in offs]
    size = n * (mu + mv)
    if size == 0:
        strategy = GameStrategy(
            blue=TeamStrategy(A=a_blocks, B=tuple(np.zeros((m, n)) for m in bdims)),
            red=TeamStrategy(A=c_blocks, B=tuple(np.zeros((m, n)) for m in rdims)),
        )
        return strategy, _game_diagnostics(problem, strategy, cond_mean, 1.0)

    maps = [g.M for g in gains_b] + [g.M for g in gains_r]
    eye = np.eye(n)
    system = np.zeros((size, size))
    rhs = np.zeros(size)

    def own_block(row, col, P, dims_own, base):
        p_rc = block(P, dims_own, dims_own, row, col)
        right = eye if row == col else maps[base + col]
        return np.kron(right.T, p_rc)

    for i in range(nb):
        rhs[voffs[i]:voffs[i + 1]] = _vec(-obj.Q1[boffs[i]:boffs[i + 1]])
        for j in range(nb):
            system[voffs[i]:voffs[i + 1], voffs[j]:voffs[j + 1]] = \
                own_block(i, j, obj.P1, bdims, 0)
        for j in range(nr):
            r1_ji = block(obj.R1, rdims, bdims, j, i)
            system[voffs[i]:voffs[i + 1], voffs[nb + j]:voffs[nb + j + 1]] = \
                np.kron(maps[nb + j].T, r1_ji.T)
    for j in range(nr):
        row = nb + j
        rhs[voffs[row]:voffs[row + 1]] = _vec(-obj.Q2[roffs[j]:roffs[j + 1]])
        for l in range(nr):
            system[voffs[row]:voffs[row + 1], voffs[nb + l]:voffs[nb + l + 1]] = \
                own_block(j, l, obj.P2, rdims, nb)
        for i in range(nb):
            r2_ji = block(obj.R2, rdims, bdims, j, i)
            system[voffs[row]:voffs[row + 1], voffs[i]:voffs[i + 1]] = \
                np.kron(maps[i].T, r2_ji)

    sol, cond_est = solve_checked(system, rhs, what="game estimate system")
    b_blocks = tuple(_unvec(sol[voffs[i]:voffs[i + 1]], bdims[i], n) for i in range(nb))
    d_blocks = tuple(
        _unvec(sol[voffs[nb + j]:voffs[nb + j + 1]], rdims[j], n) for j in range(nr)
    )
    strategy = GameStrategy(blue=TeamStrategy(A=a_blocks, B=b_blocks),
                            red=TeamStrategy(A=c_blocks, B=d_blocks))
    return strategy, _game_diagnostics(problem, strategy, cond_mean, cond_est)


def _game_diagnostics(problem, strategy, cond_mean, cond_est) -> dict:
    diagnostics = {"condition_mean": cond_mean, "condition_estimate": cond_est}
    diagnostics.update(
        (f"residual_{key}", val)
        for key, val in game_residuals(problem, strategy).items()
    )
    return diagnostics


def _cross_cost(prior: GaussianPrior, R, blue: TeamStrategy, gains_b,
                red: TeamStrategy, gains_r, bdims, rdims) -> float:
    """Exact E[v'Ru] for affine strategies of both teams.

    The estimate deviations across teams share only the state, so
    E[dev1_i dev2_j'] = M_i X N_j'.
    """
    xbar = prior.mean
    X = prior.covariance
    xnt = [X @ g.M.T for g in gains_r]
    value = 0.0
    for j in range(len(rdims)):
        for i in range(len(bdims)):
            r_ji = block(R, rdims, bdims, j, i)
            if r_ji.size == 0:
                continue
            sig12_ij = gains_b[i].M @ xnt[j]
            value += float(xbar @ red.A[j].T @ r_ji @ blue.A[i] @ xbar)
            value += float(np.sum(red.B[j] * (r_ji @ blue.B[i] @ sig12_ij)))
    return value


def game_values(problem: GameProblem, strategy: GameStrategy) -> tuple[float, float]:
    """Exact expected costs (J1, J2) of both teams under given strategies."""
    _check_game_strategy(problem, strategy)
    obj = problem.objective
    gains_b = channel_gains(problem.prior, problem.blue)
    gains_r = channel_gains(problem.prior, problem.red)
    j1 = affine_cost(problem.prior, problem.blue.channels, gains_b, obj.blue_dims,
                     obj.Q1, obj.P1, strategy.blue)
    j2 = affine_cost(problem.prior, problem.red.channels, gains_r, obj.red_dims,
                     obj.Q2, obj.P2, strategy.red)
    cross1 = _cross_cost(problem.prior, obj.R1, strategy.blue, gains_b,
                         strategy.red, gains_r, obj.blue_dims, obj.red_dims)
    cross2 = _cross_cost(problem.prior, obj.R2, strategy.blue, gains_b,
                         strategy.red, gains_r, obj.blue_dims, obj.red_dims)
    return float(j1 + cross1), float(j2 + cross2)


def nash_values(problem: GameProblem) -> tuple[float, float]:
    """Equilibrium values (J1*, J2*)."""
    return game_values(problem, solve_game(problem))


def best_response_blue(problem: GameProblem, red: TeamStrategy) -> TeamStrategy:
    """Blue's optimal strategy against a fixed affine red strategy.

    Red's contribution enters blue's stationarity equations as fixed linear
    terms, so this is a single-team solve with shifted right-hand sides.
    """
    obj = problem.objective
    if red.dims != obj.red_dims:
        raise InvalidInputError(
            f"red strategy dims {red.dims} do not match objective {obj.red_dims}"
        )
    gains_b = channel_gains(problem.prior, problem.blue)
    gains_r = channel_gains(problem.prior, problem.red)
    rhs_mean = -(obj.Q1 + obj.R1.T @ np.vstack(red.A))
    shift = np.zeros_like(obj.Q1)
    boffs = _offsets(obj.blue_dims)
    for i in range(len(obj.blue_dims)):
        for j in range(len(obj.red_dims)):
            r1_ji = block(obj.R1, obj.red_dims, obj.blue_dims, j, i)
            shift[boffs[i]:boffs[i + 1]] += r1_ji.T @ red.B[j] @ gains_r[j].M
    a_blocks, b_blocks, _ = solve_block_affine(
        obj.P1, obj.blue_dims, [g.M for g in gains_b],
        rhs_mean, -(obj.Q1 + shift), what="blue best-response system",
    )
    return TeamStrategy(A=a_blocks, B=b_blocks)


def best_response_red(problem: GameProblem, blue: TeamStrategy) -> TeamStrategy:
    """Red's optimal strategy against a fixed affine blue strategy."""
    obj = problem.objective
    if blue.dims != obj.blue_dims:
        raise InvalidInputError(
            f"blue strategy dims {blue.dims} do not match objective {obj.blue_dims}"
        )
    gains_b = channel_gains(problem.prior, problem.blue)
    gains_r = channel_gains(problem.prior, problem.red)
    rhs_mean = -(obj.Q2 + obj.R2 @ np.vstack(blue.A))
    shift = np.zeros_like(obj.Q2)
    roffs = _offsets(obj.red_dims)
    for j in range(len(obj.red_dims)):
        for i in range(len(obj.blue_dims)):
            r2_ji = block(obj.R2, obj.red_dims, obj.blue_dims, j, i)
            shift[roffs[j]:roffs[j + 1]] += r2_ji @ blue.B[i] @ gains_b[i].M
    a_blocks, b_blocks, _ = solve_block_affine(
        obj.P2, obj.red_dims, [g.M for g in gains_r],
        rhs_mean, -(obj.Q2 + shift), what="red best-response system",
    )
    return TeamStrategy(A=a_blocks, B=b_blocks)


def game_residuals(problem: GameProblem, strategy: GameStrategy) -> dict:
    """Relative residuals of all four equilibrium stationarity systems."""
    _check_game_strategy(problem, strategy)
    obj = problem.objective
    gains_b = channel_gains(problem.prior, problem.blue)
    gains_r = channel_gains(problem.prior, problem.red)
    n = problem.prior.n
    a_stack = np.vstack(strategy.blue.A)
    c_stack = np.vstack(strategy.red.A)
    res_mean_b = obj.P1 @ a_stack + obj.R1.T @ c_stack + obj.Q1
    res_mean_r = obj.P2 @ c_stack + obj.R2 @ a_stack + obj.Q2
    boffs = _offsets(obj.blue_dims)
    roffs = _offsets(obj.red_dims)
    res_est_b = np.zeros_like(obj.Q1)
    for i in range(len(obj.blue_dims)):
        acc = obj.Q1[boffs[i]:boffs[i + 1]].copy()
        for j in range(len(obj.blue_dims)):
            right = np.eye(n) if i == j else gains_b[j].M
            acc += block(obj.P1, obj.blue_dims, obj.blue_dims, i, j) @ strategy.blue.B[j] @ right
        for j in range(len(obj.red_dims)):
            r1_ji = block(obj.R1, obj.red_dims, obj.blue_dims, j, i)
            acc += r1_ji.T @ strategy.red.B[j] @ gains_r[j].M
        res_est_b[boffs[i]:boffs[i + 1]] = acc
    res_est_r = np.zeros_like(obj.Q2)
    for j in range(len(obj.red_dims)):
        acc = obj.Q2[roffs[j]:roffs[j + 1]].copy()
        for l in range(len(obj.red_dims)):
            right = np.eye(n) if j == l else gains_r[l].M
            acc += block(obj.P2, obj.red_dims, obj.red_dims, j, l) @ strategy.red.B[l] @ right
        for i in range(len(obj.blue_dims)):
            r2_ji = block(obj.R2, obj.red_dims, obj.blue_dims, j, i)
            acc += r2_ji @ strategy.blue.B[i] @ gains_b[i].M
        res_est_r[roffs[j]:roffs[j + 1]] = acc
    denom_b = max(np.linalg.norm(obj.Q1), 1e-30)
    denom_r = max(np.linalg.norm(obj.Q2), 1e-30) if obj.Q2.size else 1.0
    return {
        "blue_mean": float(np.linalg.norm(res_mean_b) / denom_b),
        "blue_estimate": float(np.linalg.norm(res_est_b) / denom_b),
        "red_mean": float(np.linalg.norm(res_mean_r) / denom_r),
        "red_estimate": float(np.linalg.norm(res_est_r) / denom_r),
    }


def zero_sum_game(Q, Pu, Pv, Rcross, blue_dims, red_dims) -> GameObjective:
    """Two-team parameterization of the zero-sum kernel.

    The kernel is J = u'Qx + 0.5 u'Pu u - 0.5 v'Pv v + v'Rcross u with blue
    minimizing and red maximizing J. Terms of J constant in v are dropped from
    red's kernel (they do not move red's stationarity conditions); use
    ``zero_sum_values`` to evaluate the true kernel at a strategy pair.
    """
    Q = np.asarray(Q, dtype=float)
    Pv = np.asarray(Pv, dtype=float)
    Rcross = np.asarray(Rcross, dtype=float)
    return GameObjective(
        Q1=Q,
        P1=Pu,
        R1=Rcross,
        Q2=np.zeros((Pv.shape[0], Q.shape[1])),
        P2=Pv,
        R2=-Rcross,
        blue_dims=tuple(blue_dims),
        red_dims=tuple(red_dims),
    )


def zero_sum_values(problem: GameProblem, strategy: GameStrategy) -> tuple[float, float]:
    """Value of the full zero-sum kernel and its negation, (J, -J).

    Only valid for objectives built by ``zero_sum_game`` (checked: Q2 = 0 and
    R2 = -R1).
    """
    obj = problem.objective
    if obj.Q2.size and not np.array_equal(obj.Q2, np.zeros_like(obj.Q2)):
        raise InvalidInputError("objective is not zero-sum: Q2 must be zero")
    if not np.array_equal(obj.R2, -obj.R1):
        raise InvalidInputError("objective is not zero-sum: R2 must equal -R1")
    j1, _ = game_values(problem, strategy)
    gains_r = channel_gains(problem.prior, problem.red)
    half_vpv = affine_cost(problem.prior, problem.red.channels, gains_r,
                           obj.red_dims, np.zeros_like(obj.Q2), obj.P2,
                           strategy.red)
    value = j1 - half_vpv
    return float(value), float(-value)
