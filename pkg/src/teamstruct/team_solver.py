"""Optimal decentralized affine strategies and exact costs for a single team.

The stationarity conditions for the mean coefficients are a plain linear
system in the stacked A blocks. The estimate coefficients B_i are coupled
through the agents' conditional-mean maps M_j and are solved as one dense
vectorized system with Kronecker-product blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import solve_checked
from .model import (
    EstimationGain,
    GaussianPrior,
    InformationStructure,
    TeamObjective,
    TeamStrategy,
    _offsets,
    posterior_gain,
)


@dataclass(frozen=True, eq=False)
class TeamProblem:
    """A fixed-information team decision problem."""

    prior: GaussianPrior
    structure: InformationStructure
    objective: TeamObjective

    def __post_init__(self):
        if self.structure.agents != len(self.objective.dims):
            raise InvalidInputError(
                f"structure has {self.structure.agents} agents but objective "
                f"has {len(self.objective.dims)} decision blocks"
            )
        if self.structure.n != self.prior.n:
            raise InvalidInputError(
                f"structure state dimension {self.structure.n} does not match "
                f"prior {self.prior.n}"
            )
        if self.objective.Q.shape[1] != self.prior.n:
            raise InvalidInputError(
                f"Q has {self.objective.Q.shape[1]} columns, expected {self.prior.n}"
            )


def channel_gains(prior: GaussianPrior, structure: InformationStructure):
    """Conditional-mean gains for every channel of a structure."""
    return tuple(posterior_gain(prior, ch) for ch in structure.channels)


def _vec(mat: np.ndarray) -> np.ndarray:
    # column-major vec, matching vec(A X B) = (B' kron A) vec(X)
    return mat.flatten(order="F")


def _unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    return v.reshape((rows, cols), order="F")


def solve_block_affine(P, dims, maps, rhs_mean, rhs_est, what="stationarity system"):
    """Solve the mean and estimate coefficient systems for one team.

    The mean system is ``P @ A = rhs_mean`` for the stacked mean coefficients.
    The estimate system couples the blocks through the per-agent maps
    ``maps[j]`` (each n x n): block row i reads
    ``P_ii B_i + sum_{j != i} P_ij B_j maps[j] = rhs_est_i`` and is solved in
    vectorized form, block (i, j) being ``kron(maps[j].T, P_ij)`` off the
    diagonal and ``kron(I, P_ii)`` on it.

    Returns ``(A_blocks, B_blocks, diagnostics)`` with condition estimates of
    both solves in the diagnostics dict.
    """
    dims = tuple(int(m) for m in dims)
    total = sum(dims)
    n = maps[0].shape[0] if maps else rhs_mean.shape[1]
    offs = _offsets(dims)

    a_stack, cond_mean = solve_checked(P, rhs_mean, what=f"{what} (mean)")
    a_blocks = tuple(a_stack[offs[i]:offs[i + 1]] for i in range(len(dims)))

    size = n * total
    if size == 0:
        b_blocks = tuple(np.zeros((m, n)) for m in dims)
        return a_blocks, b_blocks, {"cond_mean": cond_mean, "cond_estimate": 1.0}

    voffs = [o * n for o in offs]
    eye = np.eye(n)
    system = np.zeros((size, size))
    rhs = np.zeros(size)
    for i, mi in enumerate(dims):
        rhs[voffs[i]:voffs[i + 1]] = _vec(rhs_est[offs[i]:offs[i + 1]])
        for j, mj in enumerate(dims):
            if mi == 0 or mj == 0:
                continue
            p_ij = P[offs[i]:offs[i + 1], offs[j]:offs[j + 1]]
            right = eye if i == j else maps[j]
            system[voffs[i]:voffs[i + 1], voffs[j]:voffs[j + 1]] = np.kron(right.T, p_ij)
    sol, cond_est = solve_checked(system, rhs, what=f"{what} (estimate)")
    b_blocks = tuple(
        _unvec(sol[voffs[i]:voffs[i + 1]], dims[i], n) for i in range(len(dims))
    )
    return a_blocks, b_blocks, {"cond_mean": cond_mean, "cond_estimate": cond_est}


def solve_team(problem: TeamProblem) -> TeamStrategy:
    """Optimal affine decision coefficients for every agent."""
    return solve_team_with_diagnostics(problem)[0]


def solve_team_with_diagnostics(problem: TeamProblem) -> tuple[TeamStrategy, dict]:
    """Like solve_team, also returning condition estimates and residuals."""
    gains = channel_gains(problem.prior, problem.structure)
    a_blocks, b_blocks, conds = solve_block_affine(
        problem.objective.P,
        problem.objective.dims,
        [g.M for g in gains],
        -problem.objective.Q,
        -problem.objective.Q,
        what="team stationarity system",
    )
    strategy = TeamStrategy(A=a_blocks, B=b_blocks)
    res = team_residuals(problem, strategy)
    diagnostics = {
        "condition_mean": conds["cond_mean"],
        "condition_estimate": conds["cond_estimate"],
        "residual_mean": res["mean"],
        "residual_estimate": res["estimate"],
    }
    return strategy, diagnostics


def team_residuals(problem: TeamProblem, strategy: TeamStrategy) -> dict:
    """Relative residuals of the mean and estimate stationarity systems."""
    obj = problem.objective
    gains = channel_gains(problem.prior, problem.structure)
    a_stack, _ = strategy.stacked()
    res_mean = obj.P @ a_stack + obj.Q
    res_est = np.vstack([
        sum(
            obj.p_block(i, j) @ strategy.B[j] @ (np.eye(problem.prior.n) if i == j else gains[j].M)
            for j in range(len(obj.dims))
        ) + obj.q_block(i)
        for i in range(len(obj.dims))
    ])
    denom = max(np.linalg.norm(obj.Q), 1e-30)
    return {
        "mean": float(np.linalg.norm(res_mean) / denom),
        "estimate": float(np.linalg.norm(res_est) / denom),
    }


def _check_strategy(problem: TeamProblem, strategy: TeamStrategy) -> None:
    if strategy.dims != problem.objective.dims:
        raise InvalidInputError(
            f"strategy dims {strategy.dims} do not match objective dims "
            f"{problem.objective.dims}"
        )
    for i, a in enumerate(strategy.A):
        if a.shape[1] != problem.prior.n:
            raise InvalidInputError(
                f"agent {i}: coefficient has {a.shape[1]} columns, expected {problem.prior.n}"
            )


def affine_cost(prior: GaussianPrior, channels, gains, dims, Q, P,
                strategy: TeamStrategy) -> float:
    """Exact E[u'Qx + 0.5 u'Pu] under affine rules u_i = A_i xbar + B_i dev_i.

    dev_i = xhat_i - xbar has zero mean, cross-covariances
    E[dev_j dev_i'] = M_j X M_i' + delta_ij K_i R_i K_i', and
    E[(x - xbar) dev_i'] = X M_i'. Everything reduces to traces of those
    Gaussian moments.
    """
    xbar = prior.mean
    X = prior.covariance
    offs = _offsets(dims)
    xmt = [X @ g.M.T for g in gains]
    value = 0.0
    for i in range(len(dims)):
        q_i = Q[offs[i]:offs[i + 1]]
        value += xbar @ strategy.A[i].T @ q_i @ xbar
        value += float(np.sum(strategy.B[i] * (q_i @ xmt[i])))
    for i in range(len(dims)):
        for j in range(len(dims)):
            p_ij = P[offs[i]:offs[i + 1], offs[j]:offs[j + 1]]
            if p_ij.size == 0:
                continue
            sig_ji = gains[j].M @ xmt[i]
            if i == j:
                sig_ji = sig_ji + gains[i].K @ channels[i].R @ gains[i].K.T
            value += 0.5 * float(xbar @ strategy.A[i].T @ p_ij @ strategy.A[j] @ xbar)
            value += 0.5 * float(np.sum(strategy.B[i] * (p_ij @ strategy.B[j] @ sig_ji)))
    return float(value)


def team_value(problem: TeamProblem, strategy: TeamStrategy) -> float:
    """Exact expected team cost of an affine strategy."""
    _check_strategy(problem, strategy)
    gains = channel_gains(problem.prior, problem.structure)
    return affine_cost(
        problem.prior,
        problem.structure.channels,
        gains,
        problem.objective.dims,
        problem.objective.Q,
        problem.objective.P,
        strategy,
    )


def optimal_team_value(problem: TeamProblem) -> float:
    """Expected cost of the optimal strategy."""
    return team_value(problem, solve_team(problem))


def _psd_factor(mat: np.ndarray) -> np.ndarray:
    # factor L with L L' = mat for PSD mat, tolerant of tiny negative eigenvalues
    if mat.size == 0:
        return np.zeros_like(mat)
    w, V = np.linalg.eigh(0.5 * (mat + mat.T))
    return V * np.sqrt(np.clip(w, 0.0, None))


_MC_CHUNK = 1 << 17


def monte_carlo_value(problem: TeamProblem, strategy: TeamStrategy, samples: int,
                      seed: int) -> tuple[float, float]:
    """Sampled mean and standard error of the realized team cost.

    Draws x ~ N(xbar, X) and independent channel noises, applies the affine
    rules, and averages u'Qx + 0.5 u'Pu. Deterministic for a fixed seed.
    """
    _check_strategy(problem, strategy)
    samples = int(samples)
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    gains = channel_gains(problem.prior, problem.structure)
    xbar = problem.prior.mean
    lx = _psd_factor(problem.prior.covariance)
    lr = [_psd_factor(ch.R) for ch in problem.structure.channels]
    Q = problem.objective.Q
    P = problem.objective.P
    mean_term = np.concatenate([xbar @ a.T for a in strategy.A]) if strategy.A else np.zeros(0)

    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        count = min(_MC_CHUNK, samples - done)
        xs = xbar + rng.standard_normal((count, lx.shape[1])) @ lx.T
        parts = []
        for ch, gain, lri, b in zip(problem.structure.channels, gains, lr, strategy.B):
            z = xs @ ch.H.T
            if ch.p:
                z = z + rng.standard_normal((count, lri.shape[1])) @ lri.T
            dev = (z - xbar @ ch.H.T) @ gain.K.T
            parts.append(dev @ b.T)
        u = np.hstack(parts) if parts else np.zeros((count, 0))
        u = u + mean_term
        cost = np.sum(u * (xs @ Q.T), axis=1) + 0.5 * np.sum(u * (u @ P), axis=1)
        total += float(cost.sum())
        total_sq += float((cost * cost).sum())
        done += count
    mean = total / samples
    if samples > 1:
        var = max(total_sq - samples * mean * mean, 0.0) / (samples - 1)
    else:
        var = 0.0
    return float(mean), float(np.sqrt(var / samples))
