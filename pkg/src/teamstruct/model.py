"""Domain types for decentralized LQ decision problems.

Gaussian environment priors, per-agent linear observation channels, quadratic
team objectives, candidate information links, and the conditional-mean gains
the solvers are built on. All types are immutable after construction (arrays
are copied and marked read-only), so instances are safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidInputError
from .linalg import sym_pinv

# Relative tolerances for accepting nearly-symmetric / nearly-PSD inputs.
SYM_RTOL = 1e-10
PSD_RTOL = 1e-9


def _frozen_array(value, name: str, ndim: int) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim != ndim:
        raise InvalidInputError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} must contain only finite values")
    arr.setflags(write=False)
    return arr


def _check_symmetric(mat: np.ndarray, name: str) -> None:
    if mat.shape[0] != mat.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {mat.shape}")
    if mat.size == 0:
        return
    asym = np.abs(mat - mat.T).max()
    bound = SYM_RTOL * (1.0 + np.abs(mat).max())
    if asym > bound:
        raise InvalidInputError(f"{name} must be symmetric; max asymmetry {asym:.3e}")


def _check_psd(mat: np.ndarray, name: str) -> None:
    if mat.size == 0:
        return
    w = np.linalg.eigvalsh(0.5 * (mat + mat.T))
    norm2 = np.abs(w).max()
    if w.min() < -PSD_RTOL * norm2:
        raise InvalidInputError(
            f"{name} must be positive semidefinite; min eigenvalue {w.min():.3e}"
        )


def _check_pd(mat: np.ndarray, name: str) -> None:
    if mat.size == 0:
        return
    w = np.linalg.eigvalsh(0.5 * (mat + mat.T))
    if w.min() <= 0.0:
        raise InvalidInputError(
            f"{name} must be positive definite; min eigenvalue {w.min():.3e}"
        )


def _offsets(dims: Iterable[int]) -> list[int]:
    out = [0]
    for m in dims:
        out.append(out[-1] + int(m))
    return out


def block(mat: np.ndarray, row_dims, col_dims, i: int, j: int) -> np.ndarray:
    """Block (i, j) of a matrix partitioned by row and column dimensions."""
    r = _offsets(row_dims)
    c = _offsets(col_dims)
    return mat[r[i]:r[i + 1], c[j]:c[j + 1]]


@dataclass(frozen=True, eq=False)
class GaussianPrior:
    """Environment state statistics known to every agent.

    ``mean`` is the state mean (length n) and ``covariance`` its n x n
    covariance matrix, required symmetric PSD. Rank-deficient covariances are
    accepted; the estimation gains fall back to pseudoinverses.
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = _frozen_array(self.mean, "mean", 1)
        cov = _frozen_array(self.covariance, "covariance", 2)
        _check_symmetric(cov, "covariance")
        _check_psd(cov, "covariance")
        if cov.shape[0] != mean.shape[0]:
            raise InvalidInputError(
                f"covariance shape {cov.shape} does not match mean length {mean.shape[0]}"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def n(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True, eq=False)
class Channel:
    """One agent's linear observation model: z = H x + w, w ~ N(0, R)."""

    H: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        H = _frozen_array(self.H, "H", 2)
        R = _frozen_array(self.R, "R", 2)
        _check_symmetric(R, "R")
        _check_psd(R, "R")
        if R.shape[0] != H.shape[0]:
            raise InvalidInputError(
                f"R shape {R.shape} does not match observation count {H.shape[0]}"
            )
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "R", R)

    @property
    def p(self) -> int:
        return self.H.shape[0]

    @property
    def n(self) -> int:
        return self.H.shape[1]


@dataclass(frozen=True, eq=False)
class InformationStructure:
    """Ordered collection of channels, one per agent."""

    channels: tuple[Channel, ...]

    def __post_init__(self):
        channels = tuple(self.channels)
        if not channels:
            raise InvalidInputError("information structure needs at least one channel")
        n = channels[0].n
        for idx, ch in enumerate(channels):
            if ch.n != n:
                raise InvalidInputError(
                    f"channel {idx} has state dimension {ch.n}, expected {n}"
                )
        object.__setattr__(self, "channels", channels)

    @property
    def n(self) -> int:
        return self.channels[0].n

    @property
    def agents(self) -> int:
        return len(self.channels)


@dataclass(frozen=True, eq=False)
class CandidateLink:
    """One addable observation row (h, r) targeting a single agent."""

    id: int
    agent: int
    h: np.ndarray
    r: float

    def __post_init__(self):
        h = _frozen_array(self.h, "h", 1)
        r = float(self.r)
        if not np.isfinite(r) or r < 0.0:
            raise InvalidInputError(f"link {self.id}: noise variance must be >= 0, got {r}")
        if self.agent < 0:
            raise InvalidInputError(f"link {self.id}: agent index must be >= 0")
        object.__setattr__(self, "id", int(self.id))
        object.__setattr__(self, "agent", int(self.agent))
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Finite ground set of candidate links with distinct ids."""

    links: tuple[CandidateLink, ...]

    def __post_init__(self):
        links = tuple(self.links)
        ids = [link.id for link in links]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("candidate ids must be distinct")
        object.__setattr__(self, "links", links)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(link.id for link in self.links)

    def __len__(self) -> int:
        return len(self.links)


@dataclass(frozen=True, eq=False)
class Modification:
    """A chosen subset of candidate ids."""

    selected: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "selected", frozenset(int(i) for i in self.selected))


@dataclass(frozen=True, eq=False)
class TeamObjective:
    """Quadratic cost kernels u'Qx + 0.5 u'Pu, partitioned by agent decisions."""

    Q: np.ndarray
    P: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        Q = _frozen_array(self.Q, "Q", 2)
        P = _frozen_array(self.P, "P", 2)
        dims = tuple(int(m) for m in self.dims)
        if any(m < 0 for m in dims):
            raise InvalidInputError("decision dimensions must be >= 0")
        total = sum(dims)
        if Q.shape[0] != total:
            raise InvalidInputError(
                f"Q has {Q.shape[0]} rows but dims sum to {total}"
            )
        if P.shape != (total, total):
            raise InvalidInputError(
                f"P shape {P.shape} does not match dims sum {total}"
            )
        _check_symmetric(P, "P")
        _check_pd(P, "P")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return sum(self.dims)

    def q_block(self, i: int) -> np.ndarray:
        o = _offsets(self.dims)
        return self.Q[o[i]:o[i + 1]]

    def p_block(self, i: int, j: int) -> np.ndarray:
        return block(self.P, self.dims, self.dims, i, j)


@dataclass(frozen=True, eq=False)
class TeamStrategy:
    """Affine decision coefficients per agent: u_i = A_i xbar + B_i (xhat_i - xbar)."""

    A: tuple[np.ndarray, ...]
    B: tuple[np.ndarray, ...]

    def __post_init__(self):
        A = tuple(_frozen_array(a, f"A[{i}]", 2) for i, a in enumerate(self.A))
        B = tuple(_frozen_array(b, f"B[{i}]", 2) for i, b in enumerate(self.B))
        if len(A) != len(B):
            raise InvalidInputError("A and B must have one block per agent")
        for i, (a, b) in enumerate(zip(A, B)):
            if a.shape != b.shape:
                raise InvalidInputError(
                    f"agent {i}: A block {a.shape} and B block {b.shape} differ"
                )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(a.shape[0] for a in self.A)

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        return np.vstack(self.A), np.vstack(self.B)


@dataclass(frozen=True, eq=False)
class EstimationGain:
    """Conditional-mean gain K = X H'(H X H' + R)^+ and M = K H."""

    K: np.ndarray
    M: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "K", _frozen_array(self.K, "K", 2))
        object.__setattr__(self, "M", _frozen_array(self.M, "M", 2))


def posterior_gain(prior: GaussianPrior, channel: Channel) -> EstimationGain:
    """Gain of the Gaussian conditional mean E[x | z] for one channel.

    Uses a symmetric pseudoinverse of the innovation covariance H X H' + R, so
    redundant noiseless rows (singular innovation covariance) remain well
    defined. When the innovation covariance is invertible this coincides with
    the exact-inverse formula.
    """
    if channel.n != prior.n:
        raise InvalidInputError(
            f"channel state dimension {channel.n} does not match prior {prior.n}"
        )
    X = prior.covariance
    H = channel.H
    S = H @ X @ H.T + channel.R
    K = X @ H.T @ sym_pinv(S)
    return EstimationGain(K=K, M=K @ H)


def conditional_mean(prior: GaussianPrior, channel: Channel, z) -> np.ndarray:
    """E[x | z] = xbar + K (z - H xbar) for one observation vector."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (channel.p,):
        raise InvalidInputError(
            f"observation has shape {z.shape}, expected ({channel.p},)"
        )
    gain = posterior_gain(prior, channel)
    return prior.mean + gain.K @ (z - channel.H @ prior.mean)


def apply_modification(structure: InformationStructure, candidates: CandidateSet,
                       mod: Modification) -> InformationStructure:
    """Stack the selected links onto their agents' channels.

    Rows are appended in candidate-set order and their noises enter as
    independent block-diagonal extensions of the existing noise covariance.
    Agents without selected links keep their channel objects unchanged.
    """
    unknown = mod.selected - set(candidates.ids)
    if unknown:
        raise InvalidInputError(f"unknown candidate ids {sorted(unknown)}")
    added: dict[int, list[CandidateLink]] = {}
    for link in candidates.links:
        if link.id not in mod.selected:
            continue
        if link.agent >= structure.agents:
            raise InvalidInputError(
                f"link {link.id} targets agent {link.agent}, structure has "
                f"{structure.agents} agents"
            )
        if link.n != structure.n:
            raise InvalidInputError(
                f"link {link.id} has state dimension {link.n}, expected {structure.n}"
            )
        added.setdefault(link.agent, []).append(link)
    if not added:
        return structure
    channels = []
    for idx, ch in enumerate(structure.channels):
        links = added.get(idx)
        if not links:
            channels.append(ch)
            continue
        H = np.vstack([ch.H] + [link.h[np.newaxis, :] for link in links])
        R = np.zeros((ch.p + len(links), ch.p + len(links)))
        R[:ch.p, :ch.p] = ch.R
        for t, link in enumerate(links):
            R[ch.p + t, ch.p + t] = link.r
        channels.append(Channel(H=H, R=R))
    return InformationStructure(channels=tuple(channels))
