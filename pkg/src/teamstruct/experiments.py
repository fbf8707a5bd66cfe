"""Built-in fixtures and randomized benchmarks for the design algorithms.

Provides the two-agent supermodularity counterexample with its exact data, a
seeded random-instance generator, and a benchmark harness that compares
greedy selection against exhaustive search over many trials.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import DesignProblem, KIND_TEAM, exhaustive_design, greedy_design
from .errors import InvalidInputError, NoUniqueSolutionError
from .model import (
    CandidateLink,
    CandidateSet,
    Channel,
    GaussianPrior,
    InformationStructure,
    TeamObjective,
)
from .team_solver import TeamProblem

# Trials whose greedy value is within this absolute tolerance of the
# exhaustive optimum count as optimal.
OPT_GAP_TOL = 1e-9

# Below this magnitude the relative gap is ill-posed; report the absolute gap
# and flag the trial.
ZERO_VALUE_TOL = 1e-12

# Condition limit above which a drawn P triggers a redraw.
_REDRAW_COND = 1e12
_MAX_REDRAWS = 10


@dataclass(frozen=True, eq=False)
class BenchmarkConfig:
    """Dimensions and seeds of one benchmark campaign.

    n states, N agents, m decisions and p measurements per agent, q candidate
    links per agent, k links to select, over ``trials`` independent instances.
    """

    n: int = 10
    N: int = 4
    m: int = 3
    p: int = 2
    q: int = 2
    k: int = 4
    trials: int = 200
    seed: int = 0

    def __post_init__(self):
        for name in ("n", "N", "m", "p", "q", "k", "trials"):
            if int(getattr(self, name)) <= 0:
                raise InvalidInputError(f"{name} must be positive")
        if self.k > self.N * self.q:
            raise InvalidInputError(
                f"k = {self.k} exceeds the {self.N * self.q} available candidates"
            )


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """Per-trial benchmark outcome."""

    trial: int
    value_greedy: float
    value_opt: float
    gap: float
    flagged: bool
    greedy_selected: tuple[int, ...]
    opt_selected: tuple[int, ...]
    time_greedy: float
    time_exhaustive: float


@dataclass(frozen=True, eq=False)
class ExperimentStats:
    """Aggregate benchmark statistics."""

    trials: int
    fraction_optimal: float
    worst_gap: float
    mean_gap: float
    time_greedy: float
    time_exhaustive: float
    speedup: float
    failures: int
    flagged: int


def counterexample_instance() -> tuple[TeamProblem, CandidateSet]:
    """Two agents observing the first state, two candidate links to the second.

    Each link alone improves the optimal cost less than both together, so the
    value oracle violates the diminishing-returns inequality on this instance
    (margin exactly 1).
    """
    prior = GaussianPrior(mean=np.zeros(2), covariance=np.eye(2))
    channel = Channel(H=np.array([[1.0, 0.0]]), R=np.zeros((1, 1)))
    structure = InformationStructure(channels=(channel, channel))
    objective = TeamObjective(
        Q=np.array([[1.0, 1.0], [1.0, 1.0]]),
        P=np.array([[1.0, -0.5], [-0.5, 1.0]]),
        dims=(1, 1),
    )
    candidates = CandidateSet(links=(
        CandidateLink(id=0, agent=0, h=np.array([0.0, 1.0]), r=0.0),
        CandidateLink(id=1, agent=1, h=np.array([0.0, 1.0]), r=0.0),
    ))
    return TeamProblem(prior=prior, structure=structure, objective=objective), candidates


def random_instance(config: BenchmarkConfig,
                    trial_seed: int) -> tuple[TeamProblem, CandidateSet]:
    """One seeded random instance at the configured dimensions.

    P and X are Gram products of standard-normal factors; Q, the channel maps,
    and the candidate rows are entrywise standard normal; channel noise
    covariances are Gram products and candidate variances squared normals, so
    every drawn covariance is PSD. A draw whose P is numerically singular is
    redrawn with an incremented sub-seed, at most 10 times.
    """
    for attempt in range(_MAX_REDRAWS):
        rng = np.random.default_rng([config.seed, trial_seed, attempt])
        total_m = config.N * config.m
        p_factor = rng.standard_normal((total_m, total_m))
        P = p_factor.T @ p_factor
        x_factor = rng.standard_normal((config.n, config.n))
        X = x_factor.T @ x_factor
        Q = rng.standard_normal((total_m, config.n))
        channels = []
        for _ in range(config.N):
            H = rng.standard_normal((config.p, config.n))
            r_factor = rng.standard_normal((config.p, config.p))
            channels.append(Channel(H=H, R=r_factor.T @ r_factor))
        links = []
        for agent in range(config.N):
            for _ in range(config.q):
                h = rng.standard_normal(config.n)
                r = float(rng.standard_normal() ** 2)
                links.append(CandidateLink(id=len(links), agent=agent, h=h, r=r))
        if np.linalg.cond(P) > _REDRAW_COND:
            continue
        problem = TeamProblem(
            prior=GaussianPrior(mean=np.zeros(config.n), covariance=X),
            structure=InformationStructure(channels=tuple(channels)),
            objective=TeamObjective(Q=Q, P=P, dims=(config.m,) * config.N),
        )
        return problem, CandidateSet(links=tuple(links))
    raise NoUniqueSolutionError(
        f"trial {trial_seed}: drew a numerically singular P {_MAX_REDRAWS} times"
    )


def relative_gap(value_greedy: float, value_opt: float) -> tuple[float, bool]:
    """Suboptimality gap of greedy, relative where |optimum| allows it.

    Returns ``(gap, flagged)``; flagged trials fall back to the absolute gap
    because the optimal value is too close to zero.
    """
    diff = max(value_greedy - value_opt, 0.0)
    if abs(value_opt) > ZERO_VALUE_TOL:
        return diff / abs(value_opt), False
    return diff, True


def benchmark_records(config: BenchmarkConfig, workers: int = 1):
    """Run all trials; returns (records, failures) with failures as messages."""
    records = []
    failures = []
    for trial in range(config.trials):
        try:
            problem, candidates = random_instance(config, trial)
            design = DesignProblem(kind=KIND_TEAM, base=problem, candidates=candidates)
            greedy = greedy_design(design, config.k, workers=workers)
            exhaustive = exhaustive_design(design, config.k, workers=workers)
        except NoUniqueSolutionError as exc:
            failures.append(f"trial {trial}: {exc}")
            continue
        gap, flagged = relative_gap(greedy.final_value, exhaustive.final_value)
        records.append(TrialRecord(
            trial=trial,
            value_greedy=greedy.final_value,
            value_opt=exhaustive.final_value,
            gap=gap,
            flagged=flagged,
            greedy_selected=greedy.selected,
            opt_selected=exhaustive.selected,
            time_greedy=greedy.wall_time,
            time_exhaustive=exhaustive.wall_time,
        ))
    return records, failures


def aggregate_records(records, failures=()) -> ExperimentStats:
    """Reduce trial records to ExperimentStats (order-independent)."""
    records = sorted(records, key=lambda r: r.trial)
    if not records:
        raise InvalidInputError("no completed trials to aggregate")
    gaps = [r.gap for r in records]
    time_greedy = sum(r.time_greedy for r in records)
    time_exhaustive = sum(r.time_exhaustive for r in records)
    return ExperimentStats(
        trials=len(records),
        fraction_optimal=sum(g <= OPT_GAP_TOL for g in gaps) / len(records),
        worst_gap=max(gaps),
        mean_gap=sum(gaps) / len(records),
        time_greedy=time_greedy,
        time_exhaustive=time_exhaustive,
        speedup=time_exhaustive / time_greedy if time_greedy > 0 else float("inf"),
        failures=len(failures),
        flagged=sum(r.flagged for r in records),
    )


def run_benchmark(config: BenchmarkConfig, workers: int = 1) -> ExperimentStats:
    """Greedy-versus-exhaustive comparison over seeded random instances."""
    records, failures = benchmark_records(config, workers=workers)
    return aggregate_records(records, failures)
