"""Set-function optimization over information-structure modifications.

The value oracle maps a subset of candidate links to the optimal team cost
(or the blue team's equilibrium value). Greedy selection, exhaustive
enumeration, and an exhaustive supermodularity check all share that oracle.
Candidate evaluations are pure, so they may run on a thread pool; selection
is a deterministic reduction independent of completion order.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import InvalidInputError, NoUniqueSolutionError, TooLargeError
from .game_solver import GameProblem, nash_values
from .model import CandidateSet, Modification, apply_modification
from .team_solver import TeamProblem, optimal_team_value

# Absolute tolerance for treating two oracle values as tied.
TIE_TOL = 1e-9

# Margins above this count as supermodularity violations.
VIOLATION_TOL = 1e-9

# Guard on the number of subsets exhaustive search will enumerate.
MAX_EXHAUSTIVE_SUBSETS = 10_000_000

KIND_TEAM = "team"
KIND_BLUE = "blue-in-game"


@dataclass(frozen=True, eq=False)
class DesignProblem:
    """A base problem plus the ground set of addable links.

    ``kind`` selects the value oracle: "team" minimizes the optimal team cost
    of a TeamProblem, "blue-in-game" minimizes the blue team's equilibrium
    value of a GameProblem with red's structure held fixed. Candidates always
    target the optimized (blue) team.
    """

    kind: str
    base: TeamProblem | GameProblem
    candidates: CandidateSet

    def __post_init__(self):
        if self.kind not in (KIND_TEAM, KIND_BLUE):
            raise InvalidInputError(f"unknown design kind {self.kind!r}")
        if self.kind == KIND_TEAM and not isinstance(self.base, TeamProblem):
            raise InvalidInputError("kind 'team' requires a TeamProblem base")
        if self.kind == KIND_BLUE and not isinstance(self.base, GameProblem):
            raise InvalidInputError("kind 'blue-in-game' requires a GameProblem base")
        structure = self.base.structure if self.kind == KIND_TEAM else self.base.blue
        for link in self.candidates.links:
            if link.agent >= structure.agents:
                raise InvalidInputError(
                    f"candidate {link.id} targets agent {link.agent}, team has "
                    f"{structure.agents} agents"
                )
            if link.n != structure.n:
                raise InvalidInputError(
                    f"candidate {link.id} has state dimension {link.n}, "
                    f"expected {structure.n}"
                )


@dataclass(frozen=True, eq=False)
class DesignResult:
    """Outcome of a design run.

    ``selected`` lists candidate ids in greedy order (sorted for exhaustive),
    ``values`` the oracle value after each greedy addition (a single final
    value for exhaustive), and ``evaluations`` the number of oracle calls made
    by the selection loop.
    """

    selected: tuple[int, ...]
    values: tuple[float, ...]
    final_value: float
    evaluations: int
    wall_time: float


@dataclass(frozen=True, eq=False)
class SupermodularityReport:
    """Result of exhaustively testing the diminishing-returns inequality."""

    violated: bool
    witness: tuple[tuple[int, ...], tuple[int, ...], int] | None
    margin: float
    checked: int
    four_set_margin: float | None


def evaluate_modification(problem: DesignProblem, mod: Modification) -> float:
    """Value oracle: optimal cost of the base problem under a modification."""
    try:
        if problem.kind == KIND_TEAM:
            base = problem.base
            modified = apply_modification(base.structure, problem.candidates, mod)
            return optimal_team_value(replace(base, structure=modified))
        base = problem.base
        modified = apply_modification(base.blue, problem.candidates, mod)
        return nash_values(replace(base, blue=modified))[0]
    except NoUniqueSolutionError as exc:
        exc.modification = tuple(sorted(mod.selected))
        raise


def _evaluate_many(problem: DesignProblem, mods: Sequence[Modification],
                   workers: int) -> list[float]:
    if workers <= 1 or len(mods) <= 1:
        return [evaluate_modification(problem, m) for m in mods]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda m: evaluate_modification(problem, m), mods))


def greedy_design(problem: DesignProblem, k: int, workers: int = 1) -> DesignResult:
    """Select k links one at a time, each the best addition at the time.

    Within one iteration all remaining candidates are evaluated (possibly
    concurrently) and the minimizer is kept; values tied within ``TIE_TOL``
    resolve to the smallest candidate id, so the result does not depend on
    evaluation order.
    """
    k = int(k)
    all_ids = sorted(problem.candidates.ids)
    if k < 0 or k > len(all_ids):
        raise InvalidInputError(f"k must be between 0 and {len(all_ids)}, got {k}")
    start = time.perf_counter()
    selected: list[int] = []
    values: list[float] = []
    evaluations = 0
    for _ in range(k):
        remaining = [i for i in all_ids if i not in selected]
        mods = [Modification(frozenset(selected + [e])) for e in remaining]
        vals = _evaluate_many(problem, mods, workers)
        evaluations += len(remaining)
        vmin = min(vals)
        pick, pick_val = min(
            (e, v) for e, v in zip(remaining, vals) if v <= vmin + TIE_TOL
        )
        selected.append(pick)
        values.append(pick_val)
    if k > 0:
        final = values[-1]
    else:
        final = evaluate_modification(problem, Modification(frozenset()))
    return DesignResult(
        selected=tuple(selected),
        values=tuple(values),
        final_value=float(final),
        evaluations=evaluations,
        wall_time=time.perf_counter() - start,
    )


def exhaustive_design(problem: DesignProblem, k: int, workers: int = 1) -> DesignResult:
    """Evaluate every size-k subset and return the global minimizer.

    Ties within ``TIE_TOL`` resolve to the lexicographically smallest sorted
    id tuple. Refuses to enumerate more than ``MAX_EXHAUSTIVE_SUBSETS``
    subsets.
    """
    k = int(k)
    all_ids = sorted(problem.candidates.ids)
    if k < 0 or k > len(all_ids):
        raise InvalidInputError(f"k must be between 0 and {len(all_ids)}, got {k}")
    count = math.comb(len(all_ids), k)
    if count > MAX_EXHAUSTIVE_SUBSETS:
        raise TooLargeError(
            f"exhaustive search over {count} subsets exceeds the guard of "
            f"{MAX_EXHAUSTIVE_SUBSETS}; use greedy_design instead"
        )
    start = time.perf_counter()
    combos = itertools.combinations(all_ids, k)
    vmin = math.inf
    # (value, ids) candidates within TIE_TOL of the running minimum, kept in
    # enumeration (lexicographic) order
    pool: list[tuple[float, tuple[int, ...]]] = []

    def consider(ids, value):
        nonlocal vmin, pool
        if value < vmin:
            vmin = value
        if value <= vmin + TIE_TOL:
            pool.append((value, ids))
        if len(pool) > 1024:
            pool = [(v, s) for v, s in pool if v <= vmin + TIE_TOL]

    if workers <= 1:
        for ids in combos:
            consider(ids, evaluate_modification(problem, Modification(frozenset(ids))))
    else:
        combos = list(combos)
        with ThreadPoolExecutor(max_workers=workers) as tpool:
            vals = tpool.map(
                lambda ids: evaluate_modification(problem, Modification(frozenset(ids))),
                combos,
            )
            for ids, value in zip(combos, vals):
                consider(ids, value)
    final_value, chosen = next(
        (v, s) for v, s in pool if v <= vmin + TIE_TOL
    )
    return DesignResult(
        selected=chosen,
        values=(float(final_value),),
        final_value=float(final_value),
        evaluations=count,
        wall_time=time.perf_counter() - start,
    )


def check_supermodularity(problem: DesignProblem,
                          max_ground_size: int = 12) -> SupermodularityReport:
    """Exhaustively test f(A + s) - f(A) <= f(B + s) - f(B) over the ground set.

    Enumerates every triple A subset-of B, s outside B, reports the largest
    margin f(A + s) - f(A) - f(B + s) + f(B) and a witness when it exceeds
    ``VIOLATION_TOL``. The witness also carries the equivalent four-set margin
    f(A') + f(B') - f(A' | B') - f(A' & B') with A' = A + s, B' = B.
    """
    ids = sorted(problem.candidates.ids)
    v = len(ids)
    if v > max_ground_size:
        raise TooLargeError(
            f"ground set of {v} exceeds max_ground_size {max_ground_size}"
        )
    values = {}
    for mask in range(1 << v):
        subset = frozenset(ids[t] for t in range(v) if mask >> t & 1)
        values[mask] = evaluate_modification(problem, Modification(subset))

    best = -math.inf
    witness_masks = None
    checked = 0
    for b_mask in range(1, 1 << v):
        fb = values[b_mask]
        for t in range(v):
            bit = 1 << t
            if b_mask & bit:
                continue
            fbs = values[b_mask | bit]
            # proper subsets A of B only; A = B makes the inequality an identity
            a_mask = (b_mask - 1) & b_mask
            while True:
                margin = values[a_mask | bit] - values[a_mask] - fbs + fb
                checked += 1
                if margin > best:
                    best = margin
                    witness_masks = (a_mask, b_mask, t)
                if a_mask == 0:
                    break
                a_mask = (a_mask - 1) & b_mask

    if checked == 0:
        return SupermodularityReport(violated=False, witness=None, margin=0.0,
                                     checked=0, four_set_margin=None)
    a_mask, b_mask, t = witness_masks

    def decode(mask):
        return tuple(ids[s] for s in range(v) if mask >> s & 1)

    bit = 1 << t
    four_set = (values[a_mask | bit] + values[b_mask]
                - values[b_mask | bit] - values[a_mask])
    return SupermodularityReport(
        violated=best > VIOLATION_TOL,
        witness=(decode(a_mask), decode(b_mask), ids[t]),
        margin=float(best),
        checked=checked,
        four_set_margin=float(four_set),
    )
