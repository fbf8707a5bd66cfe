"""Command-line front end.

Commands parse a JSON problem file (validated before any computation),
dispatch the solvers or design searches, and emit machine-readable JSON
reports; the benchmark command additionally writes a per-trial CSV and,
on request, matplotlib figures alongside it.

Exit codes: 0 success, 2 input or validation error, 3 numerical solver error.
"""

from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .design import DesignProblem, check_supermodularity, evaluate_modification, \
    exhaustive_design, greedy_design
from .errors import InvalidInputError, NoUniqueSolutionError, SchemaError
from .experiments import BenchmarkConfig, aggregate_records, benchmark_records, \
    counterexample_instance, relative_gap
from .game_solver import game_values, solve_game_with_diagnostics, zero_sum_values
from .model import Modification
from .problem_io import benchmark_csv, canonical_json, counterexample_csv, \
    digest_bytes, make_report, parse_problem
from .team_solver import solve_team_with_diagnostics, team_value


def _load_file(path: str) -> tuple[dict, str]:
    raw = Path(path).read_bytes()
    digest = digest_bytes(raw)
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("$", "top level must be an object")
    return data, digest


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


def _emit_report(report: dict, out: str | None) -> None:
    _emit(json.dumps(report, indent=2), out)


def _fail_validation(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(2)


def _fail_solver(exc: NoUniqueSolutionError, command: str, arguments: dict,
                 input_digest: str, out: str | None) -> None:
    report = make_report(
        command=command,
        arguments=arguments,
        input_digest=input_digest,
        results=None,
        diagnostics={
            "error": str(exc),
            "condition_estimate": exc.condition,
            "modification": list(exc.modification) if exc.modification else None,
        },
        volatile={},
    )
    _emit_report(report, out)
    click.echo(f"error: {exc}", err=True)
    sys.exit(3)


def _strategy_blocks(strategy) -> dict:
    return {
        "A": [a.tolist() for a in strategy.A],
        "B": [b.tolist() for b in strategy.B],
    }


@click.group()
@click.version_option(__version__)
def main():
    """Solve decentralized LQ team problems and two-team games, and design
    information structures by greedy or exhaustive link selection."""


@main.command("solve-team")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(), default=None,
              help="Write the JSON report here instead of stdout.")
def cmd_solve_team(file, out):
    """Solve a team problem file: optimal coefficients, value, residuals."""
    arguments = {"file": file}
    try:
        data, digest = _load_file(file)
        parsed = parse_problem(data)
        if parsed.team is None:
            raise SchemaError("objective", "required by solve-team (file defines a game)")
    except InvalidInputError as exc:
        _fail_validation(exc)
    start = time.perf_counter()
    try:
        strategy, diagnostics = solve_team_with_diagnostics(parsed.team)
    except NoUniqueSolutionError as exc:
        _fail_solver(exc, "solve-team", arguments, digest, out)
    value = team_value(parsed.team, strategy)
    report = make_report(
        command="solve-team",
        arguments=arguments,
        input_digest=digest,
        results={"strategy": _strategy_blocks(strategy), "optimal_value": value},
        diagnostics=diagnostics,
        volatile={"wall_time_s": time.perf_counter() - start},
    )
    _emit_report(report, out)


@main.command("solve-game")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(), default=None,
              help="Write the JSON report here instead of stdout.")
def cmd_solve_game(file, out):
    """Solve a game file: Nash coefficients and both equilibrium values."""
    arguments = {"file": file}
    try:
        data, digest = _load_file(file)
        parsed = parse_problem(data)
        if parsed.game is None:
            raise SchemaError("game", "required by solve-game (file defines a team problem)")
    except InvalidInputError as exc:
        _fail_validation(exc)
    start = time.perf_counter()
    try:
        strategy, diagnostics = solve_game_with_diagnostics(parsed.game)
    except NoUniqueSolutionError as exc:
        _fail_solver(exc, "solve-game", arguments, digest, out)
    j1, j2 = game_values(parsed.game, strategy)
    results = {
        "blue": _strategy_blocks(strategy.blue),
        "red": _strategy_blocks(strategy.red),
        "nash_values": {"J1": j1, "J2": j2},
    }
    obj = parsed.game.objective
    zero_sum = (not np.any(obj.Q2)) and np.array_equal(obj.R2, -obj.R1)
    if zero_sum:
        full, neg = zero_sum_values(parsed.game, strategy)
        results["zero_sum_values"] = {"J1": full, "J2": neg}
    report = make_report(
        command="solve-game",
        arguments=arguments,
        input_digest=digest,
        results=results,
        diagnostics=diagnostics,
        volatile={"wall_time_s": time.perf_counter() - start},
    )
    _emit_report(report, out)


def _design_result_json(result) -> dict:
    return {
        "selected": list(result.selected),
        "values": list(result.values),
        "final_value": result.final_value,
        "evaluations": result.evaluations,
    }


@main.command("design")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", "k", type=int, default=None,
              help="Number of links to add (defaults to the file's design.k).")
@click.option("--method", type=click.Choice(["greedy", "exhaustive", "both"]),
              default=None, help="Search method (defaults to design.method or 'both').")
@click.option("--parallel", type=int, default=None,
              help="Max concurrent oracle evaluations (default: available cores).")
@click.option("--out", type=click.Path(), default=None,
              help="Write the JSON report here instead of stdout.")
def cmd_design(file, k, method, parallel, out):
    """Select the best k candidate links by greedy and/or exhaustive search."""
    arguments = {"file": file, "k": k, "method": method, "parallel": parallel}
    try:
        data, digest = _load_file(file)
        parsed = parse_problem(data)
        if parsed.candidates is None:
            raise SchemaError("candidates", "required by the design command")
        if k is None:
            k = parsed.design.get("k")
        if k is None:
            raise SchemaError("design.k", "missing; pass --k or set design.k in the file")
        if method is None:
            method = parsed.design.get("method", "both")
        workers = parallel if parallel is not None else (os.cpu_count() or 1)
        if workers < 1:
            raise SchemaError("design.parallel", "--parallel must be >= 1")
        if parsed.team is not None:
            problem = DesignProblem(kind="team", base=parsed.team,
                                    candidates=parsed.candidates)
        else:
            problem = DesignProblem(kind="blue-in-game", base=parsed.game,
                                    candidates=parsed.candidates)
        results = {"kind": problem.kind, "k": k, "method": method}
        volatile = {}
        start = time.perf_counter()
        if method in ("greedy", "both"):
            greedy = greedy_design(problem, k, workers=workers)
            results["greedy"] = _design_result_json(greedy)
            volatile["greedy_wall_time_s"] = greedy.wall_time
        if method in ("exhaustive", "both"):
            exhaustive = exhaustive_design(problem, k, workers=workers)
            results["exhaustive"] = _design_result_json(exhaustive)
            volatile["exhaustive_wall_time_s"] = exhaustive.wall_time
        if method == "both":
            gap, flagged = relative_gap(greedy.final_value, exhaustive.final_value)
            results["gap"] = {
                "absolute": greedy.final_value - exhaustive.final_value,
                "relative": None if flagged else gap,
                "flagged": flagged,
            }
        volatile["wall_time_s"] = time.perf_counter() - start
    except NoUniqueSolutionError as exc:
        _fail_solver(exc, "design", arguments, digest, out)
    except InvalidInputError as exc:
        _fail_validation(exc)
    report = make_report(
        command="design",
        arguments=arguments,
        input_digest=digest,
        results=results,
        diagnostics={},
        volatile=volatile,
    )
    _emit_report(report, out)


@main.command("benchmark")
@click.option("--n", type=int, default=10, show_default=True, help="State dimension.")
@click.option("--N", "agents", type=int, default=4, show_default=True, help="Agents.")
@click.option("--m", type=int, default=3, show_default=True, help="Decisions per agent.")
@click.option("--p", type=int, default=2, show_default=True, help="Measurements per agent.")
@click.option("--q", type=int, default=2, show_default=True, help="Candidates per agent.")
@click.option("--k", type=int, default=4, show_default=True, help="Links to select.")
@click.option("--trials", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, envvar="TEAMSTRUCT_SEED",
              help="Campaign seed (default: $TEAMSTRUCT_SEED or 0).")
@click.option("--parallel", type=int, default=None,
              help="Max concurrent oracle evaluations (default: available cores).")
@click.option("--out", type=click.Path(), default=None,
              help="Write a per-trial CSV (plus summary row) to this path.")
@click.option("--figures/--no-figures", default=False,
              help="Render PNG figures next to the CSV (requires --out).")
def cmd_benchmark(n, agents, m, p, q, k, trials, seed, parallel, out, figures):
    """Compare greedy against exhaustive design over seeded random instances."""
    arguments = {"n": n, "N": agents, "m": m, "p": p, "q": q, "k": k,
                 "trials": trials, "seed": seed, "parallel": parallel,
                 "out": out, "figures": figures}
    try:
        if figures and not out:
            raise InvalidInputError("--figures requires --out")
        config = BenchmarkConfig(n=n, N=agents, m=m, p=p, q=q, k=k,
                                 trials=trials, seed=seed)
        workers = parallel if parallel is not None else (os.cpu_count() or 1)
        if workers < 1:
            raise InvalidInputError("--parallel must be >= 1")
    except InvalidInputError as exc:
        _fail_validation(exc)
    config_echo = {"n": n, "N": agents, "m": m, "p": p, "q": q, "k": k,
                   "trials": trials, "seed": seed}
    config_digest = digest_bytes(canonical_json(config_echo).encode())
    start = time.perf_counter()
    try:
        records, failures = benchmark_records(config, workers=workers)
        stats = aggregate_records(records, failures)
    except (NoUniqueSolutionError, InvalidInputError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    written = []
    if out:
        Path(out).write_text(benchmark_csv(records, stats), encoding="utf-8")
        written.append(out)
        if figures:
            from .figures import benchmark_figures

            written.extend(str(path) for path in benchmark_figures(records, stats, out))
    results = {
        "config": config_echo,
        "trials": stats.trials,
        "fraction_optimal": stats.fraction_optimal,
        "worst_gap": stats.worst_gap,
        "mean_gap": stats.mean_gap,
        "failures": stats.failures,
        "flagged": stats.flagged,
        "trial_values": [
            {"trial": r.trial, "J_greedy": r.value_greedy, "J_opt": r.value_opt,
             "gap": r.gap, "flagged": r.flagged,
             "greedy_selected": list(r.greedy_selected),
             "opt_selected": list(r.opt_selected)}
            for r in records
        ],
    }
    report = make_report(
        command="benchmark",
        arguments=arguments,
        input_digest=config_digest,
        results=results,
        diagnostics={"failure_messages": failures},
        volatile={
            "wall_time_s": time.perf_counter() - start,
            "time_greedy_s": stats.time_greedy,
            "time_exhaustive_s": stats.time_exhaustive,
            "speedup": stats.speedup,
            "files_written": written,
        },
    )
    # the CSV goes to --out; the report itself always goes to stdout
    _emit_report(report, None)


@main.command("counterexample")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True, help="Report format.")
@click.option("--out", type=click.Path(), default=None,
              help="Write the report here instead of stdout.")
def cmd_counterexample(fmt, out):
    """Emit the built-in two-agent instance whose value oracle is not supermodular."""
    start = time.perf_counter()
    problem, candidates = counterexample_instance()
    design = DesignProblem(kind="team", base=problem, candidates=candidates)
    subsets = [(), (0,), (1,), (0, 1)]
    subset_values = [
        (ids, evaluate_modification(design, Modification(frozenset(ids))))
        for ids in subsets
    ]
    supermod = check_supermodularity(design)
    if fmt == "csv":
        _emit(counterexample_csv(subset_values, supermod.margin).rstrip("\n"), out)
        return
    fixture = {
        "prior": {"mean": problem.prior.mean.tolist(),
                  "covariance": problem.prior.covariance.tolist()},
        "agents": [{"H": ch.H.tolist(), "R": ch.R.tolist()}
                   for ch in problem.structure.channels],
        "objective": {"Q": problem.objective.Q.tolist(),
                      "P": problem.objective.P.tolist(),
                      "dims": list(problem.objective.dims)},
        "candidates": [{"agent": link.agent, "h": link.h.tolist(), "r": link.r}
                       for link in candidates.links],
    }
    results = {
        "problem": fixture,
        "subset_values": [{"ids": list(ids), "value": value}
                          for ids, value in subset_values],
        "supermodularity": {
            "violated": supermod.violated,
            "margin": supermod.margin,
            "checked": supermod.checked,
            "witness": {
                "A": list(supermod.witness[0]),
                "B": list(supermod.witness[1]),
                "s": supermod.witness[2],
            },
            "four_set_margin": supermod.four_set_margin,
        },
    }
    report = make_report(
        command="counterexample",
        arguments={"format": fmt},
        input_digest=digest_bytes(canonical_json(fixture).encode()),
        results=results,
        diagnostics={},
        volatile={"wall_time_s": time.perf_counter() - start},
    )
    _emit_report(report, out)


if __name__ == "__main__":
    main()
