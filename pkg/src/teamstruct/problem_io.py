"""Problem-file parsing, schema validation, and report assembly.

Problem files are JSON objects with matrices as row-major nested arrays of
finite doubles. Validation rejects unknown fields and cross-checks every
matrix dimension before any computation runs, reporting the offending field
path. Reports are JSON with a volatile section (timings) excluded from the
report digest.
"""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import dataclass

import numpy as np
import scipy

from .errors import InvalidInputError, SchemaError
from .game_solver import GameObjective, GameProblem
from .model import (
    CandidateLink,
    CandidateSet,
    Channel,
    GaussianPrior,
    InformationStructure,
    TeamObjective,
)
from .team_solver import TeamProblem

DESIGN_KINDS = ("team", "blue-in-game")
DESIGN_METHODS = ("greedy", "exhaustive", "both")


def _check_keys(obj, path, required, optional=()):
    if not isinstance(obj, dict):
        raise SchemaError(path, f"expected an object, got {type(obj).__name__}")
    for key in required:
        if key not in obj:
            raise SchemaError(path, f"missing required field '{key}'")
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"{path}.{key}", "unknown field")


def _number(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(value).__name__}")
    value = float(value)
    if not np.isfinite(value):
        raise SchemaError(path, "value must be finite")
    return value


def _integer(value, path) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, f"expected an integer, got {type(value).__name__}")
    return value


def _vector(value, path, length=None) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise SchemaError(path, "expected a non-empty array of numbers")
    vec = np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)])
    if length is not None and vec.shape[0] != length:
        raise SchemaError(path, f"expected length {length}, got {vec.shape[0]}")
    return vec


def _matrix(value, path, rows=None, cols=None) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise SchemaError(path, "expected a non-empty array of rows")
    parsed = []
    width = None
    for i, row in enumerate(value):
        r = _vector(row, f"{path}[{i}]")
        if width is None:
            width = r.shape[0]
        elif r.shape[0] != width:
            raise SchemaError(f"{path}[{i}]", f"ragged row: expected {width} entries")
        parsed.append(r)
    mat = np.vstack(parsed)
    if rows is not None and mat.shape[0] != rows:
        raise SchemaError(path, f"expected {rows} rows, got {mat.shape[0]}")
    if cols is not None and mat.shape[1] != cols:
        raise SchemaError(path, f"expected {cols} columns, got {mat.shape[1]}")
    return mat


def _dims(value, path, count) -> tuple[int, ...]:
    if not isinstance(value, list) or not value:
        raise SchemaError(path, "expected a non-empty array of integers")
    dims = []
    for i, v in enumerate(value):
        d = _integer(v, f"{path}[{i}]")
        if d <= 0:
            raise SchemaError(f"{path}[{i}]", "dimensions must be positive")
        dims.append(d)
    if len(dims) != count:
        raise SchemaError(path, f"expected {count} entries (one per agent), got {len(dims)}")
    return tuple(dims)


def _domain(path, builder, *args, **kwargs):
    # surface constructor-level invariant violations with a field path
    try:
        return builder(*args, **kwargs)
    except InvalidInputError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(path, str(exc)) from exc


@dataclass(frozen=True, eq=False)
class ParsedProblem:
    """Domain objects built from a validated problem file."""

    prior: GaussianPrior
    structure: InformationStructure
    team: TeamProblem | None
    game: GameProblem | None
    candidates: CandidateSet | None
    design: dict


def _parse_channels(items, path, n, key_map="H", key_cov="R") -> InformationStructure:
    if not isinstance(items, list) or not items:
        raise SchemaError(path, "expected a non-empty array of agents")
    channels = []
    for i, item in enumerate(items):
        _check_keys(item, f"{path}[{i}]", (key_map, key_cov))
        H = _matrix(item[key_map], f"{path}[{i}].{key_map}", cols=n)
        R = _matrix(item[key_cov], f"{path}[{i}].{key_cov}",
                    rows=H.shape[0], cols=H.shape[0])
        channels.append(_domain(f"{path}[{i}]", Channel, H=H, R=R))
    return _domain(path, InformationStructure, channels=tuple(channels))


def parse_problem(data: dict) -> ParsedProblem:
    """Validate a problem-file dict and build the domain objects."""
    _check_keys(data, "$", ("prior", "agents"),
                ("objective", "game", "candidates", "design"))
    if ("objective" in data) == ("game" in data):
        raise SchemaError("$", "exactly one of 'objective' and 'game' is required")

    _check_keys(data["prior"], "prior", ("mean", "covariance"))
    mean = _vector(data["prior"]["mean"], "prior.mean")
    n = mean.shape[0]
    cov = _matrix(data["prior"]["covariance"], "prior.covariance", rows=n, cols=n)
    prior = _domain("prior", GaussianPrior, mean=mean, covariance=cov)

    structure = _parse_channels(data["agents"], "agents", n)
    agents = structure.agents

    team = None
    game = None
    if "objective" in data:
        obj = data["objective"]
        _check_keys(obj, "objective", ("Q", "P", "dims"))
        dims = _dims(obj["dims"], "objective.dims", agents)
        total = sum(dims)
        Q = _matrix(obj["Q"], "objective.Q", rows=total, cols=n)
        P = _matrix(obj["P"], "objective.P", rows=total, cols=total)
        objective = _domain("objective", TeamObjective, Q=Q, P=P, dims=dims)
        team = _domain("objective", TeamProblem, prior=prior, structure=structure,
                       objective=objective)
    else:
        g = data["game"]
        _check_keys(g, "game", ("Q1", "P1", "R1", "Q2", "P2", "R2",
                                "blue_dims", "red_dims", "red_agents"))
        blue_dims = _dims(g["blue_dims"], "game.blue_dims", agents)
        red_structure = _parse_channels(g["red_agents"], "game.red_agents", n,
                                        key_map="G", key_cov="T")
        red_dims = _dims(g["red_dims"], "game.red_dims", red_structure.agents)
        mu, mv = sum(blue_dims), sum(red_dims)
        Q1 = _matrix(g["Q1"], "game.Q1", rows=mu, cols=n)
        P1 = _matrix(g["P1"], "game.P1", rows=mu, cols=mu)
        R1 = _matrix(g["R1"], "game.R1", rows=mv, cols=mu)
        Q2 = _matrix(g["Q2"], "game.Q2", rows=mv, cols=n)
        P2 = _matrix(g["P2"], "game.P2", rows=mv, cols=mv)
        R2 = _matrix(g["R2"], "game.R2", rows=mv, cols=mu)
        objective = _domain("game", GameObjective, Q1=Q1, P1=P1, R1=R1, Q2=Q2,
                            P2=P2, R2=R2, blue_dims=blue_dims, red_dims=red_dims)
        game = _domain("game", GameProblem, prior=prior, blue=structure,
                       red=red_structure, objective=objective)

    candidates = None
    if "candidates" in data:
        items = data["candidates"]
        if not isinstance(items, list) or not items:
            raise SchemaError("candidates", "expected a non-empty array of links")
        links = []
        for i, item in enumerate(items):
            _check_keys(item, f"candidates[{i}]", ("agent", "h", "r"))
            agent = _integer(item["agent"], f"candidates[{i}].agent")
            if not 0 <= agent < agents:
                raise SchemaError(f"candidates[{i}].agent",
                                  f"agent index must be in [0, {agents})")
            h = _vector(item["h"], f"candidates[{i}].h", length=n)
            r = _number(item["r"], f"candidates[{i}].r")
            links.append(_domain(f"candidates[{i}]", CandidateLink,
                                 id=i, agent=agent, h=h, r=r))
        candidates = _domain("candidates", CandidateSet, links=tuple(links))

    design = {}
    if "design" in data:
        d = data["design"]
        _check_keys(d, "design", (), ("kind", "k", "method"))
        if "kind" in d:
            if d["kind"] not in DESIGN_KINDS:
                raise SchemaError("design.kind", f"must be one of {DESIGN_KINDS}")
            expected = "team" if team is not None else "blue-in-game"
            if d["kind"] != expected:
                raise SchemaError("design.kind",
                                  f"'{d['kind']}' does not match the problem type")
            design["kind"] = d["kind"]
        if "k" in d:
            k = _integer(d["k"], "design.k")
            if k < 0:
                raise SchemaError("design.k", "must be >= 0")
            design["k"] = k
        if "method" in d:
            if d["method"] not in DESIGN_METHODS:
                raise SchemaError("design.method", f"must be one of {DESIGN_METHODS}")
            design["method"] = d["method"]

    return ParsedProblem(prior=prior, structure=structure, team=team, game=game,
                         candidates=candidates, design=design)


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def digest_bytes(raw: bytes) -> str:
    return "sha256:" + hashlib.sha256(raw).hexdigest()


def versions() -> dict:
    from . import __version__

    return {
        "teamstruct": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def make_report(command: str, arguments: dict, input_digest: str, results,
                diagnostics: dict, volatile: dict) -> dict:
    """Assemble a report; the digest covers everything except ``volatile``."""
    core = {
        "command": command,
        "arguments": arguments,
        "input_digest": input_digest,
        "results": results,
        "diagnostics": diagnostics,
        "versions": versions(),
    }
    report = dict(core)
    report["volatile"] = volatile
    report["report_digest"] = digest_bytes(canonical_json(core).encode())
    return report


def fmt17(x: float) -> str:
    """17-significant-digit decimal rendering used in CSV output."""
    return f"{float(x):.17g}"


def benchmark_csv(records, stats) -> str:
    """Per-trial CSV plus a summary row (mean gap, total times)."""
    lines = ["trial,J_greedy,J_opt,gap,t_greedy,t_exh"]
    for r in records:
        lines.append(",".join([
            str(r.trial),
            fmt17(r.value_greedy),
            fmt17(r.value_opt),
            fmt17(r.gap),
            fmt17(r.time_greedy),
            fmt17(r.time_exhaustive),
        ]))
    lines.append(",".join([
        "summary", "", "",
        fmt17(stats.mean_gap),
        fmt17(stats.time_greedy),
        fmt17(stats.time_exhaustive),
    ]))
    return "\n".join(lines) + "\n"


def counterexample_csv(subset_values, margin) -> str:
    lines = ["record,subset,value"]
    for ids, value in subset_values:
        lines.append(f"value,{' '.join(str(i) for i in ids)},{fmt17(value)}")
    lines.append(f"supermodularity_margin,,{fmt17(margin)}")
    return "\n".join(lines) + "\n"
