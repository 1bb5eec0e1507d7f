"""Experiment runner: the full-information loop, regret accounting, sweeps, and persistence.

Runs are deterministic given their config.  Non-adaptive streams paired with the
lazy subgradient or lifted Hedge learners take a vectorized path (the action at
round n depends only on the cost history, so whole runs batch); adaptive streams
and the greedy/barrier learners fall back to the generic loop.  Both paths feed
the same vectorized accounting.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import analysis, domains, learners, streams
from .errors import ConfigError, DegenerateGapError, PolyregretError

__all__ = [
    "ExperimentConfig",
    "RegretTrace",
    "RunSummary",
    "run_experiment",
    "sweep",
    "snap_probability",
    "export",
    "load_trace_json",
    "config_from_dict",
    "config_to_dict",
    "config_from_json",
    "resolve_eta",
]

SNAP_TOL = 1e-6

_CSV_COLUMNS = ("n", "cost_dot_action", "cum_regret", "cum_pseudo_regret", "eps_n", "snapped")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    domain: object
    learner: learners.LearnerConfig
    stream: object
    horizon: int
    seeds: tuple[int, ...] = ()
    record_actions: bool = False
    output_path: str | None = None

    def __post_init__(self):
        if self.horizon < 0:
            raise ConfigError(f"horizon must be >= 0, got {self.horizon}")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))


@dataclass(eq=False)
class RegretTrace:
    """Per-round accounting of one run.

    cum_regret is measured against the best fixed action in hindsight of each
    prefix (recomputed through the linear minimization oracle); pseudo-regret,
    the error norms eps_n and the snap indicator exist only when the stream
    declares a true mean.
    """

    rounds: np.ndarray
    cost_dot_action: np.ndarray
    cum_regret: np.ndarray
    cum_pseudo_regret: np.ndarray | None
    eps: np.ndarray | None
    snapped: np.ndarray | None
    actions: np.ndarray | None = None
    costs: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.rounds)

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1]) if len(self) else 0.0

    @property
    def final_pseudo_regret(self) -> float | None:
        if self.cum_pseudo_regret is None:
            return None
        return float(self.cum_pseudo_regret[-1]) if len(self) else 0.0

    def pseudo_increment(self, start_round: int) -> float | None:
        """Pseudo-regret accumulated strictly after start_round."""
        if self.cum_pseudo_regret is None or not len(self):
            return None
        if start_round < 1:
            return float(self.cum_pseudo_regret[-1])
        idx = min(start_round, len(self)) - 1
        return float(self.cum_pseudo_regret[-1] - self.cum_pseudo_regret[idx])


# ---------------------------------------------------------------------------
# Eta defaults (theorem-matched)

def resolve_eta(config: ExperimentConfig) -> float:
    """Theorem-matched default step parameter when the config leaves eta unset.

    Adversarial streams use ||X|| / 2L from the worst-case guarantee; i.i.d. and
    recorded streams use 1/2L on the ball and D/2L on everything else.
    """
    if config.learner.eta is not None:
        return config.learner.eta
    L = streams.declared_cost_bound(config.stream)
    if L <= 0.0:
        return 1.0
    domain = config.domain
    adversarial = isinstance(config.stream, (streams.AlternatingStream, streams.BestResponseStream))
    if adversarial:
        base = (domains.center(domain) if config.learner.base_point is None
                else config.learner.base_point)
        return analysis.max_distance_from(domain, base) / (2.0 * L)
    if isinstance(domain, domains.Ball):
        return 1.0 / (2.0 * L)
    if isinstance(domain, domains.CurvedEpigraph):
        return 1.0 / L  # D/2L with the epigraph's diameter D = 2
    return analysis.diameter(domain) / (2.0 * L)


def _resolved_learner_config(config: ExperimentConfig) -> learners.LearnerConfig:
    lc = config.learner
    if lc.eta is None and lc.algorithm in ("lazy_subgradient", "greedy_subgradient"):
        lc = replace(lc, eta=resolve_eta(config))
    return lc


# ---------------------------------------------------------------------------
# Action generation

def _fast_path_supported(config: ExperimentConfig) -> bool:
    if streams.is_adaptive(config.stream):
        return False
    algo = config.learner.algorithm
    if algo == "lifted_hedge":
        return True
    if algo != "lazy_subgradient":
        return False
    return isinstance(config.domain, (domains.Ball, domains.Box, domains.Simplex,
                                      domains.CurvedEpigraph))


def _actions_lazy_batch(domain, lc: learners.LearnerConfig, costs: np.ndarray) -> np.ndarray:
    n, _ = costs.shape
    y1 = lc.base_point if lc.base_point is not None else domains.center(domain)
    Y = np.empty_like(costs)
    Y[0] = y1
    if n > 1:
        scale = lc.eta / np.sqrt(np.arange(1, n, dtype=float))
        Y[1:] = y1 - np.cumsum(costs[:-1], axis=0) * scale[:, None]
    return domains.project_rows(domain, Y)


def _actions_hedge_batch(domain, lc: learners.LearnerConfig, costs: np.ndarray) -> np.ndarray:
    V = domains.vertices(domain, lc.vertex_cap)
    n = costs.shape[0]
    X = np.empty((n, costs.shape[1]))
    X[0] = V.mean(axis=0)
    if n > 1:
        aux = np.cumsum(costs[:-1] @ V.T, axis=0)         # (n-1, V)
        m = np.arange(1, n, dtype=float)
        rates = lc.hedge_rate_scale * np.sqrt(math.log(len(V)) / m)
        logits = -rates[:, None] * aux
        logits -= logits.max(axis=1, keepdims=True)
        W = np.exp(logits)
        W /= W.sum(axis=1, keepdims=True)
        X[1:] = W @ V
    return X


def _run_loop(config: ExperimentConfig, lc: learners.LearnerConfig
              ) -> tuple[np.ndarray, np.ndarray]:
    n = config.horizon
    d = domains.ambient_dim(config.domain)
    learner = learners.Learner(lc, config.domain)
    c = domains.center(config.domain)
    X = np.empty((n, d))
    A = np.empty((n, d))
    for i in range(n):
        try:
            x = learner.next_action()
            a = streams.next_cost(config.stream, i + 1, learner_action=x, center=c)
        except PolyregretError as e:
            e.args = (f"round {i + 1}: {e}",)
            raise
        X[i] = x
        A[i] = a
        learner.observe(a)
    return X, A


def _generate_run(config: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    lc = _resolved_learner_config(config)
    n = config.horizon
    if n == 0:
        d = domains.ambient_dim(config.domain)
        return np.empty((0, d)), np.empty((0, d))
    if _fast_path_supported(config):
        A = streams.stream_costs(config.stream, n)
        if lc.algorithm == "lazy_subgradient":
            X = _actions_lazy_batch(config.domain, lc, A)
        else:
            X = _actions_hedge_batch(config.domain, lc, A)
        return X, A
    return _run_loop(config, lc)


# ---------------------------------------------------------------------------
# Accounting

def _build_trace(config: ExperimentConfig, X: np.ndarray, A: np.ndarray) -> RegretTrace:
    n = X.shape[0]
    rounds = np.arange(1, n + 1)
    inst = np.einsum("ij,ij->i", A, X)
    cum_played = np.cumsum(inst)
    prefix_costs = np.cumsum(A, axis=0)
    best_vals = domains.linear_minimum_values(config.domain, prefix_costs) if n else np.empty(0)
    cum_regret = cum_played - best_vals

    mean = streams.declared_mean(config.stream)
    cum_pseudo = eps = snapped = None
    if mean is not None and n:
        x_star = domains.linear_minimizer(config.domain, mean)
        opt_val = float(mean @ x_star)
        cum_pseudo = np.cumsum(X @ mean - opt_val)
        dev_sums = np.cumsum(mean - A, axis=0)
        eps = np.linalg.norm(dev_sums, axis=1) / np.sqrt(rounds)
        snapped = np.linalg.norm(X - x_star, axis=1) <= SNAP_TOL
    elif mean is not None:
        cum_pseudo = np.empty(0)
        eps = np.empty(0)
        snapped = np.empty(0, dtype=bool)

    keep = config.record_actions
    return RegretTrace(rounds=rounds, cost_dot_action=inst, cum_regret=cum_regret,
                       cum_pseudo_regret=cum_pseudo, eps=eps, snapped=snapped,
                       actions=X.copy() if keep else None,
                       costs=A.copy() if keep else None)


def run_experiment(config: ExperimentConfig) -> RegretTrace:
    """Execute the full-information loop and account regret, deterministically."""
    X, A = _generate_run(config)
    return _build_trace(config, X, A)


# ---------------------------------------------------------------------------
# Sweeps

@dataclass(frozen=True)
class RunSummary:
    config_index: int
    seed: int | None
    horizon: int
    final_regret: float | None
    final_pseudo_regret: float | None
    pseudo_last_half: float | None
    eps_mean: float | None
    eps_max: float | None
    error: str | None = None


def _with_seed(config: ExperimentConfig, seed: int | None) -> ExperimentConfig:
    if seed is None or not isinstance(config.stream, streams.IIDStream):
        return config
    return replace(config, stream=replace(config.stream, seed=seed))


def _run_cell(item: tuple[int, int | None, ExperimentConfig]) -> RunSummary:
    idx, seed, config = item
    try:
        trace = run_experiment(_with_seed(config, seed))
    except Exception as e:
        return RunSummary(config_index=idx, seed=seed, horizon=config.horizon,
                          final_regret=None, final_pseudo_regret=None,
                          pseudo_last_half=None, eps_mean=None, eps_max=None,
                          error=f"{type(e).__name__}: {e}")
    eps_mean = eps_max = None
    if trace.eps is not None and len(trace):
        eps_mean = float(trace.eps.mean())
        eps_max = float(trace.eps.max())
    return RunSummary(
        config_index=idx, seed=seed, horizon=config.horizon,
        final_regret=trace.final_regret,
        final_pseudo_regret=trace.final_pseudo_regret,
        pseudo_last_half=trace.pseudo_increment(config.horizon // 2),
        eps_mean=eps_mean, eps_max=eps_max)


def _thread_count() -> int:
    raw = os.environ.get("POLYREGRET_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def sweep(configs) -> list[RunSummary]:
    """Run every (config, seed) cell; output order is the deterministic grid order.

    Per-cell failures are recorded in the summary and the sweep continues.
    POLYREGRET_THREADS > 1 runs cells in a thread pool.
    """
    configs = list(configs)
    if not configs:
        raise ConfigError("sweep needs a nonempty config grid")
    cells = []
    for idx, config in enumerate(configs):
        if isinstance(config.stream, streams.IIDStream):
            seeds = config.seeds or (config.stream.seed,)
            cells.extend((idx, seed, config) for seed in seeds)
        else:
            cells.append((idx, None, config))
    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_cell, cells))
    return [_run_cell(cell) for cell in cells]


# ---------------------------------------------------------------------------
# Snap probabilities

def snap_probability(config: ExperimentConfig, checkpoints) -> list[tuple[int, float]]:
    """Empirical probability across seeds that the action still sits strictly
    above the optimal vertex at each checkpoint round."""
    checkpoints = [int(c) for c in checkpoints]
    if not checkpoints:
        return []
    if not isinstance(config.stream, streams.IIDStream):
        raise ConfigError("snap probabilities need an i.i.d. stream with a declared mean")
    if not config.seeds:
        raise ConfigError("snap probabilities need a nonempty seed list")
    if max(checkpoints) > config.horizon:
        raise ConfigError("checkpoint beyond the horizon")
    mean = config.stream.mean
    gaps = analysis.suboptimality_gaps(config.domain, mean)  # degenerate marker propagates
    tol = 1e-9 * gaps.gap_min
    v1 = domains.linear_minimizer(config.domain, mean)
    opt_val = float(mean @ v1)
    idx = np.asarray(checkpoints, dtype=int) - 1
    hits = np.zeros(len(checkpoints))
    for seed in config.seeds:
        trace_cfg = replace(_with_seed(config, seed), record_actions=True)
        trace = run_experiment(trace_cfg)
        vals = trace.actions[idx] @ mean - opt_val
        hits += vals > tol
    probs = hits / len(config.seeds)
    return list(zip(checkpoints, probs.tolist()))


# ---------------------------------------------------------------------------
# Persistence

def _trace_to_dict(trace: RegretTrace) -> dict:
    out = {
        "n": trace.rounds.tolist(),
        "cost_dot_action": trace.cost_dot_action.tolist(),
        "cum_regret": trace.cum_regret.tolist(),
        "cum_pseudo_regret": (None if trace.cum_pseudo_regret is None
                              else trace.cum_pseudo_regret.tolist()),
        "eps_n": None if trace.eps is None else trace.eps.tolist(),
        "snapped": None if trace.snapped is None else trace.snapped.astype(int).tolist(),
    }
    if trace.actions is not None:
        out["actions"] = trace.actions.tolist()
    if trace.costs is not None:
        out["costs"] = trace.costs.tolist()
    return out


def load_trace_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _write_trace_csv(trace: RegretTrace, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for i in range(len(trace)):
        writer.writerow([
            int(trace.rounds[i]),
            repr(float(trace.cost_dot_action[i])),
            repr(float(trace.cum_regret[i])),
            "" if trace.cum_pseudo_regret is None else repr(float(trace.cum_pseudo_regret[i])),
            "" if trace.eps is None else repr(float(trace.eps[i])),
            "" if trace.snapped is None else int(trace.snapped[i]),
        ])


def _write_summaries_csv(summaries, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    cols = ("config_index", "seed", "horizon", "final_regret", "final_pseudo_regret",
            "pseudo_last_half", "eps_mean", "eps_max", "error")
    writer.writerow(cols)
    for s in summaries:
        writer.writerow(["" if getattr(s, c) is None else getattr(s, c) for c in cols])


def export(obj, format: str, path) -> None:
    """Write a trace or a list of run summaries as CSV or JSON (UTF-8, LF endings)."""
    if format not in ("csv", "json"):
        raise ConfigError(f"format must be 'csv' or 'json', got {format!r}")
    is_trace = isinstance(obj, RegretTrace)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            if format == "csv":
                if is_trace:
                    _write_trace_csv(obj, fh)
                else:
                    _write_summaries_csv(obj, fh)
            else:
                if is_trace:
                    json.dump(_trace_to_dict(obj), fh)
                else:
                    json.dump([{k: getattr(s, k) for k in (
                        "config_index", "seed", "horizon", "final_regret",
                        "final_pseudo_regret", "pseudo_last_half", "eps_mean",
                        "eps_max", "error")} for s in obj], fh)
                fh.write("\n")
    except OSError as e:
        raise OSError(f"export to {path} failed: {e}") from e


# ---------------------------------------------------------------------------
# Config round trip

def config_from_dict(spec: dict) -> ExperimentConfig:
    if not isinstance(spec, dict):
        raise ConfigError(f"experiment config must be a dict, got {spec!r}")
    for key in ("domain", "stream", "horizon"):
        if key not in spec:
            raise ConfigError(f"experiment config is missing {key!r}")
    known = {"domain", "learner", "stream", "horizon", "seeds", "record_actions", "output_path"}
    unknown = set(spec) - known
    if unknown:
        raise ConfigError(f"unknown experiment config fields {sorted(unknown)}")
    return ExperimentConfig(
        domain=domains.domain_from_dict(spec["domain"]),
        learner=learners.learner_from_dict(spec.get("learner", {})),
        stream=streams.stream_from_dict(spec["stream"]),
        horizon=int(spec["horizon"]),
        seeds=tuple(spec.get("seeds", ())),
        record_actions=bool(spec.get("record_actions", False)),
        output_path=spec.get("output_path"),
    )


def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "domain": domains.domain_to_dict(config.domain),
        "learner": learners.learner_to_dict(config.learner),
        "stream": streams.stream_to_dict(config.stream),
        "horizon": config.horizon,
        "seeds": list(config.seeds),
        "record_actions": config.record_actions,
        "output_path": config.output_path,
    }


def config_from_json(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in {path}: {e}") from e
    return config_from_dict(spec)
