"""Online learners: lazy/greedy projected subgradient, lifted Hedge, and the barrier baseline.

All learners are full-information: the action for round n is a function of the
costs observed in rounds 1..n-1.  The lazy subgradient variant projects the
scaled cumulative cost from a fixed base point and never references a horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import domains
from .errors import ConfigError, ConvergenceError

__all__ = [
    "ALGORITHMS",
    "LearnerConfig",
    "LearnerState",
    "Learner",
    "lazy_subgradient_next",
    "greedy_subgradient_next",
    "lifted_hedge_next",
    "barrier_next",
    "default_facets",
    "hedge_weights",
    "learner_from_dict",
    "learner_to_dict",
]

ALGORITHMS = ("lazy_subgradient", "greedy_subgradient", "lifted_hedge", "barrier")


@dataclass(frozen=True, eq=False)
class LearnerConfig:
    algorithm: str = "lazy_subgradient"
    eta: float | None = None                 # None: the harness picks a theorem-matched default
    base_point: np.ndarray | None = None     # None: domain center
    hedge_rate_scale: float = 1.0
    barrier_weights: np.ndarray | None = None
    inner_tol: float | None = None           # barrier solver / iterative projection tolerance
    inner_max_iters: int | None = None
    vertex_cap: int = 10_000

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.eta is not None and not self.eta > 0.0:
            raise ConfigError(f"eta must be > 0, got {self.eta}")
        if not self.hedge_rate_scale > 0.0:
            raise ConfigError(f"hedge_rate_scale must be > 0, got {self.hedge_rate_scale}")
        if self.base_point is not None:
            object.__setattr__(self, "base_point", np.asarray(self.base_point, dtype=float))
        if self.barrier_weights is not None:
            w = np.asarray(self.barrier_weights, dtype=float)
            if (w <= 0.0).any():
                raise ConfigError("barrier weights must be positive")
            object.__setattr__(self, "barrier_weights", w)


@dataclass
class LearnerState:
    """Evolving per-run state; round n means n-1 costs have been observed."""

    round: int
    cost_sum: np.ndarray
    last_action: np.ndarray | None = None
    last_cost: np.ndarray | None = None
    hedge_weights: np.ndarray | None = None
    lifted_vertices: np.ndarray | None = None


def _resolved_base(config: LearnerConfig, domain) -> np.ndarray:
    if config.base_point is not None:
        base = np.asarray(config.base_point, dtype=float)
        if base.size != domains.ambient_dim(domain):
            raise ConfigError("base point dimension does not match the domain")
        return base
    return domains.center(domain)


def _project(domain, z, config: LearnerConfig) -> np.ndarray:
    return domains.project(domain, z, tol=config.inner_tol,
                           max_iters=config.inner_max_iters).point


def lazy_subgradient_next(state: LearnerState, config: LearnerConfig, domain) -> np.ndarray:
    """Project y1 - eta * (sum of past costs) / sqrt(n-1); round 1 plays P(y1)."""
    if config.eta is None:
        raise ConfigError("lazy subgradient needs eta (set it or let the harness pick)")
    y1 = _resolved_base(config, domain)
    n = state.round
    if n <= 1:
        return _project(domain, y1, config)
    z = y1 - config.eta * state.cost_sum / math.sqrt(n - 1)
    return _project(domain, z, config)


def greedy_subgradient_next(state: LearnerState, config: LearnerConfig, domain) -> np.ndarray:
    """Step from the previous action along the newest cost only (contrast baseline)."""
    if config.eta is None:
        raise ConfigError("greedy subgradient needs eta (set it or let the harness pick)")
    n = state.round
    if n <= 1 or state.last_action is None:
        return _project(domain, _resolved_base(config, domain), config)
    if state.last_cost is None:
        raise ConfigError("greedy subgradient needs the previous cost in the state")
    z = state.last_action - config.eta * state.last_cost / math.sqrt(n - 1)
    return _project(domain, z, config)


def hedge_weights(state: LearnerState, config: LearnerConfig) -> np.ndarray:
    """Exponential weights over the lifted vertices with the anytime rate."""
    V = state.lifted_vertices
    if V is None:
        raise ConfigError("hedge state has no lifted vertices; build it via Learner")
    n_costs = state.round - 1
    if n_costs < 1:
        return np.full(len(V), 1.0 / len(V))
    rate = config.hedge_rate_scale * math.sqrt(math.log(len(V)) / n_costs)
    logits = -rate * (V @ state.cost_sum)
    logits -= logits.max()
    w = np.exp(logits)
    return w / w.sum()


def lifted_hedge_next(state: LearnerState, config: LearnerConfig, domain) -> np.ndarray:
    """Play the convex combination of vertices given by the exponential weights."""
    w = hedge_weights(state, config)
    state.hedge_weights = w
    return w @ state.lifted_vertices


# ---------------------------------------------------------------------------
# Barrier algorithm (experimental)

def default_facets(domain) -> list[tuple[np.ndarray, float]]:
    """(normal, offset) pairs with phi_i(x) = normal . x + offset >= 0 on the domain."""
    d = domains.ambient_dim(domain)
    if isinstance(domain, domains.Simplex):
        return [(np.eye(d)[j], 0.0) for j in range(d)]
    if isinstance(domain, domains.Box):
        eye = np.eye(d)
        return [(eye[j], -domain.lower) for j in range(d)] + \
               [(-eye[j], domain.upper) for j in range(d)]
    if isinstance(domain, domains.Birkhoff):
        return [(np.eye(d)[j], 0.0) for j in range(d)]
    raise ConfigError(f"no default facet list for {type(domain).__name__}; pass facets explicitly")


def _barrier_value_grad(x, normals, offsets, weights, cost_term):
    phi = normals @ x + offsets
    safe = np.maximum(phi, 1e-300)
    # phi log phi extended by continuity at 0; gradient clamped below phi = 1e-12
    value = float(np.sum(weights * np.where(phi > 0.0, phi * np.log(safe), 0.0)) + cost_term @ x)
    grad_phi = weights * (np.log(np.maximum(phi, 1e-12)) + 1.0)
    grad = grad_phi @ normals + cost_term
    return value, grad


def barrier_next(state: LearnerState, config: LearnerConfig, domain,
                 facets: list[tuple[np.ndarray, float]] | None = None) -> np.ndarray:
    """Approximate minimizer of the weighted entropy-barrier objective plus the
    scaled cumulative cost, by projected gradient descent warm-started at the
    previous action.  Flagged experimental: universality of this scheme is open.
    """
    if facets is None:
        facets = default_facets(domain)
    n = state.round
    base = _resolved_base(config, domain)
    if n <= 1:
        return _project(domain, base, config)

    normals = np.array([np.asarray(f[0], dtype=float) for f in facets])
    offsets = np.array([float(f[1]) for f in facets])
    weights = (np.ones(len(facets)) if config.barrier_weights is None
               else np.asarray(config.barrier_weights, dtype=float))
    if weights.size != len(facets):
        raise ConfigError(f"{len(facets)} facets but {weights.size} barrier weights")

    cost_term = state.cost_sum / math.sqrt(n - 1)
    x = state.last_action if state.last_action is not None else _project(domain, base, config)
    x = np.asarray(x, dtype=float).copy()

    tol = 1e-8 if config.inner_tol is None else config.inner_tol
    max_iters = 10_000 if config.inner_max_iters is None else config.inner_max_iters
    step = 1.0
    value, grad = _barrier_value_grad(x, normals, offsets, weights, cost_term)
    gmap_norm = math.inf
    for _ in range(max_iters):
        gmap = x - _project(domain, x - grad, config)
        gmap_norm = float(np.linalg.norm(gmap))
        if gmap_norm <= tol:
            return x
        # backtracking on the proximal decrease condition
        for _ in range(60):
            cand = _project(domain, x - step * grad, config)
            diff = cand - x
            cand_value, cand_grad = _barrier_value_grad(cand, normals, offsets, weights, cost_term)
            if cand_value <= value + grad @ diff + (diff @ diff) / (2.0 * step) + 1e-15:
                break
            step *= 0.5
        x, value, grad = cand, cand_value, cand_grad
        step = min(step * 1.5, 1e6)
    raise ConvergenceError(
        f"barrier inner solver stopped at gradient-mapping norm {gmap_norm:.3e} > {tol}",
        best_point=x, residual=gmap_norm, iterations=max_iters)


# ---------------------------------------------------------------------------
# Bookkeeping wrapper

class Learner:
    """Drives one of the per-round operations and keeps the running state."""

    def __init__(self, config: LearnerConfig, domain,
                 facets: list[tuple[np.ndarray, float]] | None = None):
        self.config = config
        self.domain = domain
        self.facets = facets
        d = domains.ambient_dim(domain)
        lifted = None
        if config.algorithm == "lifted_hedge":
            lifted = domains.vertices(domain, config.vertex_cap)  # refusal propagates
        if config.algorithm == "barrier" and facets is None:
            self.facets = default_facets(domain)
        self.state = LearnerState(round=1, cost_sum=np.zeros(d), lifted_vertices=lifted)
        self._pending: np.ndarray | None = None

    def next_action(self) -> np.ndarray:
        algo = self.config.algorithm
        if algo == "lazy_subgradient":
            x = lazy_subgradient_next(self.state, self.config, self.domain)
        elif algo == "greedy_subgradient":
            x = greedy_subgradient_next(self.state, self.config, self.domain)
        elif algo == "lifted_hedge":
            x = lifted_hedge_next(self.state, self.config, self.domain)
        elif algo == "barrier":
            x = barrier_next(self.state, self.config, self.domain, self.facets)
        else:  # pragma: no cover
            raise ConfigError(f"unknown algorithm {algo!r}")
        self._pending = x
        return x

    def observe(self, cost) -> None:
        cost = np.asarray(cost, dtype=float)
        if self._pending is None:
            raise ConfigError("observe() called before next_action()")
        self.state.last_action = self._pending
        self.state.last_cost = cost
        self.state.cost_sum = self.state.cost_sum + cost
        self.state.round += 1
        self._pending = None


# ---------------------------------------------------------------------------
# Config round trip

def learner_from_dict(spec: dict) -> LearnerConfig:
    if not isinstance(spec, dict):
        raise ConfigError(f"learner spec must be a dict, got {spec!r}")
    known = {"algorithm", "eta", "base_point", "hedge_rate_scale", "barrier_weights",
             "inner_tol", "inner_max_iters", "vertex_cap"}
    unknown = set(spec) - known
    if unknown:
        raise ConfigError(f"unknown learner fields {sorted(unknown)}")
    kwargs = dict(spec)
    if kwargs.get("base_point") is not None:
        kwargs["base_point"] = np.asarray(kwargs["base_point"], dtype=float)
    if kwargs.get("barrier_weights") is not None:
        kwargs["barrier_weights"] = np.asarray(kwargs["barrier_weights"], dtype=float)
    return LearnerConfig(**kwargs)


def learner_to_dict(config: LearnerConfig) -> dict:
    return {
        "algorithm": config.algorithm,
        "eta": config.eta,
        "base_point": None if config.base_point is None else config.base_point.tolist(),
        "hedge_rate_scale": config.hedge_rate_scale,
        "barrier_weights": (None if config.barrier_weights is None
                            else config.barrier_weights.tolist()),
        "inner_tol": config.inner_tol,
        "inner_max_iters": config.inner_max_iters,
        "vertex_cap": config.vertex_cap,
    }
