"""Cost-vector streams (i.i.d., adversarial, recorded) and empirical bound constants.

I.i.d. streams are counter-based: draw i is a fixed function of (seed, i), computed
from raw Philox output blocks, so single-round and batched generation agree bit for
bit and replays are reproducible across platforms.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import domains
from .errors import ConfigError, DimensionMismatchError

__all__ = [
    "Noise",
    "IIDStream",
    "AlternatingStream",
    "BestResponseStream",
    "RecordedStream",
    "CostBounds",
    "next_cost",
    "iid_costs",
    "stream_costs",
    "is_adaptive",
    "declared_cost_bound",
    "declared_mean",
    "empirical_bounds",
    "recorded_from_csv",
    "recorded_from_json",
    "stream_from_dict",
    "stream_to_dict",
]

_NOISE_KINDS = ("none", "uniform_ball", "rademacher_scaled")


@dataclass(frozen=True)
class Noise:
    """Bounded zero-mean noise spec; the radius is a hard norm bound by construction."""

    kind: str = "none"
    radius: float = 0.0

    def __post_init__(self):
        if self.kind not in _NOISE_KINDS:
            raise ConfigError(f"noise kind must be one of {_NOISE_KINDS}, got {self.kind!r}")
        if self.radius < 0.0:
            raise ConfigError(f"noise radius must be >= 0, got {self.radius}")
        if self.kind == "none" and self.radius != 0.0:
            raise ConfigError("noise 'none' must have radius 0")


@dataclass(frozen=True, eq=False)
class IIDStream:
    mean: np.ndarray
    noise: Noise = Noise()
    seed: int = 0

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=float)
        if m.ndim != 1 or not np.isfinite(m).all():
            raise ConfigError("IID mean must be a finite vector")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "mean", m)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True, eq=False)
class AlternatingStream:
    """Deterministic sign-flipping costs (-1)^round * base."""

    base: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.base, dtype=float)
        if b.ndim != 1 or not np.isfinite(b).all():
            raise ConfigError("alternating base must be a finite vector")
        object.__setattr__(self, "base", b)

    @property
    def dim(self) -> int:
        return self.base.size


@dataclass(frozen=True)
class BestResponseStream:
    """Full-information adversary pushing cost mass toward the committed action."""

    bound: float

    def __post_init__(self):
        if not self.bound > 0.0:
            raise ConfigError(f"best-response bound must be > 0, got {self.bound}")


@dataclass(frozen=True, eq=False)
class RecordedStream:
    costs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.costs, dtype=float)
        if c.ndim != 2 or not np.isfinite(c).all():
            raise ConfigError("recorded costs must be a finite 2-d array")
        object.__setattr__(self, "costs", c)

    @property
    def dim(self) -> int:
        return self.costs.shape[1]


StreamSpec = IIDStream | AlternatingStream | BestResponseStream | RecordedStream


def is_adaptive(stream) -> bool:
    """True when costs depend on the learner's committed action."""
    return isinstance(stream, BestResponseStream)


def declared_mean(stream) -> np.ndarray | None:
    """The true mean cost vector, when the stream declares one."""
    return stream.mean if isinstance(stream, IIDStream) else None


def declared_cost_bound(stream) -> float:
    """A guaranteed Euclidean bound L on every generated cost."""
    if isinstance(stream, IIDStream):
        return float(np.linalg.norm(stream.mean)) + stream.noise.radius
    if isinstance(stream, AlternatingStream):
        return float(np.linalg.norm(stream.base))
    if isinstance(stream, BestResponseStream):
        return stream.bound
    if isinstance(stream, RecordedStream):
        return float(np.linalg.norm(stream.costs, axis=1).max()) if len(stream.costs) else 0.0
    raise ConfigError(f"unknown stream {stream!r}")


# ---------------------------------------------------------------------------
# Counter-based uniforms

def _uniform_blocks(seed: int, first_round: int, n_rounds: int, per_round: int) -> np.ndarray:
    """Uniforms in (0,1), shape (n_rounds, per_round); row i depends only on
    (seed, first_round + i).  Each round owns a fixed range of Philox counter
    blocks (4 outputs per block), so batches and single rounds coincide."""
    blocks = -(-per_round // 4)
    if n_rounds == 0:
        return np.empty((0, per_round))
    start = (first_round - 1) * blocks
    raw = np.random.Philox(key=seed, counter=[start, 0, 0, 0]).random_raw(4 * blocks * n_rounds)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return u.reshape(n_rounds, 4 * blocks)[:, :per_round]


def _noise_rows(noise: Noise, dim: int, seed: int, first_round: int, n_rounds: int) -> np.ndarray:
    if noise.kind == "none":
        return np.zeros((n_rounds, dim))
    if noise.kind == "uniform_ball":
        u = _uniform_blocks(seed, first_round, n_rounds, dim + 1)
        g = ndtri(u[:, :dim])
        norms = np.linalg.norm(g, axis=1)
        g[norms < 1e-300] = np.eye(dim)[0]
        norms = np.maximum(norms, 1e-300)
        radii = noise.radius * u[:, dim] ** (1.0 / dim)
        return g * (radii / norms)[:, None]
    if noise.kind == "rademacher_scaled":
        u = _uniform_blocks(seed, first_round, n_rounds, dim)
        return np.where(u < 0.5, -1.0, 1.0) * (noise.radius / math.sqrt(dim))
    raise ConfigError(f"unknown noise kind {noise.kind!r}")


def iid_costs(stream: IIDStream, first_round: int, n_rounds: int) -> np.ndarray:
    """Costs for rounds first_round .. first_round + n_rounds - 1, shape (n_rounds, d)."""
    return stream.mean + _noise_rows(stream.noise, stream.dim, stream.seed, first_round, n_rounds)


def next_cost(stream, round_: int, learner_action=None, center=None) -> np.ndarray:
    """Cost vector for one round.

    Best-response streams require the committed action and the domain center;
    all other streams ignore both.
    """
    if round_ < 1:
        raise ConfigError(f"round must be >= 1, got {round_}")
    if isinstance(stream, IIDStream):
        return iid_costs(stream, round_, 1)[0]
    if isinstance(stream, AlternatingStream):
        return ((-1.0) ** round_) * stream.base
    if isinstance(stream, BestResponseStream):
        if learner_action is None:
            raise ConfigError("best-response stream needs the committed learner action")
        if center is None:
            raise ConfigError("best-response stream needs the domain center")
        x = np.asarray(learner_action, dtype=float)
        dev = x - np.asarray(center, dtype=float)
        nrm = float(np.linalg.norm(dev))
        if nrm == 0.0:
            return np.zeros_like(x)
        return stream.bound * dev / nrm
    if isinstance(stream, RecordedStream):
        if round_ > len(stream.costs):
            raise ConfigError(f"recorded stream has only {len(stream.costs)} rounds")
        return stream.costs[round_ - 1].copy()
    raise ConfigError(f"unknown stream {stream!r}")


def stream_costs(stream, n_rounds: int) -> np.ndarray:
    """All costs of a non-adaptive stream for rounds 1..n_rounds, shape (n, d)."""
    if is_adaptive(stream):
        raise ConfigError("adaptive streams cannot be generated without actions")
    if isinstance(stream, IIDStream):
        return iid_costs(stream, 1, n_rounds)
    if isinstance(stream, AlternatingStream):
        signs = (-1.0) ** np.arange(1, n_rounds + 1)
        return signs[:, None] * stream.base
    if isinstance(stream, RecordedStream):
        if n_rounds > len(stream.costs):
            raise ConfigError(f"recorded stream has only {len(stream.costs)} rounds")
        return stream.costs[:n_rounds].copy()
    raise ConfigError(f"unknown stream {stream!r}")


# ---------------------------------------------------------------------------
# Bound constants

@dataclass(frozen=True)
class CostBounds:
    """Euclidean (L, R) and intrinsic (L_inf, R_inf) bound constants of a cost list."""

    L: float
    R: float
    L_inf: float | None = None
    R_inf: float | None = None
    mean_is_empirical: bool = False
    warning: str | None = None

    def __post_init__(self):
        if self.L < 0 or self.R < 0:
            raise ConfigError("bounds must be nonnegative")
        if self.R > 2.0 * self.L * (1.0 + 1e-12) + 1e-12:
            raise ConfigError(f"R={self.R} exceeds 2L={2 * self.L}; the declared mean is inconsistent")


def empirical_bounds(costs, mean=None, domain=None, cap: int = 10_000) -> CostBounds:
    """Tight empirical constants of a cost list over a domain.

    L = max ||a_i||; R = max ||a_i - mean|| (empirical average when no mean is given,
    flagged in the result).  Intrinsic bounds are ranges over vertex pairs; they are
    absent, with a warning, when the domain cannot be enumerated.
    """
    A = np.asarray(costs, dtype=float)
    if A.ndim != 2 or A.shape[0] == 0:
        raise ConfigError("cost list must be a nonempty 2-d array")
    mean_is_empirical = mean is None
    m = A.mean(axis=0) if mean is None else np.asarray(mean, dtype=float)
    if m.size != A.shape[1]:
        raise DimensionMismatchError(f"mean dim {m.size} does not match costs dim {A.shape[1]}")

    L = float(np.linalg.norm(A, axis=1).max())
    R = float(np.linalg.norm(A - m, axis=1).max())

    L_inf = R_inf = None
    warning = None
    if domain is None:
        warning = "no domain given; intrinsic bounds unavailable"
    elif isinstance(domain, domains.Ball):
        L_inf = 2.0 * L
        R_inf = 2.0 * R
    elif domains.is_polytopal(domain):
        try:
            V = domains.vertices(domain, cap)
            proj = A @ V.T
            L_inf = float((proj.max(axis=1) - proj.min(axis=1)).max())
            dev = (A - m) @ V.T
            R_inf = float((dev.max(axis=1) - dev.min(axis=1)).max())
        except Exception as e:  # enumeration refusal propagates as a warning
            warning = f"intrinsic bounds unavailable: {e}"
    else:
        warning = f"intrinsic bounds unavailable for {type(domain).__name__}"
    return CostBounds(L=L, R=R, L_inf=L_inf, R_inf=R_inf,
                      mean_is_empirical=mean_is_empirical, warning=warning)


# ---------------------------------------------------------------------------
# Recorded loaders and config round trip

def recorded_from_csv(path) -> RecordedStream:
    """One cost vector per row, '.' decimal separator."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if row:
                rows.append([float(v) for v in row])
    if not rows:
        raise ConfigError(f"no cost rows in {path}")
    return RecordedStream(costs=np.asarray(rows, dtype=float))


def recorded_from_json(path) -> RecordedStream:
    with open(path) as fh:
        data = json.load(fh)
    return RecordedStream(costs=np.asarray(data, dtype=float))


def stream_from_dict(spec: dict) -> StreamSpec:
    if not isinstance(spec, dict) or "tag" not in spec:
        raise ConfigError(f"stream spec must be a dict with a 'tag' key, got {spec!r}")
    tag = spec["tag"]
    try:
        if tag == "iid":
            noise_spec = spec.get("noise", {"kind": "none"})
            noise = Noise(kind=noise_spec.get("kind", "none"),
                          radius=float(noise_spec.get("radius", 0.0)))
            return IIDStream(mean=np.asarray(spec["mean"], dtype=float),
                             noise=noise, seed=int(spec.get("seed", 0)))
        if tag == "alternating":
            return AlternatingStream(base=np.asarray(spec["base"], dtype=float))
        if tag == "best_response":
            return BestResponseStream(bound=float(spec["bound"]))
        if tag == "recorded":
            if "path" in spec:
                path = str(spec["path"])
                if path.endswith(".json"):
                    return recorded_from_json(path)
                return recorded_from_csv(path)
            return RecordedStream(costs=np.asarray(spec["costs"], dtype=float))
    except KeyError as e:
        raise ConfigError(f"stream spec for tag {tag!r} is missing field {e}") from e
    raise ConfigError(f"unknown stream tag {tag!r}")


def stream_to_dict(stream) -> dict:
    if isinstance(stream, IIDStream):
        return {"tag": "iid", "mean": stream.mean.tolist(),
                "noise": {"kind": stream.noise.kind, "radius": stream.noise.radius},
                "seed": stream.seed}
    if isinstance(stream, AlternatingStream):
        return {"tag": "alternating", "base": stream.base.tolist()}
    if isinstance(stream, BestResponseStream):
        return {"tag": "best_response", "bound": stream.bound}
    if isinstance(stream, RecordedStream):
        return {"tag": "recorded", "costs": stream.costs.tolist()}
    raise ConfigError(f"unknown stream {stream!r}")
