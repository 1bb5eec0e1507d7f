"""Action sets: membership, vertex enumeration, linear minimization, and Euclidean projection.

Every domain is a compact convex subset of R^d described by a small tagged spec.
Projections come in three flavours: closed-form rules (ball, box, simplex, curved
epigraph), structured iterative/combinatorial rules (Birkhoff via Dykstra,
permutahedra via pool-adjacent-violators), and a generic min-norm-point oracle
over an explicit vertex list that every specialized rule is validated against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionMismatchError,
    VertexCountError,
)

__all__ = [
    "Ball",
    "Simplex",
    "Box",
    "Birkhoff",
    "Permutahedron",
    "SignedPermutahedron",
    "VPolytope",
    "CurvedEpigraph",
    "AffineHull",
    "ProjectionResult",
    "ambient_dim",
    "is_polytopal",
    "center",
    "contains",
    "project",
    "project_rows",
    "project_birkhoff",
    "project_permutahedron",
    "project_vpolytope_minnorm",
    "vertices",
    "vertex_count",
    "linear_minimizer",
    "linear_minimum_values",
    "affine_decomposition",
    "domain_from_dict",
    "domain_to_dict",
]


# ---------------------------------------------------------------------------
# Domain specs

@dataclass(frozen=True)
class Ball:
    """Unit Euclidean ball centered at the origin."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"Ball dim must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class Simplex:
    """Probability simplex: nonnegative entries summing to one."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"Simplex dim must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class Box:
    """Axis-aligned cube [lower, upper]^dim."""

    dim: int
    lower: float = -1.0
    upper: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"Box dim must be >= 1, got {self.dim}")
        if not self.lower < self.upper:
            raise ConfigError(f"Box requires lower < upper, got [{self.lower}, {self.upper}]")


@dataclass(frozen=True)
class Birkhoff:
    """Doubly stochastic n x n matrices, stored flattened row-major (ambient dim n^2)."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError(f"Birkhoff n must be >= 2, got {self.n}")


@dataclass(frozen=True)
class Permutahedron:
    """Convex hull of all permutations of (1, 2, ..., dim)."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"Permutahedron dim must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class SignedPermutahedron:
    """Convex hull of all sign flips of all permutations of (1, 2, ..., dim)."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"SignedPermutahedron dim must be >= 1, got {self.dim}")


@dataclass(frozen=True, eq=False)
class VPolytope:
    """Convex hull of an explicit vertex list (redundant points are kept as given)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0:
            raise ConfigError("VPolytope needs a nonempty 2-d vertex array")
        if not np.isfinite(v).all():
            raise ConfigError("VPolytope vertices must be finite")
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]


@dataclass(frozen=True)
class CurvedEpigraph:
    """Planar region {(x, y) in [-1,1] x [0,1] : y >= |x|^alpha}, convex for alpha >= 1."""

    alpha: float

    def __post_init__(self):
        if not self.alpha >= 1.0:
            raise ConfigError(f"CurvedEpigraph alpha must be >= 1, got {self.alpha}")

    dim = 2


DomainSpec = (
    Ball | Simplex | Box | Birkhoff | Permutahedron | SignedPermutahedron
    | VPolytope | CurvedEpigraph
)

_POLYTOPAL = (Simplex, Box, Birkhoff, Permutahedron, SignedPermutahedron, VPolytope)


def ambient_dim(domain) -> int:
    if isinstance(domain, Birkhoff):
        return domain.n * domain.n
    return domain.dim


def is_polytopal(domain) -> bool:
    return isinstance(domain, _POLYTOPAL)


def center(domain) -> np.ndarray:
    """A canonical interior point: the vertex centroid for polytopes."""
    d = ambient_dim(domain)
    if isinstance(domain, Ball):
        return np.zeros(d)
    if isinstance(domain, Simplex):
        return np.full(d, 1.0 / d)
    if isinstance(domain, Box):
        return np.full(d, 0.5 * (domain.lower + domain.upper))
    if isinstance(domain, Birkhoff):
        return np.full(d, 1.0 / domain.n)
    if isinstance(domain, Permutahedron):
        return np.full(d, 0.5 * (d + 1))
    if isinstance(domain, SignedPermutahedron):
        return np.zeros(d)
    if isinstance(domain, VPolytope):
        return domain.vertices.mean(axis=0)
    if isinstance(domain, CurvedEpigraph):
        return np.array([0.0, 0.5])
    raise ConfigError(f"unknown domain {domain!r}")


def _check_point(domain, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != ambient_dim(domain):
        raise DimensionMismatchError(
            f"point of dim {x.size if x.ndim == 1 else x.shape} does not match "
            f"domain ambient dim {ambient_dim(domain)}"
        )
    if not np.isfinite(x).all():
        raise ConfigError("point has non-finite entries")
    return x


# ---------------------------------------------------------------------------
# Results

@dataclass(frozen=True)
class ProjectionResult:
    """Projected point plus diagnostics.

    residual is the worst remaining constraint violation (0 for closed forms);
    iterations counts inner iterations (0 for closed forms).
    """

    point: np.ndarray
    residual: float = 0.0
    iterations: int = 0


@dataclass(frozen=True)
class AffineHull:
    """Affine hull U + t with an orthonormal row basis of the subspace U."""

    basis: np.ndarray       # (k, d), orthonormal rows
    translation: np.ndarray  # (d,)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def project_subspace(self, p: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto the subspace U (drops the translation)."""
        p = np.asarray(p, dtype=float)
        return (p @ self.basis.T) @ self.basis

    def project_affine(self, p: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto the affine hull U + t."""
        p = np.asarray(p, dtype=float)
        return self.translation + self.project_subspace(p - self.translation)


# ---------------------------------------------------------------------------
# Membership

def contains(domain, x, tol: float = 1e-9) -> bool:
    """True iff x satisfies every defining constraint of the domain within tol."""
    x = _check_point(domain, x)
    if isinstance(domain, Ball):
        return float(np.linalg.norm(x)) <= 1.0 + tol
    if isinstance(domain, Simplex):
        return bool(x.min() >= -tol and abs(x.sum() - 1.0) <= tol)
    if isinstance(domain, Box):
        return bool(x.min() >= domain.lower - tol and x.max() <= domain.upper + tol)
    if isinstance(domain, Birkhoff):
        m = x.reshape(domain.n, domain.n)
        return bool(
            m.min() >= -tol
            and np.abs(m.sum(axis=0) - 1.0).max() <= tol
            and np.abs(m.sum(axis=1) - 1.0).max() <= tol
        )
    if isinstance(domain, Permutahedron):
        d = domain.dim
        target = np.arange(d, 0, -1, dtype=float)
        if abs(x.sum() - target.sum()) > tol:
            return False
        prefix = np.cumsum(np.sort(x)[::-1])
        return bool((prefix <= np.cumsum(target) + tol).all())
    if isinstance(domain, SignedPermutahedron):
        d = domain.dim
        target = np.arange(d, 0, -1, dtype=float)
        prefix = np.cumsum(np.sort(np.abs(x))[::-1])
        return bool((prefix <= np.cumsum(target) + tol).all())
    if isinstance(domain, VPolytope):
        res = project_vpolytope_minnorm(domain.vertices, x, tol=min(tol, 1e-9) ** 2)
        return float(np.linalg.norm(res.point - x)) <= tol
    if isinstance(domain, CurvedEpigraph):
        px, py = x
        return bool(
            abs(px) <= 1.0 + tol
            and -tol <= py <= 1.0 + tol
            and py >= abs(px) ** domain.alpha - tol
        )
    raise ConfigError(f"unknown domain {domain!r}")


# ---------------------------------------------------------------------------
# Closed-form projections

def _project_simplex_rows(y: np.ndarray) -> np.ndarray:
    """Sort-then-threshold rule, applied row-wise."""
    d = y.shape[1]
    u = -np.sort(-y, axis=1)
    css = np.cumsum(u, axis=1)
    k = np.arange(1, d + 1, dtype=float)
    cond = u + (1.0 - css) / k > 0.0
    rho = d - 1 - np.argmax(cond[:, ::-1], axis=1)  # last True index per row
    theta = (css[np.arange(len(y)), rho] - 1.0) / (rho + 1.0)
    return np.maximum(y - theta[:, None], 0.0)


def _curve_root_rows(alpha: float, px: np.ndarray, py: np.ndarray, tol: float = 1e-12):
    """Nearest-point abscissa on the curve y = x**alpha, x in [0, 1], for px >= 0.

    Solves the stationarity condition (x - px) + alpha x^(alpha-1) (x^alpha - py) = 0
    by bisection on [0, 1].  Returns (root, bracketed) where bracketed is False when
    the stationary point lies beyond x = 1 (the corner is then the candidate).
    """

    def phi(x):
        return (x - px) + alpha * x ** (alpha - 1.0) * (x ** alpha - py)

    lo = np.zeros_like(px)
    hi = np.ones_like(px)
    bracketed = phi(hi) >= 0.0
    # phi(0) = -px <= 0 for px >= 0, so [0, 1] brackets whenever phi(1) >= 0
    it = 0
    while (hi - lo).max(initial=0.0) > tol and it < 64:
        mid = 0.5 * (lo + hi)
        neg = phi(mid) < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
        it += 1
    return 0.5 * (lo + hi), bracketed


def _project_curved_rows(alpha: float, y: np.ndarray) -> np.ndarray:
    px = np.clip(y[:, 0], -1.0, 1.0)
    py = np.clip(y[:, 1], 0.0, 1.0)
    below = py < np.abs(px) ** alpha
    out = np.stack([px, py], axis=1)
    if below.any():
        s = np.where(y[below, 0] < 0.0, -1.0, 1.0)
        qx = np.abs(y[below, 0])
        qy = y[below, 1]
        root, bracketed = _curve_root_rows(alpha, qx, qy)
        cx = np.where(bracketed, root, 1.0)
        cy = cx ** alpha
        d_curve = (cx - qx) ** 2 + (cy - qy) ** 2
        d_corner = (1.0 - qx) ** 2 + (1.0 - qy) ** 2
        use_corner = d_corner < d_curve
        bx = np.where(use_corner, 1.0, cx)
        by = np.where(use_corner, 1.0, cy)
        out[below, 0] = s * bx
        out[below, 1] = by
    return out


def project_rows(domain, Y: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean projection for domains with a closed-form rule."""
    Y = np.asarray(Y, dtype=float)
    if isinstance(domain, Ball):
        norms = np.linalg.norm(Y, axis=1)
        scale = np.where(norms > 1.0, 1.0 / np.maximum(norms, 1e-300), 1.0)
        return Y * scale[:, None]
    if isinstance(domain, Box):
        return np.clip(Y, domain.lower, domain.upper)
    if isinstance(domain, Simplex):
        return _project_simplex_rows(Y)
    if isinstance(domain, CurvedEpigraph):
        return _project_curved_rows(domain.alpha, Y)
    raise ConfigError(f"no closed-form row projection for {type(domain).__name__}")


def project(domain, y, tol: float | None = None, max_iters: int | None = None) -> ProjectionResult:
    """Euclidean projection of y onto the domain.

    Ball, box, simplex and curved epigraph use closed-form rules; Birkhoff,
    permutahedra and vertex polytopes dispatch to their specialized routines.
    """
    y = _check_point(domain, y)
    if isinstance(domain, (Ball, Box, Simplex, CurvedEpigraph)):
        point = project_rows(domain, y[None, :])[0]
        return ProjectionResult(point=point, residual=0.0, iterations=0)
    if isinstance(domain, Birkhoff):
        return project_birkhoff(
            domain.n, y,
            tol=1e-9 if tol is None else tol,
            max_iters=50_000 if max_iters is None else max_iters,
        )
    if isinstance(domain, Permutahedron):
        return project_permutahedron(domain.dim, y, signed=False)
    if isinstance(domain, SignedPermutahedron):
        return project_permutahedron(domain.dim, y, signed=True)
    if isinstance(domain, VPolytope):
        return project_vpolytope_minnorm(domain.vertices, y, tol=1e-12 if tol is None else tol)
    raise ConfigError(f"unknown domain {domain!r}")


# ---------------------------------------------------------------------------
# Birkhoff projection (Dykstra)

def _project_doubly_stochastic_affine(m: np.ndarray) -> np.ndarray:
    """Projection onto the affine subspace of matrices with all row/col sums 1."""
    n = m.shape[0]
    r = m.sum(axis=1)
    c = m.sum(axis=0)
    s = r.sum()
    p = (n - s) / (2.0 * n)
    u = (1.0 - r) / n - p / n
    v = (1.0 - c) / n - p / n
    return m + u[:, None] + v[None, :]


def project_birkhoff(n: int, y, tol: float = 1e-9, max_iters: int = 50_000) -> ProjectionResult:
    """Dykstra's alternating projections between the row/col-sum-1 affine subspace
    and the nonnegative orthant, followed by one rescue pass (affine re-projection
    then clipping) whose remaining violation is reported as the residual.
    """
    y = np.asarray(y, dtype=float)
    if y.size != n * n:
        raise DimensionMismatchError(f"expected dim {n * n}, got {y.size}")
    if not np.isfinite(y).all():
        raise ConfigError("point has non-finite entries")
    if tol <= 0:
        raise ConfigError("tol must be positive")

    x = y.reshape(n, n).copy()
    q = np.zeros_like(x)  # Dykstra correction for the orthant (affine part needs none)
    iters = 0
    delta = np.inf
    while iters < max_iters:
        prev = x
        a = _project_doubly_stochastic_affine(x)
        w = a + q
        x = np.maximum(w, 0.0)
        q = w - x
        iters += 1
        delta = float(np.abs(x - prev).max())
        if delta < tol:
            break

    # rescue: exact sums, then clip; report what the clip broke
    a = _project_doubly_stochastic_affine(x)
    clipped = np.maximum(a, 0.0)
    residual = float(
        max(
            np.abs(clipped.sum(axis=0) - 1.0).max(),
            np.abs(clipped.sum(axis=1) - 1.0).max(),
        )
    )
    if delta >= tol and residual > 10.0 * tol:
        raise ConvergenceError(
            f"Birkhoff projection did not converge in {max_iters} iterations "
            f"(last step {delta:.3e}, residual {residual:.3e})",
            best_point=clipped.reshape(-1),
            residual=residual,
            iterations=iters,
        )
    return ProjectionResult(point=clipped.reshape(-1), residual=residual, iterations=iters)


# ---------------------------------------------------------------------------
# Permutahedron projection (pool adjacent violators)

def _isotonic_nonincreasing(u: np.ndarray) -> np.ndarray:
    """L2 projection of u onto nonincreasing sequences, by pool adjacent violators."""
    n = u.size
    vals = np.empty(n)
    sizes = np.empty(n, dtype=np.int64)
    k = 0
    for i in range(n):
        vals[k] = u[i]
        sizes[k] = 1
        k += 1
        while k > 1 and vals[k - 2] <= vals[k - 1]:
            total = vals[k - 2] * sizes[k - 2] + vals[k - 1] * sizes[k - 1]
            sizes[k - 2] += sizes[k - 1]
            vals[k - 2] = total / sizes[k - 2]
            k -= 1
    return np.repeat(vals[:k], sizes[:k])


def project_permutahedron(dim: int, y, signed: bool = False) -> ProjectionResult:
    """Exact projection onto the (signed) permutahedron.

    Unsigned: sort descending, subtract the nonincreasing isotonic fit of
    (sorted y - (d, d-1, ..., 1)), undo the sort.  Signed: by symmetry the
    projection keeps the signs of y (zeros keep positive sign) and |y| projects
    onto the positive part of the signed hull, which only requires weak
    submajorization by (d, ..., 1) rather than full permutahedron membership;
    that adds a zero floor to the isotonic fit.  Validated against the
    min-norm oracle.
    """
    y = np.asarray(y, dtype=float)
    if y.size != dim:
        raise DimensionMismatchError(f"expected dim {dim}, got {y.size}")
    if not np.isfinite(y).all():
        raise ConfigError("point has non-finite entries")

    target = np.arange(dim, 0, -1, dtype=float)
    if signed:
        signs = np.where(y < 0.0, -1.0, 1.0)
        s = np.abs(y)
        order = np.argsort(-s, kind="stable")
        z = np.maximum(_isotonic_nonincreasing(s[order] - target), 0.0)
        mags = np.empty(dim)
        mags[order] = np.maximum(s[order] - z, 0.0)
        return ProjectionResult(point=signs * mags, residual=0.0, iterations=0)

    order = np.argsort(-y, kind="stable")
    z = _isotonic_nonincreasing(y[order] - target)
    x = np.empty(dim)
    x[order] = y[order] - z
    return ProjectionResult(point=x, residual=0.0, iterations=0)


# ---------------------------------------------------------------------------
# Wolfe min-norm-point oracle

def _affine_weights(B: np.ndarray, jitter: float = 1e-12) -> np.ndarray:
    """Weights of the min-norm point in the affine hull of the rows of B."""
    k = B.shape[0]
    if k == 1:
        return np.ones(1)
    A = np.empty((k + 1, k + 1))
    A[:k, :k] = B @ B.T
    A[:k, k] = 1.0
    A[k, :k] = 1.0
    A[k, k] = 0.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    eps = jitter
    for attempt in range(3):
        try:
            sol = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            sol = None
        if sol is not None and np.isfinite(sol).all():
            return sol[:k]
        A[:k, :k] += eps * np.eye(k)
        eps *= 1e2
    raise ConvergenceError("degenerate affine solve in min-norm-point algorithm")


def project_vpolytope_minnorm(vertices, y, tol: float = 1e-12) -> ProjectionResult:
    """Projection onto conv(vertices) via Wolfe's min-norm-point algorithm.

    Runs on the shifted set {v - y}; terminates when the Wolfe duality gap
    x.x - min_v x.v drops to tol (so ||x - x*||^2 <= 2 tol).
    """
    V = np.asarray(vertices, dtype=float)
    if V.ndim != 2 or V.shape[0] == 0:
        raise ConfigError("vertex list must be a nonempty 2-d array")
    y = np.asarray(y, dtype=float)
    if y.size != V.shape[1]:
        raise DimensionMismatchError(f"expected dim {V.shape[1]}, got {y.size}")

    P = V - y
    m = P.shape[0]
    j0 = int(np.argmin(np.einsum("ij,ij->i", P, P)))
    corral = [j0]
    lam = np.ones(1)
    x = P[j0].copy()

    gap = float(x @ x - (P @ x).min())
    iters = 0
    max_major = 4 * m + 100
    for _ in range(max_major):
        dots = P @ x
        jnew = int(np.argmin(dots))
        gap = float(x @ x - dots[jnew])
        if gap <= tol or jnew in corral:
            break
        corral.append(jnew)
        lam = np.append(lam, 0.0)
        while True:
            B = P[corral]
            alpha = _affine_weights(B)
            if alpha.min() > 1e-13:
                lam = alpha
                x = alpha @ B
                break
            shrink = alpha <= 1e-13
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(shrink, lam / (lam - alpha), np.inf)
            theta = float(min(1.0, np.min(ratios)))
            lam = (1.0 - theta) * lam + theta * alpha
            keep = lam > 1e-13
            if keep.all():  # numerical: force the smallest weight out
                keep[int(np.argmin(lam))] = False
            corral = [c for c, k in zip(corral, keep) if k]
            lam = lam[keep]
            lam /= lam.sum()
        iters += 1

    return ProjectionResult(point=x + y, residual=max(gap, 0.0), iterations=iters)


# ---------------------------------------------------------------------------
# Vertices and linear minimization

def vertex_count(domain) -> int:
    if isinstance(domain, Simplex):
        return domain.dim
    if isinstance(domain, Box):
        return 2 ** domain.dim
    if isinstance(domain, Birkhoff):
        return math.factorial(domain.n)
    if isinstance(domain, Permutahedron):
        return math.factorial(domain.dim)
    if isinstance(domain, SignedPermutahedron):
        return (2 ** domain.dim) * math.factorial(domain.dim)
    if isinstance(domain, VPolytope):
        return domain.vertices.shape[0]
    raise ConfigError(f"{type(domain).__name__} is not polytopal")


def vertices(domain, cap: int = 10_000) -> np.ndarray:
    """Exact vertex list as a (V, d) array; refuses when the count exceeds cap."""
    if not is_polytopal(domain):
        raise ConfigError(f"{type(domain).__name__} has no vertex list")
    count = vertex_count(domain)
    if count > cap:
        raise VertexCountError(count, cap, what=type(domain).__name__)

    if isinstance(domain, Simplex):
        return np.eye(domain.dim)
    if isinstance(domain, Box):
        combos = itertools.product((domain.lower, domain.upper), repeat=domain.dim)
        return np.array(list(combos), dtype=float)
    if isinstance(domain, Birkhoff):
        n = domain.n
        out = np.zeros((count, n * n))
        for i, perm in enumerate(itertools.permutations(range(n))):
            m = np.zeros((n, n))
            m[np.arange(n), perm] = 1.0
            out[i] = m.reshape(-1)
        return out
    if isinstance(domain, Permutahedron):
        return np.array(list(itertools.permutations(range(1, domain.dim + 1))), dtype=float)
    if isinstance(domain, SignedPermutahedron):
        perms = list(itertools.permutations(range(1, domain.dim + 1)))
        signs = list(itertools.product((1.0, -1.0), repeat=domain.dim))
        out = np.empty((count, domain.dim))
        i = 0
        for perm in perms:
            p = np.array(perm, dtype=float)
            for s in signs:
                out[i] = p * np.array(s)
                i += 1
        return out
    return domain.vertices.copy()


def linear_minimizer(domain, a) -> np.ndarray:
    """A point of the domain minimizing the linear objective a . x (a vertex for polytopes)."""
    a = _check_point(domain, a)
    if isinstance(domain, Ball):
        nrm = float(np.linalg.norm(a))
        return np.zeros_like(a) if nrm == 0.0 else -a / nrm
    if isinstance(domain, Simplex):
        out = np.zeros_like(a)
        out[int(np.argmin(a))] = 1.0
        return out
    if isinstance(domain, Box):
        return np.where(a >= 0.0, domain.lower, domain.upper).astype(float)  # ties to lower
    if isinstance(domain, Birkhoff):
        n = domain.n
        rows, cols = linear_sum_assignment(a.reshape(n, n))
        m = np.zeros((n, n))
        m[rows, cols] = 1.0
        return m.reshape(-1)
    if isinstance(domain, Permutahedron):
        d = domain.dim
        out = np.empty(d)
        out[np.argsort(a, kind="stable")] = np.arange(d, 0, -1, dtype=float)
        return out
    if isinstance(domain, SignedPermutahedron):
        d = domain.dim
        mags = np.empty(d)
        mags[np.argsort(np.abs(a), kind="stable")] = np.arange(1, d + 1, dtype=float)
        signs = np.where(a > 0.0, -1.0, 1.0)
        return signs * mags
    if isinstance(domain, VPolytope):
        return domain.vertices[int(np.argmin(domain.vertices @ a))].copy()
    if isinstance(domain, CurvedEpigraph):
        return _curved_linear_minimizer_rows(domain.alpha, a[None, :])[0]
    raise ConfigError(f"unknown domain {domain!r}")


def _curved_linear_minimizer_rows(alpha: float, A: np.ndarray) -> np.ndarray:
    """Row-wise linear minimizer over the curved epigraph (closed-form candidates)."""
    a1 = A[:, 0]
    a2 = A[:, 1]
    out = np.empty_like(A)

    # a2 < 0: push y up to the top edge y = 1, x = -sign(a1)
    top = a2 < 0.0
    out[top, 0] = -np.sign(a1[top])
    out[top, 1] = 1.0

    # a2 >= 0: stay on the curve y = |x|^alpha; minimize a1 x + a2 |x|^alpha
    low = ~top
    if low.any():
        b1 = a1[low]
        b2 = a2[low]
        xm = np.abs(b1)  # placeholder, overwritten below
        with np.errstate(divide="ignore", invalid="ignore"):
            if alpha > 1.0:
                interior = np.where(
                    b2 > 0.0,
                    np.minimum(1.0, (np.abs(b1) / (alpha * np.maximum(b2, 1e-300))) ** (1.0 / (alpha - 1.0))),
                    1.0,
                )
            else:  # alpha == 1: slope comparison decides corner vs apex
                interior = np.where(np.abs(b1) > b2, 1.0, 0.0)
        xm = np.where(b1 == 0.0, 0.0, interior)
        x = -np.sign(b1) * xm
        out_low = np.stack([x, xm ** alpha], axis=1)
        # compare with staying at the apex (0, 0)
        vals = b1 * out_low[:, 0] + b2 * out_low[:, 1]
        better_origin = vals > 0.0
        out_low[better_origin] = 0.0
        out[low] = out_low
    return out


def linear_minimum_values(domain, A: np.ndarray) -> np.ndarray:
    """Row-wise minimum of a . x over the domain (values only, vectorized)."""
    A = np.asarray(A, dtype=float)
    if isinstance(domain, Ball):
        return -np.linalg.norm(A, axis=1)
    if isinstance(domain, Simplex):
        return A.min(axis=1)
    if isinstance(domain, Box):
        return np.minimum(A * domain.lower, A * domain.upper).sum(axis=1)
    if isinstance(domain, Permutahedron):
        d = domain.dim
        t = np.arange(d, 0, -1, dtype=float)
        return np.sort(A, axis=1) @ t
    if isinstance(domain, SignedPermutahedron):
        d = domain.dim
        t = np.arange(1, d + 1, dtype=float)
        return -(np.sort(np.abs(A), axis=1) @ t)
    if isinstance(domain, VPolytope):
        return (A @ domain.vertices.T).min(axis=1)
    if isinstance(domain, CurvedEpigraph):
        X = _curved_linear_minimizer_rows(domain.alpha, A)
        return np.einsum("ij,ij->i", A, X)
    if isinstance(domain, Birkhoff):
        n = domain.n
        out = np.empty(A.shape[0])
        for i, row in enumerate(A):
            m = row.reshape(n, n)
            rows, cols = linear_sum_assignment(m)
            out[i] = m[rows, cols].sum()
        return out
    raise ConfigError(f"unknown domain {domain!r}")


# ---------------------------------------------------------------------------
# Affine hulls

def _helmert_rows(d: int) -> np.ndarray:
    """Orthonormal basis (d-1 rows) of the zero-sum hyperplane in R^d."""
    rows = np.zeros((d - 1, d))
    for i in range(1, d):
        rows[i - 1, :i] = 1.0
        rows[i - 1, i] = -float(i)
        rows[i - 1] /= math.sqrt(i * (i + 1))
    return rows


def _gram_schmidt_basis(diffs: np.ndarray, drop_tol: float = 1e-10) -> np.ndarray:
    basis: list[np.ndarray] = []
    for v in diffs:
        w = v.copy()
        for _ in range(2):  # re-orthogonalize for stability
            for b in basis:
                w -= (w @ b) * b
        nrm = float(np.linalg.norm(w))
        if nrm > drop_tol:
            basis.append(w / nrm)
    if not basis:
        return np.zeros((0, diffs.shape[1]))
    return np.array(basis)


def affine_decomposition(domain, cap: int = 10_000) -> AffineHull:
    """Orthonormal basis of the hull direction space U plus a translation t."""
    if not is_polytopal(domain):
        raise ConfigError(f"{type(domain).__name__} is not polytopal")
    d = ambient_dim(domain)
    if isinstance(domain, Simplex):
        return AffineHull(basis=_helmert_rows(d), translation=center(domain))
    if isinstance(domain, Permutahedron):
        return AffineHull(basis=_helmert_rows(d), translation=center(domain))
    if isinstance(domain, (Box, SignedPermutahedron)):
        return AffineHull(basis=np.eye(d), translation=center(domain))
    if isinstance(domain, Birkhoff):
        n = domain.n
        h = _helmert_rows(n)
        basis = np.zeros(((n - 1) * (n - 1), n * n))
        k = 0
        for i in range(n - 1):
            for j in range(n - 1):
                basis[k] = np.outer(h[i], h[j]).reshape(-1)
                k += 1
        return AffineHull(basis=basis, translation=center(domain))
    verts = vertices(domain, cap)
    basis = _gram_schmidt_basis(verts[1:] - verts[0])
    return AffineHull(basis=basis, translation=verts.mean(axis=0))


# ---------------------------------------------------------------------------
# Config-format round trip

def domain_from_dict(spec: dict) -> DomainSpec:
    """Build a domain from its config-format dict, e.g. {"tag": "birkhoff", "n": 3}."""
    if not isinstance(spec, dict) or "tag" not in spec:
        raise ConfigError(f"domain spec must be a dict with a 'tag' key, got {spec!r}")
    tag = spec["tag"]
    try:
        if tag == "ball":
            return Ball(dim=int(spec["dim"]))
        if tag == "simplex":
            return Simplex(dim=int(spec["dim"]))
        if tag == "box":
            return Box(dim=int(spec["dim"]),
                       lower=float(spec.get("lower", -1.0)),
                       upper=float(spec.get("upper", 1.0)))
        if tag == "birkhoff":
            return Birkhoff(n=int(spec["n"]))
        if tag == "permutahedron":
            return Permutahedron(dim=int(spec["dim"]))
        if tag == "signed_permutahedron":
            return SignedPermutahedron(dim=int(spec["dim"]))
        if tag == "vpolytope":
            return VPolytope(vertices=np.asarray(spec["vertices"], dtype=float))
        if tag == "curved_epigraph":
            return CurvedEpigraph(alpha=float(spec["alpha"]))
    except KeyError as e:
        raise ConfigError(f"domain spec for tag {tag!r} is missing field {e}") from e
    raise ConfigError(f"unknown domain tag {tag!r}")


def domain_to_dict(domain) -> dict:
    if isinstance(domain, Ball):
        return {"tag": "ball", "dim": domain.dim}
    if isinstance(domain, Simplex):
        return {"tag": "simplex", "dim": domain.dim}
    if isinstance(domain, Box):
        return {"tag": "box", "dim": domain.dim, "lower": domain.lower, "upper": domain.upper}
    if isinstance(domain, Birkhoff):
        return {"tag": "birkhoff", "n": domain.n}
    if isinstance(domain, Permutahedron):
        return {"tag": "permutahedron", "dim": domain.dim}
    if isinstance(domain, SignedPermutahedron):
        return {"tag": "signed_permutahedron", "dim": domain.dim}
    if isinstance(domain, VPolytope):
        return {"tag": "vpolytope", "vertices": domain.vertices.tolist()}
    if isinstance(domain, CurvedEpigraph):
        return {"tag": "curved_epigraph", "alpha": domain.alpha}
    raise ConfigError(f"unknown domain {domain!r}")
