"""Geometry constants and bound calculators against exhaustive and closed-form oracles."""

import math

import numpy as np
import pytest

from polyregret import analysis, domains
from polyregret.analysis import (
    BoundParams,
    bound_adversarial,
    bound_iid,
    curvature_integral,
    diameter,
    geometry_report,
    max_distance_from,
    suboptimality_gaps,
    theta_lower_bound,
    width,
    width_along,
    width_lower_bound_variance,
)
from polyregret.domains import (
    Ball,
    Birkhoff,
    Box,
    Permutahedron,
    SignedPermutahedron,
    Simplex,
    VPolytope,
    affine_decomposition,
    vertices,
)
from polyregret.errors import ConfigError, DegenerateGapError


def pairwise_diameter_scan(domain):
    V = vertices(domain)
    best = 0.0
    for i in range(len(V)):
        best = max(best, float(np.linalg.norm(V[i + 1:] - V[i], axis=1).max(initial=0.0)))
    return best


def width_sweep_2d(domain, n_angles=200_000):
    """Fine direction sweep inside a 2-dimensional hull."""
    hull = affine_decomposition(domain)
    assert hull.dim == 2
    Vu = (vertices(domain) - hull.translation) @ hull.basis.T
    theta = np.linspace(0.0, math.pi, n_angles, endpoint=False)
    L = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    vals = L @ Vu.T
    return float((vals.max(axis=1) - vals.min(axis=1)).min())


# ---------------------------------------------------------------------------
# Diameters

def test_diameter_closed_forms():
    assert diameter(Simplex(7)) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert diameter(Birkhoff(4)) == pytest.approx(math.sqrt(8), abs=1e-12)
    assert diameter(Permutahedron(3)) == pytest.approx(math.sqrt(8), abs=1e-12)
    assert diameter(Ball(9)) == 2.0


@pytest.mark.parametrize("domain", [
    Simplex(2), Simplex(4), Simplex(6),
    Box(2), Box(3), Box(4, lower=-0.5, upper=1.5),
    Birkhoff(2), Birkhoff(3), Birkhoff(4),
    Permutahedron(2), Permutahedron(3), Permutahedron(4), Permutahedron(5),
    SignedPermutahedron(2), SignedPermutahedron(3), SignedPermutahedron(4),
], ids=lambda d: type(d).__name__ + str(getattr(d, "dim", getattr(d, "n", ""))))
def test_diameter_matches_exhaustive_scan(domain):
    assert diameter(domain) == pytest.approx(pairwise_diameter_scan(domain), abs=1e-9)


def test_diameter_vpolytope():
    V = np.array([[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]])
    assert diameter(VPolytope(V)) == pytest.approx(5.0)


def test_max_distance_from():
    assert max_distance_from(Ball(3), np.zeros(3)) == pytest.approx(1.0)
    assert max_distance_from(Box(5), np.zeros(5)) == pytest.approx(math.sqrt(5))
    assert max_distance_from(Simplex(3), np.full(3, 1 / 3)) == pytest.approx(
        math.sqrt((2 / 3) ** 2 + 2 * (1 / 3) ** 2))


# ---------------------------------------------------------------------------
# Widths

def test_width_along_examples():
    e1 = np.zeros(3)
    e1[0] = 1.0
    assert width_along(Box(3), e1) == pytest.approx(2.0, abs=1e-12)
    ell = np.array([1.0, -1.0, 0.0]) / math.sqrt(2)
    # scan oracle over the 3 simplex vertices: values (1, -1, 0)/sqrt(2)
    V = vertices(Simplex(3))
    oracle = (V @ ell).max() - (V @ ell).min()
    assert oracle == pytest.approx(math.sqrt(2))
    assert width_along(Simplex(3), ell) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert width_along(Simplex(3), -ell) == pytest.approx(width_along(Simplex(3), ell))
    assert width_along(Ball(4), np.array([0, 0, 1, 0.0])) == 2.0


def test_width_along_rejects_non_unit():
    with pytest.raises(ConfigError):
        width_along(Box(2), np.array([1.0, 1.0]))


def test_width_closed_forms():
    assert width(Box(3))[0] == pytest.approx(2.0, abs=1e-12)
    assert width(Box(4, lower=0.0, upper=0.5))[0] == pytest.approx(0.5, abs=1e-12)
    assert width(Simplex(4))[0] == pytest.approx(1.0, abs=1e-12)
    # odd-dimensional simplex closed form
    w3 = width(Simplex(3))[0]
    assert w3 == pytest.approx(math.sqrt(6) / 2, abs=1e-12)


def test_width_direction_attains_value():
    for dom in [Box(3), Simplex(4), Simplex(5), Permutahedron(3), Birkhoff(3),
                SignedPermutahedron(2)]:
        w, ell = width(dom, restarts=16, seed=1)
        assert np.linalg.norm(ell) == pytest.approx(1.0, abs=1e-9)
        assert width_along(dom, ell / np.linalg.norm(ell)) == pytest.approx(w, rel=1e-9)


def test_width_numeric_matches_fine_sweep_2d():
    # triangle and hexagon hulls are planar: sweep is an independent oracle
    sweep_simplex = width_sweep_2d(Simplex(3))
    assert sweep_simplex == pytest.approx(math.sqrt(6) / 2, rel=1e-6)
    w, _ = width(Simplex(3), restarts=16, seed=0)
    assert abs(w - sweep_simplex) <= 0.01 * sweep_simplex

    sweep_perm = width_sweep_2d(Permutahedron(3))
    assert sweep_perm == pytest.approx(math.sqrt(6), rel=1e-6)
    w, _ = width(Permutahedron(3), restarts=16, seed=0)
    assert abs(w - sweep_perm) <= 0.01 * sweep_perm


def test_width_at_most_width_along_random_directions():
    rng = np.random.default_rng(31)
    for dom in [Box(3), Simplex(4), Permutahedron(3), Birkhoff(3)]:
        hull = affine_decomposition(dom)
        w, _ = width(dom, restarts=16, seed=2)
        for _ in range(1000):
            l = rng.standard_normal(hull.dim) @ hull.basis
            l /= np.linalg.norm(l)
            assert w <= width_along(dom, l) + 1e-9


def test_width_variance_lower_bounds():
    assert width_lower_bound_variance(Birkhoff(2)) == pytest.approx(2.0)
    # the 1-dimensional Birkhoff{2} hull is a segment of length 2: the bound is tight
    assert width(Birkhoff(2))[0] == pytest.approx(2.0, abs=1e-12)
    assert width_lower_bound_variance(Birkhoff(5)) == pytest.approx(1.0)
    assert width_lower_bound_variance(Permutahedron(3)) == pytest.approx(2.0)
    assert width_lower_bound_variance(SignedPermutahedron(3)) == pytest.approx(
        2.0 * math.sqrt(4 * 7 / 6.0))
    with pytest.raises(ConfigError):
        width_lower_bound_variance(Box(3))


def test_width_variance_moment_oracle_permutahedron():
    # exact moments by enumerating all 3! vertices: Var(l.v) for zero-sum unit l
    V = vertices(Permutahedron(3))
    hull = affine_decomposition(Permutahedron(3))
    rng = np.random.default_rng(5)
    d = 3
    expect_var = d * (d + 1) / 12.0
    for _ in range(20):
        l = rng.standard_normal(hull.dim) @ hull.basis
        l /= np.linalg.norm(l)
        vals = V @ l
        assert np.var(vals) == pytest.approx(expect_var, rel=1e-9)
    # the paper's printed constant exceeds the true hexagon width; the corrected
    # moment bound stays below it
    printed = math.sqrt((5 * d ** 2 + 8 * d + 4) / 6.0)
    true_width = width_sweep_2d(Permutahedron(3))
    assert printed > true_width
    assert width_lower_bound_variance(Permutahedron(3)) <= true_width + 1e-9


@pytest.mark.parametrize("domain", [
    Birkhoff(2), Birkhoff(3), Birkhoff(4),
    Permutahedron(2), Permutahedron(3), Permutahedron(4), Permutahedron(5),
    SignedPermutahedron(2), SignedPermutahedron(3), SignedPermutahedron(4),
], ids=lambda d: type(d).__name__ + str(getattr(d, "dim", getattr(d, "n", ""))))
def test_numeric_width_dominates_variance_bound(domain):
    w, _ = width(domain, restarts=32, seed=3)
    assert w >= width_lower_bound_variance(domain) - 1e-9


# ---------------------------------------------------------------------------
# Gaps

def test_gaps_simplex_example():
    rep = suboptimality_gaps(Simplex(3), np.array([0.0, 0.5, 1.0]))
    assert rep.optimal_vertices == (0,)
    assert rep.gap_min == pytest.approx(0.5)
    assert rep.gap_max == pytest.approx(1.0)


def test_gaps_box_example():
    # oracle: enumerate the 4 vertices; costs -3, -1, 1, 3
    a = np.array([1.0, 2.0])
    V = vertices(Box(2))
    costs = sorted(V @ a)
    assert costs == [-3.0, -1.0, 1.0, 3.0]
    rep = suboptimality_gaps(Box(2), a)
    assert rep.gap_min == pytest.approx(2.0)
    assert rep.gap_max == pytest.approx(6.0)


def test_gaps_degenerate_marker():
    with pytest.raises(DegenerateGapError):
        suboptimality_gaps(Simplex(3), np.ones(3))


def test_gaps_definitional_invariant():
    rng = np.random.default_rng(13)
    for dom in [Simplex(5), Box(3), Permutahedron(3)]:
        V = vertices(dom)
        a = rng.standard_normal(domains.ambient_dim(dom))
        rep = suboptimality_gaps(dom, a)
        v1 = V[rep.optimal_vertices[0]]
        for i, v in enumerate(V):
            if i not in rep.optimal_vertices:
                assert a @ (v - v1) >= rep.gap_min - 1e-12
        assert rep.gap_min <= rep.gap_max + 1e-15


# ---------------------------------------------------------------------------
# Theta lower bound

def test_theta_examples():
    assert theta_lower_bound(1.0, 1.0, 1.0) == pytest.approx(-0.75)
    assert theta_lower_bound(1.0, 1.0, 1e12) == pytest.approx(-0.5, abs=1e-12)
    assert theta_lower_bound(3.0, 1.0, 1.0) == pytest.approx(0.5 / 10 - 1.0)


def test_theta_range_invariant():
    rng = np.random.default_rng(17)
    for _ in range(500):
        D, na, g = np.exp(rng.uniform(-3, 3, size=3))
        v = theta_lower_bound(D, na, g)
        assert -1.0 < v <= -0.5
    with pytest.raises(ConfigError):
        theta_lower_bound(0.0, 1.0, 1.0)


# ---------------------------------------------------------------------------
# Bound calculators

def test_bound_adversarial_examples():
    assert bound_adversarial("thm1_tuned", {"L": 1, "D": 2, "N": 100}) == pytest.approx(60.0)
    assert bound_adversarial("worstcase2", {"L_inf": 1, "D": 2, "W": 2, "N": 100}) == pytest.approx(30.0)
    # eta = ||X|| / 2L reproduces L D + 2 L ||X|| sqrt(N) exactly
    L, D, nx, N = 1.3, 2.0, 1.7, 400
    got = bound_adversarial("thm1", {"L": L, "D": D, "norm_X": nx, "eta": nx / (2 * L), "N": N})
    assert got == pytest.approx(L * D + 2 * L * nx * math.sqrt(N), rel=1e-12)
    assert bound_adversarial("hedge_lifted", {"L_inf": 2.0, "V": math.e, "N": 9}) == pytest.approx(6.0)


def test_bound_adversarial_missing_constant_named():
    with pytest.raises(ConfigError) as e:
        bound_adversarial("thm1", {"L": 1, "D": 2, "eta": 1, "N": 10})
    assert "norm_X" in str(e.value)


def test_bound_iid_ball_examples():
    assert bound_iid("ball_tuned", {"L": 1, "R": 0, "norm_a": 1}) == pytest.approx(20.0)
    # the tuned display dominates the general bound at eta = 1/2L (strictly)
    for L, R, na in [(1.0, 0.0, 1.0), (1.0, 0.5, 0.5), (2.0, 1.0, 0.3)]:
        general = bound_iid("ball", {"L": L, "R": R, "norm_a": na, "eta": 1 / (2 * L)})
        tuned = bound_iid("ball_tuned", {"L": L, "R": R, "norm_a": na})
        assert general <= tuned + 1e-12
        assert general < tuned  # the perfect-square enlargement is strict


def test_bound_iid_polytope_tuned_example():
    consts = {"L": 1.0, "R": 2.0, "D": math.sqrt(2), "gap_min": 0.5}
    v1 = bound_iid("polytope_tuned", consts)
    assert math.isfinite(v1) and v1 > 0
    v2 = bound_iid("polytope_tuned", {**consts, "gap_min": 1.0})
    assert v2 < v1
    # restated constant 1/3 gives the strictly smaller printed variant
    assert bound_iid("polytope_tuned_restated", consts) < v1


def test_bound_iid_polytope_general():
    consts = {"L": 1.0, "R": 0.5, "D": 2.0, "norm_P": 2.0, "gap_min": 0.4,
              "gap_max": 1.5, "eta": 1.0, "alpha": 10.0}
    v = bound_iid("polytope_general", consts)
    assert math.isfinite(v) and v > 0
    # R = 0 drops the concentration tail cleanly
    v0 = bound_iid("polytope_general", {**consts, "R": 0.0})
    assert math.isfinite(v0) and v0 > 0
    with pytest.raises(ConfigError):
        bound_iid("polytope_general", {**consts, "alpha": 2.0})
    with pytest.raises(DegenerateGapError):
        bound_iid("polytope_general", {**consts, "gap_min": 0.0})


def test_bound_iid_intrinsic_tuned():
    v = bound_iid("intrinsic_tuned", {"L_inf": 1.0, "R_inf": 0.5, "D": 2.0, "W": 1.0,
                                      "gap_min": 0.3})
    assert math.isfinite(v) and v > 0


def _feasible_constants(rng):
    L = rng.uniform(0.5, 2.0)
    D = rng.uniform(0.5, 3.0)
    R = rng.uniform(0.0, 2.0 * L)
    gap_min = rng.uniform(0.05, 0.9) * L * D
    gap_max = rng.uniform(gap_min, L * D)
    W = rng.uniform(0.2, 1.0) * D
    norm_a = rng.uniform(0.1, L)
    return {
        "L": L, "R": R, "D": D, "norm_P": rng.uniform(D / 2, D),
        "gap_min": gap_min, "gap_max": gap_max, "W": W, "norm_a": norm_a,
        "L_inf": rng.uniform(0.5, 2.0), "R_inf": rng.uniform(0.0, 1.0),
        "eta": rng.uniform(0.2, 1.5) / L, "alpha": rng.uniform(3.0, 12.0),
        "norm_X": rng.uniform(D / 2, D), "N": rng.integers(10, 10_000), "V": 64,
    }


@pytest.mark.parametrize("kind,up_keys,down_keys", [
    ("thm1", ["L", "D"], []),
    ("thm1_tuned", ["L", "D"], []),
    ("worstcase2", ["L_inf", "D"], ["W"]),
    ("hedge_lifted", ["L_inf"], []),
    ("ball", ["L", "R"], ["norm_a"]),
    ("ball_tuned", ["L", "R"], ["norm_a"]),
    ("polytope_tuned", ["L", "R", "D"], ["gap_min"]),
    ("intrinsic_tuned", ["L_inf", "R_inf", "D"], ["W", "gap_min"]),
    ("polytope_general", ["L", "R"], ["gap_min", "gap_max"]),
])
def test_bound_monotonicity(kind, up_keys, down_keys):
    rng = np.random.default_rng(hash(kind) % 2 ** 32)
    evaluate = bound_adversarial if kind in analysis.ADVERSARIAL_KINDS else bound_iid
    for _ in range(50):
        consts = _feasible_constants(rng)
        base = evaluate(kind, consts)
        for key in up_keys:
            bumped = evaluate(kind, {**consts, key: consts[key] * 1.1})
            assert bumped >= base - 1e-9, (kind, key)
        for key in down_keys:
            shrunk = evaluate(kind, {**consts, key: consts[key] * 0.9})
            assert shrunk >= base - 1e-9, (kind, key)


def test_bound_params_validation():
    with pytest.raises(ConfigError):
        BoundParams(alpha=2.9, eta=1.0)
    assert BoundParams(alpha=3.0, eta=1.0).beta == pytest.approx(0.0)
    assert BoundParams(alpha=10.0, eta=1.0).beta == pytest.approx(1 / 3 - 1 / 10)


# ---------------------------------------------------------------------------
# Curvature integral

def test_curvature_power_converges():
    # closed-form antiderivative: ((alpha-1)/alpha^2) eps^(2-alpha) / (2-alpha)
    res = curvature_integral(alpha=1.5, epsilon=1.0)
    assert not res.diverges
    assert res.value == pytest.approx(4.0 / 9.0, abs=1e-9)
    res = curvature_integral(alpha=1.8, epsilon=0.5)
    expect = (0.8 / 1.8 ** 2) * 0.5 ** 0.2 / 0.2
    assert res.value == pytest.approx(expect, abs=1e-9)


@pytest.mark.parametrize("alpha,rate", [(2.0, "logarithmic"), (3.0, "polynomial"),
                                        (4.0, "polynomial")])
def test_curvature_power_diverges(alpha, rate):
    res = curvature_integral(alpha=alpha, epsilon=1.0)
    assert res.diverges
    assert res.rate == rate
    assert res.value is None


def test_curvature_general_callable_matches_power():
    F = (lambda x: x ** 1.5, lambda x: 1.5 * x ** 0.5, lambda x: 0.75 / x ** 0.5)
    res = curvature_integral(F=F, epsilon=1.0)
    assert res.value == pytest.approx(4.0 / 9.0, abs=1e-6)
    Fq = (lambda x: x ** 2, lambda x: 2 * x, lambda x: 2.0)
    assert curvature_integral(F=Fq, epsilon=1.0).diverges


def test_curvature_rejects_bad_args():
    with pytest.raises(ConfigError):
        curvature_integral(alpha=1.0)
    with pytest.raises(ConfigError):
        curvature_integral()
    with pytest.raises(ConfigError):
        curvature_integral(alpha=1.5, F=(abs, abs, abs))


# ---------------------------------------------------------------------------
# Geometry report

def test_geometry_report_simplex():
    rep = geometry_report(Simplex(3), mean=np.array([0.0, 0.5, 1.0]), restarts=8)
    assert rep.diameter == pytest.approx(math.sqrt(2))
    assert rep.width == pytest.approx(math.sqrt(6) / 2)
    assert rep.hull.dim == 2
    assert rep.gaps.gap_min == pytest.approx(0.5)
    assert 0.0 < rep.width <= rep.diameter
    d = rep.to_dict()
    assert d["hull_dim"] == 2 and d["gap_max"] == pytest.approx(1.0)


def test_geometry_report_ball():
    rep = geometry_report(Ball(4))
    assert rep.diameter == 2.0 and rep.width == 2.0
    assert rep.norm_base == pytest.approx(1.0)
