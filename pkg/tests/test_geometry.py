"""Noise-bound geometry: membership, supports, separation, sampling, SHS."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2

from sme_lab.geometry import (
    TRUNCATED_GAUSSIAN,
    UNIFORM,
    CircumscribedPolygon,
    GeometryError,
    HPolytope,
    L2Ball,
    NoiseDistribution,
    RejectionRateError,
    ShsCatalog,
    WeightedBox,
    WeightedL1Ball,
    ball_probability,
    default_shs_catalog,
    slice_probability,
    support_from_config,
)

ALL_SHAPES = [
    WeightedBox([1.0, 1.0]),
    WeightedBox([0.5, 2.0, 1.0]),
    WeightedL1Ball([1.0, 1.0]),
    WeightedL1Ball([2.0, 3.0]),
    L2Ball(1.0, 2),
    L2Ball(2.5, 3),
    CircumscribedPolygon(4, 1.0),
    CircumscribedPolygon(16, 1.0),
    HPolytope(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]), np.ones(4)),
]


# -- membership ---------------------------------------------------------------


def test_contains_box_center_and_outside():
    box = WeightedBox([1.0, 1.0])
    assert box.contains([0.0, 0.0])
    assert not box.contains([1.0001, 0.0])
    assert box.contains([1.0, 1.0])  # closed set


def test_contains_polygon4_corner():
    # brute-force facet evaluation with the documented orientation: facet j is
    # tangent at angle 2*pi*j/4, so the 4-gon circumscribing the unit disk is
    # the axis-aligned square [-1, 1]^2 and (1, 1) is its corner
    poly = CircumscribedPolygon(4, 1.0)
    angles = 2.0 * np.pi * np.arange(4) / 4
    facets = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    w = np.array([1.0, 1.0])
    assert np.all(facets @ w <= 1.0 + 1e-12)
    assert poly.contains(w)
    assert not poly.contains([1.0 + 1e-6, 1.0])


def test_dimension_mismatch_raises():
    with pytest.raises(GeometryError):
        WeightedBox([1.0, 1.0]).contains([0.0, 0.0, 0.0])


def test_polygon_sandwich():
    # contains the inscribed disk, contained in the scaled disk
    for k in (3, 4, 7, 16):
        poly = CircumscribedPolygon(k, 1.0)
        inner = L2Ball(1.0, 2)
        outer = L2Ball(1.0 / math.cos(math.pi / k), 2)
        pts = NoiseDistribution(inner, UNIFORM, seed=k).sample(2000)
        assert poly.contains_all(pts)
        poly_pts = NoiseDistribution(poly, UNIFORM, seed=k).sample(2000)
        assert outer.contains_all(poly_pts, tol=1e-9)


# -- support function ----------------------------------------------------------


def test_support_min_box_axis():
    assert WeightedBox([1.0, 1.0]).support_min([1.0, 0.0]) == pytest.approx(-1.0)


def test_support_min_ball_any_direction():
    ball = L2Ball(1.0, 2)
    for ang in np.linspace(0, 2 * np.pi, 17):
        assert ball.support_min([np.cos(ang), np.sin(ang)]) == pytest.approx(-1.0)


def test_support_min_l1_brute_force_vertices():
    # oracle: evaluate v @ w over the four vertices of the weighted l1 ball
    body = WeightedL1Ball([2.0, 3.0])
    v = np.array([0.6, 0.8])
    vertices = np.array([[2.0, 0.0], [-2.0, 0.0], [0.0, 3.0], [0.0, -3.0]])
    oracle = float((vertices @ v).min())
    assert oracle == pytest.approx(-2.4)
    assert body.support_min(v) == pytest.approx(oracle)


def test_support_min_requires_unit_vector():
    with pytest.raises(GeometryError):
        WeightedBox([1.0]).support_min([2.0])


def test_polytope_support_matches_polygon_vertices():
    poly = CircumscribedPolygon(7, 1.3)
    generic = HPolytope(poly.G, poly.c)
    rng = np.random.default_rng(0)
    for _ in range(25):
        v = rng.normal(size=2)
        v /= np.linalg.norm(v)
        assert generic.support_min(v) == pytest.approx(poly.support_min(v), abs=1e-9)


def test_support_argmin_is_boundary_shs_pair():
    rng = np.random.default_rng(1)
    for shape in ALL_SHAPES:
        v = rng.normal(size=shape.dim)
        v /= np.linalg.norm(v)
        val, point = shape.support_argmin(v)
        assert val == pytest.approx(shape.support_min(v), abs=1e-9)
        assert shape.contains(point, tol=1e-9)
        assert float(v @ point) == pytest.approx(val, abs=1e-9)


# -- separation ----------------------------------------------------------------


def test_separate_examples():
    ball = L2Ball(1.0, 2)
    v, b = ball.separate([2.0, 0.0])
    assert np.allclose(v, [-1.0, 0.0]) and b == pytest.approx(-1.0)
    assert WeightedBox([1.0, 1.0]).separate([0.5, 0.5]) is None
    square = HPolytope(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]), np.ones(4))
    v, b = square.separate([1.5, 0.0])
    assert np.allclose(v, [-1.0, 0.0]) and b == pytest.approx(-1.0)


def test_separation_soundness_all_shapes():
    rng = np.random.default_rng(7)
    for shape in ALL_SHAPES:
        samples = NoiseDistribution(shape, UNIFORM, seed=5).sample(500)
        for _ in range(40):
            w = rng.normal(size=shape.dim) * 2.0 * shape.bounding_radius()
            cut = shape.separate(w)
            if shape.contains(w):
                assert cut is None
            else:
                v, b = cut
                assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-9)
                assert v @ w < b  # excludes the query point
                assert np.all(samples @ v >= b - 1e-9)  # keeps the body


# -- sampling --------------------------------------------------------------------


def test_uniform_box_mean_clt():
    # CLT oracle: per-coordinate sigma of U[-1,1] is 1/sqrt(3); 3 sigma / sqrt(N)
    dist = NoiseDistribution(WeightedBox([1.0, 1.0]), UNIFORM, seed=7)
    n = 100_000
    w = dist.sample(n)
    bound = 3.0 / math.sqrt(3.0) / math.sqrt(n)
    assert np.all(np.abs(w.mean(axis=0)) < bound)
    assert bound < 0.02  # comfortably inside the looser stated envelope


def test_all_samples_contained():
    for shape in ALL_SHAPES:
        for law in (UNIFORM, TRUNCATED_GAUSSIAN):
            dist = NoiseDistribution(shape, law, seed=3)
            assert shape.contains_all(dist.sample(4000))


def test_sampling_deterministic_under_seed():
    dist = NoiseDistribution(L2Ball(1.0, 3), UNIFORM, seed=11)
    assert np.array_equal(dist.sample(100), dist.sample(100))


def test_truncated_gaussian_acceptance_matches_chi2():
    # oracle: the fraction of standard normals inside a radius-3 ball in dim 4
    # is the chi-square(4) CDF at 9
    target = chi2.cdf(9.0, df=4)
    assert target == pytest.approx(0.93890, abs=1e-5)
    rng = np.random.default_rng(2)
    n = 100_000
    raw = rng.normal(size=(n, 4))
    ball = L2Ball(3.0, 4)
    emp = float((ball.violations(raw) <= 0).mean())
    assert emp == pytest.approx(target, abs=3 * math.sqrt(target * (1 - target) / n))
    # the sampler built on that acceptance works and stays inside
    w = NoiseDistribution(ball, TRUNCATED_GAUSSIAN, seed=4).sample(20_000)
    assert ball.contains_all(w)


def test_rejection_floor_raises():
    tiny = WeightedBox([0.01] * 6)
    with pytest.raises(RejectionRateError):
        NoiseDistribution(tiny, TRUNCATED_GAUSSIAN, seed=0).sample(10)


def test_empirical_cov_positive_definite():
    for shape in (WeightedBox([1.0, 1.0]), WeightedL1Ball([1.0, 1.0]), L2Ball(1.0, 2)):
        w = NoiseDistribution(shape, UNIFORM, seed=9).sample(20_000)
        eigs = np.linalg.eigvalsh(np.cov(w.T))
        assert eigs.min() > 0


def test_l1_sampler_variance_matches_analytic():
    # Var of coordinate i on the weighted l1 ball is 2 a_i^2 / ((n+1)(n+2))
    a = np.array([2.0, 3.0])
    dist = NoiseDistribution(WeightedL1Ball(a), UNIFORM, seed=13)
    w = dist.sample(200_000)
    target = 2.0 * a**2 / (3.0 * 4.0)
    assert np.allclose(w.var(axis=0), target, rtol=0.03)
    assert dist.analytic_cov_trace() == pytest.approx(target.sum())


def test_cov_trace_closed_forms():
    assert NoiseDistribution(WeightedBox([1.0, 1.0]), UNIFORM).analytic_cov_trace() == pytest.approx(2 / 3)
    assert NoiseDistribution(L2Ball(1.0, 2), UNIFORM).analytic_cov_trace() == pytest.approx(0.5)
    # no closed form for the truncated Gaussian: falls back to Monte Carlo
    tg = NoiseDistribution(L2Ball(1.0, 2), TRUNCATED_GAUSSIAN)
    assert tg.analytic_cov_trace() is None
    assert 0.0 < tg.cov_trace(n_mc=50_000) < 2.0


# -- SHS catalogs -----------------------------------------------------------------


def test_box_catalog_normals_are_axes():
    cat = default_shs_catalog(WeightedBox([1.0, 1.0]))
    assert cat.size == 4
    got = {tuple(h) for h in cat.normals}
    assert got == {(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)}
    cat.validate_against(WeightedBox([1.0, 1.0]))


def test_polygon16_catalog_has_16_entries():
    poly = CircumscribedPolygon(16, 1.0)
    cat = default_shs_catalog(poly)
    assert cat.size == 16
    cat.validate_against(poly)
    assert cat.check_compact()


def test_ball_catalog_is_continuum():
    cat = default_shs_catalog(L2Ball(1.0, 2))
    assert cat.continuum and cat.xi_hint == 1.0


def test_catalog_validation_and_compactness():
    for shape in ALL_SHAPES:
        cat = default_shs_catalog(shape)
        if cat.continuum:
            continue
        cat.validate_against(shape)
        assert cat.check_compact()
        # every half-space keeps all samples of the body
        pts = NoiseDistribution(shape, UNIFORM, seed=1).sample(2000)
        for c, h in zip(cat.points, cat.normals):
            assert np.all(pts @ h >= h @ c - 1e-9)


def test_half_catalog_not_compact():
    cat = ShsCatalog(points=[[-1.0, 0.0], [0.0, -1.0]], normals=[[1.0, 0.0], [0.0, 1.0]])
    assert not cat.check_compact()


# -- boundary-event probabilities ---------------------------------------------------


def test_slice_probability_box_facet():
    # analytic value eps / (2 a_i) = 0.05
    dist = NoiseDistribution(WeightedBox([1.0, 1.0]), UNIFORM, seed=21)
    est = slice_probability(dist, c=[1.0, 0.0], h=[-1.0, 0.0], eps=0.1, n_mc=200_000)
    assert abs(est.value - 0.05) < 3 * est.ci_half


def test_slice_probability_saturates_at_full_width():
    dist = NoiseDistribution(WeightedBox([1.0, 1.0]), UNIFORM, seed=22)
    est = slice_probability(dist, c=[1.0, 0.0], h=[-1.0, 0.0], eps=2.5, n_mc=10_000)
    assert est.value == pytest.approx(1.0)


def test_slice_probability_disk_matches_segment_area():
    # oracle: circular-segment area over pi for the unit disk
    eps = 0.1
    segment = math.acos(1 - eps) - (1 - eps) * math.sqrt(2 * eps - eps * eps)
    target = segment / math.pi
    dist = NoiseDistribution(L2Ball(1.0, 2), UNIFORM, seed=23)
    est = slice_probability(dist, c=[1.0, 0.0], h=[-1.0, 0.0], eps=eps, n_mc=400_000)
    assert abs(est.value - target) < 3 * est.ci_half


def test_slice_rejects_non_shs():
    dist = NoiseDistribution(WeightedBox([1.0, 1.0]), UNIFORM, seed=1)
    with pytest.raises(GeometryError):
        slice_probability(dist, c=[0.5, 0.0], h=[-1.0, 0.0], eps=0.1, n_mc=10)


def test_ball_probability_box_vertex():
    # oracle: quarter-disk area over box area (verified against a grid sum)
    eps = 0.2
    target = 0.25 * math.pi * eps**2 / 4.0
    xs = np.linspace(1 - eps, 1, 400)
    ys = np.linspace(1 - eps, 1, 400)
    X, Y = np.meshgrid(xs, ys)
    grid = ((X - 1) ** 2 + (Y - 1) ** 2 < eps**2).mean() * eps**2 / 4.0
    assert grid == pytest.approx(target, rel=0.02)
    dist = NoiseDistribution(WeightedBox([1.0, 1.0]), UNIFORM, seed=24)
    est = ball_probability(dist, [1.0, 1.0], eps, n_mc=400_000)
    assert abs(est.value - target) < 3 * est.ci_half


def test_ball_probability_saturates_beyond_diameter():
    dist = NoiseDistribution(WeightedBox([1.0, 1.0]), UNIFORM, seed=25)
    est = ball_probability(dist, [1.0, 1.0], eps=4.0, n_mc=5_000)
    assert est.value == pytest.approx(1.0)


def test_ball_probability_dimension_scaling():
    # doubling eps scales the probability by about 2^n on the disk
    dist = NoiseDistribution(L2Ball(1.0, 2), UNIFORM, seed=26)
    rng = np.random.default_rng(0)
    small = ball_probability(dist, [1.0, 0.0], 0.1, n_mc=800_000, rng=rng)
    large = ball_probability(dist, [1.0, 0.0], 0.2, n_mc=800_000, rng=rng)
    ratio = large.value / small.value
    rel_ci = 3 * (small.ci_half / small.value + large.ci_half / large.value)
    assert abs(ratio - 4.0) < 4.0 * rel_ci + 0.35  # boundary curvature bends it slightly


def test_slice_dominates_ball_at_matched_point():
    for shape in (WeightedBox([1.0, 1.0]), L2Ball(1.0, 2), WeightedL1Ball([1.0, 1.0])):
        dist = NoiseDistribution(shape, UNIFORM, seed=27)
        cat = default_shs_catalog(shape)
        if cat.continuum:
            c = np.array([1.0, 0.0])
            h = np.array([-1.0, 0.0])
        else:
            c, h = cat.points[0], cat.normals[0]
        for eps in (0.1, 0.3):
            ps = slice_probability(dist, c, h, eps, n_mc=100_000)
            pb = ball_probability(dist, c, eps, n_mc=100_000)
            assert ps.value >= pb.value - 3 * (ps.ci_half + pb.ci_half)


def test_eps_ball_inside_eps_slice_small():
    # fuller sweep lives in the acceptance suite
    rng = np.random.default_rng(5)
    for shape in (WeightedBox([1.0, 1.0]), L2Ball(1.0, 2), CircumscribedPolygon(8, 1.0)):
        for _ in range(50):
            v = rng.normal(size=2)
            v /= np.linalg.norm(v)
            _, w0 = shape.support_argmin(v)
            eps = float(rng.uniform(0.05, 1.0))
            pts = w0 + eps * _ball_cloud(rng, 2, 64)
            inside = pts[shape.violations(pts) <= 0]
            proj = inside @ v
            level = float(v @ w0)
            assert np.all(proj >= level - 1e-9)
            assert np.all(proj <= level + eps + 1e-9)


def _ball_cloud(rng, dim, n):
    g = rng.normal(size=(n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.uniform(size=(n, 1)) ** (1.0 / dim)


# -- property tests -----------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, len(ALL_SHAPES) - 1), st.integers(0, 2**31 - 1))
def test_support_consistency_property(shape_idx, seed):
    # support_min(v) really is a lower bound of v @ w over the body, and
    # central symmetry holds for the symmetric variants
    shape = ALL_SHAPES[shape_idx]
    rng = np.random.default_rng(seed)
    v = rng.normal(size=shape.dim)
    if np.linalg.norm(v) < 1e-9:
        v = np.ones(shape.dim)
    v /= np.linalg.norm(v)
    smin = shape.support_min(v)
    pts = NoiseDistribution(shape, UNIFORM, seed=seed % 1000).sample(256)
    assert np.all(pts @ v >= smin - 1e-9)
    if isinstance(shape, (WeightedBox, WeightedL1Ball, L2Ball)):
        # central symmetry: support_min is even, so the width is -2 * smin
        assert shape.support_min(-v) == pytest.approx(smin, abs=1e-9)
        assert shape.width_along(v) == pytest.approx(-2.0 * smin, abs=1e-9)


def test_odd_polygon_not_centrally_symmetric():
    tri = CircumscribedPolygon(3, 1.0)
    v = np.array([1.0, 0.0])
    assert tri.support_min(v) != pytest.approx(tri.support_min(-v), abs=1e-6)


# -- serialization ---------------------------------------------------------------------


def test_config_round_trip():
    for shape in ALL_SHAPES:
        clone = support_from_config(shape.to_config())
        assert type(clone) is type(shape)
        assert clone.dim == shape.dim
        rng = np.random.default_rng(0)
        for _ in range(10):
            w = rng.normal(size=shape.dim)
            assert clone.contains(w) == shape.contains(w)


def test_config_requires_dim_for_ball():
    with pytest.raises(GeometryError):
        support_from_config({"kind": "l2ball", "r": 1.0})
    ball = support_from_config({"kind": "l2ball", "r": 1.0}, dim=3)
    assert ball.dim == 3


def test_hpolytope_rejects_bad_rows():
    with pytest.raises(GeometryError):
        HPolytope(np.array([[2.0, 0.0]]), np.array([1.0]))  # non-unit normal
    with pytest.raises(GeometryError):
        HPolytope(np.array([[1.0, 0.0]]), np.array([-1.0]))  # origin outside
    from sme_lab.geometry import UnboundedSupportError

    with pytest.raises(UnboundedSupportError):
        HPolytope(np.array([[1.0, 0.0], [0.0, 1.0]]), np.ones(2))  # open quadrant
