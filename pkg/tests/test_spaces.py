import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from haarmult.dyadic import GridFunction
from haarmult.spaces import (Region, SpaceParams, classify_record, critical_u, dual_params, frequency_partition,
                             in_quad, in_triangle_Tq, is_schauder, is_unconditional, l2_weight, low_q_triangle,
                             low_q_vertices, region_classify, region_diagram, tl_norm, tl_norm_and_gradient,
                             triangle_Tq_vertices)
from oracles import theta, tl_norm_bruteforce

params_strategy = st.builds(SpaceParams, st.floats(-1, 1.5), st.floats(0.3, 6), st.floats(0.3, 6))


def test_space_params_validation():
    for bad in ((0, 0, 2), (0, 2, -1), (math.nan, 2, 2), (0, math.inf, 2)):
        with pytest.raises(ValueError):
            SpaceParams(*bad)


# --- windows -----------------------------------------------------------------

@pytest.mark.parametrize("J", [0, 1, 2, 5, 10])
def test_partition_of_unity(J):
    part = frequency_partition(J)
    assert np.max(np.abs(part.windows.sum(axis=0) - 1)) <= 1e-12


def test_window_supports():
    part = frequency_partition(10)
    xi = part.xi
    assert np.all(part.windows[0][xi > 2] == 0)
    for k in range(1, part.K):
        outside = (xi < 2 ** (k - 1)) | (xi > 2 ** (k + 1))
        assert np.all(part.windows[k][outside] == 0)
    assert np.all(part.windows >= -1e-15)


def test_windows_match_profile_oracle():
    part = frequency_partition(8)
    assert np.allclose(part.windows[0], theta(part.xi), atol=1e-15)
    assert np.allclose(part.windows[3], theta(part.xi / 8) - theta(part.xi / 4), atol=1e-15)


# --- norm --------------------------------------------------------------------

@pytest.mark.parametrize("c", [0.0, 1.0, -3.5])
@pytest.mark.parametrize("prm", [(0.3, 2, 2), (-0.5, 1.2, 3), (0.9, 0.7, 0.8)])
def test_constant_norm(c, prm):
    assert math.isclose(tl_norm(GridFunction(np.full(64, c)), SpaceParams(*prm)), abs(c), rel_tol=1e-12, abs_tol=1e-15)


@given(params_strategy, st.integers(0, 1000), st.integers(1, 6))
def test_matches_dft_matrix_oracle(params, seed, J):
    x = np.random.default_rng(seed).standard_normal(2 ** J)
    got = tl_norm(GridFunction(x), params)
    assert math.isclose(got, tl_norm_bruteforce(x, params.s, params.p, params.q), rel_tol=1e-9)


@given(params_strategy, st.floats(-10, 10), st.integers(0, 1000))
def test_homogeneity(params, c, seed):
    f = GridFunction(np.random.default_rng(seed).standard_normal(32))
    assert math.isclose(tl_norm(c * f, params), abs(c) * tl_norm(f, params), rel_tol=1e-10, abs_tol=1e-12)


@given(params_strategy, st.integers(0, 1000))
def test_quasi_triangle(params, seed):
    rng = np.random.default_rng(seed)
    f, g = GridFunction(rng.standard_normal(64)), GridFunction(rng.standard_normal(64))
    const = max(1, 2 ** (1 / params.p - 1)) * max(1, 2 ** (1 / params.q - 1))
    assert tl_norm(f + g, params) <= const * (tl_norm(f, params) + tl_norm(g, params)) * (1 + 1e-12)


def test_l2_equivalence(rng):
    """At (0, 2, 2) the norm has Fourier weight sqrt(sum_k phi_k^2), which is
    exactly 1 at |xi| <= 1 and at powers of two, and lies in [1/sqrt 2, 1] elsewhere."""
    params = SpaceParams(0, 2, 2)
    J, n = 10, 1024
    x = (np.arange(n) + 0.5) / n
    for freqs in ([1], [2, 4, 8], [16, 64, 256, 512]):
        f = sum(rng.standard_normal() * np.cos(2 * np.pi * k * x + rng.random()) for k in freqs) + rng.standard_normal()
        assert math.isclose(tl_norm(GridFunction(f), params), np.sqrt(np.mean(f ** 2)), rel_tol=0.01)
    w = l2_weight(J, 0.0)
    assert np.all(w <= 1 + 1e-12) and np.all(w >= 1 / np.sqrt(2) - 1e-12)
    for _ in range(20):
        f = rng.standard_normal(n)
        ratio = tl_norm(GridFunction(f), params) / np.sqrt(np.mean(f ** 2))
        assert 1 / np.sqrt(2) - 1e-12 <= ratio <= 1 + 1e-12


def test_l2_weight_realizes_norm(rng):
    for s in (-0.7, 0.0, 0.4):
        x = rng.standard_normal(256)
        w = l2_weight(8, s)
        weighted = np.fft.irfft(w * np.fft.rfft(x), n=256)
        assert math.isclose(tl_norm(GridFunction(x), SpaceParams(s, 2, 2)), np.sqrt(np.mean(weighted ** 2)), rel_tol=1e-12)


def test_gradient_matches_finite_differences(rng):
    for prm in ((0.4, 1.5, 3.0), (0.2, 2, 2), (-0.3, 3, 1.5)):
        params = SpaceParams(*prm)
        x = rng.standard_normal(32)
        value, grad = tl_norm_and_gradient(x, params)
        assert math.isclose(value, tl_norm(GridFunction(x), params), rel_tol=1e-12)
        h = 1e-6
        fd = np.array([(tl_norm(GridFunction(x + h * e), params) - tl_norm(GridFunction(x - h * e), params)) / (2 * h)
                       for e in np.eye(32)])
        assert np.allclose(grad, fd, rtol=1e-5, atol=1e-8)


def test_haar_norm_slope_in_easy_case():
    J = 14
    params = SpaceParams(0.3, 2, 2)
    js = np.arange(2, J - 2)
    norms = [tl_norm(GridFunction.haar(int(j), 0, J), params) for j in js]
    slope = np.polyfit(js, np.log2(norms), 1)[0]
    assert abs(slope - (0.3 - 0.5)) <= 0.1


# --- duality -----------------------------------------------------------------

def test_dual_examples():
    assert dual_params(SpaceParams(0.5, 2, 2)) == SpaceParams(-0.5, 2, 2)
    assert dual_params(SpaceParams(0.75, 1.5, 3)) == SpaceParams(-0.75, 3, 1.5)
    with pytest.raises(ValueError):
        dual_params(SpaceParams(0.2, 1, 2))


@given(st.floats(-2, 2), st.floats(1.05, 20), st.floats(1.05, 20))
def test_dual_is_involution(s, p, q):
    back = dual_params(dual_params(SpaceParams(s, p, q)))
    assert math.isclose(back.s, s) and math.isclose(back.p, p, rel_tol=1e-9) and math.isclose(back.q, q, rel_tol=1e-9)


# --- regions -----------------------------------------------------------------

def test_classify_examples():
    assert region_classify(SpaceParams(0.25, 2, 2)) is Region.UNCONDITIONAL
    assert region_classify(SpaceParams(0.75, 1.2, 2)) is Region.SCHAUDER_ONLY
    assert region_classify(SpaceParams(0.25, 0.8, 3)) is Region.SCHAUDER_ENDPOINT
    assert region_classify(SpaceParams(1.2, 0.5, 2)) is Region.OUTSIDE
    assert region_classify(SpaceParams(0.6, 2, 2)) is Region.OUTSIDE


def test_triangle_examples():
    assert in_triangle_Tq(SpaceParams(0.8, 1 / 0.833, 3))
    assert not in_triangle_Tq(SpaceParams(1.0, 1.0, 3))
    assert not in_triangle_Tq(SpaceParams(0.45, 1 / 0.4, 2))
    with pytest.raises(ValueError):
        in_triangle_Tq(SpaceParams(0.5, 2, 1))
    assert triangle_Tq_vertices(2) == ((1, 1), (0.5, 0.5), (1.5, 0.5))


def test_quad_and_threshold_examples():
    assert in_quad(SpaceParams(0.6, 1.5, 2))
    assert not in_quad(SpaceParams(0.4, 2, 2))
    assert critical_u(SpaceParams(0.75, 2, 2)) == 4.0
    assert critical_u(SpaceParams(0.5, 2, 2)) == math.inf
    assert critical_u(SpaceParams(0.8, 1.2, 3)) == 1 / (0.8 - 1 / 3)


def test_low_q_examples():
    q = 0.8
    inside, _ = low_q_triangle(SpaceParams(1 / q - 1, 1.0, q))
    assert not inside
    custom = ((0, 0), (2, 0), (0, 2))
    assert low_q_triangle(SpaceParams(0.5, 2, q), vertices=custom)[0]
    _, thr = low_q_triangle(SpaceParams(1 / q - 1 - 0.5, 1.0, q))
    assert math.isclose(thr, 2.0)
    assert low_q_vertices(0.8) == ((0.0, -1.0), (1.25, 0.25), (0.25, 0.25))
    with pytest.raises(ValueError):
        low_q_triangle(SpaceParams(0, 1, 0.5))
    with pytest.raises(ValueError):
        low_q_triangle(SpaceParams(0, 1, 1.5))


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_region_grid_consistency(q):
    xs = np.linspace(0.005, 1.995, 80)
    ss = np.linspace(-1.2, 1.3, 80)
    for x in xs:
        for s in ss:
            prm = SpaceParams(s, 1 / x, q)
            unc = max(x - 1, 1 / q - 1) < s < min(x, 1 / q, 1)
            sch = x - 1 < s < min(x, 1)
            assert is_unconditional(prm) == unc and is_schauder(prm) == sch
            if in_triangle_Tq(prm) and x <= 1:
                assert in_quad(prm)
            if unc:
                assert sch


def test_classify_record_is_json_ready():
    import json
    rec = classify_record(SpaceParams(0.8, 1.2, 3))
    assert json.loads(json.dumps(rec)) == rec
    assert rec["region"] == "SchauderOnly" and rec["in_Tq"] and rec["in_quad"]
    assert math.isclose(rec["critical_u"], 1 / (0.8 - 1 / 3))


def test_diagram_vertices():
    regions = {r["label"]: r for r in region_diagram(2.0)}
    assert regions["T_q"]["vertices"] == [(1.0, 1.0), (0.5, 0.5), (1.5, 0.5)]
    assert [tuple(v) for v in regions["schauder_endpoint"]["vertices"]] == [(1.0, 0.0), (2.0, 1.0)]
    unc = [tuple(v) for v in regions["unconditional"]["vertices"]]
    for v in [(0.0, 0.0), (0.5, 0.5), (1.5, 0.5), (0.5, -0.5), (0.0, -0.5)]:
        assert v in unc
    low = {r["label"]: r for r in region_diagram(0.8)}
    assert "low_q_triangle" in low and "T_q" not in low


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_diagram_points_lie_on_polygon_edges(q):
    for reg in region_diagram(q, resolution=8):
        verts = np.array(reg["vertices"], dtype=float)
        pts = np.array(reg["points"], dtype=float)
        for v in verts:
            assert np.min(np.linalg.norm(pts - v, axis=1)) < 1e-12
