import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from haarmult.dyadic import GridFunction
from haarmult.opnorm import (ExperimentConfig, alternating_multiplier, duality_check, even_levels_multiplier,
                             exact_opnorm_l2, family_member, fourier_weight, growth_experiment,
                             lower_bound_opnorm, self_adjoint_residual, separated_set_multiplier,
                             v1_consistency, witness_ratio)
from haarmult.spaces import SpaceParams, l2_weight
from haarmult.variation import MultiplierSequence, u_variation
from oracles import multiplier_matrix

FAST = ExperimentConfig(J=6, trials=3, iterations=40, seed=7)


def dense_oracle(m, s, J, weight):
    """Largest singular value of W T W^-1 from explicit matrices."""
    n = 2 ** J
    k = np.arange(n)
    F = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    rw = weight(J, s)
    w = np.concatenate([rw, rw[1:n - n // 2][::-1]])  # extend rfft weight to all frequencies
    W = F.conj().T @ np.diag(w) @ F
    Winv = F.conj().T @ np.diag(1 / w) @ F
    T = multiplier_matrix(m.extended(J), J)
    return float(np.linalg.svd(W @ T @ Winv, compute_uv=False)[0])


# --- exact Hilbert norm ------------------------------------------------------

def test_exact_examples():
    assert exact_opnorm_l2(MultiplierSequence([0.0]), 0.3, 6).value == 0
    assert math.isclose(exact_opnorm_l2(MultiplierSequence([1.0]), 0.0, 8).value, 1.0, rel_tol=1e-12)
    m = MultiplierSequence([0.3, -1.2, 0.7, 0.1])
    a = exact_opnorm_l2(m, 0.25, 7).value
    assert math.isclose(exact_opnorm_l2(2 * m, 0.25, 7).value, 2 * a, rel_tol=1e-12)
    with pytest.raises(MemoryError):
        exact_opnorm_l2(m, 0.0, 13)


@pytest.mark.parametrize("weight", ["tl", "sobolev"])
@pytest.mark.parametrize("s", [-0.4, 0.0, 0.35])
def test_exact_matches_dense_matrix_oracle(weight, s, rng):
    m = MultiplierSequence(rng.uniform(-1, 1, 5))
    J = 5
    fw = (lambda J, s: l2_weight(J, s)) if weight == "tl" else (lambda J, s: fourier_weight(J, s, "sobolev"))
    assert math.isclose(exact_opnorm_l2(m, s, J, weight=weight).value, dense_oracle(m, s, J, fw), rel_tol=1e-10)


def test_sparse_path_matches_dense(rng):
    m = MultiplierSequence(rng.uniform(-1, 1, 10))
    from haarmult import opnorm
    sparse = exact_opnorm_l2(m, 0.2, 10).value
    saved = opnorm.DENSE_MAX_LEVEL
    try:
        opnorm.DENSE_MAX_LEVEL = 10
        dense = exact_opnorm_l2(m, 0.2, 10).value
    finally:
        opnorm.DENSE_MAX_LEVEL = saved
    assert math.isclose(sparse, dense, rel_tol=1e-9)


def test_exact_bounded_by_sup_norm_in_l2(rng):
    """At s = 0 with the plain L^2 weight, ||T_m|| = max |m(j)| over resolved levels."""
    for _ in range(5):
        m = MultiplierSequence(rng.uniform(-2, 2, 6))
        assert math.isclose(exact_opnorm_l2(m, 0.0, 6, weight="sobolev").value, m.sup_norm, rel_tol=1e-10)


# --- lower bounds ------------------------------------------------------------

def test_lower_bound_zero_multiplier():
    rep = lower_bound_opnorm(MultiplierSequence([0.0]), SpaceParams(0.5, 1.5, 2), FAST)
    assert rep.value == 0 and rep.kind == "lower-bound"


@pytest.mark.parametrize("prm", [(0.25, 2, 2), (0.5, 1.5, 2), (0.8, 1.2, 3), (-0.3, 3, 1.5)])
def test_lower_bound_reproduced_by_witness(prm, rng):
    params = SpaceParams(*prm)
    m = MultiplierSequence(rng.uniform(-1, 1, 6))
    rep = lower_bound_opnorm(m, params, FAST)
    assert rep.witness is not None and rep.witness.J == FAST.J
    assert abs(witness_ratio(rep.witness, m, params) - rep.value) <= 1e-9


@settings(max_examples=10)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=8), st.sampled_from([-0.3, 0.0, 0.3]), st.integers(0, 50))
def test_lower_bound_below_exact(m, s, seed):
    m = MultiplierSequence(m)
    cfg = ExperimentConfig(J=5, trials=3, iterations=60, seed=seed)
    lb = lower_bound_opnorm(m, SpaceParams(s, 2, 2), cfg).value
    assert lb <= exact_opnorm_l2(m, s, 5).value + 1e-9


def test_lower_bound_close_to_exact(rng):
    cfg = ExperimentConfig(J=8, trials=4, iterations=200, seed=1)
    for s in (-0.25, 0.25):
        m = MultiplierSequence(rng.uniform(-1, 1, 8))
        lb = lower_bound_opnorm(m, SpaceParams(s, 2, 2), cfg).value
        assert lb >= 0.95 * exact_opnorm_l2(m, s, 8).value


def test_lower_bound_deterministic_and_worker_independent():
    m = alternating_multiplier(6)
    params = SpaceParams(0.5, 1.5, 2)
    a = lower_bound_opnorm(m, params, FAST)
    b = lower_bound_opnorm(m, params, FAST)
    c = lower_bound_opnorm(m, params, ExperimentConfig(J=6, trials=3, iterations=40, seed=7, workers=3))
    assert a.value == b.value == c.value
    assert np.array_equal(a.witness.samples, c.witness.samples)
    assert json.dumps(a.to_dict()) == json.dumps(c.to_dict())
    d = lower_bound_opnorm(m, params, ExperimentConfig(J=6, trials=3, iterations=40, seed=8))
    assert d.value > 0


def test_lower_bound_scales_linearly():
    params = SpaceParams(0.6, 1.5, 2)
    m = MultiplierSequence([1.0, -0.5, 0.25, 1.0])
    a = lower_bound_opnorm(m, params, FAST).value
    b = lower_bound_opnorm(3 * m, params, FAST).value
    assert math.isclose(b, 3 * a, rel_tol=1e-9)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(J=23)


# --- families and experiments ------------------------------------------------

def test_separated_set_examples():
    m = separated_set_multiplier(3, 4, 12)
    assert np.flatnonzero(m.values).tolist() == [0, 4, 8]
    assert m.sup_norm == 1
    assert u_variation(m, 1) == 2 * 3 - 1
    with pytest.raises(ValueError):
        separated_set_multiplier(4, 4, 12)


def test_family_member():
    m, level = family_member("alternating", 5, 12)
    assert m.values.tolist() == [1, -1, 1, -1, 1] and level == 5
    m, level = family_member("even", 4, 12)
    assert m.values.tolist() == [1, 0, 1, 0] and level == 4
    m, level = family_member("separated", 3, 10, sep=3)
    assert np.flatnonzero(m.values).tolist() == [0, 3, 6] and level == 10
    with pytest.raises(ValueError):
        family_member("random", 3, 10)


def test_unconditional_flatness():
    params = SpaceParams(0.25, 2, 2)
    for make in (even_levels_multiplier, alternating_multiplier):
        ratio = exact_opnorm_l2(make(12), 0.25, 12).value / exact_opnorm_l2(make(6), 0.25, 6).value
        assert 0.8 <= ratio <= 1.25
    res = growth_experiment(params, "alternating", [6, 8, 10, 12], 12, FAST)
    assert abs(res["slope"]) <= 0.05
    assert all(r["kind"] == "exact-l2" for r in res["rows"])


def test_growth_slope_scale_invariant():
    params = SpaceParams(0.25, 2, 2)
    a = growth_experiment(params, "even", [4, 6, 8], 8, FAST)
    b = growth_experiment(params, "even", [4, 6, 8], 8, FAST, scale=5.0)
    assert math.isclose(a["slope"], b["slope"], rel_tol=1e-9, abs_tol=1e-12)
    assert a["reference_slope"] == 0.25 - 0.5


def test_growth_conditional_range_reports_positive_slope():
    params = SpaceParams(0.8, 1.2, 3)
    cfg = ExperimentConfig(trials=5, iterations=60, seed=0, coords_per_step=2, random_coords=1,
                           steps=(1.0, 0.25, 0.0625))
    res = growth_experiment(params, "alternating", [4, 6, 8], 8, cfg)
    assert res["slope"] > 0
    assert all(r["kind"] == "lower-bound" and r["seed"] == 0 for r in res["rows"])


def test_duality():
    m = MultiplierSequence([1.0])
    cfg = ExperimentConfig(J=8, trials=2, iterations=20, seed=0)
    rep = duality_check(m, SpaceParams(0.5, 2, 2), cfg)
    assert math.isfinite(rep["primal_value"]) and math.isfinite(rep["dual_value"])
    assert rep["self_adjoint_residual"] <= 1e-12
    m = MultiplierSequence(np.random.default_rng(3).uniform(-1, 1, 8))
    rep = duality_check(m, SpaceParams(0.3, 2, 2), cfg)
    assert abs(rep["primal_exact"] - rep["dual_exact"]) <= 1e-6
    with pytest.raises(ValueError):
        duality_check(m, SpaceParams(0.3, 1.0, 2), cfg)


def test_self_adjoint_residual(rng):
    assert self_adjoint_residual(MultiplierSequence(rng.standard_normal(12)), 10, seed=2) <= 1e-12


def test_v1_consistency():
    cfg = ExperimentConfig(J=8, trials=2, iterations=20, seed=0)
    params = SpaceParams(0.0, 2, 2)
    rep = v1_consistency(MultiplierSequence([1.0]), params, cfg)
    assert rep["ratio"] <= 1 + 1e-9
    m = MultiplierSequence([0.2, -0.7, 1.0, 0.4])
    a = v1_consistency(m, params, cfg)["ratio"]
    b = v1_consistency(-4 * m, params, cfg)["ratio"]
    assert math.isclose(a, b, rel_tol=1e-9)
    with pytest.raises(ValueError):
        v1_consistency(m, SpaceParams(1.5, 2, 2), cfg)


@pytest.mark.parametrize("K", [2, 4, 8])
def test_staircase_slack(K):
    m = MultiplierSequence(np.arange(K + 1) / K)
    measured = exact_opnorm_l2(m, 0.0, 8, weight="sobolev").value
    assert measured <= m.sup_norm + 1e-9
    rep = v1_consistency(m, SpaceParams(0.0, 2, 2), ExperimentConfig(J=8))
    assert rep["v1_bound"] == pytest.approx(2.0)
    assert rep["ratio"] <= 1


def test_report_serialization():
    rep = lower_bound_opnorm(alternating_multiplier(6), SpaceParams(0.5, 1.5, 2), FAST)
    d = rep.to_dict()
    assert json.loads(json.dumps(d)) == d
    assert len(d["witness"]) == 64
    assert "witness" not in rep.to_dict(with_witness=False)
    assert GridFunction(d["witness"]).J == 6
