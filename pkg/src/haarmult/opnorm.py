"""Operator-norm experiments for Haar multipliers on the discrete spaces.

Two estimators:

* ``exact_opnorm_l2``: largest singular value of W T_m W^-1 for a Fourier
  weight W.  The default weight reproduces ``tl_norm`` at p = q = 2 exactly;
  ``weight="sobolev"`` uses (1 + |xi|^2)^(s/2) instead, whose inverse is the
  weight for -s, which makes the duality s <-> -s exact.
* ``lower_bound_opnorm``: best ratio ||T_m f|| / ||f|| found by restarts
  plus greedy coordinate ascent on Haar coefficients, for any (s, p, q).
  Any witness gives a valid lower bound.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.sparse.linalg as spla

from .dyadic import (GridFunction, MAX_LEVEL, apply_multiplier_array, haar_analysis_array,
                     haar_synthesis_array, v1_bound)
from .spaces import (Region, SpaceParams, dual_params, frequency_partition, l2_weight,
                     norm_from_blocks, region_classify, tl_norm, tl_norm_and_gradient, tl_norm_array)
from .variation import MultiplierSequence, u_variation

logger = logging.getLogger(__name__)

EXACT_MAX_LEVEL = 12
DENSE_MAX_LEVEL = 9


@dataclass
class ExperimentConfig:
    J: int = 8
    trials: int = 32
    iterations: int = 200
    seed: int = 0
    coords_per_step: int = 8
    random_coords: int = 4
    steps: tuple = (1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125)
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.J <= MAX_LEVEL:
            raise ValueError(f"J={self.J} outside [0, {MAX_LEVEL}]")


@dataclass
class OpNormReport:
    params: SpaceParams
    m: MultiplierSequence
    J: int
    value: float
    kind: str
    witness: GridFunction | None = None
    trials: int = 0
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, with_witness: bool = True) -> dict:
        out = {
            "params": self.params.as_dict(),
            "m": self.m.to_dict(),
            "J": self.J,
            "value": self.value,
            "kind": self.kind,
            "trials": self.trials,
            "seed": self.seed,
        }
        if with_witness and self.witness is not None:
            out["witness"] = self.witness.samples.tolist()
        out.update(self.extra)
        return out


# ---------------------------------------------------------------------------
# Hilbert case


def sobolev_weight(J: int, s: float) -> np.ndarray:
    """(1 + xi^2)^(s/2) on the rfft frequencies of a 2^J grid."""
    xi = np.arange(2 ** J // 2 + 1, dtype=float)
    return (1.0 + xi * xi) ** (0.5 * s)


def fourier_weight(J: int, s: float, weight: str = "tl") -> np.ndarray:
    """"tl": the weight realizing tl_norm at p = q = 2; "sobolev": (1+xi^2)^(s/2)."""
    if weight == "tl":
        return l2_weight(J, s)
    if weight == "sobolev":
        return sobolev_weight(J, s)
    raise ValueError(f"unknown weight {weight!r}")


def _weighted(x: np.ndarray, weight: np.ndarray) -> np.ndarray:
    return np.fft.irfft(weight * np.fft.rfft(x, axis=-1), n=x.shape[-1], axis=-1)


def exact_opnorm_l2(m: MultiplierSequence, s: float, J: int, weight: str = "tl") -> OpNormReport:
    """Exact norm of T_m on the weighted L^2 space at resolution J.

    The default weight makes this the norm on tl_norm(., (s, 2, 2)), so any
    search-based lower bound at p = q = 2 sits below it.
    """
    if J > EXACT_MAX_LEVEL:
        raise MemoryError(f"exact norm limited to J <= {EXACT_MAX_LEVEL}")
    params = SpaceParams(s, 2.0, 2.0)
    extra = {"weight": weight}
    if J == 0 or not np.any(m.extended(J)):
        return OpNormReport(params, m, J, 0.0, "exact-l2", extra=extra)
    n = 2 ** J
    mult = m.extended(J)
    w = fourier_weight(J, s, weight)
    if J <= DENSE_MAX_LEVEL:
        cols = _weighted(apply_multiplier_array(_weighted(np.eye(n), 1.0 / w), mult), w)
        value = float(np.linalg.norm(cols, 2))
    else:
        def matvec(x):
            return _weighted(apply_multiplier_array(_weighted(np.ravel(x), 1.0 / w), mult), w)

        def rmatvec(x):
            # T_m and the Fourier weights are self-adjoint on the grid
            return _weighted(apply_multiplier_array(_weighted(np.ravel(x), w), mult), 1.0 / w)

        op = spla.LinearOperator((n, n), matvec=matvec, rmatvec=rmatvec, dtype=float)
        v0 = np.random.default_rng(0).standard_normal(n)
        value = float(spla.svds(op, k=1, tol=1e-13, v0=v0, return_singular_vectors=False)[0])
    return OpNormReport(params, m, J, value, "exact-l2", extra=extra)


# ---------------------------------------------------------------------------
# lower bounds by search


def _coeff_scales(J: int) -> np.ndarray:
    """Map from unit-L^2 coordinates to Haar coefficients, mean first."""
    scales = [np.ones(1)] + [np.full(2 ** j, 2.0 ** (j / 2)) for j in range(J)]
    return np.concatenate(scales)


def _synth(c: np.ndarray, J: int) -> np.ndarray:
    mean = c[..., 0]
    details = [c[..., 2 ** j:2 ** (j + 1)] for j in range(J)]
    return haar_synthesis_array(mean, details)


def _synth_adjoint(g: np.ndarray, J: int) -> np.ndarray:
    """Transpose of _synth: inner products of g with 1 and each h_{j,mu}."""
    mean, details = haar_analysis_array(g)
    n = g.shape[-1]
    parts = [n * np.asarray(mean)[..., None]] + [n * 2.0 ** -j * d for j, d in enumerate(details)]
    return np.concatenate(parts, axis=-1)


class _Ratio:
    """R(c) = ||T_m f|| / ||f|| for f = synthesis of unit-L^2 Haar coordinates c."""

    def __init__(self, m: MultiplierSequence, params: SpaceParams, J: int):
        self.J = J
        self.params = params
        self.part = frequency_partition(J)
        self.scales = _coeff_scales(J)
        level_weights = [np.zeros(1)] + [np.full(2 ** j, w) for j, w in enumerate(m.extended(J))]
        self.mult = np.concatenate(level_weights)

    def __call__(self, c: np.ndarray) -> np.ndarray:
        coeffs = c * self.scales
        top = tl_norm_array(_synth(coeffs * self.mult, self.J), self.params)
        bottom = tl_norm_array(_synth(coeffs, self.J), self.params)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(bottom > 0, top / np.where(bottom > 0, bottom, 1.0), 0.0)

    def gradient(self, c: np.ndarray):
        coeffs = c * self.scales
        top, g_top = tl_norm_and_gradient(_synth(coeffs * self.mult, self.J), self.params)
        bottom, g_bot = tl_norm_and_gradient(_synth(coeffs, self.J), self.params)
        if bottom <= 0:
            return 0.0, np.zeros_like(c)
        r = top / bottom
        grad = (self.mult * _synth_adjoint(g_top, self.J) - r * _synth_adjoint(g_bot, self.J)) / bottom
        return float(r), grad * self.scales

    def along_coordinates(self, c: np.ndarray, idx: np.ndarray, deltas: np.ndarray) -> np.ndarray:
        """R(c + deltas[a, b] e_idx[a]); ``deltas`` has shape (len(idx), D).

        The filter blocks are linear in f, so only the blocks of the
        touched Haar functions are transformed.
        """
        coeffs = c * self.scales
        f_blocks = self.part.blocks(_synth(coeffs, self.J))
        tf_blocks = self.part.blocks(_synth(coeffs * self.mult, self.J))
        unit = np.zeros((idx.size, c.size))
        unit[np.arange(idx.size), idx] = self.scales[idx]
        h_blocks = self.part.blocks(_synth(unit, self.J))          # (K, I, n)
        step = deltas[..., None]
        bottom = norm_from_blocks(f_blocks[:, None, None, :] + step * h_blocks[:, :, None, :], self.params)
        gain = (self.mult[idx][:, None] * deltas)[..., None]
        top = norm_from_blocks(tf_blocks[:, None, None, :] + gain * h_blocks[:, :, None, :], self.params)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(bottom > 0, top / np.where(bottom > 0, bottom, 1.0), 0.0)


class _QuadraticRatio(_Ratio):
    """p = q = 2: both norms are quadratic forms ||f||^2 = <f, G f> / n.

    G is the circulant with Fourier multiplier l2_weight^2 and commutes with
    dyadic translations, so <h_{j,mu}, G h_{j,mu}> depends on j only.
    """

    def __init__(self, m, params, J):
        super().__init__(m, params, J)
        self.gram_weight = l2_weight(J, params.s) ** 2
        diag = [self._inner(np.ones(2 ** J), np.ones(2 ** J))]
        for j in range(J):
            h = GridFunction.haar(j, 0, J).samples * 2.0 ** (j / 2)
            diag.append(self._inner(h, h))
        self.level_of = np.concatenate([[0]] + [np.full(2 ** j, j + 1) for j in range(J)])
        self.diag = np.asarray(diag)[self.level_of]

    def _apply_gram(self, x):
        return np.fft.irfft(self.gram_weight * np.fft.rfft(x, axis=-1), n=x.shape[-1], axis=-1)

    def _inner(self, x, y):
        return float(np.dot(x, self._apply_gram(y))) / x.shape[-1]

    def best_pair_moves(self, c: np.ndarray):
        """For every coordinate i, the best ratio^2 on span{f, e_i} and the move."""
        n = c.size
        f = _synth(c * self.scales, self.J)
        tf = _synth(c * self.scales * self.mult, self.J)
        gf, gtf = self._apply_gram(f), self._apply_gram(tf)
        a, a_t = float(np.dot(f, gf)) / n, float(np.dot(tf, gtf)) / n
        b = _synth_adjoint(gf, self.J) * self.scales / n
        b_t = self.mult * _synth_adjoint(gtf, self.J) * self.scales / n
        cc = self.diag
        cc_t = self.mult**2 * self.diag
        qa = a * cc - b * b
        qb = a_t * cc + a * cc_t - 2 * b * b_t
        qc = a_t * cc_t - b_t * b_t
        with np.errstate(invalid="ignore", divide="ignore"):
            disc = np.sqrt(np.maximum(qb * qb - 4 * qa * qc, 0.0))
            lam = np.where(qa > 1e-14 * a * cc, (qb + disc) / (2 * qa), a_t / a)
        # eigenvector of [[a_t - lam a, b_t - lam b], [b_t - lam b, cc_t - lam cc]]
        r1 = np.stack([b_t - lam * b, -(a_t - lam * a)])
        r2 = np.stack([cc_t - lam * cc, -(b_t - lam * b)])
        vec = np.where(np.sum(r1 * r1, 0) >= np.sum(r2 * r2, 0), r1, r2)
        return lam, vec


def _initial_point(rng: np.random.Generator, trial: int, J: int) -> np.ndarray:
    """Restart family, cycled by trial index.

    0: dense Gaussian; 1: one Haar level with random entries;
    2: a single Haar function; 3: a nested chain of Haar functions around a
    random point with geometric amplitude profile; 4: Haar coefficients of a
    random low-frequency trigonometric polynomial.
    """
    n = 2 ** J
    c = np.zeros(n)
    kind = trial % 5 if J > 0 else 0
    if kind == 0:
        c = rng.standard_normal(n)
    elif kind == 1:
        j = rng.integers(J)
        c[2 ** j:2 ** (j + 1)] = rng.standard_normal(2 ** j)
    elif kind == 2:
        j = rng.integers(J)
        c[2 ** j + rng.integers(2 ** j)] = 1.0
    elif kind == 3:
        x = rng.random()
        beta = rng.uniform(-1.0, 1.0)
        signs = rng.choice([-1.0, 1.0]) if rng.random() < 0.5 else rng.choice([-1.0, 1.0], size=J)
        for j in range(J):
            c[2 ** j + int(x * 2 ** j)] = 2.0 ** (beta * j)
        c[1:] *= np.repeat(np.broadcast_to(signs, (J,)), [2 ** j for j in range(J)])
    else:
        x = (np.arange(n) + 0.5) / n
        modes = np.arange(1, 5)
        amp = rng.standard_normal((2, modes.size)) / modes
        g = amp[0] @ np.cos(2 * np.pi * np.outer(modes, x)) + amp[1] @ np.sin(2 * np.pi * np.outer(modes, x))
        c = _synth_adjoint(g, J) / n * _coeff_scales(J)
    if not np.any(c):
        c[-1] = 1.0
    return c / np.linalg.norm(c)


def _ascend_quadratic(ratio: _QuadraticRatio, c: np.ndarray, cfg: ExperimentConfig):
    """Coordinate ascent with exact maximization over span{f, e_i}."""
    best = float(ratio(c))
    for _ in range(cfg.iterations):
        lam, vec = ratio.best_pair_moves(c)
        i = int(np.argmax(lam))
        if not np.sqrt(max(lam[i], 0.0)) > best * (1 + 1e-12):
            break
        new = vec[0, i] * c
        new[i] += vec[1, i]
        if not np.any(new):
            break
        new /= np.linalg.norm(new)
        value = float(ratio(new))
        if value <= best:
            break
        c, best = new, value
    return best, c


def _ascend(ratio: _Ratio, c: np.ndarray, cfg: ExperimentConfig, rng: np.random.Generator):
    """Greedy coordinate ascent.

    Each iteration ranks coordinates by |dR/dc_i|, tries a ladder of steps
    along the best few (plus a few random ones) and moves to the best
    improving candidate; the step ladder halves when nothing improves.
    """
    n = c.size
    steps = np.asarray(cfg.steps, dtype=float)
    best = float(ratio(c))
    scale = 1.0
    for _ in range(cfg.iterations):
        _, grad = ratio.gradient(c)
        k = min(cfg.coords_per_step, n)
        idx = np.argsort(-np.abs(grad), kind="stable")[:k]
        extra = rng.choice(n, size=min(cfg.random_coords, n), replace=False)
        idx = np.unique(np.concatenate([idx, extra]))
        ladder = scale * np.concatenate([steps, -steps])
        # last column zeroes the coordinate
        deltas = np.column_stack([np.broadcast_to(ladder, (idx.size, ladder.size)), -c[idx]])
        values = ratio.along_coordinates(c, idx, deltas)
        i, k = np.unravel_index(int(np.argmax(values)), values.shape)
        if values[i, k] > best * (1 + 1e-12):
            c = c.copy()
            c[idx[i]] += deltas[i, k]
            c /= np.linalg.norm(c)
            best = float(ratio(c))
        else:
            scale *= 0.5
            if scale < 1e-6:
                break
    return best, c


def _run_trial(m, params, cfg, trial, seed_seq):
    rng = np.random.default_rng(seed_seq)
    c0 = _initial_point(rng, trial, cfg.J)
    if params.p == 2 and params.q == 2:
        return _ascend_quadratic(_QuadraticRatio(m, params, cfg.J), c0, cfg)
    return _ascend(_Ratio(m, params, cfg.J), c0, cfg, rng)


def lower_bound_opnorm(m: MultiplierSequence, params: SpaceParams, cfg: ExperimentConfig) -> OpNormReport:
    """Certified lower bound for ||T_m|| on the discrete F^s_{p,q} at level cfg.J."""
    J = cfg.J
    if J == 0 or not np.any(m.extended(J)):
        return OpNormReport(params, m, J, 0.0, "lower-bound", GridFunction.zeros(J), cfg.trials, cfg.seed)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    jobs = [(m, params, cfg, t, seeds[t]) for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(lambda a: _run_trial(*a), jobs))
    else:
        results = [_run_trial(*a) for a in jobs]
    # ties resolve to the lowest trial index, so the result is order independent
    best_trial = max(range(len(results)), key=lambda t: (results[t][0], -t))
    c = results[best_trial][1]
    witness = GridFunction(_synth(c * _coeff_scales(J), J))
    value = witness_ratio(witness, m, params)
    logger.debug("lower bound %.6g from trial %d", value, best_trial)
    return OpNormReport(params, m, J, value, "lower-bound", witness, cfg.trials, cfg.seed,
                       extra={"best_trial": best_trial, "iterations": cfg.iterations})


def witness_ratio(f: GridFunction, m: MultiplierSequence, params: SpaceParams) -> float:
    bottom = tl_norm(f, params)
    if bottom == 0:
        return 0.0
    return tl_norm(GridFunction(apply_multiplier_array(f.samples, m)), params) / bottom


# ---------------------------------------------------------------------------
# multiplier families and experiments


def separated_set_multiplier(Ncard: int, sep: int, Jmax: int) -> MultiplierSequence:
    """Indicator of {0, sep, ..., (Ncard-1) sep} as a sequence of length Jmax."""
    if Ncard < 1 or sep < 1:
        raise ValueError("Ncard and sep must be positive")
    if (Ncard - 1) * sep >= Jmax:
        raise ValueError(f"{Ncard} points with separation {sep} do not fit in {Jmax} levels")
    values = np.zeros(Jmax)
    values[np.arange(Ncard) * sep] = 1.0
    return MultiplierSequence(values)


def alternating_multiplier(n: int) -> MultiplierSequence:
    return MultiplierSequence(np.where(np.arange(n) % 2 == 0, 1.0, -1.0))


def even_levels_multiplier(n: int) -> MultiplierSequence:
    return MultiplierSequence(np.where(np.arange(n) % 2 == 0, 1.0, 0.0))


def family_member(family: str, size: int, J: int, sep: int = 2) -> tuple:
    """Return ``(m, grid level)`` for one point of a sweep.

    For "alternating" and "even" the size is the grid level itself; for
    "separated" the size is the cardinality of E inside a fixed J-level grid.
    """
    if family == "alternating":
        return alternating_multiplier(size), size
    if family == "even":
        return even_levels_multiplier(size), size
    if family == "separated":
        return separated_set_multiplier(size, sep, J), J
    raise ValueError(f"unknown family {family!r}")


def _value(m, params, level, cfg, force_search=False):
    if params.p == 2 and params.q == 2 and not force_search and level <= EXACT_MAX_LEVEL:
        return exact_opnorm_l2(m, params.s, level)
    sub = ExperimentConfig(**{**asdict(cfg), "J": level})
    return lower_bound_opnorm(m, params, sub)


def growth_experiment(params: SpaceParams, family: str, sizes, J: int, cfg: ExperimentConfig,
                      scale: float = 1.0, sep: int = 2) -> dict:
    """Norms of a multiplier family across sizes and the fitted log2 slope."""
    rows = []
    for size in sizes:
        m, level = family_member(family, int(size), J, sep)
        rep = _value(m * scale, params, level, cfg)
        rows.append({"size": int(size), "value": rep.value, "kind": rep.kind, "seed": rep.seed})
    xs = np.array([r["size"] for r in rows], dtype=float)
    ys = np.log2([max(r["value"], 1e-300) for r in rows])
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(rows) > 1 else math.nan
    return {"params": params.as_dict(), "family": family, "rows": rows, "slope": slope,
            "reference_slope": params.s - 1.0 / params.q}


def self_adjoint_residual(m: MultiplierSequence, J: int, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    f, g = rng.standard_normal((2, 2 ** J))
    lhs = np.dot(apply_multiplier_array(f, m), g)
    rhs = np.dot(f, apply_multiplier_array(g, m))
    return float(abs(lhs - rhs) / 2 ** J)


def duality_check(m: MultiplierSequence, params: SpaceParams, cfg: ExperimentConfig) -> dict:
    dual = dual_params(params)
    primal_rep = lower_bound_opnorm(m, params, cfg)
    dual_rep = lower_bound_opnorm(m, dual, cfg)
    out = {
        "params": params.as_dict(),
        "dual_params": dual.as_dict(),
        "primal_value": primal_rep.value,
        "dual_value": dual_rep.value,
        "self_adjoint_residual": self_adjoint_residual(m, cfg.J, cfg.seed),
    }
    if params.p == 2 and params.q == 2 and cfg.J <= EXACT_MAX_LEVEL:
        # the Sobolev weight for -s is the inverse of the one for s
        out["primal_exact"] = exact_opnorm_l2(m, params.s, cfg.J, weight="sobolev").value
        out["dual_exact"] = exact_opnorm_l2(m, dual.s, cfg.J, weight="sobolev").value
    return out


def v1_consistency(m: MultiplierSequence, params: SpaceParams, cfg: ExperimentConfig,
                   baseline: float = 4.0) -> dict:
    """Measured norm divided by the summation-by-parts bound."""
    if region_classify(params) == Region.OUTSIDE:
        raise ValueError("parameters outside the Schauder range")
    bound = v1_bound(m, params.p, params.q)
    rep = _value(m, params, cfg.J, cfg)
    ratio = rep.value / bound if bound > 0 else 0.0
    return {"params": params.as_dict(), "measured": rep.value, "kind": rep.kind,
            "v1_bound": bound, "ratio": ratio, "baseline": baseline,
            "within_baseline": bool(ratio <= baseline),
            "u1_variation": u_variation(m, 1.0)}
