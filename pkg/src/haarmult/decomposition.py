"""Decomposition of bounded u-variation sequences into interval atoms.

A sequence f with normalized u-variation is written as f = rho(w) where w
is the running u-variation (u-th power) and rho is a piecewise linear,
1/u-Hoelder path on [0, 1].  Expanding rho in the Haar system of [0, 1] and
composing each level with the nondecreasing w turns the dyadic halves into
disjoint integer intervals, which gives one l^(u+eps)-normalized interval
atom per Haar level.

Conventions for finite input of length N:

* the constant m(0) is split off first, the rest is divided by its
  u-variation V, so the running variation ends exactly at w(N-1) = 1;
* t = 1 belongs to the last dyadic cell of every level (cells are
  [a, b) except the rightmost, which is [a, 1]).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .variation import MultiplierSequence, running_variation

HOELDER_CONST = 3.0


class TrivialInput(ValueError):
    """Raised when a sequence has zero variation (a constant)."""


@dataclass(frozen=True)
class IntervalAtom:
    """g = sum_nu a_nu 1_[l_nu, r_nu) on the integers."""

    intervals: tuple
    coeffs: tuple
    u_class: float
    level: int | None = None

    def __post_init__(self):
        ivs = tuple((int(l), int(r)) for l, r in self.intervals)
        cs = tuple(float(c) for c in self.coeffs)
        if len(ivs) != len(cs):
            raise ValueError("intervals and coeffs differ in length")
        object.__setattr__(self, "intervals", ivs)
        object.__setattr__(self, "coeffs", cs)

    def norm(self) -> float:
        a = np.abs(np.asarray(self.coeffs, dtype=float))
        if a.size == 0:
            return 0.0
        return float(np.sum(a**self.u_class) ** (1.0 / self.u_class))

    def evaluate(self, N: int) -> np.ndarray:
        out = np.zeros(N)
        for (l, r), a in zip(self.intervals, self.coeffs):
            out[max(l, 0):max(min(r, N), 0)] += a
        return out

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "u_class": self.u_class,
            "intervals": [list(iv) for iv in self.intervals],
            "coeffs": list(self.coeffs),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IntervalAtom":
        return cls(tuple(map(tuple, data["intervals"])), tuple(data["coeffs"]),
                   float(data["u_class"]), data.get("level"))


@dataclass(frozen=True)
class AtomReport:
    passed: bool
    disjoint: bool
    norm: float
    u_class: float
    reason: str = ""


def verify_atom(atom: IntervalAtom, tol: float = 1e-12) -> AtomReport:
    """Check the r_u conditions: disjoint intervals and l^u norm at most 1."""
    ivs = sorted((l, r) for l, r in atom.intervals if r > l)
    disjoint = all(ivs[i][1] <= ivs[i + 1][0] for i in range(len(ivs) - 1))
    norm = atom.norm()
    reasons = []
    if not disjoint:
        reasons.append("disjointness")
    if norm > 1 + tol:
        reasons.append(f"norm {norm:.6g} > 1")
    return AtomReport(not reasons, disjoint, norm, atom.u_class, "; ".join(reasons))


@dataclass(frozen=True)
class PiecewiseLinearPath:
    """Continuous piecewise linear path through ``(t[k], values[k])``."""

    t: np.ndarray
    values: np.ndarray
    u: float

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.size < 2 or t.size != v.size:
            raise ValueError("path needs at least two matching breakpoints")
        if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
            raise ValueError("breakpoints must increase strictly from 0 to 1")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @property
    def breakpoints(self):
        return list(zip(self.t.tolist(), self.values.tolist()))

    def __call__(self, s):
        return np.interp(s, self.t, self.values)

    def _cumulative(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(0.5 * np.diff(self.t) * (self.values[1:] + self.values[:-1]))])

    def antiderivative(self, s) -> np.ndarray:
        """Exact integral of the path over [0, s]."""
        s = np.asarray(s, dtype=float)
        k = np.clip(np.searchsorted(self.t, s, side="right") - 1, 0, self.t.size - 2)
        slope = np.diff(self.values) / np.diff(self.t)
        h = s - self.t[k]
        return self._cumulative()[k] + h * self.values[k] + 0.5 * slope[k] * h * h

    def integral(self) -> float:
        return float(self._cumulative()[-1])


@dataclass
class AtomicDecomposition:
    mean_offset: float
    terms: list
    u: float
    epsilon: float
    levels_used: int
    normalization: float
    length: int = 0
    certificates: dict = field(default_factory=dict)

    @property
    def error_bound(self) -> float:
        return float(HOELDER_CONST * 2.0 ** (-self.levels_used / self.u) * self.normalization)

    @property
    def budget(self) -> float:
        return float((1.0 + budget_constant(self.u, self.epsilon)) * self.normalization)

    def coefficient_sum(self, sigma: float = 1.0) -> float:
        return float(sum(abs(c) ** sigma for c, _ in self.terms))

    def to_dict(self) -> dict:
        return {
            "mean_offset": self.mean_offset,
            "u": self.u,
            "epsilon": self.epsilon,
            "levels_used": self.levels_used,
            "normalization": self.normalization,
            "length": self.length,
            "error_bound": self.error_bound,
            "budget": self.budget,
            "terms": [{"c": c, "atom": atom.to_dict()} for c, atom in self.terms],
            "certificates": self.certificates,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AtomicDecomposition":
        terms = [(float(t["c"]), IntervalAtom.from_dict(t["atom"])) for t in data["terms"]]
        return cls(float(data["mean_offset"]), terms, float(data["u"]), float(data["epsilon"]),
                   int(data["levels_used"]), float(data["normalization"]),
                   int(data.get("length", 0)), dict(data.get("certificates", {})))


def level_constant(j: int, u: float, epsilon: float) -> float:
    """3 * 2^(-1/u) * 2^(-j/u) * 2^(j/(u+eps)), the l^(u+eps) mass of level j."""
    return HOELDER_CONST * 2.0 ** (-1.0 / u) * 2.0 ** (-j / u + j / (u + epsilon))


def budget_constant(u: float, epsilon: float) -> float:
    """2 * sum_j level_constant(j), in closed form."""
    delta = 1.0 / u - 1.0 / (u + epsilon)
    return 2.0 * HOELDER_CONST * 2.0 ** (-1.0 / u) / (1.0 - 2.0**-delta)


def haar_level_bound(j: int, u: float) -> float:
    return HOELDER_CONST * 2.0 ** (-1.0 / u) * 2.0 ** (-j / u)


def jump_sequence(w) -> np.ndarray:
    """Left endpoints of the plateaus of a nondecreasing sequence."""
    w = np.asarray(w, dtype=float)
    if w.size == 0:
        raise ValueError("empty sequence")
    if np.any(np.diff(w) < 0):
        raise ValueError("running variation must be nondecreasing")
    return np.concatenate([[0], np.flatnonzero(np.diff(w) > 0) + 1])


def _normalize(m: MultiplierSequence, u: float):
    """Split off m(0), scale by the variation; return (offset, V, f, w)."""
    values = m.values if isinstance(m, MultiplierSequence) else np.asarray(m, dtype=float)
    w_raw = running_variation(values, u)
    total = w_raw[-1]
    if total <= 0:
        raise TrivialInput("sequence is constant")
    V = float(total ** (1.0 / u))
    offset = float(values[0])
    f = (values - offset) / V
    w = w_raw / total
    w[-1] = 1.0
    return offset, V, f, w


def build_rho(m: MultiplierSequence, u: float) -> PiecewiseLinearPath:
    """Piecewise linear rho with rho(w(n)) = f(n) for the normalized sequence f."""
    _, _, f, w = _normalize(m, u)
    jumps = jump_sequence(w)
    return PiecewiseLinearPath(w[jumps], f[jumps], u)


def _dyadic_integrals(rho: PiecewiseLinearPath, level: int) -> np.ndarray:
    """Integrals of rho over the 2^level cells of [0, 1)."""
    grid = np.arange(2**level + 1) * 2.0**-level
    return np.diff(rho.antiderivative(grid))


def rho_haar_level(rho: PiecewiseLinearPath, j: int) -> np.ndarray:
    """Coefficients 2^j <h_{j,mu}, rho> for mu = 0..2^j - 1, integrated exactly."""
    halves = _dyadic_integrals(rho, j + 1)
    return 2.0**j * (halves[0::2] - halves[1::2])


def _level_atom(d: np.ndarray, w: np.ndarray, j: int, scale: float, u_class: float) -> IntervalAtom:
    n = 2**j
    edges = np.arange(2 * n + 1) * 2.0 ** -(j + 1)
    idx = np.searchsorted(w, edges, side="left")
    idx[-1] = w.size
    lo, hi = idx[:-1], idx[1:]
    signed = np.empty(2 * n)
    signed[0::2] = d / scale
    signed[1::2] = -d / scale
    keep = (hi > lo) & (signed != 0)
    return IntervalAtom(tuple(zip(lo[keep].tolist(), hi[keep].tolist())),
                        tuple(signed[keep].tolist()), u_class, level=j)


def decompose(m: MultiplierSequence, u: float, epsilon: float, J_rho: int) -> AtomicDecomposition:
    """Write m as mean_offset + sum_l c_l g_l with g_l in r_(u+eps).

    Level j contributes the atom (rho_j o w) / (2 c_j) with coefficient
    2 c_j V, where c_j = level_constant(j, u, eps).  The Haar series of rho
    is cut after J_rho levels; the sup-norm error is at most
    3 * 2^(-J_rho/u) * V.
    """
    if u < 1 or epsilon <= 0:
        raise ValueError("decompose needs u >= 1 and epsilon > 0")
    if not 1 <= J_rho <= 22:
        raise ValueError(f"J_rho={J_rho} outside [1, 22]")
    if not isinstance(m, MultiplierSequence):
        m = MultiplierSequence(m)
    try:
        offset, V, f, w = _normalize(m, u)
    except TrivialInput:
        return AtomicDecomposition(float(m.values[0]), [], u, epsilon, J_rho, 0.0, len(m))
    jumps = jump_sequence(w)
    rho = PiecewiseLinearPath(w[jumps], f[jumps], u)
    u_class = u + epsilon

    # one pass over the finest grid, then pyramid up
    sums = _dyadic_integrals(rho, J_rho)
    terms = []
    for j in range(J_rho - 1, -1, -1):
        d = 2.0**j * (sums[0::2] - sums[1::2])
        sums = sums[0::2] + sums[1::2]
        c = level_constant(j, u, epsilon)
        atom = _level_atom(d, w, j, 2.0 * c, u_class)
        if atom.coeffs:
            terms.append((2.0 * c * V, atom))
    terms.reverse()
    return AtomicDecomposition(offset + V * rho.integral(), terms, u, epsilon, J_rho, V, len(m))


def reconstruct(dec: AtomicDecomposition, N: int) -> MultiplierSequence:
    if N < 1:
        raise ValueError("N must be positive")
    out = np.full(N, dec.mean_offset)
    for c, atom in dec.terms:
        out += c * atom.evaluate(N)
    return MultiplierSequence(out)


def hoelder_violation(rho: PiecewiseLinearPath, n_pairs: int = 10_000, seed: int = 0) -> float:
    """Largest |rho(t) - rho(t')| - 3|t - t'|^(1/u) over random pairs (<= 0 passes)."""
    rng = np.random.default_rng(seed)
    t = rng.random(n_pairs)
    s = rng.random(n_pairs)
    # half the pairs are short-range, where the Hoelder bound is tight
    s[: n_pairs // 2] = np.clip(t[: n_pairs // 2] + rng.normal(scale=1e-3, size=n_pairs // 2), 0, 1)
    gap = np.abs(rho(t) - rho(s)) - HOELDER_CONST * np.abs(t - s) ** (1.0 / rho.u)
    return float(gap.max())


def certify(m: MultiplierSequence, dec: AtomicDecomposition, *, sigma: float = 1.0,
            n_pairs: int = 10_000, seed: int = 0) -> dict:
    """Check every certificate of a decomposition of m and return a report."""
    if not isinstance(m, MultiplierSequence):
        m = MultiplierSequence(m)
    atoms = [verify_atom(atom) for _, atom in dec.terms]
    err = float(np.max(np.abs(reconstruct(dec, len(m)).values - m.values)))
    report = {
        "atoms_valid": all(a.passed for a in atoms),
        "max_atom_norm": max((a.norm for a in atoms), default=0.0),
        "coefficient_sum": dec.coefficient_sum(),
        "budget": dec.budget,
        "budget_ok": bool(dec.coefficient_sum() <= dec.budget + 1e-9),
        "sigma": sigma,
        "sigma_sum": dec.coefficient_sum(sigma),
        "reconstruction_error": err,
        "error_bound": dec.error_bound,
        "error_ok": bool(err <= dec.error_bound + 1e-9),
    }
    if dec.terms:
        rho = build_rho(m, dec.u)
        slack = hoelder_violation(rho, n_pairs, seed)
        worst = 0.0
        for j in range(dec.levels_used):
            worst = max(worst, float(np.max(np.abs(rho_haar_level(rho, j)))) / haar_level_bound(j, dec.u))
        report.update(hoelder_slack=slack, hoelder_ok=bool(slack <= 1e-9),
                      haar_bound_ratio=worst, haar_bound_ok=bool(worst <= 1 + 1e-12))
    else:
        report.update(hoelder_slack=None, hoelder_ok=True, haar_bound_ratio=0.0, haar_bound_ok=True)
    report["passed"] = all(report[k] for k in ("atoms_valid", "budget_ok", "error_ok", "hoelder_ok", "haar_bound_ok"))
    return report
