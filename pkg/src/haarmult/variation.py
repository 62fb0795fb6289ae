"""Wiener u-variation of finite real sequences.

The u-variation of m is the supremum over increasing index strings
n_0 < n_1 < ... < n_K of (sum |m(n_i) - m(n_{i-1})|^u)^(1/u).  On a finite
sequence it is an exact O(N^2) dynamic program: ``best[i]`` is the largest
u-th power sum over strings that end at index i.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MultiplierSequence:
    """Real multiplier m(0..N-1); for j >= N the value m(N-1) is repeated."""

    values: np.ndarray
    tail: str = "constant"

    def __post_init__(self):
        arr = np.array(self.values, dtype=float).ravel()
        if arr.size < 1:
            raise ValueError("multiplier needs at least one value")
        if not np.all(np.isfinite(arr)):
            raise ValueError("multiplier values must be finite")
        if self.tail != "constant":
            raise ValueError(f"unsupported tail rule {self.tail!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.size

    def extended(self, n: int) -> np.ndarray:
        """Values m(0..n-1), applying the tail rule past the stored range."""
        if n <= self.values.size:
            return self.values[:n].copy()
        return np.concatenate([self.values, np.full(n - self.values.size, self.values[-1])])

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __mul__(self, c):
        return MultiplierSequence(self.values * float(c))

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"values": self.values.tolist(), "tail": self.tail}

    @classmethod
    def from_dict(cls, data: dict) -> "MultiplierSequence":
        return cls(np.asarray(data["values"], dtype=float), data.get("tail", "constant"))


def _as_values(m) -> np.ndarray:
    if isinstance(m, MultiplierSequence):
        return m.values
    return np.asarray(m, dtype=float)


def _check_u(u: float) -> float:
    u = float(u)
    if not u >= 1:
        raise ValueError(f"variation exponent u={u} must be >= 1")
    return u


def variation_dp(values: np.ndarray, u: float) -> np.ndarray:
    """Best u-th power sums over strings ending at each index.

    Works along the last axis, so a batch of sequences is handled at once.
    """
    x = np.asarray(values, dtype=float)
    best = np.zeros_like(x)
    for i in range(1, x.shape[-1]):
        cand = best[..., :i] + np.abs(x[..., i:i + 1] - x[..., :i]) ** u
        best[..., i] = np.maximum(cand.max(axis=-1), 0.0)
    return best


def u_variation(m, u: float) -> float:
    u = _check_u(u)
    best = variation_dp(_as_values(m), u)
    return float(best.max() ** (1.0 / u))


def vu_norm(m, u: float) -> float:
    """||m||_inf + u-variation."""
    values = _as_values(m)
    return float(np.max(np.abs(values))) + u_variation(values, u)


def running_variation(m, u: float) -> np.ndarray:
    """w(n): u-th power of the u-variation of m over [0, n]; w(0) = 0."""
    u = _check_u(u)
    return np.maximum.accumulate(variation_dp(_as_values(m), u))


def family_sequence(kind: str, alpha: float, N: int) -> np.ndarray:
    """m(n) = (n+1)^-alpha, optionally with alternating sign, for n = 0..N."""
    n = np.arange(N + 1, dtype=float)
    base = (n + 1.0) ** -alpha
    if kind == "power":
        return base
    if kind == "alternating-power":
        return np.where(np.arange(N + 1) % 2 == 0, 1.0, -1.0) * base
    raise ValueError(f"unknown family {kind!r}")


def family_profile(kind: str, alpha: float, u: float, N: int):
    """Truncated variations of a power family at n = 2, 4, 8, ..., N.

    Returns ``(ns, profile)``; entry k is the u-variation of m restricted
    to the indices [0, ns[k]].
    """
    if alpha <= 0 or N < 2:
        raise ValueError("family_profile needs alpha > 0 and N >= 2")
    u = _check_u(u)
    w = running_variation(family_sequence(kind, alpha, N), u)
    ns = []
    n = 2
    while n <= N:
        ns.append(n)
        n *= 2
    if ns[-1] != N:
        ns.append(N)
    ns = np.array(ns)
    return ns, w[ns] ** (1.0 / u)
