"""Dyadic grid functions, Haar analysis/synthesis and Haar multipliers.

Functions live on the unit interval, sampled as step functions on the
dyadic cells I_{J,mu} = [mu 2^-J, (mu+1) 2^-J).  Haar coefficients are
stored in the normalization d[j][mu] = 2^j <f, h_{j,mu}>, so that

    f = mean + sum_j sum_mu d[j][mu] h_{j,mu}.

The ``*_array`` helpers act on the last axis of an ndarray and are what the
experiment code uses for batched work.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .variation import MultiplierSequence

MAX_LEVEL = 22


def _check_level(J: int) -> int:
    J = int(J)
    if not 0 <= J <= MAX_LEVEL:
        raise ValueError(f"resolution level J={J} outside [0, {MAX_LEVEL}]")
    return J


def level_of_length(n: int) -> int:
    """Return J with n == 2**J, raising ValueError otherwise."""
    if n < 1 or n & (n - 1):
        raise ValueError(f"sample count {n} is not a power of two")
    return _check_level(n.bit_length() - 1)


@dataclass(frozen=True)
class DyadicInterval:
    j: int
    mu: int

    def __post_init__(self):
        if self.j < 0 or not 0 <= self.mu < 2**self.j:
            raise ValueError(f"invalid dyadic interval ({self.j}, {self.mu})")

    @property
    def left(self) -> float:
        return self.mu * 2.0**-self.j

    @property
    def right(self) -> float:
        return (self.mu + 1) * 2.0**-self.j

    def cells(self, J: int) -> slice:
        """Slice of level-J sample indices covered by this interval."""
        if J < self.j:
            raise ValueError("grid coarser than interval")
        width = 2 ** (J - self.j)
        return slice(self.mu * width, (self.mu + 1) * width)


@dataclass(frozen=True)
class GridFunction:
    """Step function on the level-J dyadic grid of [0, 1)."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float).ravel()
        level_of_length(arr.size)
        if not np.all(np.isfinite(arr)):
            raise ValueError("grid samples must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def J(self) -> int:
        return self.samples.size.bit_length() - 1

    def __len__(self):
        return self.samples.size

    @classmethod
    def zeros(cls, J: int) -> "GridFunction":
        return cls(np.zeros(2 ** _check_level(J)))

    @classmethod
    def haar(cls, j: int, mu: int, J: int) -> "GridFunction":
        """The Haar function h_{j,mu} sampled at resolution J (needs j < J)."""
        if not 0 <= j < _check_level(J):
            raise ValueError(f"Haar level {j} not resolved at J={J}")
        out = np.zeros(2**J)
        cells = DyadicInterval(j, mu).cells(J)
        half = 2 ** (J - j - 1)
        out[cells.start:cells.start + half] = 1.0
        out[cells.start + half:cells.stop] = -1.0
        return cls(out)

    def inner(self, other: "GridFunction") -> float:
        """L^2[0,1) inner product."""
        return float(np.dot(self.samples, other.samples)) / len(self)

    def __add__(self, other):
        return GridFunction(self.samples + other.samples)

    def __sub__(self, other):
        return GridFunction(self.samples - other.samples)

    def __mul__(self, c):
        return GridFunction(self.samples * float(c))

    __rmul__ = __mul__


@dataclass(frozen=True)
class HaarCoefficients:
    """Mean plus detail layers d[j], j = 0..J-1, with len(d[j]) == 2**j."""

    J: int
    mean: float
    details: tuple = field(default=())

    def __post_init__(self):
        _check_level(self.J)
        layers = []
        for j, layer in enumerate(self.details):
            arr = np.array(layer, dtype=float).ravel()
            if arr.size != 2**j:
                raise ValueError(f"detail level {j} has {arr.size} entries, expected {2**j}")
            arr.flags.writeable = False
            layers.append(arr)
        if len(layers) != self.J:
            raise ValueError(f"expected {self.J} detail levels, got {len(layers)}")
        object.__setattr__(self, "details", tuple(layers))
        object.__setattr__(self, "mean", float(self.mean))

    def to_dict(self) -> dict:
        return {"J": self.J, "mean": self.mean, "details": [d.tolist() for d in self.details]}

    @classmethod
    def from_dict(cls, data: dict) -> "HaarCoefficients":
        return cls(int(data["J"]), float(data["mean"]), tuple(data["details"]))


# ---------------------------------------------------------------------------
# array kernels (last axis)


def haar_analysis_array(x: np.ndarray):
    """Pyramid Haar analysis along the last axis.

    Returns ``(mean, details)`` where ``details[j]`` has trailing size 2**j.
    """
    a = np.asarray(x, dtype=float)
    J = level_of_length(a.shape[-1])
    details = [None] * J
    for j in range(J - 1, -1, -1):
        left, right = a[..., 0::2], a[..., 1::2]
        details[j] = 0.5 * (left - right)
        a = 0.5 * (left + right)
    return a[..., 0], details


def haar_synthesis_array(mean, details) -> np.ndarray:
    a = np.asarray(mean, dtype=float)[..., None]
    for d in details:
        d = np.asarray(d, dtype=float)
        out = np.empty(d.shape[:-1] + (2 * d.shape[-1],))
        out[..., 0::2] = a + d
        out[..., 1::2] = a - d
        a = out
    return a


def conditional_expectation_array(x: np.ndarray, N: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    J = level_of_length(x.shape[-1])
    if not 0 <= N <= J:
        raise ValueError(f"conditional expectation level {N} outside [0, {J}]")
    blocks = x.reshape(x.shape[:-1] + (2**N, 2 ** (J - N))).mean(axis=-1)
    return np.repeat(blocks, 2 ** (J - N), axis=-1)


def apply_multiplier_array(x: np.ndarray, m) -> np.ndarray:
    """Scale Haar layer j of ``x`` by m(j) and drop the mean layer.

    ``m`` is a MultiplierSequence or an array already extended to J levels.
    """
    x = np.asarray(x, dtype=float)
    J = level_of_length(x.shape[-1])
    weights = m.extended(J) if isinstance(m, MultiplierSequence) else np.asarray(m, float)
    mean, details = haar_analysis_array(x)
    scaled = [weights[j] * d for j, d in enumerate(details)]
    return haar_synthesis_array(np.zeros_like(mean), scaled)


# ---------------------------------------------------------------------------
# GridFunction API


def haar_forward(f: GridFunction) -> HaarCoefficients:
    mean, details = haar_analysis_array(f.samples)
    return HaarCoefficients(f.J, float(mean), tuple(details))


def haar_inverse(c: HaarCoefficients) -> GridFunction:
    return GridFunction(haar_synthesis_array(c.mean, c.details))


def conditional_expectation(f: GridFunction, N: int) -> GridFunction:
    """E_N f: average of f over each I_{N,mu}, kept at resolution J."""
    return GridFunction(conditional_expectation_array(f.samples, N))


def haar_projection(f: GridFunction, j: int) -> GridFunction:
    """D_j f, the component of f in the span of the level-j Haar functions."""
    if not 0 <= j < f.J:
        raise ValueError(f"projection level {j} outside [0, {f.J - 1}]")
    mean, details = haar_analysis_array(f.samples)
    kept = [d if i == j else np.zeros_like(d) for i, d in enumerate(details)]
    return GridFunction(haar_synthesis_array(0.0, kept))


def apply_multiplier(f: GridFunction, m: MultiplierSequence) -> GridFunction:
    """T_m f = sum_j m(j) D_j f."""
    return GridFunction(apply_multiplier_array(f.samples, m))


def v1_bound(m: MultiplierSequence, p: float, q: float) -> float:
    """Summation-by-parts bound ||m||_inf + (sum_j |m(j) - m(j-1)|^sigma)^(1/sigma).

    sigma = min(1, p, q).
    """
    if p <= 0 or q <= 0:
        raise ValueError("p and q must be positive")
    sigma = min(1.0, p, q)
    jumps = np.abs(np.diff(m.values))
    return float(np.max(np.abs(m.values)) + np.sum(jumps**sigma) ** (1.0 / sigma))

