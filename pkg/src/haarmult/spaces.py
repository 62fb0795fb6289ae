"""Discrete Triebel-Lizorkin norms on the periodic unit interval, and the
parameter regions of the Haar system in the (1/p, s) plane.

The norm of a grid function f with 2^J samples is

    ( 2^-J sum_x ( sum_k 2^(k s q) |Delta_k f(x)|^q )^(p/q) )^(1/p)

where Delta_k f is f filtered by a smooth Littlewood-Paley window phi_k on
the integer frequencies of the torus.  Only ratios and trends at a fixed J
carry meaning.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dyadic import GridFunction, level_of_length

EDGE_TOL = 1e-12


@dataclass(frozen=True)
class SpaceParams:
    s: float
    p: float
    q: float

    def __post_init__(self):
        for name in ("s", "p", "q"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (math.isfinite(self.s) and math.isfinite(self.p) and math.isfinite(self.q)):
            raise ValueError("s, p, q must be finite")
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")

    @property
    def inv_p(self) -> float:
        return 1.0 / self.p

    def as_dict(self) -> dict:
        return {"s": self.s, "p": self.p, "q": self.q}


# ---------------------------------------------------------------------------
# Littlewood-Paley windows


def _theta(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    ramp = np.cos(0.5 * np.pi * (t - 1.0)) ** 2
    return np.where(t <= 1.0, 1.0, np.where(t <= 2.0, ramp, 0.0))


class FrequencyPartition:
    """Windows phi_k, k = 0..K-1, on the rfft frequencies 0..2^(J-1).

    phi_0 = theta(|xi|), phi_k = theta(|xi|/2^k) - theta(|xi|/2^(k-1)); the
    last window absorbs everything up to Nyquist so the windows sum to 1.
    """

    def __init__(self, J: int):
        self.J = int(J)
        n = 2**self.J
        self.xi = np.arange(n // 2 + 1, dtype=float)
        K = max(self.J, 1)
        cum = [_theta(self.xi / 2.0**k) for k in range(K)]
        windows = [cum[0]] + [cum[k] - cum[k - 1] for k in range(1, K)]
        # theta(|xi| / 2^(J-1)) == 1 on every represented frequency already
        self.windows = np.array(windows)
        self.windows.flags.writeable = False

    @property
    def K(self) -> int:
        return self.windows.shape[0]

    def blocks(self, x: np.ndarray) -> np.ndarray:
        """Delta_k x for every k, shape (K,) + x.shape."""
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        spectrum = np.fft.rfft(x, axis=-1)
        return np.fft.irfft(self.windows.reshape((self.K,) + (1,) * (x.ndim - 1) + (-1,)) * spectrum, n=n, axis=-1)


@lru_cache(maxsize=32)
def frequency_partition(J: int) -> FrequencyPartition:
    return FrequencyPartition(J)


def norm_from_blocks(blocks: np.ndarray, params: SpaceParams) -> np.ndarray:
    """Norm from precomputed Littlewood-Paley blocks of shape (K, ..., n)."""
    K = blocks.shape[0]
    weights = 2.0 ** (np.arange(K) * params.s * params.q)
    mag = np.abs(blocks)
    powered = mag * mag if params.q == 2 else mag**params.q
    inner = np.tensordot(weights, powered, axes=(0, 0))
    outer = inner if params.p == params.q else inner ** (params.p / params.q)
    return np.mean(outer, axis=-1) ** (1.0 / params.p)


def tl_norm_array(x: np.ndarray, params: SpaceParams) -> np.ndarray:
    """Discrete F^s_{p,q} norm along the last axis."""
    x = np.asarray(x, dtype=float)
    part = frequency_partition(level_of_length(x.shape[-1]))
    return norm_from_blocks(part.blocks(x), params)


def tl_norm(f: GridFunction, params: SpaceParams) -> float:
    return float(tl_norm_array(f.samples, params))


def tl_norm_and_gradient(x: np.ndarray, params: SpaceParams):
    """Norm along the last axis and its gradient with respect to the samples."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    part = frequency_partition(level_of_length(n))
    p, q = params.p, params.q
    blocks = part.blocks(x)
    mag = np.abs(blocks)
    k = np.arange(part.K).reshape((part.K,) + (1,) * x.ndim)
    a = 2.0 ** (k * params.s * q)
    inner = np.sum(a * mag**q, axis=0)
    norm = np.mean(inner ** (p / q), axis=-1) ** (1.0 / p)
    with np.errstate(divide="ignore", invalid="ignore"):
        outer = np.where(inner > 0, inner ** (p / q - 1.0), 0.0)
        dblock = np.where(mag > 0, a * mag ** (q - 1.0) * np.sign(blocks), 0.0)
        scale = np.where(norm > 0, norm ** (1.0 - p), 0.0) / n
    # the window filters are symmetric, so each block map is self-adjoint
    spectrum = np.fft.rfft(outer * dblock, axis=-1)
    back = np.fft.irfft(np.sum(part.windows.reshape((part.K,) + (1,) * (x.ndim - 1) + (-1,)) * spectrum, axis=0),
                        n=n, axis=-1)
    return norm, scale[..., None] * back


def l2_weight(J: int, s: float) -> np.ndarray:
    """Fourier weight of the discrete F^s_{2,2} norm: (sum_k 2^(2ks) phi_k^2)^(1/2).

    tl_norm(f, (s, 2, 2))**2 == 2^-J sum_x |W f|^2 with this weight.
    """
    part = frequency_partition(J)
    k = np.arange(part.K)[:, None]
    return np.sqrt(np.sum(2.0 ** (2 * k * s) * part.windows**2, axis=0))


def dual_params(params: SpaceParams) -> SpaceParams:
    """(s, p, q) -> (-s, p', q')."""
    if params.p <= 1 or params.q <= 1:
        raise ValueError("dual exponents need p > 1 and q > 1")
    return SpaceParams(-params.s, params.p / (params.p - 1), params.q / (params.q - 1))


# ---------------------------------------------------------------------------
# regions


class Region(str, enum.Enum):
    UNCONDITIONAL = "Unconditional"
    SCHAUDER_ONLY = "SchauderOnly"
    SCHAUDER_ENDPOINT = "SchauderEndpoint"
    OUTSIDE = "Outside"


def is_unconditional(params: SpaceParams) -> bool:
    x, s, iq = params.inv_p, params.s, 1.0 / params.q
    return max(x - 1, iq - 1) < s < min(x, iq, 1.0)


def is_schauder(params: SpaceParams) -> bool:
    x, s = params.inv_p, params.s
    return x - 1 < s < min(x, 1.0)


def is_schauder_endpoint(params: SpaceParams) -> bool:
    return abs(params.s - (params.inv_p - 1)) <= EDGE_TOL and 0.5 < params.p <= 1


def region_classify(params: SpaceParams) -> Region:
    # the endpoint line is tested first: it is disjoint from the open
    # regions, and rounding can push a point on it across s = 1/p - 1
    if is_schauder_endpoint(params):
        return Region.SCHAUDER_ENDPOINT
    if is_unconditional(params):
        return Region.UNCONDITIONAL
    if is_schauder(params):
        return Region.SCHAUDER_ONLY
    return Region.OUTSIDE


def _open_triangle_contains(pt, a, b, c) -> bool:
    def cross(o, p1, p2):
        return (p1[0] - o[0]) * (p2[1] - o[1]) - (p1[1] - o[1]) * (p2[0] - o[0])

    d1, d2, d3 = cross(a, b, pt), cross(b, c, pt), cross(c, a, pt)
    return (d1 > 0 and d2 > 0 and d3 > 0) or (d1 < 0 and d2 < 0 and d3 < 0)


def triangle_Tq_vertices(q: float):
    return ((1.0, 1.0), (1.0 / q, 1.0 / q), (1.0 + 1.0 / q, 1.0 / q))


def in_triangle_Tq(params: SpaceParams) -> bool:
    if params.q <= 1:
        raise ValueError("T_q is defined for q > 1; see low_q_triangle")
    return _open_triangle_contains((params.inv_p, params.s), *triangle_Tq_vertices(params.q))


def in_quad(params: SpaceParams) -> bool:
    """max(1/q, 1/p - 1) < s < min(1/p, 1)."""
    x, s = params.inv_p, params.s
    return max(1.0 / params.q, x - 1) < s < min(x, 1.0)


def critical_u(params: SpaceParams) -> float:
    """1 / (s - 1/q), or inf when every u >= 1 is admissible."""
    gap = params.s - 1.0 / params.q
    return math.inf if gap <= 0 else 1.0 / gap


def low_q_vertices(q: float):
    """Triangle of the q <= 1 remark: (0,-1), (1/q, 1/q-1), (1/q-1, 1/q-1)."""
    return ((0.0, -1.0), (1.0 / q, 1.0 / q - 1.0), (1.0 / q - 1.0, 1.0 / q - 1.0))


def low_q_triangle(params: SpaceParams, vertices=None):
    """Interior test for the 1/2 < q <= 1 triangle and threshold 1/(1/q - 1 - s).

    Returns ``(inside, threshold)``; the threshold is inf when 1/q - 1 - s <= 0.
    """
    if not 0.5 < params.q <= 1:
        raise ValueError("low-q triangle needs 1/2 < q <= 1")
    if vertices is None:
        vertices = low_q_vertices(params.q)
    inside = _open_triangle_contains((params.inv_p, params.s), *vertices)
    gap = 1.0 / params.q - 1.0 - params.s
    return inside, (1.0 / gap if gap > 0 else math.inf)


def classify_record(params: SpaceParams) -> dict:
    """All region flags and thresholds for one parameter triple."""
    rec = {**params.as_dict(), "region": region_classify(params).value,
           "unconditional": is_unconditional(params), "schauder": is_schauder(params),
           "schauder_endpoint": is_schauder_endpoint(params), "in_quad": in_quad(params)}
    u_star = critical_u(params)
    rec["critical_u"] = None if math.isinf(u_star) else u_star
    rec["in_Tq"] = in_triangle_Tq(params) if params.q > 1 else None
    if 0.5 < params.q <= 1:
        inside, thr = low_q_triangle(params)
        rec["in_low_q_triangle"] = inside
        rec["low_q_threshold"] = None if math.isinf(thr) else thr
    if params.p > 1 and params.q > 1:
        rec["dual"] = dual_params(params).as_dict()
    return rec


# ---------------------------------------------------------------------------
# region boundaries for plotting


def _band_polygon(lower, upper, x_min, x_max):
    """Polygon {x_min <= x <= x_max, max(lower) <= s <= min(upper)}.

    ``lower``/``upper`` are lists of lines (slope, intercept).
    """
    lines = list(lower) + list(upper)
    xs = {x_min, x_max}
    for i, (a1, b1) in enumerate(lines):
        for a2, b2 in lines[i + 1:]:
            if a1 != a2:
                xs.add((b2 - b1) / (a1 - a2))

    def lo(x):
        return max(a * x + b for a, b in lower)

    def hi(x):
        return min(a * x + b for a, b in upper)

    xs = sorted(x for x in xs if x_min - EDGE_TOL <= x <= x_max + EDGE_TOL and hi(x) - lo(x) >= -EDGE_TOL)
    top = [(x, hi(x)) for x in xs]
    bottom = [(x, lo(x)) for x in reversed(xs)]
    pts = []
    for pt in top + bottom:
        if not pts or max(abs(pt[0] - pts[-1][0]), abs(pt[1] - pts[-1][1])) > EDGE_TOL:
            pts.append(pt)
    if len(pts) > 1 and max(abs(pts[0][0] - pts[-1][0]), abs(pts[0][1] - pts[-1][1])) <= EDGE_TOL:
        pts.pop()
    return _drop_collinear(pts)


def _drop_collinear(pts):
    out = []
    n = len(pts)
    for i in range(n):
        a, b, c = pts[i - 1], pts[i], pts[(i + 1) % n]
        if abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) > EDGE_TOL:
            out.append(b)
    return out


def _densify(vertices, closed: bool, resolution: int):
    pts = list(vertices) + ([vertices[0]] if closed else [])
    if resolution <= 1:
        return [tuple(map(float, p)) for p in pts]
    out = []
    for a, b in zip(pts[:-1], pts[1:]):
        for t in np.linspace(0.0, 1.0, resolution, endpoint=False):
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    out.append(tuple(pts[-1]))
    return [(float(x), float(y)) for x, y in out]


def region_diagram(q: float, resolution: int = 1) -> list:
    """Boundary polylines in the (1/p, s) plane.

    Returns a list of ``{"label", "closed", "vertices", "points"}`` records;
    ``vertices`` are the exact corners, ``points`` the polyline sampled with
    ``resolution`` points per edge.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    iq = 1.0 / q
    regions = [
        ("unconditional", True,
         _band_polygon([(1.0, -1.0), (0.0, iq - 1.0)], [(1.0, 0.0), (0.0, iq), (0.0, 1.0)], 0.0, 3.0)),
        ("schauder", True, _band_polygon([(1.0, -1.0)], [(1.0, 0.0), (0.0, 1.0)], 0.0, 3.0)),
        ("schauder_endpoint", False, [(1.0, 0.0), (2.0, 1.0)]),
    ]
    if q > 1:
        regions.append(("T_q", True, list(triangle_Tq_vertices(q))))
        regions.append(("quadrilateral", True,
                        _band_polygon([(0.0, iq), (1.0, -1.0)], [(1.0, 0.0), (0.0, 1.0)], 0.0, 3.0)))
    elif q > 0.5:
        regions.append(("low_q_triangle", True, list(low_q_vertices(q))))
    return [{"label": label, "closed": closed,
             "vertices": [(float(x), float(y)) for x, y in verts],
             "points": _densify(verts, closed, resolution)}
            for label, closed, verts in regions]
