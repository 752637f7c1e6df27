"""Packing sets of convex functions around a curved center.

Given a center phi0 with second derivative in [kappa1, kappa2] on a
subinterval [a, b], the construction splits [a, b] into m equal cells,
forms the chord of phi0 over each cell, and indexes pointwise maxima
phi_tau = max(phi0, max_{i: tau_i = 1} alpha_i) by the codewords tau of a
Varshamov-Gilbert code.  Provided n >= 4 m c2 / (b - a), distinct members
are separated by at least kappa1^2 (b-a)^5 / (16384 c2 m^4) in the
average squared loss, which makes the family an explicit packing witness
for the epsilon^{-1/2} local entropy rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import DesignGrid, SampledFunction

__all__ = [
    "CurvatureClass",
    "AffinePiece",
    "BinaryCode",
    "PackingSet",
    "ScalingEstimate",
    "bump_interpolants",
    "phi_tau",
    "vg_code",
    "build_packing",
    "separation_bound",
    "sup_ball_membership",
    "entropy_scaling_estimate",
    "scaling_slope",
    "spawn_seed",
]


@dataclass(frozen=True)
class CurvatureClass:
    """Convex functions with kappa1 <= phi'' <= kappa2 on [a, b] in [0, 1]."""

    a: float
    b: float
    kappa1: float
    kappa2: float

    def __post_init__(self):
        if not (0.0 <= self.a < self.b <= 1.0):
            raise ValueError(f"need 0 <= a < b <= 1, got a={self.a}, b={self.b}")
        if not (0.0 < self.kappa1 <= self.kappa2):
            raise ValueError(
                f"need 0 < kappa1 <= kappa2, got kappa1={self.kappa1}, kappa2={self.kappa2}"
            )


@dataclass(frozen=True)
class AffinePiece:
    """Affine function intercept + slope * x on [0, 1]."""

    slope: float
    intercept: float

    def __call__(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)


def bump_interpolants(phi0: Callable, m: int, cls: CurvatureClass) -> list[AffinePiece]:
    """Chords of phi0 over the m equal cells of [a, b], extended to [0, 1].

    By convexity each chord dominates phi0 on its own cell and lies below
    phi0 outside it.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    t = np.linspace(cls.a, cls.b, m + 1)
    vals = np.asarray(phi0(t), dtype=float)
    out = []
    for i in range(m):
        slope = (vals[i + 1] - vals[i]) / (t[i + 1] - t[i])
        out.append(AffinePiece(slope=float(slope), intercept=float(vals[i] - slope * t[i])))
    return out


def phi_tau(phi0: Callable, alphas: Sequence[AffinePiece], tau, grid: DesignGrid) -> SampledFunction:
    """Pointwise maximum of phi0 and the chords selected by the bits of tau."""
    tau = np.asarray(tau)
    if tau.size != len(alphas):
        raise ValueError(f"tau length {tau.size} does not match {len(alphas)} chords")
    values = np.asarray(phi0(grid.points), dtype=float)
    for bit, alpha in zip(tau, alphas):
        if bit:
            values = np.maximum(values, alpha(grid.points))
    return SampledFunction(grid, values)


@dataclass(frozen=True)
class BinaryCode:
    """Bit vectors of length m with guaranteed pairwise Hamming separation."""

    m: int
    codewords: np.ndarray
    min_hamming: int

    def __post_init__(self):
        cw = np.ascontiguousarray(np.asarray(self.codewords, dtype=np.uint8))
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)

    @property
    def size(self) -> int:
        return int(self.codewords.shape[0])


def _min_pairwise_hamming(codes: np.ndarray) -> int:
    # Hamming(u, v) = s_u + s_v - 2 <u, v>; exact in float32 since m <= 2^24
    c = codes.astype(np.float32)
    s = c.sum(axis=1)
    gram = c @ c.T
    d = s[:, None] + s[None, :] - 2.0 * gram
    np.fill_diagonal(d, np.inf)
    return int(round(float(d.min())))


def vg_code(m: int, seed: int) -> BinaryCode:
    """Greedy Varshamov-Gilbert code: at least ceil(exp(m/8)) words of
    length m with pairwise Hamming distance at least ceil(m/4).

    Random candidates are kept when far enough from all kept words; the
    draw restarts on a fresh stream if the budget of 100x the target size
    is exhausted (the Varshamov-Gilbert bound makes failure improbable).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    target = math.ceil(math.exp(m / 8.0))
    need = math.ceil(m / 4.0)
    for attempt in range(10):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(attempt,)))
        kept: list[np.ndarray] = []
        stacked = np.empty((0, m), dtype=np.uint8)
        budget = 100 * target
        while len(kept) < target and budget > 0:
            budget -= 1
            cand = rng.integers(0, 2, size=m, dtype=np.uint8)
            if stacked.shape[0]:
                dist = np.count_nonzero(stacked != cand, axis=1)
                if int(dist.min()) < need:
                    continue
            kept.append(cand)
            stacked = np.vstack([stacked, cand])
        if len(kept) >= target:
            return BinaryCode(m=m, codewords=stacked, min_hamming=_min_pairwise_hamming(stacked))
    raise RuntimeError(f"Varshamov-Gilbert construction failed for m={m} after 10 restarts")


def separation_bound(cls: CurvatureClass, m: int, c2: float) -> float:
    """Guaranteed minimum pairwise squared loss of the bump family:
    kappa1^2 (b-a)^5 / (16384 c2 m^4)."""
    span = cls.b - cls.a
    return cls.kappa1 ** 2 * span ** 5 / (16384.0 * c2 * m ** 4)


@dataclass(frozen=True)
class PackingSet:
    """The phi_tau family with its separation radius and code."""

    members: tuple[SampledFunction, ...]
    epsilon: float
    min_pairwise_l2: float
    m: int
    cls: CurvatureClass
    code: BinaryCode
    bound: float


def _min_pairwise_l2(values: np.ndarray, base: np.ndarray, n: int) -> float:
    # Work on centered members so the Gram expansion keeps full precision.
    v = values - base
    sq = np.einsum("ij,ij->i", v, v)
    k = v.shape[0]
    best = np.inf
    block = 512
    for start in range(0, k, block):
        stop = min(start + block, k)
        gram = v[start:stop] @ v.T
        d = sq[start:stop, None] + sq[None, :] - 2.0 * gram
        rows = np.arange(start, stop)
        d[rows - start, rows] = np.inf
        best = min(best, float(d.min()))
    return max(best, 0.0) / n


def build_packing(phi0: Callable, cls: CurvatureClass, m: int, grid: DesignGrid, seed: int) -> PackingSet:
    """Assemble the full packing set for a curvature-class center.

    Requires n >= 4 m c2 / (b - a); otherwise the per-cell separation
    guarantee has no support and a ValueError reports the needed n.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    span = cls.b - cls.a
    required = 4.0 * m * grid.c2 / span
    if grid.n < required:
        raise ValueError(
            f"grid too small for m={m}: need n >= {math.ceil(required)}, got n={grid.n}"
        )
    alphas = bump_interpolants(phi0, m, cls)
    code = vg_code(m, seed)
    base = np.asarray(phi0(grid.points), dtype=float)
    members = tuple(phi_tau(phi0, alphas, tau, grid) for tau in code.codewords)
    values = np.stack([member.values for member in members])
    bound = separation_bound(cls, m, grid.c2)
    return PackingSet(
        members=members,
        epsilon=0.5 * math.sqrt(bound),
        min_pairwise_l2=_min_pairwise_l2(values, base, grid.n),
        m=m,
        cls=cls,
        code=code,
        bound=bound,
    )


def sup_ball_membership(phi: SampledFunction, phi0: SampledFunction, r: float) -> bool:
    """True when max_i |phi(x_i) - phi0(x_i)| <= r (which implies the
    average squared loss is at most r^2)."""
    if phi.grid.n != phi0.grid.n or not np.array_equal(phi.grid.points, phi0.grid.points):
        raise ValueError("sampled functions live on different grids")
    return bool(np.abs(phi.values - phi0.values).max() <= r)


@dataclass(frozen=True)
class ScalingEstimate:
    """Packing-growth exponent: log|W| proportional to (1/epsilon)^slope."""

    slope: float
    points: tuple[tuple[float, float], ...]  # rows of (log(1/epsilon), log |W|)


def spawn_seed(seed: int, m: int) -> int:
    """Deterministic per-m seed derived from a global seed."""
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(m,)).generate_state(1)[0])


def scaling_slope(points: Sequence[tuple[float, float]]) -> float:
    """Exponent s with log|W| proportional to (1/epsilon)^s, fitted by
    least squares on log-log axes from (log(1/epsilon), log|W|) pairs."""
    if len(points) < 2:
        raise ValueError("need at least two points to estimate a slope")
    x = np.array([p[0] for p in points])
    y = np.log(np.array([p[1] for p in points]))
    return float(np.polyfit(x, y, 1)[0])


def entropy_scaling_estimate(
    phi0: Callable,
    cls: CurvatureClass,
    m_list: Sequence[int],
    grid: DesignGrid,
    seed: int,
) -> ScalingEstimate:
    """Estimate the exponent relating packing size to separation scale.

    For each m a packing is built at the proof-side scale
    epsilon(m) = sqrt(kappa1^2 (b-a)^5 / (16384 c2 m^4)) and the pair
    (log(1/epsilon), log|W|) recorded.  The returned slope is the least
    squares exponent of log|W| against 1/epsilon on log-log axes; the
    theoretical value is 1/2.
    """
    m_list = list(m_list)
    if len(m_list) < 2:
        raise ValueError("need at least two values of m to estimate a slope")
    points = []
    for m in m_list:
        packing = build_packing(phi0, cls, m, grid, spawn_seed(seed, m))
        eps = math.sqrt(packing.bound)
        points.append((math.log(1.0 / eps), math.log(packing.code.size)))
    return ScalingEstimate(slope=scaling_slope(points), points=tuple(points))
