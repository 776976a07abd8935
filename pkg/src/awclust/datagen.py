"""Seeded synthetic data: manifolds with uniform or gap-carrying densities.

Reproducibility contract
------------------------
All generators draw from a fixed counter-based PRNG so that a dataset is a
pure function of (generator, parameters, seed): identical across runs,
platforms, and chunk sizes, and reproducible from the spelled-out recipe
below in any language.

Core generator (64-bit splitmix-style):

    mix(z):  z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9   (all mod 2^64)
             z ^= z >> 27;  z *= 0x94D049BB133111EB
             z ^= z >> 31;  return z

    word(state0, i)  = mix(state0 + (i + 1) * 0x9E3779B97F4A7C15)   i = 0, 1, ...
    state0(seed, stream) = mix(seed XOR mix(stream XOR 0x6A09E667F3BCC909))

    unit(state0, i)  = (word(state0, i) >> 11) * 2^-53      uniform in [0, 1)

Standard normals come from consecutive unit pairs via Box-Muller: with
u1 = unit(2p), u2 = unit(2p + 1), normal(2p) = sqrt(-2 ln(1 - u1)) cos(2 pi u2)
and normal(2p + 1) uses sin instead of cos.

Each sampler documents which (stream, counter) positions it consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "CounterRng",
    "Dataset",
    "ManifoldSpec",
    "GapDensitySpec",
    "GAP_LABEL",
    "sample_circle_gap",
    "sample_uniform_manifold",
    "add_bounded_noise",
]

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STREAM_SALT = np.uint64(0x6A09E667F3BCC909)

#: label value for points falling between the clusters
GAP_LABEL = 0


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class CounterRng:
    """Counter-based uniform/normal source; see the module docstring.

    Random access: draw i is a pure function of (seed, stream, i), so batches
    of any size produce identical values.
    """

    def __init__(self, seed: int, stream: int = 0):
        with np.errstate(over="ignore"):
            self._state0 = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ _mix(np.uint64(stream & 0xFFFFFFFFFFFFFFFF) ^ _STREAM_SALT))
        self._next = 0

    def words(self, start: int, count: int) -> np.ndarray:
        """Raw 64-bit words at counters start .. start+count-1."""
        idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            return _mix(self._state0 + idx * _GOLDEN)

    def units_at(self, start: int, count: int) -> np.ndarray:
        """Uniform [0, 1) doubles at explicit counter positions."""
        return (self.words(start, count) >> np.uint64(11)) * 2.0**-53

    def units(self, count: int) -> np.ndarray:
        """Next ``count`` uniforms, advancing the sequential cursor."""
        out = self.units_at(self._next, count)
        self._next += count
        return out

    def normals_at(self, start: int, count: int) -> np.ndarray:
        """Standard normals at gaussian indices start .. start+count-1.

        Gaussian index t maps to the uniform pair (2*(t//2), 2*(t//2)+1);
        even t takes the cosine branch of Box-Muller, odd t the sine branch.
        """
        t = np.arange(start, start + count, dtype=np.int64)
        pair = 2 * (t // 2)
        u_lo = (self._word_at(pair) >> np.uint64(11)) * 2.0**-53
        u_hi = (self._word_at(pair + 1) >> np.uint64(11)) * 2.0**-53
        radius = np.sqrt(-2.0 * np.log1p(-u_lo))
        angle = 2.0 * math.pi * u_hi
        return np.where(t % 2 == 0, radius * np.cos(angle), radius * np.sin(angle))

    def _word_at(self, idx: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return _mix(self._state0 + (idx.astype(np.uint64) + np.uint64(1)) * _GOLDEN)


@dataclass
class Dataset:
    """Point cloud with optional ground-truth labels (evaluation only)."""

    points: np.ndarray  # (n, D) float64
    labels: Optional[np.ndarray] = None  # (n,) int, or None

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[0] < 1 or self.points.shape[1] < 1:
            raise ValueError("points must be a non-empty (n, D) array")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("points must be finite")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.points.shape[0],):
                raise ValueError("labels must be one integer per point")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class ManifoldSpec:
    """Supported synthetic manifolds, isometrically embedded.

    kind is one of "circle" (radius, first two coordinates), "sphere2"
    (radius, first three coordinates) or "segment" (length, first
    coordinate); remaining ambient coordinates are zero.
    """

    kind: str
    size: float = 1.0
    ambient_dim: int = 0  # 0 means the minimal embedding dimension

    _MIN_DIM = {"circle": 2, "sphere2": 3, "segment": 1}

    def __post_init__(self) -> None:
        if self.kind not in self._MIN_DIM:
            raise ValueError(f"unknown manifold kind {self.kind!r}")
        if self.size <= 0.0:
            raise ValueError("manifold size must be positive")
        min_dim = self._MIN_DIM[self.kind]
        if self.ambient_dim == 0:
            object.__setattr__(self, "ambient_dim", min_dim)
        elif self.ambient_dim < min_dim:
            raise ValueError(f"{self.kind} needs ambient dimension >= {min_dim}")


@dataclass(frozen=True)
class GapDensitySpec:
    """Two circle clusters separated by a rarefied band.

    The clusters are the arcs with |y| > band, carrying density level 1; the
    complement carries level (1 - gap_depth).  gap_depth = 1 empties the gap.
    """

    gap_depth: float
    band: float = 0.25
    base_level: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.gap_depth <= 1.0):
            raise ValueError("gap_depth must lie in [0, 1]")
        if not (0.0 < self.band < 1.0):
            raise ValueError("band must lie in (0, 1)")
        if self.base_level <= 0.0:
            raise ValueError("base_level must be positive")


def sample_circle_gap(n: int, eps: float, seed: int, stream: int = 0) -> Dataset:
    """n i.i.d. draws from the two-cluster unit-circle density.

    Density 1 on the arcs with |y| > 1/4 and (1 - eps) in between, sampled by
    rejection with the uniform envelope.  Proposal j consumes counters 2j
    (angle) and 2j + 1 (acceptance).  Labels: 1 for y > 1/4, 2 for y < -1/4,
    GAP_LABEL for gap points.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    spec = GapDensitySpec(gap_depth=eps)
    rng = CounterRng(seed, stream)
    angles = np.empty(n, dtype=np.float64)
    got = 0
    proposal = 0
    while got < n:
        chunk = max(2 * (n - got) + 16, 64)
        u = rng.units_at(2 * proposal, 2 * chunk)
        phi = 2.0 * math.pi * u[0::2]
        accept_u = u[1::2]
        level = np.where(np.abs(np.sin(phi)) > spec.band, 1.0, 1.0 - spec.gap_depth)
        keep = phi[accept_u < level]
        take = min(n - got, keep.size)
        angles[got : got + take] = keep[:take]
        got += take
        proposal += chunk
    x = np.cos(angles)
    y = np.sin(angles)
    labels = np.where(y > spec.band, 1, np.where(y < -spec.band, 2, GAP_LABEL))
    return Dataset(points=np.column_stack([x, y]), labels=labels)


def sample_uniform_manifold(spec: ManifoldSpec, n: int, seed: int, stream: int = 0) -> Dataset:
    """Uniform i.i.d. samples on the given manifold; no labels.

    Counter layout: circle and segment consume one uniform per point (counter
    i).  sphere2 consumes gaussian indices 3i .. 3i+2 per point (paired
    Box-Muller scheme) and normalizes the triple.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = CounterRng(seed, stream)
    pts = np.zeros((n, spec.ambient_dim), dtype=np.float64)
    if spec.kind == "circle":
        phi = 2.0 * math.pi * rng.units_at(0, n)
        pts[:, 0] = spec.size * np.cos(phi)
        pts[:, 1] = spec.size * np.sin(phi)
    elif spec.kind == "segment":
        pts[:, 0] = spec.size * rng.units_at(0, n)
    else:  # sphere2
        g = rng.normals_at(0, 3 * n).reshape(n, 3)
        norms = np.linalg.norm(g, axis=1)
        # a zero triple has probability ~2^-150; resample deterministically
        bad = norms == 0.0
        if bad.any():
            g[bad] = 1.0
            norms = np.linalg.norm(g, axis=1)
        pts[:, :3] = spec.size * g / norms[:, None]
    return Dataset(points=pts)


def add_bounded_noise(data: Dataset, r_xi: float, seed: int, stream: int = 0) -> Dataset:
    """Displace each point by an independent uniform draw from the r_xi-ball.

    Point i uses its own stream (stream + 1 + i): gaussian indices 0 .. D-1
    give the direction and the next uniform (counter 2*ceil(D/2)) gives the
    radius fraction u^(1/D).  r_xi = 0 returns the dataset unchanged.
    """
    if r_xi < 0.0:
        raise ValueError("r_xi must be >= 0")
    if r_xi == 0.0:
        return data
    n, dim = data.points.shape
    out = data.points.copy()
    for i in range(n):
        prng = CounterRng(seed, stream + 1 + i)
        g = prng.normals_at(0, dim)
        norm = float(np.linalg.norm(g))
        if norm == 0.0:
            g = np.ones(dim)
            norm = float(np.linalg.norm(g))
        u = float(prng.units_at(2 * ((dim + 1) // 2), 1)[0])
        out[i] += r_xi * (u ** (1.0 / dim)) * g / norm
    labels = None if data.labels is None else data.labels.copy()
    return Dataset(points=out, labels=labels)
