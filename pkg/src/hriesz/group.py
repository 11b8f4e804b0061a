"""Heisenberg group arithmetic, anisotropic dilations and the Koranyi metric.

Points are kept in exponential coordinates (z, t) with z = (x_1..x_n, y_1..y_n).
The group law twists the vertical coordinate by the standard symplectic form

    (z, t) . (z', t') = (z + z', t + t' + (1/2) sum_a (x_a y'_a - y_a x'_a)),

the antisymmetric convention, which is the one consistent with the inverse
(-z, -t), with left invariance of the metric, and with the Riesz kernel being
the horizontal gradient of the fundamental solution (see `kernel`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatchError

__all__ = [
    "GroupParams",
    "HPoint",
    "VolumeEstimate",
    "ball_volume_mc",
    "dilate",
    "dist",
    "inv",
    "knorm",
    "mul",
    "origin",
]


@dataclass(frozen=True)
class GroupParams:
    """Ambient index n and the derived homogeneous dimension D = 2n + 2."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"Heisenberg index n must be a positive integer, got {self.n!r}")

    @property
    def D(self) -> int:
        return 2 * self.n + 2


@dataclass(frozen=True, eq=False)
class HPoint:
    """A point (z, t) of H^n; z has length 2n, all coordinates finite."""

    z: np.ndarray
    t: float

    def __post_init__(self):
        z = np.array(self.z, dtype=float)
        if z.ndim != 1 or z.size < 2 or z.size % 2 != 0:
            raise ValueError(f"z must be a flat vector of even length >= 2, got shape {z.shape}")
        t = float(self.t)
        if not (np.all(np.isfinite(z)) and math.isfinite(t)):
            raise ValueError("point coordinates must be finite")
        z.flags.writeable = False
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", t)

    @property
    def n(self) -> int:
        return self.z.size // 2

    def as_array(self) -> np.ndarray:
        return np.append(self.z, self.t)

    def __repr__(self):
        return f"HPoint(z={self.z.tolist()}, t={self.t})"


class VolumeEstimate(NamedTuple):
    estimate: float
    stderr: float


def origin(n: int) -> HPoint:
    return HPoint(np.zeros(2 * n), 0.0)


def _check_same_n(p: HPoint, q: HPoint):
    if p.z.size != q.z.size:
        raise DimensionMismatchError(
            f"points live in different groups: n={p.n} vs n={q.n}"
        )


def _omega(z1: np.ndarray, z2: np.ndarray) -> float:
    # sum_a x_a y'_a - y_a x'_a
    n = z1.size // 2
    return float(z1[:n] @ z2[n:] - z1[n:] @ z2[:n])


def mul(p: HPoint, q: HPoint) -> HPoint:
    """Group product p . q."""
    _check_same_n(p, q)
    return HPoint(p.z + q.z, p.t + q.t + 0.5 * _omega(p.z, q.z))


def inv(p: HPoint) -> HPoint:
    """Group inverse (-z, -t)."""
    return HPoint(-p.z, -p.t)


def dilate(lam: float, p: HPoint) -> HPoint:
    """Anisotropic dilation (z, t) -> (lam z, lam^2 t)."""
    if not lam > 0:
        raise ValueError(f"dilation factor must be positive, got {lam!r}")
    return HPoint(lam * p.z, lam * lam * p.t)


def knorm4(p: HPoint) -> float:
    """Fourth power of the Koranyi gauge, |z|^4 + 16 t^2."""
    zn2 = float(p.z @ p.z)
    return zn2 * zn2 + 16.0 * p.t * p.t


def knorm(p: HPoint) -> float:
    """Koranyi gauge (|z|^4 + 16 t^2)^(1/4); 1-homogeneous under `dilate`."""
    return knorm4(p) ** 0.25


def dist(p: HPoint, q: HPoint) -> float:
    """Koranyi distance ||q^{-1} . p||; left invariant and symmetric."""
    _check_same_n(p, q)
    dz = p.z - q.z
    dt = p.t - q.t - 0.5 * _omega(q.z, p.z)
    zn2 = float(dz @ dz)
    return (zn2 * zn2 + 16.0 * dt * dt) ** 0.25


def offsets_from(center: HPoint, zs: np.ndarray, ts: np.ndarray):
    """Coordinates (dz, dt) of center^{-1} . p_i for an array of points.

    Vectorized companion of `dist`: the returned rows satisfy
    d(p_i, center) = (|dz_i|^4 + 16 dt_i^2)^(1/4).
    """
    n = center.n
    if zs.shape[1] != 2 * n:
        raise DimensionMismatchError(f"expected z-width {2 * n}, got {zs.shape[1]}")
    dz = zs - center.z
    om = zs[:, n:] @ center.z[:n] - zs[:, :n] @ center.z[n:]
    dt = ts - center.t - 0.5 * om
    return dz, dt


def pair_offsets(zq: np.ndarray, tq: np.ndarray, zp: np.ndarray, tp: np.ndarray):
    """Row-wise coordinates of q_i^{-1} . p_i for two stacks of points."""
    n = zq.shape[1] // 2
    dz = zp - zq
    om = np.einsum("ij,ij->i", zq[:, :n], zp[:, n:]) - np.einsum(
        "ij,ij->i", zq[:, n:], zp[:, :n]
    )
    dt = tp - tq - 0.5 * om
    return dz, dt


def knorm4_of_offsets(dz: np.ndarray, dt: np.ndarray) -> np.ndarray:
    zn2 = np.einsum("ij,ij->i", dz, dz)
    return zn2 * zn2 + 16.0 * dt * dt


def ball_volume_mc(center: HPoint, r: float, samples: int, seed: int) -> VolumeEstimate:
    """Monte Carlo Lebesgue volume of the Koranyi ball B(center, r).

    Samples uniformly from the tight coordinate bounding box of the ball
    (the box tilts in t with |z| of the center, since left translations
    shear the vertical coordinate) and counts hits.  The counter-based
    Philox generator makes the estimate reproducible per seed.
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r!r}")
    if not isinstance(samples, int) or samples < 1:
        raise ValueError(f"samples must be a positive integer, got {samples!r}")
    dim = center.z.size + 1
    half_t = r * r / 4.0 + 0.5 * float(np.linalg.norm(center.z)) * r
    lo = np.append(center.z - r, center.t - half_t)
    hi = np.append(center.z + r, center.t + half_t)
    rng = np.random.Generator(np.random.Philox(seed))
    pts = rng.uniform(low=lo, high=hi, size=(samples, dim))
    dz, dt = offsets_from(center, pts[:, :-1], pts[:, -1])
    hits = knorm4_of_offsets(dz, dt) <= r ** 4
    frac = float(np.count_nonzero(hits)) / samples
    box_vol = float(np.prod(hi - lo))
    estimate = box_vol * frac
    stderr = box_vol * math.sqrt(frac * (1.0 - frac) / samples)
    return VolumeEstimate(estimate, stderr)
