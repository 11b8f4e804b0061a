"""Anisotropic dyadic cubes on H^n.

A generation-k cube is the half-open box

    prod_i [a_i 2^-k, (a_i+1) 2^-k)  x  [b 4^-k, (b+1) 4^-k),

so z-sides halve and the t-side quarters from one generation to the next,
matching the anisotropic dilation.  Generation-k cubes tile R^(2n+1)
disjointly, nesting is exact, and every cube has exactly 2^(2n+2) children.
Scaling by powers of two is exact in floating point, so point location and
box membership agree bit for bit.

Metric sandwich constants (an inner Koranyi ball inside the cube and an
outer one containing it) are only uniform on bounded windows, because balls
centred off the t-axis tilt; `sandwich_measure` therefore insists that the
cube sit inside a window ball around the origin.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .group import HPoint, dist

__all__ = [
    "CubeId",
    "SandwichReport",
    "cube_at",
    "cube_index_arrays",
    "children",
    "contains",
    "corners",
    "cubes_in_tube",
    "parent",
    "sandwich_measure",
    "zbox_distance",
]

_INDEX_LIMIT = 2.0 ** 62


@dataclass(frozen=True, order=True)
class CubeId:
    """Generation k plus integer cell coordinates (a for z, b for t)."""

    k: int
    a: tuple
    b: int

    def __post_init__(self):
        if len(self.a) < 2 or len(self.a) % 2 != 0:
            raise ValueError(f"z-index must have even length >= 2, got {self.a!r}")
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))

    @property
    def n(self) -> int:
        return len(self.a) // 2

    @property
    def ell(self) -> float:
        """Sidelength 2^-k of the z-sides; the t-side is ell^2."""
        return 2.0 ** -self.k

    def z_bounds(self):
        s = self.ell
        lo = np.array([ai * s for ai in self.a])
        return lo, lo + s

    def t_bounds(self):
        s = 2.0 ** (-2 * self.k)
        return self.b * s, (self.b + 1) * s

    @property
    def center(self) -> HPoint:
        zlo, zhi = self.z_bounds()
        tlo, thi = self.t_bounds()
        return HPoint(0.5 * (zlo + zhi), 0.5 * (tlo + thi))

    def to_json(self) -> dict:
        return {"k": self.k, "a": list(self.a), "b": self.b}


class SandwichReport(NamedTuple):
    lambda_eff: float
    Lambda_eff: float
    window_radius: float


def cube_index_arrays(k: int, zs: np.ndarray, ts: np.ndarray):
    """Integer cell coordinates at generation k for arrays of points."""
    az = np.floor(zs * 2.0 ** k)
    bt = np.floor(ts * 2.0 ** (2 * k))
    if np.any(np.abs(az) >= _INDEX_LIMIT) or np.any(np.abs(bt) >= _INDEX_LIMIT):
        raise OverflowError("cube indices exceed the integer range; k too deep for these coordinates")
    return az.astype(np.int64), bt.astype(np.int64)


def cube_at(k: int, p: HPoint) -> CubeId:
    """The unique generation-k cube containing p (half-open convention)."""
    az, bt = cube_index_arrays(k, p.z[None, :], np.array([p.t]))
    return CubeId(k, tuple(az[0].tolist()), int(bt[0]))


def parent(Q: CubeId) -> CubeId:
    return CubeId(Q.k - 1, tuple(ai // 2 for ai in Q.a), Q.b // 4)


def children(Q: CubeId) -> list:
    """The 2^(2n+2) generation-(k+1) cubes tiling Q, in lexicographic order."""
    base_a = tuple(2 * ai for ai in Q.a)
    out = []
    for off in itertools.product((0, 1), repeat=len(Q.a)):
        a = tuple(base_a[i] + off[i] for i in range(len(off)))
        for db in range(4):
            out.append(CubeId(Q.k + 1, a, 4 * Q.b + db))
    return out


def contains(Q: CubeId, p: HPoint) -> bool:
    return cube_at(Q.k, p) == Q


def corners(Q: CubeId) -> np.ndarray:
    """All 2^(2n+1) corner points of the closed box, rows (corners, 2n+1)."""
    zlo, zhi = Q.z_bounds()
    tlo, thi = Q.t_bounds()
    lo = np.append(zlo, tlo)
    hi = np.append(zhi, thi)
    dim = lo.size
    pts = np.empty((2 ** dim, dim))
    for i, pick in enumerate(itertools.product((0, 1), repeat=dim)):
        pts[i] = np.where(pick, hi, lo)
    return pts


def sandwich_measure(Q: CubeId, window_radius: float, samples: int, seed: int) -> SandwichReport:
    """Measured ball-sandwich constants of Q relative to its sidelength.

    Lambda_eff is the smallest r/ell with Q inside B(p_Q, r); since the
    fourth power of the Koranyi gauge is convex, the supremum of the
    distance to the centre over the closed box is attained at a corner, so
    the corner maximum is exact.  lambda_eff is the largest r/ell with the
    open ball U(p_Q, r) inside Q, estimated from face centres plus `samples`
    seeded points per face, drawn in box-relative coordinates (which makes
    the report covariant under exact dyadic rescaling).
    """
    if not isinstance(samples, int) or samples < 1:
        raise ValueError(f"samples must be a positive integer, got {samples!r}")
    if not window_radius > 0:
        raise ValueError(f"window_radius must be positive, got {window_radius!r}")
    cs = corners(Q)
    gauge4 = [(float(c[:-1] @ c[:-1])) ** 2 + 16.0 * c[-1] ** 2 for c in cs]
    if max(gauge4) > window_radius ** 4:
        raise ValueError(
            f"cube closure leaves the window ball B(0, {window_radius}); sandwich constants "
            "are only meaningful on a bounded window"
        )
    p_Q = Q.center
    ell = Q.ell
    Lambda_eff = max(dist(HPoint(c[:-1], c[-1]), p_Q) for c in cs) / ell

    zlo, zhi = Q.z_bounds()
    tlo, thi = Q.t_bounds()
    lo = np.append(zlo, tlo)
    hi = np.append(zhi, thi)
    dim = lo.size
    rng = np.random.Generator(np.random.Philox(seed))
    rel = rng.uniform(size=(2 * dim, samples, dim))
    best = math.inf
    for axis in range(dim):
        for side, fixed in ((0, lo[axis]), (1, hi[axis])):
            pts = lo + rel[2 * axis + side] * (hi - lo)
            pts[:, axis] = fixed
            centre_pt = 0.5 * (lo + hi)
            centre_pt[axis] = fixed
            for row in np.vstack([pts, centre_pt]):
                best = min(best, dist(HPoint(row[:-1], row[-1]), p_Q))
    return SandwichReport(best / ell, Lambda_eff, float(window_radius))


def zbox_distance(Q: CubeId, z_point: np.ndarray) -> float:
    """Euclidean distance from a z-point to the closed z-section of Q."""
    zlo, zhi = Q.z_bounds()
    gap = np.maximum(zlo - z_point, 0.0) + np.maximum(z_point - zhi, 0.0)
    return float(np.linalg.norm(gap))


def cubes_in_tube(Q0: CubeId, N: int, kappa: float) -> list:
    """Depth-N descendants of Q0 whose closure meets the axis tube.

    The tube is T_kappa = {(z,t) in Q0 : |z| <= kappa 2^-N ell(Q0)}, the
    vertical tube of the t-axis.  Closure intersection is used (the
    conservative choice for packing counts).  The number of returned cubes
    grows like 4^N = 2^(2N): the t-cells refine fourfold per depth while the
    z-cells near the axis stay O(kappa^(2n)).
    """
    if not isinstance(N, int) or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa!r}")
    k = Q0.k + N
    s = 2.0 ** -k
    rho = kappa * 2.0 ** (-N) * Q0.ell  # = kappa * s
    ranges = []
    for ai in Q0.a:
        lo_idx = ai * 2 ** N
        hi_idx = (ai + 1) * 2 ** N  # exclusive
        cand_lo = max(lo_idx, int(math.floor(-rho / s)) - 1)
        cand_hi = min(hi_idx, int(math.floor(rho / s)) + 2)
        ranges.append(range(cand_lo, cand_hi))
    out = []
    b_lo = Q0.b * 4 ** N
    b_hi = (Q0.b + 1) * 4 ** N
    rho2 = rho * rho
    for a in itertools.product(*ranges):
        d2 = 0.0
        for ai in a:
            lo_c = ai * s
            hi_c = lo_c + s
            if lo_c > 0.0:
                d = lo_c
            elif hi_c < 0.0:
                d = -hi_c
            else:
                d = 0.0
            d2 += d * d
        if d2 <= rho2:
            for b in range(b_lo, b_hi):
                out.append(CubeId(k, a, b))
    out.sort()
    return out
