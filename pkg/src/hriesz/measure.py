"""Atomic measures: finite weighted point clouds standing in for Radon measures.

Atoms are kept in a canonical form: rows sorted lexicographically by
coordinates, exact duplicates merged with weights summed.  Queries are pure
and vectorized; cube membership uses the same power-of-two scaling as the
lattice, so partition sums are consistent with point location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .group import HPoint, knorm4_of_offsets, offsets_from
from .lattice import CubeId, cube_index_arrays

__all__ = [
    "AtomicMeasure",
    "CantorParams",
    "axis_segment_measure",
    "cantor_tube_measure",
    "from_atoms",
    "load_atoms",
    "mass_in_ball",
    "mass_in_cube",
    "save_atoms",
    "uniform_on_cube",
]


def _canonicalize(zs, ts, ws):
    ws = np.asarray(ws, dtype=float).reshape(-1)
    zs = np.asarray(zs, dtype=float).reshape(len(ws), -1)
    ts = np.asarray(ts, dtype=float).reshape(-1)
    rows = np.column_stack([zs, ts])
    order = np.lexsort(rows.T[::-1])
    rows = rows[order]
    ws = ws[order]
    new_group = np.any(rows[1:] != rows[:-1], axis=1)
    starts = np.concatenate([[0], np.nonzero(new_group)[0] + 1])
    merged = rows[starts]
    wsum = np.add.reduceat(ws, starts)
    return merged[:, :-1], merged[:, -1], wsum


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Finitely many atoms (point, weight > 0) with a cached total mass."""

    zs: np.ndarray
    ts: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        zs = np.ascontiguousarray(self.zs, dtype=float)
        ts = np.ascontiguousarray(self.ts, dtype=float)
        ws = np.ascontiguousarray(self.weights, dtype=float)
        if zs.ndim != 2 or zs.shape[1] < 2 or zs.shape[1] % 2 != 0:
            raise ValueError(f"zs must have shape (N, 2n), got {zs.shape}")
        if ts.shape != (zs.shape[0],) or ws.shape != (zs.shape[0],):
            raise ValueError("zs, ts and weights must have matching lengths")
        if not (np.all(np.isfinite(zs)) and np.all(np.isfinite(ts)) and np.all(np.isfinite(ws))):
            raise ValueError("atom coordinates and weights must be finite")
        if np.any(ws <= 0):
            raise ValueError("all weights must be positive")
        for arr in (zs, ts, ws):
            arr.flags.writeable = False
        object.__setattr__(self, "zs", zs)
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "_total", math.fsum(ws.tolist()))

    def __len__(self):
        return self.zs.shape[0]

    def __repr__(self):
        return f"AtomicMeasure(n={self.n}, atoms={len(self)}, total_mass={self.total_mass})"

    @property
    def n(self) -> int:
        return self.zs.shape[1] // 2

    @property
    def total_mass(self) -> float:
        return self._total

    def atom(self, i: int):
        return HPoint(self.zs[i], self.ts[i]), float(self.weights[i])

    def points(self) -> np.ndarray:
        return np.column_stack([self.zs, self.ts])

    def scale(self, c: float) -> "AtomicMeasure":
        """Same atoms with every weight multiplied by c > 0."""
        if not c > 0:
            raise ValueError(f"scale factor must be positive, got {c!r}")
        return AtomicMeasure(self.zs, self.ts, self.weights * c)


def _empty(n: int) -> AtomicMeasure:
    return AtomicMeasure(np.zeros((0, 2 * n)), np.zeros(0), np.zeros(0))


def from_atoms(points, weights, n: int | None = None) -> AtomicMeasure:
    """Build a measure from points (HPoint sequence or (N, 2n+1) array).

    Duplicate points are merged with weights summed; atoms end up sorted
    lexicographically by coordinates.  An empty input yields the empty
    measure (n must then be given).
    """
    weights = np.asarray(list(weights), dtype=float)
    if isinstance(points, np.ndarray):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("point array must be 2-d with rows (z..., t)")
    else:
        points = list(points)
        if len(points) != len(weights):
            raise ValueError(
                f"length mismatch: {len(points)} points vs {len(weights)} weights"
            )
        if len(points) == 0:
            if n is None:
                raise ValueError("empty measure needs an explicit n")
            return _empty(n)
        pts = np.stack([p.as_array() for p in points])
    if pts.shape[0] != len(weights):
        raise ValueError(f"length mismatch: {pts.shape[0]} points vs {len(weights)} weights")
    if pts.shape[0] == 0:
        if n is None:
            raise ValueError("empty measure needs an explicit n")
        return _empty(n)
    if np.any(weights <= 0):
        raise ValueError("all weights must be positive")
    zs, ts, ws = _canonicalize(pts[:, :-1], pts[:, -1], weights)
    return AtomicMeasure(zs, ts, ws)


def uniform_on_cube(Q: CubeId, count: int, total: float, seed: int) -> AtomicMeasure:
    """count i.i.d. uniform atoms in the box Q, each of weight total/count."""
    if not isinstance(count, int) or count < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")
    if not total > 0:
        raise ValueError(f"total mass must be positive, got {total!r}")
    zlo, zhi = Q.z_bounds()
    tlo, thi = Q.t_bounds()
    lo = np.append(zlo, tlo)
    hi = np.append(zhi, thi)
    rng = np.random.Generator(np.random.Philox(seed))
    pts = rng.uniform(low=lo, high=hi, size=(count, lo.size))
    w = np.full(count, total / count)
    zs, ts, ws = _canonicalize(pts[:, :-1], pts[:, -1], w)
    return AtomicMeasure(zs, ts, ws)


def axis_segment_measure(t0: float, t1: float, count: int, n: int = 1) -> AtomicMeasure:
    """Length measure on the t-axis segment [t0, t1], discretized.

    count midpoint atoms at (z=0, t0 + (i+1/2)(t1-t0)/count), each of weight
    (t1-t0)/count.  The kernel vanishes identically on the axis, so measures
    of this kind have zero truncated-Riesz operator norm at every cutoff
    while their ball masses grow like r^2 at small radii.
    """
    if not t0 < t1:
        raise ValueError(f"need t0 < t1, got {t0!r} >= {t1!r}")
    if not isinstance(count, int) or count < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")
    step = (t1 - t0) / count
    ts = t0 + (np.arange(count) + 0.5) * step
    zs = np.zeros((count, 2 * n))
    ws = np.full(count, step)
    zs, ts, ws = _canonicalize(zs, ts, ws)
    return AtomicMeasure(zs, ts, ws)


@dataclass(frozen=True)
class CantorParams:
    """Shrinking scales for the vertical-plane Cantor tube in H^1.

    eps[k] is the height of the generation-(k+1) rectangles (width eps^2);
    each scale must drop by at least a factor 4.
    """

    eps: tuple
    depth: int

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps)
        object.__setattr__(self, "eps", eps)
        if not isinstance(self.depth, int) or self.depth < 1:
            raise ValueError(f"depth must be a positive integer, got {self.depth!r}")
        if len(eps) < self.depth:
            raise ValueError(f"need at least {self.depth} scales, got {len(eps)}")
        if any(e <= 0 for e in eps):
            raise ValueError("all scales must be positive")
        if eps[0] > 1.0:
            raise ValueError("the first scale must be <= 1 so children fit in the unit-height tube")
        for k in range(self.depth - 1):
            if eps[k + 1] > eps[k] / 4.0:
                raise ValueError(
                    f"scale constraint violated at level {k + 1}: "
                    f"{eps[k + 1]!r} > {eps[k]!r}/4"
                )


def cantor_tube_measure(params: CantorParams) -> AtomicMeasure:
    """Equal-weight atoms at the centres of the depth-level Cantor rectangles.

    The construction lives in the vertical plane {x = 0} of H^1: the root
    rectangle spans y in [-eps_1^2/2, eps_1^2/2] and t in [-1/2, 1/2]; each
    rectangle spawns two children of height eps_(k+1) and width eps_(k+1)^2,
    flush in its top-right and bottom-left corners.  The result is a
    probability measure on 2^(depth-1) atoms.
    """
    e1 = params.eps[0]
    rects = [(-e1 * e1 / 2.0, e1 * e1 / 2.0, -0.5, 0.5)]  # (y_lo, y_hi, t_lo, t_hi)
    for level in range(1, params.depth):
        e = params.eps[level]
        h, w = e, e * e
        nxt = []
        for y_lo, y_hi, t_lo, t_hi in rects:
            nxt.append((y_hi - w, y_hi, t_hi - h, t_hi))   # top right
            nxt.append((y_lo, y_lo + w, t_lo, t_lo + h))   # bottom left
        rects = nxt
    count = len(rects)
    zs = np.zeros((count, 2))
    ts = np.empty(count)
    for i, (y_lo, y_hi, t_lo, t_hi) in enumerate(rects):
        zs[i, 1] = 0.5 * (y_lo + y_hi)
        ts[i] = 0.5 * (t_lo + t_hi)
    ws = np.full(count, 1.0 / count)
    zs, ts, ws = _canonicalize(zs, ts, ws)
    return AtomicMeasure(zs, ts, ws)


def cube_mask(mu: AtomicMeasure, Q: CubeId) -> np.ndarray:
    """Boolean mask of atoms inside the half-open box Q."""
    if 2 * Q.n != mu.zs.shape[1]:
        raise DimensionMismatchError(f"cube has n={Q.n} but measure has n={mu.n}")
    if len(mu) == 0:
        return np.zeros(0, dtype=bool)
    az, bt = cube_index_arrays(Q.k, mu.zs, mu.ts)
    mask = bt == Q.b
    for i, ai in enumerate(Q.a):
        mask &= az[:, i] == ai
    return mask


def mass_in_cube(mu: AtomicMeasure, Q: CubeId) -> float:
    """mu(Q) for the half-open box Q; additive over the children of Q."""
    return float(mu.weights[cube_mask(mu, Q)].sum())


def mass_in_ball(mu: AtomicMeasure, center: HPoint, r: float) -> float:
    """mu(B(center, r)) with the closed Koranyi ball."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r!r}")
    if len(mu) == 0:
        return 0.0
    dz, dt = offsets_from(center, mu.zs, mu.ts)
    inside = knorm4_of_offsets(dz, dt) <= r ** 4
    return float(mu.weights[inside].sum())


def save_atoms(mu: AtomicMeasure, path) -> None:
    """Write the CSV atom format: header `n=<int>`, rows x..,y..,t,weight.

    Atoms are already sorted canonically, so output is byte-stable.
    """
    lines = [f"n={mu.n}"]
    for i in range(len(mu)):
        coords = [repr(float(v)) for v in mu.zs[i]]
        coords.append(repr(float(mu.ts[i])))
        coords.append(repr(float(mu.weights[i])))
        lines.append(",".join(coords))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_atoms(path) -> AtomicMeasure:
    """Read the CSV atom format; duplicate rows are merged."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ValueError(f"{path}: expected first line 'n=<int>'")
    try:
        n = int(lines[0][2:])
    except ValueError:
        raise ValueError(f"{path}: malformed header {lines[0]!r}") from None
    if n < 1:
        raise ValueError(f"{path}: n must be >= 1, got {n}")
    width = 2 * n + 2
    rows = []
    for ln_no, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != width:
            raise ValueError(f"{path}:{ln_no}: expected {width} fields, got {len(parts)}")
        try:
            rows.append([float(v) for v in parts])
        except ValueError:
            raise ValueError(f"{path}:{ln_no}: non-numeric field") from None
    if not rows:
        return _empty(n)
    arr = np.asarray(rows)
    return from_atoms(arr[:, :-1], arr[:, -1], n=n)
