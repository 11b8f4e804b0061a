"""Fundamental solution of the sub-Laplacian and the Riesz kernel.

The fundamental solution is G(p) = ||p||^(2-D) (normalisation constant
fixed to 1, which makes the identity K = grad_H G exact for the closed-form
components implemented here).  The horizontal frame used for
differentiation is

    X_a = d/dx_a - (y_a / 2) d/dt,      Y_a = d/dy_a + (x_a / 2) d/dt,

the left-invariant extension of the canonical basis for the group law in
`group`.  Note that K is *not* odd under the group inversion (-z, -t): the
y_a t terms in its numerators are even under coordinate negation.  Only the
pointwise norm |K| is inversion-invariant.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .errors import SingularityError
from .group import HPoint, knorm4

__all__ = [
    "ConeCheck",
    "cone_bound_check",
    "continuity_ratio",
    "continuity_ratio_batch",
    "frame_directions",
    "fundamental_solution",
    "horizontal_gradient_fd",
    "kernel_norm",
    "riesz_kernel",
    "riesz_kernel_batch",
]


class ConeCheck(NamedTuple):
    in_cone: bool
    kernel_norm: float
    bound: float


def fundamental_solution(p: HPoint) -> float:
    """G(p) = ||p||^(2-D) with D = 2n + 2; singular at the identity."""
    d4 = knorm4(p)
    if d4 == 0.0:
        raise SingularityError("fundamental solution is singular at the identity")
    return d4 ** (-p.n / 2.0)


def riesz_kernel_batch(zs: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Kernel components at each row of (zs, ts); shape (N, 2n)."""
    zs = np.atleast_2d(np.asarray(zs, dtype=float))
    ts = np.asarray(ts, dtype=float).reshape(-1)
    n = zs.shape[1] // 2
    x, y = zs[:, :n], zs[:, n:]
    zn2 = np.einsum("ij,ij->i", zs, zs)
    d4 = zn2 * zn2 + 16.0 * ts * ts
    if np.any(d4 == 0.0):
        raise SingularityError("Riesz kernel is singular at the identity")
    denp = d4 ** ((n + 2) / 2.0)
    zn2 = zn2[:, None]
    t = ts[:, None]
    kx = n * (-2.0 * x * zn2 + 8.0 * y * t)
    ky = n * (-2.0 * y * zn2 - 8.0 * x * t)
    return np.concatenate([kx, ky], axis=1) / denp[:, None]


def riesz_kernel(p: HPoint) -> np.ndarray:
    """K(p) = grad_H G(p), a vector of length 2n; singular at the identity."""
    return riesz_kernel_batch(p.z[None, :], np.array([p.t]))[0]


def kernel_norm(zs: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """|K| from the closed form: 2n |z| / (|z|^4 + 16 t^2)^((n+1)/2)."""
    zs = np.atleast_2d(np.asarray(zs, dtype=float))
    ts = np.asarray(ts, dtype=float).reshape(-1)
    n = zs.shape[1] // 2
    zn2 = np.einsum("ij,ij->i", zs, zs)
    d4 = zn2 * zn2 + 16.0 * ts * ts
    if np.any(d4 == 0.0):
        raise SingularityError("kernel norm is singular at the identity")
    return 2.0 * n * np.sqrt(zn2) / d4 ** ((n + 1) / 2.0)


def frame_directions(p: HPoint) -> np.ndarray:
    """Coordinate directions of the 2n horizontal fields at p, rows (2n, 2n+1)."""
    n = p.n
    dirs = np.zeros((2 * n, 2 * n + 1))
    for a in range(n):
        dirs[a, a] = 1.0
        dirs[a, -1] = -0.5 * p.z[n + a]
        dirs[n + a, n + a] = 1.0
        dirs[n + a, -1] = 0.5 * p.z[a]
    return dirs


def horizontal_gradient_fd(f: Callable[[HPoint], float], p: HPoint, h: float) -> np.ndarray:
    """Central-difference horizontal gradient of a scalar field at p.

    Component i is the symmetric difference of f along the straight line in
    the i-th horizontal direction (coefficients frozen at p); O(h^2) for
    smooth f.  This is the independent oracle used to validate the closed
    form of the Riesz kernel.
    """
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h!r}")
    dirs = frame_directions(p)
    out = np.empty(dirs.shape[0])
    for i, v in enumerate(dirs):
        fp = f(HPoint(p.z + h * v[:-1], p.t + h * v[-1]))
        fm = f(HPoint(p.z - h * v[:-1], p.t - h * v[-1]))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ValueError("field produced non-finite values near the base point")
        out[i] = (fp - fm) / (2.0 * h)
    return out


def cone_bound_check(p: HPoint) -> ConeCheck:
    """Membership in the paraboloidal cone |z| <= 16 |t|^(n+1) and the bound.

    Inside the cone the kernel norm never exceeds 32 n / 4^(n+1); the bound
    comes from maximising |K| under the cone constraint.
    """
    d4 = knorm4(p)
    if d4 == 0.0:
        raise SingularityError("cone check is singular at the identity")
    n = p.n
    in_cone = float(np.linalg.norm(p.z)) <= 16.0 * abs(p.t) ** (n + 1)
    norm = float(kernel_norm(p.z[None, :], np.array([p.t]))[0])
    bound = 32.0 * n / 4.0 ** (n + 1)
    return ConeCheck(in_cone, norm, bound)


def continuity_ratio_batch(zp, tp, zq1, tq1, zq2, tq2) -> np.ndarray:
    """Row-wise smoothness quotients for stacked triples (p, q1, q2).

    Entry i is |K(q1^{-1} p) - K(q2^{-1} p)| divided by
    max(d(q1,q2)/d(p,q1)^D, d(q1,q2)/d(p,q2)^D), all at row i.  The quotient
    is invariant under simultaneous dilation of the three points; its
    empirical supremum over admissible triples is the standard-kernel
    constant.
    """
    from .group import knorm4_of_offsets, pair_offsets

    zp = np.atleast_2d(np.asarray(zp, dtype=float))
    tp = np.asarray(tp, dtype=float).reshape(-1)
    zq1 = np.atleast_2d(np.asarray(zq1, dtype=float))
    tq1 = np.asarray(tq1, dtype=float).reshape(-1)
    zq2 = np.atleast_2d(np.asarray(zq2, dtype=float))
    tq2 = np.asarray(tq2, dtype=float).reshape(-1)
    D = zp.shape[1] + 2
    dz1, dt1 = pair_offsets(zq1, tq1, zp, tp)
    dz2, dt2 = pair_offsets(zq2, tq2, zp, tp)
    dz12, dt12 = pair_offsets(zq2, tq2, zq1, tq1)
    d1 = knorm4_of_offsets(dz1, dt1) ** 0.25
    d2 = knorm4_of_offsets(dz2, dt2) ** 0.25
    if np.any(d1 == 0.0) or np.any(d2 == 0.0):
        raise SingularityError("evaluation point coincides with a pole")
    d12 = knorm4_of_offsets(dz12, dt12) ** 0.25
    if np.any(d12 == 0.0):
        raise ValueError("q1 and q2 coincide; the quotient is degenerate")
    num = np.linalg.norm(riesz_kernel_batch(dz1, dt1) - riesz_kernel_batch(dz2, dt2), axis=1)
    den = np.maximum(d12 / d1 ** D, d12 / d2 ** D)
    return num / den


def continuity_ratio(p: HPoint, q1: HPoint, q2: HPoint) -> float:
    """Smoothness quotient of the kernel for a single triple; see
    `continuity_ratio_batch`."""
    return float(
        continuity_ratio_batch(
            p.z[None, :], np.array([p.t]),
            q1.z[None, :], np.array([q1.t]),
            q2.z[None, :], np.array([q2.t]),
        )[0]
    )
