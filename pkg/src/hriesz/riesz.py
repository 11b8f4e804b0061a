"""Truncated Riesz transform against atomic measures and L2(mu) norms.

The transform at p is the finite sum over atoms q with d(p, q) > delta of
K(q^{-1} . p) f(q) w_q; the pair at distance exactly delta is excluded
(distances are compared through fourth powers of the gauge, which is
monotone-equivalent and avoids the quartic root in the hot loop).

The operator norm of the discretized transform is the largest singular
value of the weighted block matrix

    M[(i, a), j] = sqrt(w_i) K_a(q_j^{-1} . p_i) sqrt(w_j)

over admissible pairs, estimated matrix-free by power iteration on M^T M.
The inner pairwise sums run on a compiled extension when available and on a
blocked numpy fallback otherwise; set HRIESZ_BACKEND=numpy (or =compiled)
to force a choice.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels_py
from .group import HPoint
from .measure import AtomicMeasure

__all__ = [
    "NormEstimate",
    "TruncationPolicy",
    "backend_name",
    "operator_norm_estimate",
    "operator_norm_profile",
    "riesz_matvec",
    "truncated_riesz",
]

_FORCED = os.environ.get("HRIESZ_BACKEND", "").strip().lower()
if _FORCED == "numpy":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _FORCED == "compiled":
            raise ImportError(
                "HRIESZ_BACKEND=compiled but the hriesz._kernels extension is not built"
            )
        _impl = _kernels_py


def backend_name() -> str:
    """Which pairwise-sum backend is active: 'compiled' or 'numpy'."""
    return "numpy" if _impl is _kernels_py else "compiled"


@dataclass(frozen=True)
class TruncationPolicy:
    """Cutoff radius delta; atom pairs with d <= delta are excluded."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"truncation radius must be positive, got {self.delta!r}")

    @property
    def delta4(self) -> float:
        return self.delta ** 4


@dataclass(frozen=True)
class NormEstimate:
    value: float
    iterations: int
    residual: float
    delta: float


def _as_f(mu: AtomicMeasure, f) -> np.ndarray:
    f = np.asarray(f, dtype=float).reshape(-1)
    if f.size != len(mu):
        raise ValueError(f"f has {f.size} values but the measure has {len(mu)} atoms")
    return f


def truncated_riesz(mu: AtomicMeasure, f, p: HPoint, policy: TruncationPolicy) -> np.ndarray:
    """Truncated transform of f at a single point; zero vector if all pairs excluded."""
    f = _as_f(mu, f)
    if p.n != mu.n and len(mu) > 0:
        raise ValueError(f"point has n={p.n} but measure has n={mu.n}")
    out = np.zeros((1, 2 * p.n))
    if len(mu):
        coef = np.ascontiguousarray(f * mu.weights)
        _impl.pair_sum(p.z[None, :], np.array([p.t]), mu.zs, mu.ts, coef, policy.delta4, out)
    return out[0]


def riesz_matvec(mu: AtomicMeasure, f, policy: TruncationPolicy) -> np.ndarray:
    """Truncated transform evaluated at every atom; row i belongs to atom i.

    The self pair has distance zero and is always excluded.  Each row is
    summed in ascending atom order, so the result is independent of worker
    count on the compiled backend.
    """
    f = _as_f(mu, f)
    out = np.zeros((len(mu), 2 * mu.n))
    if len(mu):
        coef = np.ascontiguousarray(f * mu.weights)
        _impl.pair_sum(mu.zs, mu.ts, mu.zs, mu.ts, coef, policy.delta4, out)
    return out


def _weighted_matvec(mu, sqrt_w, v, delta4, out2n):
    coef = np.ascontiguousarray(sqrt_w * v)
    _impl.pair_sum(mu.zs, mu.ts, mu.zs, mu.ts, coef, delta4, out2n)
    out2n *= sqrt_w[:, None]
    return out2n


def _weighted_rmatvec(mu, sqrt_w, u, delta4, out1):
    uw = np.ascontiguousarray(u * sqrt_w[:, None])
    _impl.pair_sum_adj(mu.zs, mu.ts, mu.zs, mu.ts, uw, delta4, out1)
    out1 *= sqrt_w
    return out1


def operator_norm_estimate(
    mu: AtomicMeasure,
    policy: TruncationPolicy,
    tol: float = 1e-8,
    max_iters: int = 10_000,
    seed: int = 0,
) -> NormEstimate:
    """Largest singular value of the truncated operator on L2(mu).

    Power iteration on M^T M from a seeded random start; stops when the
    Rayleigh quotient changes by a relative amount <= tol between sweeps,
    or returns the best iterate with its residual once max_iters is hit.
    The returned value is always a lower bound on the true norm.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if not isinstance(max_iters, int) or max_iters < 1:
        raise ValueError(f"max_iters must be a positive integer, got {max_iters!r}")
    N = len(mu)
    if N == 0:
        raise ValueError("operator norm of the empty measure is undefined")
    sqrt_w = np.sqrt(mu.weights)
    rng = np.random.Generator(np.random.Philox(seed))
    v = rng.standard_normal(N)
    v /= np.linalg.norm(v)
    u = np.zeros((N, 2 * mu.n))
    y = np.zeros(N)
    lam_prev = None
    lam = 0.0
    residual = np.inf
    for it in range(1, max_iters + 1):
        _weighted_matvec(mu, sqrt_w, v, policy.delta4, u)
        lam = float(np.einsum("ij,ij->", u, u))  # Rayleigh quotient of M^T M at unit v
        if lam == 0.0:
            return NormEstimate(0.0, it, 0.0, policy.delta)
        _weighted_rmatvec(mu, sqrt_w, u, policy.delta4, y)
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            return NormEstimate(lam ** 0.5, it, 0.0, policy.delta)
        v = y / ny
        if lam_prev is not None:
            residual = abs(lam - lam_prev) / lam
            if residual <= tol:
                return NormEstimate(lam ** 0.5, it, residual, policy.delta)
        lam_prev = lam
    return NormEstimate(lam ** 0.5, max_iters, residual, policy.delta)


def operator_norm_profile(
    mu: AtomicMeasure,
    deltas,
    tol: float = 1e-8,
    max_iters: int = 10_000,
    seed: int = 0,
):
    """One norm estimate per cutoff; the grid supremum is the empirical
    stand-in for the uniform-in-delta operator norm."""
    deltas = [float(d) for d in deltas]
    if not deltas:
        raise ValueError("deltas must be nonempty")
    return [
        operator_norm_estimate(mu, TruncationPolicy(d), tol=tol, max_iters=max_iters, seed=seed)
        for d in deltas
    ]
