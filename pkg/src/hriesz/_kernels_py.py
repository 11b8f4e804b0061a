"""Pure-numpy fallback for the pairwise Riesz-kernel sums.

Mirrors the compiled extension's interface; evaluation is blocked over
output rows so temporaries stay bounded regardless of cloud size.
"""

from __future__ import annotations

import numpy as np

_PAIR_BUDGET = 500_000  # pairs per block of temporaries


def _pair_fields(tz_blk, tt_blk, sz, st):
    """Per-pair offsets of s_j^{-1} . t_i for a block of targets."""
    n = sz.shape[1] // 2
    dz = tz_blk[:, None, :] - sz[None, :, :]
    om = np.einsum("ja,ba->bj", sz[:, :n], tz_blk[:, n:]) - np.einsum(
        "ja,ba->bj", sz[:, n:], tz_blk[:, :n]
    )
    dt = tt_blk[:, None] - st[None, :] - 0.5 * om
    zn2 = np.einsum("bjc,bjc->bj", dz, dz)
    d4 = zn2 * zn2 + 16.0 * dt * dt
    return dz, dt, zn2, d4


def _components(dz, dt, zn2, n):
    dx, dy = dz[:, :, :n], dz[:, :, n:]
    kx = -2.0 * dx * zn2[..., None] + 8.0 * dy * dt[..., None]
    ky = -2.0 * dy * zn2[..., None] - 8.0 * dx * dt[..., None]
    return kx, ky


def pair_sum(tz, tt, sz, st, coef, delta4, out):
    P, N = tz.shape[0], sz.shape[0]
    n = sz.shape[1] // 2
    out[:] = 0.0
    if P == 0 or N == 0:
        return 0
    block = max(1, _PAIR_BUDGET // N)
    for i0 in range(0, P, block):
        i1 = min(P, i0 + block)
        dz, dt, zn2, d4 = _pair_fields(tz[i0:i1], tt[i0:i1], sz, st)
        keep = d4 > delta4
        scale = np.where(keep, n / np.where(keep, d4, 1.0) ** ((n + 2) / 2.0), 0.0)
        c = scale * coef[None, :]
        kx, ky = _components(dz, dt, zn2, n)
        out[i0:i1, :n] = np.einsum("bja,bj->ba", kx, c)
        out[i0:i1, n:] = np.einsum("bja,bj->ba", ky, c)
    return 0


def pair_sum_adj(tz, tt, sz, st, u, delta4, out):
    P, N = tz.shape[0], sz.shape[0]
    n = sz.shape[1] // 2
    out[:] = 0.0
    if P == 0 or N == 0:
        return 0
    block = max(1, _PAIR_BUDGET // N)
    for i0 in range(0, P, block):
        i1 = min(P, i0 + block)
        dz, dt, zn2, d4 = _pair_fields(tz[i0:i1], tt[i0:i1], sz, st)
        keep = d4 > delta4
        scale = np.where(keep, n / np.where(keep, d4, 1.0) ** ((n + 2) / 2.0), 0.0)
        kx, ky = _components(dz, dt, zn2, n)
        tmp = np.einsum("bja,ba->bj", kx, u[i0:i1, :n]) + np.einsum(
            "bja,ba->bj", ky, u[i0:i1, n:]
        )
        out += np.einsum("bj,bj->j", tmp, scale)
    return 0
