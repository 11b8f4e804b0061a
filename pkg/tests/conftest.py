"""Shared helpers: seeded samplers and the dense reference operator."""

import numpy as np

from hriesz import group, kernel


def rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def random_points(gen, n, count, lo=0.5, hi=2.0):
    """(zs, ts) with Koranyi gauge uniform in [lo, hi], generic directions."""
    z = gen.standard_normal((count, 2 * n))
    t = gen.standard_normal(count)
    g4 = np.einsum("ij,ij->i", z, z) ** 2 + 16.0 * t * t
    lam = gen.uniform(lo, hi, size=count) / g4 ** 0.25
    return z * lam[:, None], t * lam * lam


def pair_dist(zA, tA, zB, tB):
    """Row-wise Koranyi distances d(A_i, B_i)."""
    dz, dt = group.pair_offsets(zB, tB, zA, tA)
    return group.knorm4_of_offsets(dz, dt) ** 0.25


def dense_riesz_matrix(mu, delta):
    """Dense weighted operator matrix, assembled column by column from the
    closed-form kernel; the independent oracle for the matrix-free paths.

    Row layout is (i, a) row-major, so M @ g stacks the 2n components of
    each output point contiguously.
    """
    N, n = len(mu), mu.n
    M = np.zeros((2 * n * N, N))
    sw = np.sqrt(mu.weights)
    for j in range(N):
        qj, _ = mu.atom(j)
        dz, dt = group.offsets_from(qj, mu.zs, mu.ts)
        keep = group.knorm4_of_offsets(dz, dt) > delta ** 4
        K = np.zeros((N, 2 * n))
        if np.any(keep):
            K[keep] = kernel.riesz_kernel_batch(dz[keep], dt[keep])
        M[:, j] = (K * sw[:, None]).reshape(-1) * sw[j]
    return M


def dense_matvec(mu, f, delta):
    """Unweighted transform rows via the dense oracle."""
    sw = np.sqrt(mu.weights)
    M = dense_riesz_matrix(mu, delta)
    return (M @ (sw * np.asarray(f, dtype=float))).reshape(len(mu), 2 * mu.n) / sw[:, None]
