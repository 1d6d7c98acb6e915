"""numpy versions of the compiled kernels, used when the extension is absent."""

import numpy as np


def mc_hits(seed_idx, u, c, seed_start, leaf_lo, sup_start, sup_point, sup_cum, half, U, P):
    seed_idx = np.asarray(seed_idx, dtype=np.int64)
    u = np.asarray(u, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    n_seeds = len(seed_start) - 1
    n_leaves = len(leaf_lo)
    # one sorted key space across seeds: seed * U + position
    leaf_seed = np.repeat(np.arange(n_seeds, dtype=np.int64), np.diff(seed_start))
    leaf_keys = leaf_seed * U + np.asarray(leaf_lo, dtype=np.int64)
    leaf = np.searchsorted(leaf_keys, seed_idx * U + u, side="right") - 1
    sup_leaf = np.repeat(np.arange(n_leaves, dtype=np.int64), np.diff(sup_start))
    sup_keys = sup_leaf * P + np.asarray(sup_cum, dtype=np.int64)
    k = np.searchsorted(sup_keys, leaf * P + c, side="right")
    e = np.asarray(sup_point, dtype=np.int64)[k]
    return int(np.count_nonzero(np.abs(e - u) <= half))


def ob_estimates(points, seeds, d, m, eps, M, unit):
    points = np.asarray(points, dtype=np.int64)
    seeds = np.asarray(seeds, dtype=np.int64)
    width = unit // m
    nbits = d * M
    cell = points // width
    hit = points < cell * width + eps
    in_guess = hit.all(axis=1)
    s = seeds - 1
    bits = s & ((1 << nbits) - 1)
    cube = s >> nbits
    decoy = np.empty_like(points)
    for a in range(d):
        decoy[:, a] = cube % m
        cube = cube // m
    est = np.empty_like(points)
    for a in range(d):
        idx = np.where(in_guess, decoy[:, a], cell[:, a])
        lo = idx * width + eps
        hi = (idx + 1) * width
        for t in range(M):
            q = (lo + hi) >> 1
            zbit = ((bits >> (nbits - 1 - (a * M + t))) & 1).astype(bool)
            b = np.where(hit[:, a], zbit, points[:, a] >= q)
            lo = np.where(b, q, lo)
            hi = np.where(b, hi, q)
        est[:, a] = np.where(hit[:, a], cell[:, a] * width + (eps >> 1), (lo + hi) >> 1)
    return est
