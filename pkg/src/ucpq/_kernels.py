"""Compiled inner loops for exhaustive search and annealing.

The QUBO is passed as its diagonal plus a symmetric CSR adjacency
(``indptr``, ``indices``, ``weights``) so a single-bit flip costs
O(degree).
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _energy(x, diag, indptr, indices, weights):
    e = 0.0
    for i in range(x.shape[0]):
        if x[i]:
            e += diag[i]
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j > i and x[j]:
                    e += weights[p]
    return e


@njit(cache=True, nogil=True)
def gray_search(diag, indptr, indices, weights, k0, k1, cap, rel_tol):
    """Visit Gray codes g(k) for k in [k0, k1), tracking minimum raw energy.

    Returns (best, ties, n_ties, overflow) where ``ties`` holds the bitmasks
    of states within ``rel_tol`` of the final best (first ``cap`` found).
    """
    n = diag.shape[0]
    x = np.zeros(n, dtype=np.int8)
    g = k0 ^ (k0 >> 1)
    for b in range(n):
        x[b] = (g >> b) & 1
    e = _energy(x, diag, indptr, indices, weights)
    best = e
    ties = np.zeros(cap, dtype=np.int64)
    ties[0] = g
    n_ties = 1
    overflow = False
    for k in range(k0 + 1, k1):
        b = 0
        while not (k >> b) & 1:
            b += 1
        local = diag[b]
        for p in range(indptr[b], indptr[b + 1]):
            if x[indices[p]]:
                local += weights[p]
        if x[b]:
            e -= local
            x[b] = 0
            g &= ~(1 << b)
        else:
            e += local
            x[b] = 1
            g |= 1 << b
        tol = rel_tol * max(1.0, abs(best))
        if e < best - tol:
            best = e
            ties[0] = g
            n_ties = 1
            overflow = False
        elif e <= best + tol:
            if e < best:
                best = e
            if n_ties < cap:
                ties[n_ties] = g
                n_ties += 1
            else:
                overflow = True
    return best, ties, n_ties, overflow


@njit(cache=True, nogil=True)
def _flip(i, d, x, field, indptr, indices, weights):
    x[i] = 1 - x[i]
    for p in range(indptr[i], indptr[i + 1]):
        field[indices[p]] += weights[p] * d


@njit(cache=True, nogil=True)
def anneal(diag, indptr, indices, weights, pair_i, pair_j, pair_w, x0, uniforms,
           pair_uniforms, temps):
    """Metropolis sweeps at a fixed temperature per sweep.

    A sweep visits every variable once in index order proposing a single
    flip, then every exchange pair ``(pair_i[k], pair_j[k])`` proposing to
    flip both when they differ. ``uniforms`` is (sweeps, n) and
    ``pair_uniforms`` (sweeps, n_pairs). Returns the best state seen and its
    raw energy.
    """
    n = diag.shape[0]
    x = x0.copy()
    field = diag.copy()
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            if x[indices[p]]:
                field[i] += weights[p]
    e = _energy(x, diag, indptr, indices, weights)
    best = e
    best_x = x.copy()
    for s in range(temps.shape[0]):
        temp = temps[s]
        for i in range(n):
            d = -1.0 if x[i] else 1.0
            delta = d * field[i]
            if delta <= 0.0 or uniforms[s, i] < math.exp(-delta / temp):
                _flip(i, d, x, field, indptr, indices, weights)
                e += delta
                if e < best:
                    best = e
                    best_x[:] = x
        for k in range(pair_i.shape[0]):
            i = pair_i[k]
            j = pair_j[k]
            if x[i] == x[j]:
                continue
            di = -1.0 if x[i] else 1.0
            # field[i] already counts w_ij * x_j at its old value
            delta = di * field[i] - di * field[j] - pair_w[k]
            if delta <= 0.0 or pair_uniforms[s, k] < math.exp(-delta / temp):
                _flip(i, di, x, field, indptr, indices, weights)
                _flip(j, -di, x, field, indptr, indices, weights)
                e += delta
                if e < best:
                    best = e
                    best_x[:] = x
    return best_x, best
