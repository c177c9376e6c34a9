"""Hot numeric kernels: connected-component labeling over lattice grids.

Each kernel has two interchangeable implementations: a numba ``@njit``
scalar-loop version and a vectorized pure-numpy fallback.  Selection happens
once at import time; set the environment variable ``GAMESETS_NO_NUMBA`` to
any non-empty value to force the numpy path (the test suite runs both and
``benchmarks/bench_kernels.py`` compares their speed).

Labels respect the per-cell pattern id: two adjacent member cells join the
same component only when their patterns agree, which keeps touching
equilibrium sets with different best options apart.
"""
from __future__ import annotations

import os

import numpy as np

USE_NUMBA = not os.environ.get("GAMESETS_NO_NUMBA")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - mirror always provides numba
        USE_NUMBA = False

__all__ = ["USE_NUMBA", "label_components", "label_components_product2",
           "label_components_product3"]


# -- single grid -----------------------------------------------------------


def _label_graph_loop(member, neighbors, pattern):
    n = member.shape[0]
    deg = neighbors.shape[1]
    labels = np.full(n, -1, dtype=np.int32)
    stack = np.empty(member.sum() + 1, dtype=np.int64)
    current = 0
    for seed in range(n):
        if not member[seed] or labels[seed] >= 0:
            continue
        labels[seed] = current
        stack[0] = seed
        top = 1
        while top > 0:
            top -= 1
            c = stack[top]
            for d in range(deg):
                nb = neighbors[c, d]
                if nb < 0:
                    continue
                if member[nb] and labels[nb] < 0 and pattern[nb] == pattern[c]:
                    labels[nb] = current
                    stack[top] = nb
                    top += 1
        current += 1
    return labels


def _label_graph_numpy(member, neighbors, pattern):
    n = member.shape[0]
    # min-label propagation: start from own index, repeatedly take the
    # smallest label among same-pattern member neighbors
    labels = np.where(member, np.arange(n, dtype=np.int64), -1)
    nbr = neighbors.copy()
    nbr[nbr < 0] = 0  # dummy; masked below
    valid = (neighbors >= 0) & member[:, None] & member[nbr] \
        & (pattern[:, None] == pattern[nbr])
    while True:
        cand = np.where(valid, labels[nbr], np.iinfo(np.int64).max)
        best = cand.min(axis=1)
        new = np.where(member & (best < labels), best, labels)
        if np.array_equal(new, labels):
            break
        labels = new
    return _compact(labels, member)


def _compact(labels, member):
    out = np.full(labels.shape, -1, dtype=np.int32)
    vals = labels[member]
    uniq = np.unique(vals)
    out[member] = np.searchsorted(uniq, vals).astype(np.int32)
    return out


# -- product of two factor grids -------------------------------------------


def _label_product2_loop(member, pattern, nbr1, nbr2):
    c1, c2 = member.shape
    d1 = nbr1.shape[1]
    d2 = nbr2.shape[1]
    labels = np.full((c1, c2), -1, dtype=np.int32)
    stack = np.empty((member.sum() + 1, 2), dtype=np.int64)
    current = 0
    for s1 in range(c1):
        for s2 in range(c2):
            if not member[s1, s2] or labels[s1, s2] >= 0:
                continue
            labels[s1, s2] = current
            stack[0, 0] = s1
            stack[0, 1] = s2
            top = 1
            while top > 0:
                top -= 1
                a = stack[top, 0]
                b = stack[top, 1]
                pat = pattern[a, b]
                for d in range(d1):
                    na = nbr1[a, d]
                    if na < 0:
                        continue
                    if member[na, b] and labels[na, b] < 0 and pattern[na, b] == pat:
                        labels[na, b] = current
                        stack[top, 0] = na
                        stack[top, 1] = b
                        top += 1
                for d in range(d2):
                    nb = nbr2[b, d]
                    if nb < 0:
                        continue
                    if member[a, nb] and labels[a, nb] < 0 and pattern[a, nb] == pat:
                        labels[a, nb] = current
                        stack[top, 0] = a
                        stack[top, 1] = nb
                        top += 1
            current += 1
    return labels


def _label_product2_numpy(member, pattern, nbr1, nbr2):
    c1, c2 = member.shape
    labels = np.where(member, np.arange(c1 * c2, dtype=np.int64).reshape(c1, c2), -1)
    pads1 = _pad_gather(nbr1)
    pads2 = _pad_gather(nbr2)
    big = np.iinfo(np.int64).max
    while True:
        best = np.full((c1, c2), big, dtype=np.int64)
        for na, ok in pads1:
            cand = np.where(ok[:, None] & member[na, :] & member
                            & (pattern[na, :] == pattern), labels[na, :], big)
            np.minimum(best, cand, out=best)
        for nb, ok in pads2:
            cand = np.where(ok[None, :] & member[:, nb] & member
                            & (pattern[:, nb] == pattern), labels[:, nb], big)
            np.minimum(best, cand, out=best)
        new = np.where(member & (best < labels), best, labels)
        if np.array_equal(new, labels):
            break
        labels = new
    return _compact(labels, member)


def _pad_gather(nbr):
    cols = []
    for d in range(nbr.shape[1]):
        col = nbr[:, d]
        ok = col >= 0
        safe = np.where(ok, col, 0)
        cols.append((safe, ok))
    return cols


# -- product of three factor grids -----------------------------------------


def _label_product3_loop(member, pattern, nbr1, nbr2, nbr3):
    c1, c2, c3 = member.shape
    labels = np.full((c1, c2, c3), -1, dtype=np.int32)
    stack = np.empty((member.sum() + 1, 3), dtype=np.int64)
    current = 0
    for s1 in range(c1):
        for s2 in range(c2):
            for s3 in range(c3):
                if not member[s1, s2, s3] or labels[s1, s2, s3] >= 0:
                    continue
                labels[s1, s2, s3] = current
                stack[0, 0] = s1
                stack[0, 1] = s2
                stack[0, 2] = s3
                top = 1
                while top > 0:
                    top -= 1
                    a = stack[top, 0]
                    b = stack[top, 1]
                    c = stack[top, 2]
                    pat = pattern[a, b, c]
                    for d in range(nbr1.shape[1]):
                        na = nbr1[a, d]
                        if na >= 0 and member[na, b, c] and labels[na, b, c] < 0 \
                                and pattern[na, b, c] == pat:
                            labels[na, b, c] = current
                            stack[top, 0] = na
                            stack[top, 1] = b
                            stack[top, 2] = c
                            top += 1
                    for d in range(nbr2.shape[1]):
                        nb = nbr2[b, d]
                        if nb >= 0 and member[a, nb, c] and labels[a, nb, c] < 0 \
                                and pattern[a, nb, c] == pat:
                            labels[a, nb, c] = current
                            stack[top, 0] = a
                            stack[top, 1] = nb
                            stack[top, 2] = c
                            top += 1
                    for d in range(nbr3.shape[1]):
                        nc = nbr3[c, d]
                        if nc >= 0 and member[a, b, nc] and labels[a, b, nc] < 0 \
                                and pattern[a, b, nc] == pat:
                            labels[a, b, nc] = current
                            stack[top, 0] = a
                            stack[top, 1] = b
                            stack[top, 2] = nc
                            top += 1
                current += 1
    return labels


def _label_product3_numpy(member, pattern, nbr1, nbr2, nbr3):
    c1, c2, c3 = member.shape
    labels = np.where(member,
                      np.arange(c1 * c2 * c3, dtype=np.int64).reshape(member.shape), -1)
    big = np.iinfo(np.int64).max
    gathers = [(_pad_gather(nbr1), 0), (_pad_gather(nbr2), 1), (_pad_gather(nbr3), 2)]
    while True:
        best = np.full(member.shape, big, dtype=np.int64)
        for pads, axis in gathers:
            for idx, ok in pads:
                shp = [1, 1, 1]
                shp[axis] = -1
                okb = ok.reshape(shp)
                moved = np.take(member, idx, axis=axis)
                patm = np.take(pattern, idx, axis=axis)
                labm = np.take(labels, idx, axis=axis)
                cand = np.where(okb & moved & member & (patm == pattern), labm, big)
                np.minimum(best, cand, out=best)
        new = np.where(member & (best < labels), best, labels)
        if np.array_equal(new, labels):
            break
        labels = new
    return _compact(labels.ravel(), member.ravel()).reshape(member.shape)


if USE_NUMBA:
    _label_graph_jit = njit(cache=True)(_label_graph_loop)
    _label_product2_jit = njit(cache=True)(_label_product2_loop)
    _label_product3_jit = njit(cache=True)(_label_product3_loop)


def label_components(member, neighbors, pattern):
    """Connected components of member cells with equal patterns; -1 outside."""
    member = np.ascontiguousarray(member, dtype=np.bool_)
    neighbors = np.ascontiguousarray(neighbors, dtype=np.int64)
    pattern = np.ascontiguousarray(pattern, dtype=np.int64)
    if USE_NUMBA:
        return _label_graph_jit(member, neighbors, pattern)
    return _label_graph_numpy(member, neighbors, pattern)


def label_components_product2(member, pattern, nbr1, nbr2):
    member = np.ascontiguousarray(member, dtype=np.bool_)
    pattern = np.ascontiguousarray(pattern, dtype=np.int64)
    nbr1 = np.ascontiguousarray(nbr1, dtype=np.int64)
    nbr2 = np.ascontiguousarray(nbr2, dtype=np.int64)
    if USE_NUMBA:
        return _label_product2_jit(member, pattern, nbr1, nbr2)
    return _label_product2_numpy(member, pattern, nbr1, nbr2)


def label_components_product3(member, pattern, nbr1, nbr2, nbr3):
    member = np.ascontiguousarray(member, dtype=np.bool_)
    pattern = np.ascontiguousarray(pattern, dtype=np.int64)
    nbr1 = np.ascontiguousarray(nbr1, dtype=np.int64)
    nbr2 = np.ascontiguousarray(nbr2, dtype=np.int64)
    nbr3 = np.ascontiguousarray(nbr3, dtype=np.int64)
    if USE_NUMBA:
        return _label_product3_jit(member, pattern, nbr1, nbr2, nbr3)
    return _label_product3_numpy(member, pattern, nbr1, nbr2, nbr3)
