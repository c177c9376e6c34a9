"""Barycentric lattices over probability simplices and their products.

A ``SimplexGrid`` with resolution ``m`` carries the lattice points
``(a_1, ..., a_K)/m`` and the mesh cells they induce: ``m`` intervals for
K = 2 and ``m^2`` up/down triangles for K = 3.  Measures are relative to the
whole simplex (cell measure = 1 / number of cells).  ``ProductGrid`` takes
cartesian products of factor grids for multi-player sweeps.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SimplexGrid:
    """Lattice discretisation of one (K-1)-simplex."""

    def __init__(self, k: int, m: int):
        if k not in (2, 3):
            raise ValueError("simplex grids support K = 2 or 3 strategies")
        if m < 2:
            raise ValueError("resolution must be at least 2")
        self.k = k
        self.m = m
        self.vertices = self._build_vertices()
        self.centroids, self.cell_kind, self._cell_ab = self._build_cells()
        self.n_cells = self.centroids.shape[0]
        self.cell_measure = 1.0 / self.n_cells
        self.neighbors = self._build_neighbors()
        self.max_degree = self.neighbors.shape[1]
        self._cell_index = {(int(a), int(b), int(kd)): cid
                            for cid, ((a, b), kd)
                            in enumerate(zip(self._cell_ab, self.cell_kind))}

    # -- construction ------------------------------------------------------

    def _build_vertices(self):
        m, k = self.m, self.k
        if k == 2:
            a = np.arange(m + 1)
            return np.column_stack([a, m - a]) / m
        pts = [(a, b, m - a - b) for a in range(m + 1) for b in range(m + 1 - a)]
        return np.asarray(pts, dtype=float) / m

    def _build_cells(self):
        m, k = self.m, self.k
        if k == 2:
            i = np.arange(m)
            cent = np.column_stack([i + 0.5, m - i - 0.5]) / m
            return cent, np.zeros(m, dtype=np.int8), np.column_stack([i, np.zeros(m, int)])
        ups = [(a, b) for a in range(m) for b in range(m - a)]
        downs = [(a, b) for a in range(m - 1) for b in range(m - 1 - a)]
        cent = np.empty((len(ups) + len(downs), 3))
        ab = np.empty((len(ups) + len(downs), 2), dtype=np.int64)
        kind = np.empty(len(ups) + len(downs), dtype=np.int8)
        for idx, (a, b) in enumerate(ups):
            cent[idx] = ((3 * a + 1), (3 * b + 1), 3 * (m - a - b) - 2)
            ab[idx] = (a, b)
            kind[idx] = 0
        off = len(ups)
        for idx, (a, b) in enumerate(downs):
            cent[off + idx] = ((3 * a + 2), (3 * b + 2), 3 * (m - a - b) - 4)
            ab[off + idx] = (a, b)
            kind[off + idx] = 1
        return cent / (3 * m), kind, ab

    def _build_neighbors(self):
        m, k = self.m, self.k
        if k == 2:
            nbr = np.full((m, 2), -1, dtype=np.int64)
            nbr[1:, 0] = np.arange(m - 1)
            nbr[:-1, 1] = np.arange(1, m)
            return nbr
        up_id = {}
        down_id = {}
        for cid, ((a, b), kd) in enumerate(zip(map(tuple, self._cell_ab), self.cell_kind)):
            (up_id if kd == 0 else down_id)[(a, b)] = cid
        nbr = np.full((self.centroids.shape[0], 3), -1, dtype=np.int64)
        for (a, b), cid in down_id.items():
            # a down triangle shares its edges with exactly three up triangles
            for tri in ((a, b), (a + 1, b), (a, b + 1)):
                uid = up_id[tri]
                nbr[cid][np.flatnonzero(nbr[cid] == -1)[0]] = uid
                nbr[uid][np.flatnonzero(nbr[uid] == -1)[0]] = cid
        return nbr

    # -- lookup ------------------------------------------------------------

    def locate(self, point) -> int:
        """Cell id containing (or nearest to) a simplex point."""
        p = np.asarray(point, dtype=float)
        m = self.m
        if self.k == 2:
            i = min(max(int(p[0] * m), 0), m - 1)
            return i
        x = p[0] * m
        y = p[1] * m
        a = min(max(int(np.floor(x)), 0), m - 1)
        b = min(max(int(np.floor(y)), 0), m - 1 - a)
        kind = 1 if (x - a) + (y - b) > 1.0 and (a + b) <= m - 2 else 0
        return self._cell_index.get((a, b, kind), self._cell_index[(a, b, 0)])

    def cell_polygon(self, cid: int) -> np.ndarray:
        """Barycentric corner coordinates of one cell (for rendering)."""
        m = self.m
        if self.k == 2:
            i = int(self._cell_ab[cid, 0])
            return np.array([[i, m - i], [i + 1, m - i - 1]]) / m
        a, b = map(int, self._cell_ab[cid])
        if self.cell_kind[cid] == 0:
            tri = [(a, b), (a + 1, b), (a, b + 1)]
        else:
            tri = [(a + 1, b), (a, b + 1), (a + 1, b + 1)]
        return np.array([[x, y, m - x - y] for x, y in tri]) / m

    def interior_cell_mask(self) -> np.ndarray:
        """Cells with a full complement of face neighbors."""
        return (self.neighbors >= 0).sum(axis=1) == self.max_degree

    def edges(self) -> np.ndarray:
        """Vertex-index pairs for every lattice edge (used by thin-set scans)."""
        m = self.m
        if self.k == 2:
            i = np.arange(m)
            return np.column_stack([i, i + 1])
        index = {}
        for vid, v in enumerate(np.rint(self.vertices * m).astype(int)):
            index[(v[0], v[1])] = vid
        out = []
        for (a, b), vid in index.items():
            for da, db in ((1, 0), (0, 1), (-1, 1)):
                trg = index.get((a + da, b + db))
                if trg is not None:
                    out.append((min(vid, trg), max(vid, trg)))
        return np.unique(np.asarray(sorted(out), dtype=np.int64), axis=0)


@dataclass
class ProductGrid:
    """Cartesian product of per-player simplex grids."""

    factors: tuple

    def __post_init__(self):
        self.shape = tuple(f.n_cells for f in self.factors)
        self.n_cells = int(np.prod(self.shape))
        self.cell_measure = float(np.prod([f.cell_measure for f in self.factors]))

    def locate(self, points) -> tuple:
        return tuple(f.locate(p) for f, p in zip(self.factors, points))


def shared_grid(k: int, m: int) -> SimplexGrid:
    return SimplexGrid(k, m)


def product_grid(ks, m: int) -> ProductGrid:
    return ProductGrid(tuple(SimplexGrid(k, m) for k in ks))
