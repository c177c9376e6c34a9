"""Assembling pointwise membership into labeled equilibrium regions.

Choice sets are enumerated on a cell grid: membership is evaluated at cell
centroids via precomputed payoff/ratio tables, components are labeled with
face adjacency refined by the per-player best-option pattern (touching sets
with different best options stay distinct), and measures come from exact
cell counting.  Sets thinner than one cell (payoff-tie loci) are recovered
by a separate analytic scan along tie curves.

Two spaces are supported: ``shared`` (one simplex, symmetric games played by
identical mixtures - the space drawn in ternary figures) and ``product``
(cartesian product of per-player simplices).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .games import Game, expected_payoffs
from .grids import ProductGrid, SimplexGrid
from .potential import (REL_TOL, TIE_TOL, check_epsilon, color_of, entry_eps,
                        is_s_choice_point)

DEFAULT_M_SHARED = 200
DEFAULT_M_PRODUCT = 60
DEFAULT_M_PRODUCT3 = 12


class EmptyRegionWarning(UserWarning):
    """No member cells found; the grid is probably too coarse."""


@dataclass
class Region:
    game_id: str
    eps: float
    kind: str                     # "choice" | "belief"
    space: str                    # "shared" | "product"
    component_id: int
    cells: np.ndarray             # member cell ids (flat for product spaces)
    measure: float
    color: tuple | None = None    # per-player best-option index tuples
    full_dimensional: bool = False
    robust: bool = False
    colorable: bool = False
    thin: bool = False
    points: np.ndarray = field(default_factory=lambda: np.empty((0,)))
    projections: tuple = ()       # per-factor projection measures (product)


def max_area_bound(k: int, eps: float) -> float:
    """Largest possible relative measure of a per-player choice set."""
    if k < 2:
        raise ValueError("need at least two strategies")
    eps = check_epsilon(eps)
    out = 1.0
    for j in range(1, k):
        out *= j * eps / (1.0 + j * eps)
    return out


# -- evaluation tables -------------------------------------------------------


def _pattern_bits(pi: np.ndarray, tie_tol: float) -> np.ndarray:
    """Bitmask of payoff-maximal strategies per row."""
    k = pi.shape[-1]
    best = pi.max(axis=-1, keepdims=True)
    mask = pi >= best - tie_tol
    weights = (1 << np.arange(k)).astype(np.int64)
    return (mask * weights).sum(axis=-1)


def _ratio_table(centroids: np.ndarray) -> np.ndarray:
    """R[c, pat] = worst ratio sigma_j / sigma_max over strategies outside pat."""
    c, k = centroids.shape
    smax = centroids.max(axis=1)
    ratios = centroids / smax[:, None]
    out = np.zeros((c, 1 << k))
    for pat in range(1 << k):
        outside = [j for j in range(k) if not pat & (1 << j)]
        if outside:
            out[:, pat] = ratios[:, outside].max(axis=1)
    return out


def _supp_bits(centroids: np.ndarray, eps: float) -> np.ndarray:
    """Bitmask of the eps-support at each centroid."""
    c, k = centroids.shape
    thresh = eps * centroids.max(axis=1, keepdims=True) * (1.0 - REL_TOL)
    weights = (1 << np.arange(k)).astype(np.int64)
    return ((centroids >= thresh) * weights).sum(axis=1)


def _bits_to_tuple(bits: int, k: int) -> tuple:
    return tuple(j for j in range(k) if bits & (1 << j))


def shared_payoff_table(game: Game, points: np.ndarray) -> np.ndarray:
    """Reference player's expected payoffs at shared mixtures (rows)."""
    t = game.sym_table
    if game.n == 2:
        return points @ t.T
    return np.einsum("kbc,nb,nc->nk", t, points, points)


def _membership_threshold(eps: float) -> float:
    return eps * (1.0 - REL_TOL)


class ChoiceTable:
    """Cached grid tables for one game; answers eps queries cheaply."""

    def __init__(self, game: Game, m: int | None = None, space: str | None = None,
                 tie_tol: float = TIE_TOL):
        self.game = game
        self.tie_tol = tie_tol
        if space is None:
            space = "shared" if game.symmetric else "product"
        if space == "shared" and not game.symmetric:
            raise ValueError("shared space requires a symmetric game")
        if space == "product" and game.n > 3:
            raise ValueError("product grids support up to three players")
        self.space = space
        if m is None:
            if space == "shared":
                m = DEFAULT_M_SHARED
            else:
                m = DEFAULT_M_PRODUCT3 if game.n == 3 else (
                    DEFAULT_M_PRODUCT if max(game.strategy_counts) == 3
                    else DEFAULT_M_SHARED)
        self.m = m
        if space == "shared":
            self._init_shared()
        else:
            self._init_product()

    # shared: one grid, one pattern per cell
    def _init_shared(self):
        g = SimplexGrid(self.game.strategy_counts[0], self.m)
        self.grids = (g,)
        self.pi = shared_payoff_table(self.game, g.centroids)
        self.pattern = _pattern_bits(self.pi, self.tie_tol)
        rt = _ratio_table(g.centroids)
        self.entry = rt[np.arange(g.n_cells), self.pattern]
        self.cell_measure = g.cell_measure
        self.shape = (g.n_cells,)

    def _init_product(self):
        game = self.game
        grids = tuple(SimplexGrid(k, self.m) for k in game.strategy_counts)
        self.grids = grids
        self.cell_measure = float(np.prod([g.cell_measure for g in grids]))
        self.shape = tuple(g.n_cells for g in grids)
        self.ratio_tables = [_ratio_table(g.centroids) for g in grids]
        if game.n == 2:
            a, b = game.payoffs
            pi1 = grids[1].centroids @ a.T      # (C2, K1)
            pi2 = grids[0].centroids @ b        # (C1, K2)
            self.pat = [_pattern_bits(pi1, self.tie_tol),
                        _pattern_bits(pi2, self.tie_tol)]
            self.pis = [pi1, pi2]
        else:
            cents = [g.centroids for g in grids]
            pis, pats = [], []
            for i in range(3):
                others = [j for j in range(3) if j != i]
                t = game.payoffs[i]
                axes = list(range(3))
                order = [i] + others
                pi = np.einsum(np.transpose(t, order), [0, 1, 2],
                               cents[others[0]], [3, 1],
                               cents[others[1]], [4, 2], [3, 4, 0])
                pis.append(pi)   # (C_j, C_k, K_i)
                pats.append(_pattern_bits(pi, self.tie_tol))
            self.pis = pis
            self.pat = pats

    # -- queries ------------------------------------------------------------

    def member_mask(self, eps: float) -> np.ndarray:
        eps = check_epsilon(eps)
        thr = _membership_threshold(eps)
        if self.space == "shared":
            return self.entry < thr
        if self.game.n == 2:
            r1 = self.ratio_tables[0][:, self.pat[0]]        # (C1, C2)
            r2 = self.ratio_tables[1][:, self.pat[1]].T      # (C1, C2)
            return (r1 < thr) & (r2 < thr)
        ok = [rt < thr for rt in self.ratio_tables]          # (C_i, 2^K)
        m1 = ok[0][:, self.pat[0]]                           # (C1, C2, C3)
        m2 = ok[1][:, self.pat[1]].transpose(1, 0, 2)
        m3 = ok[2][:, self.pat[2]].transpose(1, 2, 0)
        return m1 & m2 & m3

    def pattern_array(self) -> np.ndarray:
        if self.space == "shared":
            return self.pattern
        if self.game.n == 2:
            return (self.pat[0][None, :] << 3) | self.pat[1][:, None]
        # pat[0]: (C2, C3), pat[1]: (C1, C3), pat[2]: (C1, C2)
        c1, c2, c3 = self.shape
        a = np.broadcast_to(self.pat[0][None, :, :], (c1, c2, c3)).astype(np.int64)
        b = np.broadcast_to(self.pat[1][:, None, :], (c1, c2, c3)).astype(np.int64)
        c = np.broadcast_to(self.pat[2][:, :, None], (c1, c2, c3)).astype(np.int64)
        return (a << 6) | (b << 3) | c

    def labels(self, eps: float) -> np.ndarray:
        member = self.member_mask(eps)
        pat = self.pattern_array()
        if self.space == "shared":
            return kernels.label_components(member, self.grids[0].neighbors, pat)
        if self.game.n == 2:
            return kernels.label_components_product2(
                member, pat, self.grids[0].neighbors, self.grids[1].neighbors)
        return kernels.label_components_product3(
            member, pat, self.grids[0].neighbors, self.grids[1].neighbors,
            self.grids[2].neighbors)

    def union_measure(self, eps: float) -> float:
        return float(np.count_nonzero(self.member_mask(eps)) * self.cell_measure)

    def locate(self, point) -> tuple | int:
        if self.space == "shared":
            return self.grids[0].locate(point)
        return tuple(g.locate(p) for g, p in zip(self.grids, point))

    def point_member(self, point, eps: float) -> bool:
        """Nearest-cell membership at grid resolution."""
        idx = self.locate(point)
        return bool(self.member_mask(eps)[idx])


# -- region assembly ---------------------------------------------------------


def enumerate_s_choice_sets(game: Game, eps: float, m: int | None = None,
                            space: str | None = None, include_thin: bool = True,
                            tie_tol: float = TIE_TOL,
                            table: ChoiceTable | None = None) -> list:
    """All choice-set regions of the game at threshold eps."""
    eps = check_epsilon(eps)
    if table is None:
        table = ChoiceTable(game, m=m, space=space, tie_tol=tie_tol)
    labels = table.labels(eps)
    member = labels >= 0
    flat_labels = labels.ravel()
    regions = []
    n_comp = int(flat_labels.max()) + 1 if member.any() else 0
    interior = _interior_mask(table, labels)
    supp = _supp_bits_for(table, eps)
    for comp in range(n_comp):
        cells = np.flatnonzero(flat_labels == comp)
        measure = float(cells.size * table.cell_measure)
        full = bool(interior.ravel()[cells].any())
        colorable, color = _component_color(table, cells, supp, interior, eps)
        regions.append(Region(
            game_id=game.id, eps=eps, kind="choice", space=table.space,
            component_id=comp, cells=cells, measure=measure, color=color,
            full_dimensional=full, colorable=colorable,
            projections=_projections(table, cells),
        ))
    if include_thin:
        regions.extend(_thin_regions(game, eps, table, len(regions), tie_tol))
    if not regions:
        warnings.warn(
            f"no choice sets found for {game.id} at eps={eps}: grid too coarse",
            EmptyRegionWarning, stacklevel=2)
    _mark_robust(regions)
    for r in regions:
        r._table = table
    return regions


def _interior_mask(table: ChoiceTable, labels) -> np.ndarray:
    """Cells whose full neighborhood shares their component."""
    if table.space == "shared":
        g = table.grids[0]
        nbr = g.neighbors
        lab = labels
        ok = (nbr >= 0).all(axis=1)
        res = ok & (lab >= 0)
        for d in range(nbr.shape[1]):
            idx = np.where(nbr[:, d] >= 0, nbr[:, d], 0)
            res &= np.where(nbr[:, d] >= 0, lab[idx] == lab, False)
        return res
    res = labels >= 0
    for axis, g in enumerate(table.grids):
        nbr = g.neighbors
        full_deg = (nbr >= 0).all(axis=1)
        shp = [1] * labels.ndim
        shp[axis] = -1
        res &= full_deg.reshape(shp)
        for d in range(nbr.shape[1]):
            idx = np.where(nbr[:, d] >= 0, nbr[:, d], 0)
            moved = np.take(labels, idx, axis=axis)
            ok = (nbr[:, d] >= 0).reshape(shp)
            res &= np.where(ok, moved == labels, False)
    return res


def _supp_bits_for(table: ChoiceTable, eps: float):
    if table.space == "shared":
        return (_supp_bits(table.grids[0].centroids, eps),)
    return tuple(_supp_bits(g.centroids, eps) for g in table.grids)


def _component_color(table: ChoiceTable, cells, supp, interior, eps):
    """A component is colorable when its interior cells all match the
    eps-support of their choices to the payoff argmax."""
    k = table.game.strategy_counts
    if table.space == "shared":
        pats = table.pattern[cells]
        pat = pats[0]
        inner = cells[interior[cells]]
        check = inner if inner.size else cells
        ok = np.all(supp[0][check] == table.pattern[check])
        color = tuple(_bits_to_tuple(int(pat), k[0]) for _ in range(table.game.n))
        return bool(ok), (color if ok else None)
    idx = np.unravel_index(cells, table.shape)
    if table.game.n == 2:
        pat_players = [table.pat[0][idx[1]], table.pat[1][idx[0]]]
        supp_players = [supp[0][idx[0]], supp[1][idx[1]]]
    else:
        pat_players = [table.pat[0][idx[1], idx[2]], table.pat[1][idx[0], idx[2]],
                       table.pat[2][idx[0], idx[1]]]
        supp_players = [supp[0][idx[0]], supp[1][idx[1]], supp[2][idx[2]]]
    inner = interior.ravel()[cells]
    sel = inner if inner.any() else np.ones(cells.size, bool)
    ok = all(np.all(sp[sel] == pp[sel]) for sp, pp in zip(supp_players, pat_players))
    color = tuple(_bits_to_tuple(int(pp[0]), kk)
                  for pp, kk in zip(pat_players, k))
    return bool(ok), (color if ok else None)


def _projections(table: ChoiceTable, cells) -> tuple:
    if table.space == "shared":
        return (float(cells.size * table.cell_measure),)
    idx = np.unravel_index(cells, table.shape)
    return tuple(float(np.unique(ix).size) / g.n_cells
                 for ix, g in zip(idx, table.grids))


def _mark_robust(regions):
    """Robust = maximal dimension among the regions at this eps."""
    if not regions:
        return
    any_full = any(r.full_dimensional for r in regions)
    for r in regions:
        r.robust = r.full_dimensional or not any_full


# -- thin (lower-dimensional) sets -------------------------------------------


def _thin_regions(game: Game, eps: float, table: ChoiceTable, next_id: int,
                  tie_tol: float) -> list:
    if table.space == "shared":
        candidates = _thin_candidates_shared(game, eps, table, tie_tol)
    else:
        candidates = _thin_candidates_product(game, eps, table, tie_tol)
    regions = []
    for pts in candidates:
        pts = np.asarray(pts)
        if not pts.size:
            continue
        colors = [color_of(game, _point_profile(table, p), eps, tie_tol) for p in pts]
        colorable = all(c is not None for c in colors) and len({c for c in colors}) == 1
        regions.append(Region(
            game_id=game.id, eps=eps, kind="choice", space=table.space,
            component_id=next_id + len(regions), cells=np.empty(0, dtype=np.int64),
            measure=0.0, color=colors[0] if colorable else None,
            full_dimensional=False, colorable=colorable, thin=True, points=pts))
    return regions


def _point_profile(table: ChoiceTable, point):
    if table.space == "shared":
        return point
    ks = table.game.strategy_counts
    out = []
    ofs = 0
    for k in ks:
        out.append(np.asarray(point[ofs:ofs + k]))
        ofs += k
    return out


def _thin_candidates_shared(game: Game, eps: float, table: ChoiceTable,
                            tie_tol: float) -> list:
    """Scan payoff-tie loci of the shared simplex for member segments."""
    g = table.grids[0]
    k = game.strategy_counts[0]
    verts = g.vertices
    pi_v = shared_payoff_table(game, verts)
    member = table.member_mask(eps)
    found = []
    for j in range(k):
        for l in range(j + 1, k):
            d = pi_v[:, j] - pi_v[:, l]
            pts = _locus_points(game, g, verts, d, j, l, eps, tie_tol)
            pts = [p for p in pts
                   if not member[g.locate(p)]
                   and is_s_choice_point(game, p, eps, tie_tol)
                   and _tie_is_top(game, p, j, l, tie_tol)]
            found.extend(_cluster_points(pts, 2.5 / g.m))
    return found


def _tie_is_top(game, point, j, l, tie_tol):
    pi = shared_payoff_table(game, np.asarray(point)[None, :])[0]
    return pi[j] >= pi.max() - 10 * tie_tol


def _locus_points(game, g, verts, d, j, l, eps, tie_tol):
    """Edge crossings of the payoff-tie locus, refined by bisection."""
    pts = []
    exact = np.abs(d) <= tie_tol
    scale = max(np.abs(d).max(), 1.0)
    for vid in np.flatnonzero(exact):
        pts.append(verts[vid])
    for u, v in g.edges():
        du, dv = d[u], d[v]
        if exact[u] or exact[v] or du * dv >= 0:
            continue
        lo, hi = verts[u], verts[v]
        flo = du
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fm = _pair_gap(game, mid, j, l)
            if fm == 0.0:
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        pts.append(0.5 * (lo + hi))
    return pts


def _pair_gap(game, point, j, l):
    pi = shared_payoff_table(game, np.asarray(point)[None, :])[0]
    return float(pi[j] - pi[l])


def _cluster_points(pts, cutoff):
    """Greedy single-linkage clustering of locus samples into components."""
    if not pts:
        return []
    pts = [np.asarray(p) for p in pts]
    n = len(pts)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if np.abs(pts[i] - pts[j]).sum() <= cutoff:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(pts[i])
    return [np.asarray(v) for v in groups.values()]


def _thin_candidates_product(game: Game, eps: float, table: ChoiceTable,
                             tie_tol: float) -> list:
    """Interior payoff-tie mixtures of one player crossed with the other's
    simplex.  Implemented for two-strategy opponents (the bundled product
    games); richer loci would need the locus tracing of the shared mode."""
    if game.n != 2:
        return []
    member = table.member_mask(eps)
    found = []
    for i in (0, 1):
        opp = 1 - i
        k_opp = game.strategy_counts[opp]
        if k_opp != 2:
            continue
        pay = game.payoffs[i]
        if i == 0:
            pi_of = lambda q, t=pay: t @ np.array([q, 1.0 - q])
        else:
            pi_of = lambda q, t=pay: np.array([q, 1.0 - q]) @ t
        k_own = game.strategy_counts[i]
        for j in range(k_own):
            for l in range(j + 1, k_own):
                p0 = pi_of(0.0)
                p1 = pi_of(1.0)
                num = p0[l] - p0[j]
                den = (p1[j] - p0[j]) - (p1[l] - p0[l])
                if abs(den) < 1e-14:
                    continue
                q = num / den
                if not 1e-9 < q < 1 - 1e-9:
                    continue  # tie only on the boundary: not an interior locus
                omega = np.array([q, 1.0 - q])
                pi_at = pi_of(q)
                if pi_at[j] < pi_at.max() - 10 * tie_tol:
                    continue
                own_grid = table.grids[i]
                pts = []
                for v in own_grid.vertices:
                    prof = [None, None]
                    prof[i], prof[opp] = v, omega
                    cell = tuple(g.locate(p) for g, p in zip(table.grids, prof))
                    if member[cell]:
                        continue
                    if is_s_choice_point(game, prof, eps, tie_tol):
                        pts.append(np.concatenate(prof))
                found.extend(_cluster_points(pts, 2.5 / own_grid.m))
    return found


# -- belief sets --------------------------------------------------------------


def enumerate_s_belief_sets(game: Game, colors=None, m: int | None = None,
                            space: str | None = None,
                            tie_tol: float = TIE_TOL) -> list:
    """Belief regions: all beliefs whose payoff argmax equals a choice color."""
    if space is None:
        space = "shared" if game.symmetric else "product"
    if colors is None:
        choice = enumerate_s_choice_sets(game, 1.0, m=m, space=space,
                                         include_thin=False, tie_tol=tie_tol)
        colors = [r.color for r in choice if r.color is not None]
    seen = []
    for c in colors:
        if c is not None and c not in seen:
            seen.append(c)
    regions = []
    if space == "shared":
        g = SimplexGrid(game.strategy_counts[0], m or DEFAULT_M_SHARED)
        pat = _pattern_bits(shared_payoff_table(game, g.centroids), tie_tol)
        for cid, color in enumerate(seen):
            bits = sum(1 << j for j in color[0])
            cells = np.flatnonzero(pat == bits)
            regions.append(Region(
                game_id=game.id, eps=float("nan"), kind="belief", space="shared",
                component_id=cid, cells=cells,
                measure=float(cells.size * g.cell_measure), color=color,
                full_dimensional=bool(cells.size), colorable=True))
    else:
        if game.n != 2:
            raise ValueError("product belief grids are 2-player only")
        mres = m or (DEFAULT_M_PRODUCT if max(game.strategy_counts) == 3
                     else DEFAULT_M_SHARED)
        # player i's belief lives in the opponent's simplex
        gb = [SimplexGrid(game.strategy_counts[1], mres),
              SimplexGrid(game.strategy_counts[0], mres)]
        a, b = game.payoffs
        pats = [_pattern_bits(gb[0].centroids @ a.T, tie_tol),
                _pattern_bits(gb[1].centroids @ b, tie_tol)]
        for cid, color in enumerate(seen):
            masks = [pats[i] == sum(1 << j for j in color[i]) for i in (0, 1)]
            fracs = [mk.mean() for mk in masks]
            cells = np.flatnonzero(np.outer(masks[0], masks[1]).ravel())
            regions.append(Region(
                game_id=game.id, eps=float("nan"), kind="belief", space="product",
                component_id=cid, cells=cells,
                measure=float(fracs[0] * fracs[1]), color=color,
                full_dimensional=bool(cells.size), colorable=True,
                projections=tuple(float(f) for f in fracs)))
    return regions


# -- rank-monotone (regular-response union) set -------------------------------


def monotone_set_membership(game: Game, profile, tol: float = TIE_TOL) -> bool:
    """True when choice probabilities are ordered like expected payoffs:
    strict payoff gaps need weakly agreeing probabilities and payoff ties
    need equal probabilities."""
    from .potential import _as_profile
    prof = _as_profile(game, profile)
    for i in range(game.n):
        pi = expected_payoffs(game, i, [prof[j] for j in range(game.n) if j != i])
        s = prof[i]
        k = s.shape[0]
        for a in range(k):
            for b in range(a + 1, k):
                gap = pi[a] - pi[b]
                if abs(gap) <= tol:
                    if abs(s[a] - s[b]) > 1e-9:
                        return False
                elif gap > 0:
                    if s[a] < s[b] - 1e-12:
                        return False
                else:
                    if s[b] < s[a] - 1e-12:
                        return False
    return True


def monotone_mask_shared(game: Game, grid: SimplexGrid,
                         tol: float = TIE_TOL) -> np.ndarray:
    """Vectorized shared-simplex version of monotone_set_membership."""
    cent = grid.centroids
    pi = shared_payoff_table(game, cent)
    k = cent.shape[1]
    ok = np.ones(cent.shape[0], dtype=bool)
    for a in range(k):
        for b in range(a + 1, k):
            gap = pi[:, a] - pi[:, b]
            sd = cent[:, a] - cent[:, b]
            tie = np.abs(gap) <= tol
            ok &= np.where(tie, np.abs(sd) <= 1e-9,
                           np.where(gap > 0, sd >= -1e-12, sd <= 1e-12))
    return ok


def monotone_region(game: Game, m: int | None = None, tol: float = TIE_TOL) -> Region:
    g = SimplexGrid(game.strategy_counts[0], m or DEFAULT_M_SHARED)
    cells = np.flatnonzero(monotone_mask_shared(game, g, tol))
    return Region(game_id=game.id, eps=float("nan"), kind="choice", space="shared",
                  component_id=0, cells=cells,
                  measure=float(cells.size * g.cell_measure))


# -- level-k prediction set ----------------------------------------------------


def levelk_region(game: Game, m: int | None = None, k_max: int = 20) -> Region:
    """Mixtures over the level hierarchy: the convex hull of the level points."""
    from .models import level_hierarchy
    if not game.symmetric:
        raise ValueError("level prediction regions are for symmetric games")
    g = SimplexGrid(game.strategy_counts[0], m or DEFAULT_M_SHARED)
    levels = level_hierarchy(game, k_max).actions
    pts = np.unique(np.round(np.asarray(levels), 12), axis=0)
    inside, degenerate = _hull_membership(pts, g.centroids)
    cells = np.flatnonzero(inside)
    measure = 0.0 if degenerate else float(cells.size * g.cell_measure)
    return Region(game_id=game.id, eps=float("nan"), kind="choice", space="shared",
                  component_id=0, cells=cells, measure=measure,
                  full_dimensional=not degenerate)


def _hull_membership(points: np.ndarray, queries: np.ndarray):
    """Membership in the convex hull of barycentric points (K = 2 or 3)."""
    k = points.shape[1]
    if k == 2:
        lo, hi = points[:, 0].min(), points[:, 0].max()
        inside = (queries[:, 0] >= lo - 1e-12) & (queries[:, 0] <= hi + 1e-12)
        return inside, abs(hi - lo) < 1e-12
    xy = np.column_stack([points[:, 1] + 0.5 * points[:, 2],
                          points[:, 2] * (np.sqrt(3) / 2)])
    q = np.column_stack([queries[:, 1] + 0.5 * queries[:, 2],
                         queries[:, 2] * (np.sqrt(3) / 2)])
    hull = _convex_hull_2d(xy)
    if len(hull) < 3:
        if len(hull) == 1:
            inside = np.abs(q - hull[0]).sum(axis=1) <= 1e-12
        else:
            inside = _on_segment(q, hull[0], hull[1])
        return inside, True
    inside = np.ones(q.shape[0], dtype=bool)
    for i in range(len(hull)):
        p0, p1 = hull[i], hull[(i + 1) % len(hull)]
        cross = (p1[0] - p0[0]) * (q[:, 1] - p0[1]) - (p1[1] - p0[1]) * (q[:, 0] - p0[0])
        inside &= cross >= -1e-12
    return inside, False


def _on_segment(q, a, b):
    ab = b - a
    t = ((q - a) @ ab) / max(float(ab @ ab), 1e-300)
    proj = a + np.clip(t, 0, 1)[:, None] * ab
    return np.abs(q - proj).sum(axis=1) <= 1e-12


def _convex_hull_2d(pts: np.ndarray):
    """Monotone-chain hull (counterclockwise), collinear points dropped."""
    uniq = np.unique(np.round(pts, 12), axis=0)
    if uniq.shape[0] <= 2:
        return [p for p in uniq]
    order = np.lexsort((uniq[:, 1], uniq[:, 0]))
    pts = uniq[order]

    def half(iterable):
        out = []
        for p in iterable:
            while len(out) >= 2 and np.cross(out[-1] - out[-2], p - out[-2]) <= 1e-14:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    return hull if len(hull) >= 3 else [pts[0], pts[-1]]


# -- hit testing ---------------------------------------------------------------


def _flatten_point(point) -> np.ndarray:
    if isinstance(point, (list, tuple)):
        return np.concatenate([np.ravel(np.asarray(p, dtype=float)) for p in point])
    return np.ravel(np.asarray(point, dtype=float))


def hit_test(regions, point):
    """Id of the region containing the point at grid resolution, or None."""
    for r in regions:
        tbl = getattr(r, "_table", None)
        if r.thin:
            if tbl is None or not r.points.size:
                continue
            cutoff = 2.5 / min(g.m for g in tbl.grids)
            if np.abs(r.points - _flatten_point(point)).sum(axis=1).min() <= cutoff:
                return r.component_id
        else:
            if tbl is None:
                continue
            idx = tbl.locate(point)
            flat = int(np.ravel_multi_index(idx, tbl.shape)) \
                if tbl.space == "product" else int(idx)
            if not hasattr(r, "_cellset"):
                r._cellset = set(int(c) for c in r.cells)
            if flat in r._cellset:
                return r.component_id
    return None
