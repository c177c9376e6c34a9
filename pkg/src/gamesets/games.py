"""Finite normal-form games: payoff tensors, expected payoffs, best replies,
and small-game Nash enumeration.

Payoff conventions
------------------
A game stores one dense tensor per player: ``payoffs[i][x_1, ..., x_n]`` is
player ``i``'s payoff (in tokens) at the pure profile ``(x_1, ..., x_n)``.

Symmetric games are built from a single shared table ``T`` in which the first
axis is the player's own action and the remaining axes are the opponents'
actions.  For two players ``P_1(a, b) = T[a, b]`` and ``P_2(a, b) = T[b, a]``.
For three players ``T`` must be symmetric in its opponent axes and
``P_i(x) = T[x_i, x_j, x_k]`` with ``{j, k}`` the other two players.  This is
the convention asserted by the bundled-fixture tests.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

TIE_TOL = 1e-9
SIMPLEX_TOL = 1e-12


class DegenerateGameWarning(UserWarning):
    """A support system was singular (payoff ties make it underdetermined)."""


def validate_simplex(v, k: int | None = None, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Return ``v`` as a float vector after checking it lies on a simplex."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"simplex vector must be 1-D, got shape {v.shape}")
    if k is not None and v.shape[0] != k:
        raise ValueError(f"expected length {k}, got {v.shape[0]}")
    if np.any(v < -tol):
        raise ValueError(f"negative probability in {v}")
    if abs(v.sum() - 1.0) > max(tol, 1e-12 * v.shape[0]):
        raise ValueError(f"probabilities sum to {v.sum()!r}, not 1")
    return v


@dataclass(frozen=True)
class Game:
    id: str
    payoffs: tuple  # one ndarray per player, shape = strategy_counts
    labels: tuple  # per player, tuple of strategy names
    symmetric: bool = False
    sym_table: np.ndarray | None = None  # shared table for symmetric games

    @property
    def n(self) -> int:
        return len(self.payoffs)

    @property
    def strategy_counts(self) -> tuple:
        return tuple(p.shape[i] for i, p in enumerate(self.payoffs))

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two players")
        shape = self.payoffs[0].shape
        for i, p in enumerate(self.payoffs):
            if p.shape != shape:
                raise ValueError(f"payoff tensor {i} has shape {p.shape}, expected {shape}")
            if not np.all(np.isfinite(p)):
                raise ValueError(f"non-finite payoffs for player {i}")
        if len(self.labels) != self.n:
            raise ValueError("labels must be given per player")
        for i, lab in enumerate(self.labels):
            if len(lab) != shape[i]:
                raise ValueError(f"player {i} has {shape[i]} strategies but {len(lab)} labels")
        if any(k < 2 for k in shape):
            raise ValueError("every player needs at least two strategies")
        if self.symmetric:
            if len(set(shape)) != 1:
                raise ValueError("symmetric game needs equal strategy counts")
            if self.sym_table is None:
                raise ValueError("symmetric game must carry its shared table")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_tensors(game_id: str, tensors, labels=None) -> "Game":
        tensors = tuple(np.asarray(t, dtype=float) for t in tensors)
        shape = tensors[0].shape
        if labels is None:
            labels = tuple(tuple(_default_labels(k)) for k in shape)
        else:
            labels = tuple(tuple(l) for l in labels)
        return Game(game_id, tensors, labels)

    @staticmethod
    def symmetric_2p(game_id: str, table, labels=None) -> "Game":
        t = np.asarray(table, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError("2-player symmetric table must be square")
        labels = _sym_labels(labels, t.shape[0], 2)
        return Game(game_id, (t.copy(), t.T.copy()), labels, symmetric=True, sym_table=t)

    @staticmethod
    def symmetric_3p(game_id: str, table, labels=None) -> "Game":
        t = np.asarray(table, dtype=float)
        if t.ndim != 3 or len(set(t.shape)) != 1:
            raise ValueError("3-player symmetric table must be K x K x K")
        if not np.allclose(t, np.swapaxes(t, 1, 2), atol=0):
            raise ValueError("table must be symmetric in the opponent axes")
        p1 = t.copy()
        p2 = np.transpose(t, (1, 0, 2)).copy()  # P_2(x1,x2,x3) = T[x2,x1,x3]
        p3 = np.transpose(t, (1, 2, 0)).copy()  # P_3(x1,x2,x3) = T[x3,x1,x2]
        labels = _sym_labels(labels, t.shape[0], 3)
        return Game(game_id, (p1, p2, p3), labels, symmetric=True, sym_table=t)


def _default_labels(k: int):
    base = ("R", "B", "Y", "G", "P")
    return base[:k] if k <= len(base) else tuple(f"s{i}" for i in range(k))


def _sym_labels(labels, k: int, n: int):
    one = tuple(labels) if labels is not None else _default_labels(k)
    return tuple(one for _ in range(n))


# -- expected payoffs ------------------------------------------------------


def expected_payoffs(game: Game, who: int, against) -> np.ndarray:
    """Expected payoff per own pure strategy against a belief.

    ``against`` is either one simplex vector per opponent (in player order,
    excluding ``who``) or, for symmetric games, a single shared vector used
    for every opponent.
    """
    k_own = game.strategy_counts[who]
    is_factor_list = (isinstance(against, (list, tuple)) and len(against) > 0
                      and np.ndim(against[0]) >= 1)
    if not is_factor_list:
        # a single vector: shared symmetric belief, or the lone opponent of a
        # 2-player game
        if game.symmetric:
            w = validate_simplex(against, k_own)
            factors = [w] * (game.n - 1)
        elif game.n == 2:
            other = 1 - who
            factors = [validate_simplex(against, game.strategy_counts[other])]
        else:
            raise ValueError("shared belief vector requires a symmetric game")
    else:
        others = [j for j in range(game.n) if j != who]
        if len(against) != len(others):
            raise ValueError(f"need {len(others)} belief factors, got {len(against)}")
        factors = [validate_simplex(f, game.strategy_counts[j])
                   for f, j in zip(against, others)]
    t = game.payoffs[who]
    # contract opponent axes from the highest index down so the lower
    # axis numbers stay valid; own axis (position `who`) survives
    others = [j for j in range(game.n) if j != who]
    for j, f in sorted(zip(others, factors), key=lambda p: -p[0]):
        t = np.tensordot(t, f, axes=([j], [0]))
    return np.asarray(t, dtype=float)


def payoffs_against_profile(game: Game, who: int, profile) -> np.ndarray:
    """Expected payoffs for ``who`` when beliefs are correct (= others' play)."""
    others = [profile[j] for j in range(game.n) if j != who]
    return expected_payoffs(game, who, others)


def best_reply_set(pi, tie_tol: float = TIE_TOL) -> tuple:
    """Indices within ``tie_tol`` of the maximal expected payoff."""
    pi = np.asarray(pi, dtype=float)
    if not np.all(np.isfinite(pi)):
        raise ValueError("payoffs must be finite")
    if tie_tol < 0:
        raise ValueError("tie_tol must be nonnegative")
    return tuple(np.flatnonzero(pi >= pi.max() - tie_tol))


# -- Nash enumeration ------------------------------------------------------


def pure_nash(game: Game) -> list:
    """All pure profiles with no strictly profitable unilateral deviation."""
    out = []
    for profile in itertools.product(*(range(k) for k in game.strategy_counts)):
        ok = True
        for i in range(game.n):
            here = game.payoffs[i][profile]
            idx = list(profile)
            for d in range(game.strategy_counts[i]):
                idx[i] = d
                if game.payoffs[i][tuple(idx)] > here + TIE_TOL:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(profile)
    return out


def support_enumeration_nash(game: Game, symmetric_only: bool = False,
                             tol: float = 1e-9) -> list:
    """All Nash equilibria of a 2-player game by support enumeration.

    Solves the indifference system for every support pair and keeps feasible
    solutions.  Singular systems (payoff ties) are skipped with a
    DegenerateGameWarning; the profiles they would contribute are recovered
    pointwise by the callers that need them.
    """
    if game.n != 2:
        raise ValueError("support enumeration is implemented for 2-player games")
    k1, k2 = game.strategy_counts
    if max(k1, k2) > 4:
        raise ValueError("desk scale only: strategy counts must be <= 4")
    a, b = game.payoffs  # a[x1,x2] for player 1, b[x1,x2] for player 2
    found = []
    for s1 in _supports(k1):
        for s2 in _supports(k2):
            sol = _solve_support_pair(a, b, s1, s2, tol)
            if sol is None:
                continue
            p, q = sol
            if symmetric_only and not (k1 == k2 and np.allclose(p, q, atol=1e-8)):
                continue
            if not any(np.allclose(p, f[0], atol=1e-8) and np.allclose(q, f[1], atol=1e-8)
                       for f in found):
                found.append((p, q))
    return found


def _supports(k: int):
    for r in range(1, k + 1):
        yield from itertools.combinations(range(k), r)


def _solve_support_pair(a, b, s1, s2, tol):
    k1, k2 = a.shape
    # player 2's mixture q (on s2) makes player 1 indifferent across s1
    q = _indifference_solution(a[list(s1)][:, list(s2)], len(s2), tol)
    p = _indifference_solution(b[list(s1)][:, list(s2)].T, len(s1), tol)
    if q is None or p is None:
        return None
    pf = np.zeros(k1)
    pf[list(s1)] = p
    qf = np.zeros(k2)
    qf[list(s2)] = q
    # no profitable deviation outside the supports
    pi1 = a @ qf
    pi2 = b.T @ pf
    v1 = pi1[list(s1)].mean()
    v2 = pi2[list(s2)].mean()
    if np.any(pi1 > v1 + 1e-8) or np.any(pi2 > v2 + 1e-8):
        return None
    return pf, qf


def _indifference_solution(m, width, tol):
    """Solve for a simplex vector q over `width` columns equalizing the rows of m."""
    rows, cols = m.shape
    # unknowns: q (cols) and the common value v
    eqs = np.zeros((rows + 1, cols + 1))
    rhs = np.zeros(rows + 1)
    eqs[:rows, :cols] = m
    eqs[:rows, cols] = -1.0
    eqs[rows, :cols] = 1.0
    rhs[rows] = 1.0
    if rows + 1 < cols + 1:
        return None  # underdetermined: continuum, skip (degenerate support)
    try:
        sol, res, rank, _ = np.linalg.lstsq(eqs, rhs, rcond=None)
    except np.linalg.LinAlgError:
        return None
    if rank < cols + 1:
        warnings.warn("singular support system; degenerate game",
                      DegenerateGameWarning, stacklevel=3)
        return None
    if np.max(np.abs(eqs @ sol - rhs)) > 1e-8:
        return None
    q = sol[:cols]
    if np.any(q < -tol):
        return None
    q = np.clip(q, 0.0, None)
    return q / q.sum()


def symmetric_nash(game: Game, tol: float = 1e-10) -> list:
    """Symmetric Nash equilibria of a symmetric game (n = 2 or 3).

    Enumerates supports of the shared simplex.  Pair supports reduce to a
    univariate root problem solved exactly via np.roots; the full support
    uses damped Newton from a deterministic lattice of starting points.
    """
    if not game.symmetric:
        raise ValueError("symmetric_nash requires a symmetric game")
    k = game.strategy_counts[0]
    out = []

    def add(sigma):
        sigma = np.clip(sigma, 0.0, None)
        sigma = sigma / sigma.sum()
        pi = expected_payoffs(game, 0, sigma)
        supp = np.flatnonzero(sigma > 1e-9)
        v = pi[supp].max()
        if np.max(np.abs(pi[supp] - v)) > 1e-7 or np.any(pi > v + 1e-7):
            return
        if not any(np.allclose(sigma, s, atol=1e-7) for s in out):
            out.append(sigma)

    for support in _supports(k):
        s = list(support)
        if len(s) == 1:
            e = np.zeros(k)
            e[s[0]] = 1.0
            add(e)
        elif len(s) == 2:
            for t in _pair_support_roots(game, s):
                sig = np.zeros(k)
                sig[s[0]], sig[s[1]] = t, 1.0 - t
                add(sig)
        else:
            for sig in _full_support_newton(game, s):
                add(sig)
    return out


def _pair_support_roots(game, s):
    """Roots of pi_a(sigma(t)) - pi_b(sigma(t)) on a two-strategy support."""
    k = game.strategy_counts[0]
    a, b = s
    # polynomial coefficients of f(t) = pi_a - pi_b, degree n-1
    ts = np.linspace(0.0, 1.0, game.n)  # n sample points determine the poly
    samples = []
    for t in ts:
        sig = np.zeros(k)
        sig[a], sig[b] = t, 1.0 - t
        pi = expected_payoffs(game, 0, sig)
        samples.append(pi[a] - pi[b])
    coeffs = np.polyfit(ts, samples, game.n - 1)
    roots = np.roots(coeffs) if np.max(np.abs(coeffs)) > 1e-12 else np.array([])
    good = [float(r.real) for r in roots if abs(r.imag) < 1e-9 and -1e-9 <= r.real <= 1 + 1e-9]
    if np.max(np.abs(coeffs)) <= 1e-12:  # identically indifferent: whole edge
        good = [0.5]
    return [min(max(t, 0.0), 1.0) for t in good]


def _full_support_newton(game, s):
    k = game.strategy_counts[0]
    m = len(s)
    res = []
    starts = []
    grid = np.linspace(0.1, 0.9, 5)
    for w in itertools.product(grid, repeat=m - 1):
        if sum(w) < 1.0 - 1e-9:
            starts.append(np.array(list(w) + [1.0 - sum(w)]))
    starts.append(np.full(m, 1.0 / m))
    for w0 in starts:
        w = w0.copy()
        ok = False
        for _ in range(80):
            sig = np.zeros(k)
            sig[s] = w
            pi = expected_payoffs(game, 0, sig)
            f = pi[s[:-1]] - pi[s[-1]]
            if np.max(np.abs(f)) < 1e-12:
                ok = True
                break
            jac = np.zeros((m - 1, m - 1))
            h = 1e-7
            for j in range(m - 1):
                wp = w.copy()
                wp[j] += h
                wp[-1] -= h
                sp = np.zeros(k)
                sp[s] = wp
                pip = expected_payoffs(game, 0, np.clip(sp, 0, None) / sp.sum()) \
                    if sp.min() >= -1e-12 else None
                if pip is None:
                    break
                jac[:, j] = (pip[s[:-1]] - pip[s[-1]] - f) / h
            else:
                try:
                    step = np.linalg.solve(jac, -f)
                except np.linalg.LinAlgError:
                    break
                step_full = np.append(step, -step.sum())
                scale = 1.0
                while np.any(w + scale * step_full < -1e-12) and scale > 1e-6:
                    scale *= 0.5
                w = w + scale * step_full
                if np.any(w < -1e-9) or np.any(w > 1 + 1e-9):
                    break
                w = np.clip(w, 0.0, 1.0)
                tot = w.sum()
                if tot <= 0:
                    break
                w = w / tot
                continue
            break
        if ok and np.all(w > -1e-9):
            res.append(_embed(w, s, k))
    return res


def _embed(w, s, k):
    sig = np.zeros(k)
    sig[s] = np.clip(w, 0.0, None)
    return sig / sig.sum()
