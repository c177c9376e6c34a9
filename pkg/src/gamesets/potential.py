"""Pointwise machinery for support-threshold equilibrium sets.

A mixed profile belongs to a choice set at threshold ``eps`` when every
strategy that earns strictly less than the best one is played with
probability below ``eps`` times the modal strategy's probability.  Two
independent tests are provided:

* ``potential_value`` evaluates the nonpositive piecewise-polynomial
  potential whose roots are exactly the member profiles, and
* ``is_s_choice_point`` checks the defining inequalities directly.

Boundary conventions (shared by both, so they agree point by point): the
eps-support uses a non-strict comparison with relative slack ``REL_TOL``,
membership therefore requires suboptimal probabilities strictly below the
threshold, and payoff ties within ``tie_tol`` count as ties.  Closure of the
sets is recovered at grid level where member cells are closed polygons.
"""
from __future__ import annotations

import numpy as np

from .games import Game, expected_payoffs, payoffs_against_profile, validate_simplex

TIE_TOL = 1e-9
REL_TOL = 1e-9  # relative slack for eps-support boundary comparisons


def default_epsilon_grid(step: float = 0.02) -> np.ndarray:
    """Candidate thresholds for estimation: step, 2*step, ..., 1.0."""
    n = int(round(1.0 / step))
    return np.round(np.arange(1, n + 1) * step, 12)


def check_epsilon(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    return eps


def supp_eps(sigma, eps: float) -> tuple:
    """Strategies with probability at least eps times the modal probability."""
    eps = check_epsilon(eps)
    sigma = validate_simplex(sigma)
    thresh = eps * sigma.max()
    return tuple(np.flatnonzero(sigma >= thresh * (1.0 - REL_TOL) - 1e-15))


def positivity_shift(game: Game) -> float:
    """Constant added to all payoffs so expected payoffs are positive."""
    lo = min(float(p.min()) for p in game.payoffs)
    return 1.0 - lo if lo <= 0.0 else 0.0


def _as_profile(game: Game, profile) -> list:
    if not isinstance(profile, (list, tuple)):
        if not game.symmetric:
            raise ValueError("shared profile requires a symmetric game")
        sigma = validate_simplex(profile, game.strategy_counts[0])
        return [sigma] * game.n
    if len(profile) != game.n:
        raise ValueError(f"need {game.n} mixed strategies, got {len(profile)}")
    return [validate_simplex(s, k) for s, k in zip(profile, game.strategy_counts)]


def potential_value(game: Game, profile, eps: float,
                    tie_tol: float = TIE_TOL) -> float:
    """Sum over players of (worst supported payoff - best payoff); <= 0."""
    eps = check_epsilon(eps)
    prof = _as_profile(game, profile)
    shift = positivity_shift(game)
    total = 0.0
    for i in range(game.n):
        pi = payoffs_against_profile(game, i, prof) + shift
        supp = supp_eps(prof[i], eps)
        total += float(pi[list(supp)].min() - pi.max())
    return total


def is_s_choice_point(game: Game, profile, eps: float,
                      tie_tol: float = TIE_TOL) -> bool:
    """Direct inequality test: strictly suboptimal strategies must sit
    strictly below eps times the modal choice probability."""
    eps = check_epsilon(eps)
    prof = _as_profile(game, profile)
    for i in range(game.n):
        pi = payoffs_against_profile(game, i, prof)
        top = pi.max()
        smax = prof[i].max()
        for j in range(game.strategy_counts[i]):
            if pi[j] < top - tie_tol and not prof[i][j] < eps * smax * (1.0 - REL_TOL):
                return False
    return True


def entry_eps(game: Game, profile, tie_tol: float = TIE_TOL) -> float:
    """Smallest threshold (exclusive) at which the profile becomes a member.

    Equals the largest ratio sigma_ij / max_k sigma_ik over strictly
    suboptimal strategies j, so membership at eps is ``entry < eps`` up to
    the boundary slack.  Nesting in eps is immediate from this form.
    """
    prof = _as_profile(game, profile)
    worst = 0.0
    for i in range(game.n):
        pi = payoffs_against_profile(game, i, prof)
        top = pi.max()
        smax = prof[i].max()
        for j in range(game.strategy_counts[i]):
            if pi[j] < top - tie_tol:
                worst = max(worst, prof[i][j] / smax)
    return worst


def argmax_pattern(game: Game, profile, tie_tol: float = TIE_TOL) -> tuple:
    """Per-player sets of payoff-maximal strategies at the profile."""
    prof = _as_profile(game, profile)
    pat = []
    for i in range(game.n):
        pi = payoffs_against_profile(game, i, prof)
        pat.append(tuple(np.flatnonzero(pi >= pi.max() - tie_tol)))
    return tuple(pat)


def color_of(game: Game, profile, eps: float, tie_tol: float = TIE_TOL):
    """Per-player best-option sets when the eps-support equals the argmax
    set for every player; None when the point is not colorable."""
    eps = check_epsilon(eps)
    prof = _as_profile(game, profile)
    if not is_s_choice_point(game, prof, eps, tie_tol):
        return None
    colors = []
    for i in range(game.n):
        pi = payoffs_against_profile(game, i, prof)
        best = tuple(np.flatnonzero(pi >= pi.max() - tie_tol))
        supp = supp_eps(prof[i], eps)
        if supp != best:
            return None
        colors.append(best)
    return tuple(colors)
