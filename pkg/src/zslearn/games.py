"""Two-player zero-sum matrix games: payoffs, gradients, exploitability, KL.

A game is described by player 1's payoff table ``u1``; player 2's payoff is
structurally ``u2 = -u1`` and is never stored.  For a mixed profile
``pi = (pi1, pi2)``:

    v1          = pi1^T U pi2                 (expected value, v2 = -v1)
    q1(a)       = (U pi2)(a)                  (per-action expected payoff)
    q2(b)       = -(pi1^T U)(b)
    explt(pi)   = max_a q1(a) + max_b q2(b)   (zero iff pi is a Nash equilibrium)
    KL(p, q)    = sum_a p(a) ln(p(a)/q(a))    (natural log, 0 ln 0 = 0)

The module also builds the benchmark games used throughout: a biased
rock-paper-scissors game (unique interior equilibrium (1/5, 3/5, 1/5)),
a 5x5 game whose column player has a continuum of equilibria, and square
games with i.i.d. standard normal payoffs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InfiniteDivergenceError

__all__ = [
    "GameMatrix",
    "Strategy",
    "StrategyProfile",
    "expected_value",
    "gradient",
    "best_response",
    "exploitability",
    "kl",
    "kl_profile",
    "make_brps",
    "make_brps_fig1",
    "make_mne",
    "make_matching_pennies",
    "make_random",
    "brps_nash",
    "brps_fig1_nash",
    "mne_nash_p1",
    "nash_distance_mne",
    "uniform",
    "random_interior",
]

_SIMPLEX_TOL = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GameMatrix:
    """Player 1's payoff table.  Zero-sum: u2(a, b) = -u1(a, b) always.

    ``u_max`` is recomputed from the entries on construction, never trusted
    from the caller.
    """

    payoff: np.ndarray
    rows: int = 0
    cols: int = 0
    u_max: float = 0.0

    def __post_init__(self):
        payoff = np.asarray(self.payoff, dtype=float)
        if payoff.ndim != 2 or payoff.size == 0:
            raise ValueError(f"payoff must be a nonempty 2-d matrix, got shape {payoff.shape}")
        if not np.isfinite(payoff).all():
            raise ValueError("payoff entries must be finite")
        object.__setattr__(self, "payoff", _freeze(payoff))
        object.__setattr__(self, "rows", payoff.shape[0])
        object.__setattr__(self, "cols", payoff.shape[1])
        object.__setattr__(self, "u_max", float(np.abs(payoff).max()))


@dataclass(frozen=True)
class Strategy:
    """A probability vector over one player's actions."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("a strategy is a nonempty 1-d probability vector")
        if not np.isfinite(p).all() or (p < 0).any():
            raise ValueError("strategy entries must be finite and nonnegative")
        if abs(p.sum() - 1.0) > _SIMPLEX_TOL:
            raise ValueError(f"strategy entries sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", _freeze(p))

    def __len__(self) -> int:
        return self.probs.size

    @property
    def interior(self) -> bool:
        """True when every action has strictly positive probability."""
        return bool(self.probs.min() > 0.0)


@dataclass(frozen=True)
class StrategyProfile:
    """A pair of strategies, one per player."""

    p1: Strategy
    p2: Strategy

    def __post_init__(self):
        if not isinstance(self.p1, Strategy):
            object.__setattr__(self, "p1", Strategy(np.asarray(self.p1, dtype=float)))
        if not isinstance(self.p2, Strategy):
            object.__setattr__(self, "p2", Strategy(np.asarray(self.p2, dtype=float)))

    @property
    def interior(self) -> bool:
        return self.p1.interior and self.p2.interior


def _probs(s) -> np.ndarray:
    """Accept a Strategy or a raw array; return the probability vector."""
    return s.probs if isinstance(s, Strategy) else np.asarray(s, dtype=float)


def _check_profile(game: GameMatrix, profile: StrategyProfile):
    p1, p2 = _probs(profile.p1), _probs(profile.p2)
    if p1.size != game.rows or p2.size != game.cols:
        raise DimensionMismatchError(
            f"profile lengths ({p1.size}, {p2.size}) do not match game shape "
            f"({game.rows}, {game.cols})"
        )
    return p1, p2


def expected_value(game: GameMatrix, profile: StrategyProfile, player: int) -> float:
    """Expected payoff v_i of `player` under the mixed profile.

    Player 2's value is literally the negation of player 1's, so
    v1 + v2 == 0 holds bitwise.
    """
    p1, p2 = _check_profile(game, profile)
    v1 = float(p1 @ game.payoff @ p2)
    if player == 1:
        return v1
    if player == 2:
        return -v1
    raise ValueError(f"player must be 1 or 2, got {player}")


def gradient(game: GameMatrix, opponent, player: int) -> np.ndarray:
    """Per-action expected payoff vector q_i against the opponent's mix.

    q_i(a) = E_{b ~ opponent}[u_i(a, b)].  Every entry lies in
    [-u_max, u_max].  This is the gradient of v_i in player i's strategy.
    """
    opp = _probs(opponent)
    if player == 1:
        if opp.size != game.cols:
            raise DimensionMismatchError(
                f"opponent length {opp.size} != cols {game.cols}")
        return game.payoff @ opp
    if player == 2:
        if opp.size != game.rows:
            raise DimensionMismatchError(
                f"opponent length {opp.size} != rows {game.rows}")
        return -(opp @ game.payoff)
    raise ValueError(f"player must be 1 or 2, got {player}")


def best_response(game: GameMatrix, opponent, player: int) -> int:
    """Index of a pure best response; ties break toward the lowest index."""
    return int(np.argmax(gradient(game, opponent, player)))


def exploitability(game: GameMatrix, profile: StrategyProfile) -> float:
    """Sum of both players' best-response gains against the profile.

    Best responses to a fixed opponent mix are pure, so the inner maxima
    reduce to maxima over actions.  Nonnegative up to rounding (no clamp is
    applied); zero exactly at Nash equilibria.
    """
    p1, p2 = _check_profile(game, profile)
    q1 = game.payoff @ p2
    q2 = -(p1 @ game.payoff)
    return float(q1.max() + q2.max())


def kl(p, q) -> float:
    """Kullback-Leibler divergence sum_a p(a) ln(p(a)/q(a)).

    Uses the convention 0 ln(0/x) = 0.  Raises InfiniteDivergenceError when
    q(a) = 0 at some action with p(a) > 0 instead of silently returning inf.
    Tiny negative rounding residue (the true value is always >= 0) is floored
    at exactly 0.0.
    """
    p, q = _probs(p), _probs(q)
    if p.size != q.size:
        raise DimensionMismatchError(f"length mismatch: {p.size} vs {q.size}")
    support = p > 0.0
    if (q[support] <= 0.0).any():
        raise InfiniteDivergenceError(
            "KL(p, q) is infinite: q has zero mass where p does not")
    ps = p[support]
    val = float(np.sum(ps * np.log(ps / q[support])))
    return val if val > 0.0 else 0.0


def kl_profile(p: StrategyProfile, q: StrategyProfile) -> float:
    """Sum of the per-player KL divergences of two profiles."""
    return kl(p.p1, q.p1) + kl(p.p2, q.p2)


def make_brps() -> GameMatrix:
    """Biased rock-paper-scissors.  Unique equilibrium (1/5, 3/5, 1/5) per side."""
    return GameMatrix(np.array([
        [0.0, -1.0, 3.0],
        [1.0, 0.0, -1.0],
        [-3.0, 1.0, 0.0],
    ]))


def make_brps_fig1() -> GameMatrix:
    """Transpose-negation variant of the biased RPS matrix.

    Kept only for reproducing flow-field trajectory plots; experiments use
    make_brps().
    """
    return GameMatrix(np.array([
        [0.0, -3.0, 1.0],
        [3.0, 0.0, -1.0],
        [-1.0, 1.0, 0.0],
    ]))


def make_mne() -> GameMatrix:
    """5x5 game whose column player has a continuum of equilibria.

    Row player's unique equilibrium is (1/3, 1/3, 1/3, 0, 0); the column
    player's equilibrium set is {y : y1 = y2 = y3, y5/2 <= y4 <= 2 y5}.
    """
    return GameMatrix(np.array([
        [0.0, 1.0, -1.0, 0.0, 0.0],
        [-1.0, 0.0, 1.0, 0.0, 0.0],
        [1.0, -1.0, 0.0, 0.0, 0.0],
        [1.0, -1.0, 0.0, -2.0, 1.0],
        [1.0, -1.0, 0.0, 1.0, -2.0],
    ]))


def make_matching_pennies() -> GameMatrix:
    """2x2 matching pennies; uniform play is the equilibrium by symmetry."""
    return GameMatrix(np.array([[1.0, -1.0], [-1.0, 1.0]]))


def make_random(n: int, seed) -> GameMatrix:
    """n x n game with i.i.d. standard normal payoffs.

    ``seed`` may be an integer or a numpy Generator.  The generator family is
    pinned to numpy's PCG64 (default_rng) so identical seeds reproduce the
    identical matrix across runs and platforms.
    """
    if n < 1:
        raise ValueError(f"game size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return GameMatrix(rng.standard_normal((n, n)))


def brps_nash() -> StrategyProfile:
    """The unique equilibrium profile of make_brps()."""
    nash = np.array([0.2, 0.6, 0.2])
    return StrategyProfile(Strategy(nash), Strategy(nash.copy()))


def brps_fig1_nash() -> StrategyProfile:
    """The unique equilibrium profile of make_brps_fig1()."""
    nash = np.array([0.2, 0.2, 0.6])
    return StrategyProfile(Strategy(nash), Strategy(nash.copy()))


def mne_nash_p1() -> Strategy:
    """Row player's unique equilibrium strategy in make_mne()."""
    return Strategy(np.array([1.0, 1.0, 1.0, 0.0, 0.0]) / 3.0)


def nash_distance_mne(p2) -> float:
    """L1 violation of the column-player equilibrium constraints of make_mne().

    Returns 0.0 when y1 = y2 = y3 and y5/2 <= y4 <= 2 y5 all hold within
    1e-9; otherwise |y1 - y2| + |y2 - y3| plus the distance of y4 from the
    interval [y5/2, 2 y5].
    """
    y = _probs(p2)
    if y.size != 5:
        raise DimensionMismatchError(f"expected a length-5 strategy, got {y.size}")
    viol = abs(y[0] - y[1]) + abs(y[1] - y[2])
    lo, hi = y[4] / 2.0, 2.0 * y[4]
    if y[3] < lo:
        viol += lo - y[3]
    elif y[3] > hi:
        viol += y[3] - hi
    return 0.0 if viol <= 1e-9 else float(viol)


def uniform(n: int) -> Strategy:
    return Strategy(np.full(n, 1.0 / n))


def random_interior(n: int, rng) -> Strategy:
    """Strategy drawn from a flat Dirichlet, conditioned away from exact zeros."""
    rng = np.random.default_rng(rng)
    while True:
        p = rng.dirichlet(np.ones(n))
        if p.min() > 0.0:
            return Strategy(p)
