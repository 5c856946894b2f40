"""Replicator and replicator-mutator flows, stationary points, diagnostics.

The flow integrated here is, per player i and action a,

    d/dt pi_i(a) = pi_i(a) (q_i(a) - v_i) + mu (r_i(a) - pi_i(a))        (*)

with mutation rate mu >= 0 and interior reference r.  mu = 0 gives plain
replicator dynamics, which cycles around interior equilibria of zero-sum
games; mu > 0 makes the flow contract to a unique stationary point pi* whose
exploitability is at most 2 mu.  KL(pi*, .) decreases along the flow at
instantaneous rate at least mu * xi with xi = min_{i,a} r_i(a) / pi*_i(a),
which is what lyapunov_decay_check measures.

At the stationary point the per-action identity

    r_i(a) / pi*_i(a) = 1 - (q_i(a) - v_i) / mu

holds; solve_stationary exploits it as a damped fixed-point polish on top of
a discrete mutation-driven learning phase, and value_gap_identity_residual
uses the same identity to cross-check an exact algebraic relation between
value gaps at pi* and a square-root quasi-metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InteriorityError, StationarySolveError
from .games import GameMatrix, Strategy, StrategyProfile, _probs
from .learners import softmax_step

__all__ = [
    "OdeConfig",
    "Trajectory",
    "StationaryPoint",
    "LyapunovReport",
    "rmd_vector_field",
    "integrate",
    "lyapunov_decay_check",
    "solve_stationary",
    "value_gap_identity_residual",
    "value_gap_identity_sides",
    "contraction_constants",
    "write_trajectory_csv",
]


@dataclass(frozen=True)
class OdeConfig:
    """Fixed-step classical Runge-Kutta settings; step is capped at 0.1 to
    stay comfortably inside the stability region for the payoff scales used
    here."""

    step: float = 1e-3
    t_end: float = 10.0
    method: str = "rk4"

    def __post_init__(self):
        if not (0.0 < self.step <= 0.1):
            raise ValueError("step must lie in (0, 0.1]")
        if self.t_end < 0.0:
            raise ValueError("t_end must be nonnegative")
        if self.method != "rk4":
            raise ValueError("only the classical rk4 integrator is provided")


@dataclass
class Trajectory:
    """Timestamped profiles along an integrated flow."""

    times: np.ndarray
    p1: np.ndarray
    p2: np.ndarray

    def __len__(self) -> int:
        return self.times.size

    def profile(self, k: int) -> StrategyProfile:
        return StrategyProfile(Strategy(self.p1[k]), Strategy(self.p2[k]))


@dataclass
class StationaryPoint:
    """A numerically certified rest point of the flow (*) for fixed mu, r.

    residual is the max-abs of the vector field at the profile, recomputed
    through rmd_vector_field so it can be re-verified independently.
    """

    profile: StrategyProfile
    residual: float
    mu: float
    reference: StrategyProfile
    game: GameMatrix
    iterations: int = 0


@dataclass
class LyapunovReport:
    """Outcome of the KL-decay check along an integrated trajectory.

    Check failures land in the flags; nothing raises.
    """

    monotone: bool
    max_step_increase: float
    measured_rate: float | None
    rate_threshold: float
    rate_ok: bool
    xi: float
    kl_initial: float
    kl_final: float
    stationary: StationaryPoint

    @property
    def passed(self) -> bool:
        return self.monotone and self.rate_ok


def _field_raw(payoff, p1, p2, mu, r1, r2):
    q1 = payoff @ p2
    q2 = -(p1 @ payoff)
    v1 = p1 @ q1
    f1 = p1 * (q1 - v1) + mu * (r1 - p1)
    f2 = p2 * (q2 + v1) + mu * (r2 - p2)
    return f1, f2


def _residual_raw(payoff, p1, p2, mu, r1, r2) -> float:
    f1, f2 = _field_raw(payoff, p1, p2, mu, r1, r2)
    return float(max(np.abs(f1).max(), np.abs(f2).max()))


def _split(profile) -> tuple[np.ndarray, np.ndarray]:
    return np.asarray(_probs(profile.p1), dtype=float), np.asarray(_probs(profile.p2), dtype=float)


def rmd_vector_field(game: GameMatrix, profile: StrategyProfile, mu: float,
                     reference: StrategyProfile):
    """Time derivative of both strategies under the flow (*).

    Each returned vector sums to zero (the flow is tangent to the simplex).
    mu = 0 yields the plain replicator field.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    p1, p2 = _split(profile)
    r1, r2 = _split(reference)
    if not (p1.min() > 0 and p2.min() > 0):
        raise ValueError("profile must be interior")
    if not (r1.min() > 0 and r2.min() > 0):
        raise ValueError("reference must be interior")
    if p1.size != game.rows or p2.size != game.cols:
        raise ValueError("profile does not match the game dimensions")
    return _field_raw(game.payoff, p1, p2, mu, r1, r2)


def integrate(game: GameMatrix, init: StrategyProfile, mu: float,
              reference: StrategyProfile, cfg: OdeConfig) -> Trajectory:
    """Classical RK4 integration of the flow (*), renormalizing each step.

    The pre-renormalization mass deviation must stay below 1e-9 * step; a
    larger deviation means the integration left its validity regime and the
    run aborts.  Loss of interiority aborts with the offending time stamp.
    """
    p1, p2 = _split(init)
    r1, r2 = _split(reference)
    if not (p1.min() > 0 and p2.min() > 0):
        raise InteriorityError("initial profile must be interior", t=0.0)
    payoff = game.payoff
    h = cfg.step
    steps = int(round(cfg.t_end / h)) if cfg.t_end > 0 else 0
    times = np.arange(steps + 1) * h
    P1 = np.empty((steps + 1, p1.size))
    P2 = np.empty((steps + 1, p2.size))
    P1[0], P2[0] = p1, p2
    half = 0.5 * h
    sixth = h / 6.0
    mass_tol = 1e-9 * h
    for k in range(steps):
        a1, a2 = _field_raw(payoff, p1, p2, mu, r1, r2)
        b1, b2 = _field_raw(payoff, p1 + half * a1, p2 + half * a2, mu, r1, r2)
        c1, c2 = _field_raw(payoff, p1 + half * b1, p2 + half * b2, mu, r1, r2)
        d1, d2 = _field_raw(payoff, p1 + h * c1, p2 + h * c2, mu, r1, r2)
        p1 = p1 + sixth * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
        p2 = p2 + sixth * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
        s1, s2 = p1.sum(), p2.sum()
        if abs(s1 - 1.0) > mass_tol or abs(s2 - 1.0) > mass_tol:
            raise RuntimeError(
                f"mass deviation exceeded {mass_tol:g} at t={times[k + 1]:g}")
        p1 /= s1
        p2 /= s2
        if not (p1.min() > 0 and p2.min() > 0):
            raise InteriorityError("trajectory left the interior", t=float(times[k + 1]))
        P1[k + 1], P2[k + 1] = p1, p2
    return Trajectory(times=times, p1=P1, p2=P2)


def _kl_to_point(s1, s2, P1, P2) -> np.ndarray:
    vals = np.sum(s1 * np.log(s1 / P1), axis=-1) + np.sum(s2 * np.log(s2 / P2), axis=-1)
    return np.maximum(vals, 0.0)


def lyapunov_decay_check(game: GameMatrix, init: StrategyProfile, mu: float,
                         reference: StrategyProfile, cfg: OdeConfig,
                         stationary: StationaryPoint | None = None) -> LyapunovReport:
    """Integrate the flow and test that KL(pi*, pi^t) behaves as a strict
    Lyapunov function.

    Checks per-step non-increase (tolerance 1e-9) and that ln KL falls at an
    average rate of at least 0.9 * mu * xi per unit time over the stretch
    where KL exceeds 1e-12.  The stationary point is solved on demand unless
    one is supplied.
    """
    if stationary is None:
        stationary = solve_stationary(game, mu, reference)
    s1, s2 = _split(stationary.profile)
    r1, r2 = _split(reference)
    xi = float(min((r1 / s1).min(), (r2 / s2).min()))
    traj = integrate(game, init, mu, reference, cfg)
    kls = _kl_to_point(s1, s2, traj.p1, traj.p2)
    diffs = np.diff(kls)
    max_inc = float(diffs.max()) if diffs.size else 0.0
    monotone = bool(max_inc <= 1e-9)
    idx = np.where(kls > 1e-12)[0]
    if idx.size >= 2:
        i0, i1 = int(idx[0]), int(idx[-1])
        span = traj.times[i1] - traj.times[i0]
        measured = float((np.log(kls[i1]) - np.log(kls[i0])) / span) if span > 0 else None
    else:
        measured = None
    threshold = -0.9 * mu * xi
    rate_ok = True if measured is None else bool(measured <= threshold)
    return LyapunovReport(
        monotone=monotone, max_step_increase=max_inc, measured_rate=measured,
        rate_threshold=threshold, rate_ok=rate_ok, xi=xi,
        kl_initial=float(kls[0]), kl_final=float(kls[-1]), stationary=stationary)


def solve_stationary(game: GameMatrix, mu: float, reference: StrategyProfile,
                     tol: float = 1e-12, max_iters: int = 600_000) -> StationaryPoint:
    """Locate the unique rest point of the flow (*) for mu > 0.

    Strategy: run the discrete mutation-driven learner under exact feedback
    with a small constant rate (0.01 / u_max), seeded from the reference,
    until the field residual reaches tol; then polish with a damped
    fixed-point sweep on  pi(a) <- mu r(a) / (mu + v - q(a)),  renormalizing
    per sweep.  The sweep map can be locally expansive (the relation has a
    pole at q - v = mu), so any sweep that increases the residual or exits
    the interior is rejected and the damping halved; the best iterate seen is
    always kept.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    if tol < 1e-12:
        raise ValueError("tol must be at least 1e-12")
    r1, r2 = _split(reference)
    if not (r1.min() > 0 and r2.min() > 0):
        raise ValueError("reference must be interior")
    payoff = game.payoff
    eta = 0.01 / max(game.u_max, 1e-12)
    p1, p2 = r1.copy(), r2.copy()

    best = _residual_raw(payoff, p1, p2, mu, r1, r2)
    b1, b2 = p1.copy(), p2.copy()
    iters = 0
    check_every = 250
    while best > tol and iters < max_iters:
        for _ in range(check_every):
            q1 = payoff @ p2
            q2 = -(p1 @ payoff)
            p1 = softmax_step(p1, q1 + mu * (r1 - p1) / p1, eta)
            p2 = softmax_step(p2, q2 + mu * (r2 - p2) / p2, eta)
        iters += check_every
        res = _residual_raw(payoff, p1, p2, mu, r1, r2)
        if res < best:
            best = res
            b1, b2 = p1.copy(), p2.copy()

    # Damped fixed-point polish from the best iterate; free extra digits when
    # the map happens to be locally stable, harmless otherwise.
    p1, p2 = b1.copy(), b2.copy()
    damp = 0.5
    for _ in range(200):
        if damp < 1e-4 or best <= 1e-15 * max(game.u_max, 1.0):
            break
        q1 = payoff @ p2
        q2 = -(p1 @ payoff)
        v1 = p1 @ q1
        den1 = mu + v1 - q1
        den2 = mu - v1 - q2
        if den1.min() <= 0 or den2.min() <= 0:
            damp *= 0.5
            p1, p2 = b1.copy(), b2.copy()
            continue
        c1 = mu * r1 / den1
        c2 = mu * r2 / den2
        n1 = (1.0 - damp) * p1 + damp * c1
        n2 = (1.0 - damp) * p2 + damp * c2
        if n1.min() <= 0 or n2.min() <= 0:
            damp *= 0.5
            p1, p2 = b1.copy(), b2.copy()
            continue
        n1 /= n1.sum()
        n2 /= n2.sum()
        res = _residual_raw(payoff, n1, n2, mu, r1, r2)
        if res < best:
            best = res
            b1, b2 = n1.copy(), n2.copy()
            p1, p2 = n1, n2
        else:
            damp *= 0.5
            p1, p2 = b1.copy(), b2.copy()

    profile = StrategyProfile(Strategy(b1), Strategy(b2))
    ref_profile = StrategyProfile(Strategy(r1), Strategy(r2))
    f1, f2 = rmd_vector_field(game, profile, mu, ref_profile)
    residual = float(max(np.abs(f1).max(), np.abs(f2).max()))
    if residual > tol:
        raise StationarySolveError(
            f"stationary solve stalled at residual {residual:.3e} > tol {tol:.1e} "
            f"after {iters} learner steps",
            best_profile=profile, best_residual=residual)
    return StationaryPoint(profile=profile, residual=residual, mu=mu,
                           reference=ref_profile, game=game, iterations=iters)


def value_gap_identity_sides(game: GameMatrix, profile: StrategyProfile, mu: float,
                             reference: StrategyProfile,
                             stationary: StationaryPoint) -> tuple[float, float]:
    """Both sides of the stationary-point value-gap identity.

    Left side: sum over players of
        v_i(pi_i, pi*_{-i}) + mu - mu * sum_a r_i(a) pi*_i(a) / pi_i(a).
    Right side: -mu * sum_{i,a} r_i(a) (sqrt(pi_i(a)/pi*_i(a)) -
    sqrt(pi*_i(a)/pi_i(a)))^2, which is nonpositive by construction.  The two
    agree exactly (in real arithmetic) whenever pi* is a rest point.
    """
    p1, p2 = _split(profile)
    if not (p1.min() > 0 and p2.min() > 0):
        raise ValueError("profile must be interior")
    r1, r2 = _split(reference)
    s1, s2 = _split(stationary.profile)
    payoff = game.payoff
    v1_cross = float(p1 @ payoff @ s2)
    v2_cross = float(-(s1 @ payoff @ p2))
    lhs = ((v1_cross + mu - mu * float(np.sum(r1 * s1 / p1)))
           + (v2_cross + mu - mu * float(np.sum(r2 * s2 / p2))))
    rhs = -mu * (float(np.sum(r1 * (np.sqrt(p1 / s1) - np.sqrt(s1 / p1)) ** 2))
                 + float(np.sum(r2 * (np.sqrt(p2 / s2) - np.sqrt(s2 / p2)) ** 2)))
    return lhs, rhs


def value_gap_identity_residual(game: GameMatrix, profile: StrategyProfile, mu: float,
                                reference: StrategyProfile,
                                stationary: StationaryPoint) -> float:
    """|LHS - RHS| of the value-gap identity; an independent correctness
    oracle for solve_stationary and the game primitives."""
    lhs, rhs = value_gap_identity_sides(game, profile, mu, reference, stationary)
    return abs(lhs - rhs)


def contraction_constants(stationary: StationaryPoint, reference: StrategyProfile,
                          rho_estimate: float) -> tuple[float, float, float]:
    """Constants (alpha, beta, gamma) of the geometric KL-contraction factor.

        alpha = min_{i,a} r_i(a) / pi*_i(a)
        beta  = (16 / rho^2) * (max_{i,a} r_i(a) / pi*_i(a))^2
        gamma = 16 * u_max^2

    rho is the caller's lower bound on strategy coordinates along the run
    (e.g. the smallest coordinate observed on a trajectory); computing the
    exact sublevel-set value it stands for is out of scope.
    """
    if not (0.0 < rho_estimate < 1.0):
        raise ValueError("rho_estimate must lie in (0, 1)")
    r1, r2 = _split(reference)
    s1, s2 = _split(stationary.profile)
    ratios = np.concatenate([r1 / s1, r2 / s2])
    alpha = float(ratios.min())
    beta = 16.0 / rho_estimate ** 2 * float(ratios.max()) ** 2
    gamma = 16.0 * stationary.game.u_max ** 2
    return alpha, beta, gamma


def write_trajectory_csv(path, game: GameMatrix, traj: Trajectory,
                         stationary: StationaryPoint | None = None) -> None:
    """Export a trajectory as CSV rows
    (t, p1_1..p1_n, p2_1..p2_m, kl_to_stationary, exploitability)."""
    q1 = traj.p2 @ game.payoff.T
    q2 = -(traj.p1 @ game.payoff)
    explt = q1.max(axis=-1) + q2.max(axis=-1)
    if stationary is not None:
        s1, s2 = _split(stationary.profile)
        kls = _kl_to_point(s1, s2, traj.p1, traj.p2)
    header = (["t"]
              + [f"p1_{a + 1}" for a in range(game.rows)]
              + [f"p2_{b + 1}" for b in range(game.cols)]
              + ["kl_to_stationary", "exploitability"])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(len(traj)):
            row = [repr(float(traj.times[k]))]
            row += [repr(float(x)) for x in traj.p1[k]]
            row += [repr(float(x)) for x in traj.p2[k]]
            row.append(repr(float(kls[k])) if stationary is not None else "")
            row.append(repr(float(explt[k])))
            fh.write(",".join(row) + "\n")
