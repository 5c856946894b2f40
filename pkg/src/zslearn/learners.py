"""Discrete-time learning rules: MWU, OMWU, and mutation-driven MWU (M2WU).

All three share one exponential-reweighting kernel

    pi'(a)  propto  pi(a) * exp(eta * d(a))

and differ only in the direction vector d:

    MWU    d = q_hat                      (observed gradient)
    OMWU   d = 2 q_hat - q_hat_prev       (previous observation as prediction)
    M2WU   d = q_hat + (mu / pi) (r - pi) (mutation toward a reference r)

M2WU comes in two flavors: with a fixed reference (update_freq None) the
iterate contracts to the stationary point of the associated
replicator-mutator flow, a 2*mu-approximate equilibrium; with a finite
update_freq N the reference is overwritten by the current strategy every N
steps, and the sequence of references converges to an exact equilibrium.

Updates are simultaneous: both players observe feedback computed from the
time-t profile, then both move.  The kernel is evaluated in log space with
max subtraction, so directions with entries up to ~700/eta cannot overflow,
and the result is renormalized by exact division each step.

Multiplicative updates keep every coordinate positive in exact arithmetic,
but on long runs in large games the probability of a dominated action decays
geometrically past the smallest positive double and rounds to exact zero.
For MWU and OMWU a zero coordinate is benign and absorbing (the real value
would be e.g. exp(-3000), zero to hundreds of digits), so runs continue and
only a NaN state aborts.  M2WU divides by the strategy, so its steps clamp
coordinates at 1e-300: far below any statistically meaningful scale, and a
bitwise no-op whenever every coordinate is above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DivergedError, InteriorityError
from .feedback import FeedbackChannel, observe
from .games import GameMatrix, Strategy, StrategyProfile, _probs

__all__ = [
    "Schedule",
    "LearnerConfig",
    "LearnerState",
    "RunTrace",
    "mutation_gradient",
    "softmax_step",
    "step_mwu",
    "step_omwu",
    "step_m2wu",
    "make_state",
    "run",
    "run_batch",
]

ALGOS = ("mwu", "omwu", "m2wu")

# representational underflow guard for the mutation term's 1/pi (see module
# docstring); never reached by trajectories in ordinary payoff/rate ranges
_STRATEGY_FLOOR = 1e-300


@dataclass(frozen=True)
class Schedule:
    """Learning-rate sequence: eta(t) = eta0 (constant) or eta0*(t+1)^-lam."""

    kind: str = "constant"
    eta0: float = 0.1
    lam: float = 0.75

    def __post_init__(self):
        if self.kind not in ("constant", "power"):
            raise ValueError(f"schedule kind must be 'constant' or 'power', got {self.kind!r}")
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if self.kind == "power" and not (0.0 < self.lam <= 1.0):
            raise ValueError("decay exponent must lie in (0, 1]")

    def eta(self, t: int) -> float:
        if self.kind == "constant":
            return self.eta0
        return self.eta0 * float(t + 1) ** (-self.lam)


@dataclass(frozen=True)
class LearnerConfig:
    """Algorithm choice and per-learner hyperparameters.

    update_freq is the reference-refresh period N for m2wu; None keeps the
    reference fixed for the whole run.  reference defaults to uniform.
    """

    algo: str = "mwu"
    mu: float = 0.0
    update_freq: int | None = None
    reference: np.ndarray | None = None

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {ALGOS}, got {self.algo!r}")
        if not (0.0 <= self.mu <= 1.0):
            raise ValueError("mu must lie in [0, 1]")
        if self.update_freq is not None and self.update_freq < 1:
            raise ValueError("update_freq must be a positive integer or None")


@dataclass
class LearnerState:
    """Mutable per-player learner state.

    strategy and reference are raw probability vectors (the hot loop works on
    arrays; wrap in Strategy at the boundary if validation is wanted).
    within_epoch counts steps since the last reference refresh and always
    stays below update_freq.
    """

    algo: str
    strategy: np.ndarray
    reference: np.ndarray | None = None
    prev_obs: np.ndarray | None = None
    mu: float = 0.0
    update_freq: int | None = None
    epoch: int = 0
    within_epoch: int = 0
    t: int = 0


def make_state(config: LearnerConfig, init) -> LearnerState:
    strategy = np.array(_probs(init), dtype=float)
    if strategy.min() <= 0:
        raise InteriorityError("initial strategy must be interior")
    reference = None
    if config.algo == "m2wu":
        if config.reference is None:
            reference = np.full(strategy.size, 1.0 / strategy.size)
        else:
            reference = np.array(_probs(config.reference), dtype=float)
            if reference.min() <= 0:
                raise InteriorityError("reference strategy must be interior")
    return LearnerState(
        algo=config.algo, strategy=strategy, reference=reference,
        mu=config.mu, update_freq=config.update_freq)


def mutation_gradient(obs, state: LearnerState) -> np.ndarray:
    """Observed gradient plus the mutation term (mu / pi) * (r - pi).

    With mu = 0 the observation is returned untouched (same object), so the
    zero-mutation learner follows exactly the MWU arithmetic path.
    """
    if state.mu == 0.0:
        return obs
    pi = state.strategy
    if not (pi.min() > 0.0):
        raise InteriorityError("strategy has a non-positive coordinate; "
                               "multiplicative updates should never reach here")
    term = state.reference - pi
    term *= state.mu
    term /= pi
    return obs + term


def softmax_step(strategy, direction, eta: float) -> np.ndarray:
    """Multiplicative reweighting pi'(a) propto pi(a) exp(eta d(a)).

    Log-domain with max subtraction; invariant (up to rounding) to adding a
    constant to the direction.  Works on a single strategy vector or on a
    batch with strategies along the last axis.
    """
    pi = _probs(strategy)
    d = np.asarray(direction, dtype=float)
    # cheap screen first (a finite sum implies finite entries except for
    # astronomically large cancelling values, which the full check catches)
    if not math.isfinite(d.sum()) and not np.isfinite(d).all():
        raise ValueError("direction vector has non-finite entries")
    logits = np.log(pi)  # log(0) = -inf for absorbed actions is intended
    logits += d * eta
    if logits.ndim == 1:
        logits -= logits.max()
        np.exp(logits, out=logits)
        logits /= logits.sum()
    else:
        logits -= logits.max(axis=-1, keepdims=True)
        np.exp(logits, out=logits)
        logits /= logits.sum(axis=-1, keepdims=True)
    return logits


def step_mwu(state: LearnerState, obs, eta: float) -> LearnerState:
    """One MWU update (in place): reweight by the observed gradient."""
    state.strategy = softmax_step(state.strategy, obs, eta)
    state.t += 1
    return state


def step_omwu(state: LearnerState, obs, eta: float) -> LearnerState:
    """One optimistic update (in place): direction 2*obs - previous obs.

    The prediction defaults to the zero vector on the first step.
    """
    if state.prev_obs is None:
        direction = 2.0 * np.asarray(obs, dtype=float)
    else:
        direction = 2.0 * np.asarray(obs, dtype=float) - state.prev_obs
    state.strategy = softmax_step(state.strategy, direction, eta)
    state.prev_obs = np.asarray(obs, dtype=float)
    state.t += 1
    return state


def step_m2wu(state: LearnerState, obs, eta: float) -> LearnerState:
    """One mutation-driven update (in place), with epoch bookkeeping.

    After the strategy moves, the within-epoch counter advances; when it
    reaches update_freq the epoch increments and the just-computed strategy
    is copied into the reference.  Coordinates are clamped at 1e-300 so the
    next step's 1/pi stays representable (a no-op unless a coordinate has
    decayed past that scale).
    """
    state.strategy = softmax_step(state.strategy, mutation_gradient(obs, state), eta)
    if state.mu > 0.0:
        np.maximum(state.strategy, _STRATEGY_FLOOR, out=state.strategy)
    state.within_epoch += 1
    if state.update_freq is not None and state.within_epoch == state.update_freq:
        state.epoch += 1
        state.within_epoch = 0
        state.reference = state.strategy.copy()
    state.t += 1
    return state


_STEP = {"mwu": step_mwu, "omwu": step_omwu, "m2wu": step_m2wu}


@dataclass
class RunTrace:
    """Recorded time series of one learning run.

    times holds the recorded iteration indices (always including t=0 and the
    final step); p1/p2 hold the strategy snapshots row-per-time.  kl maps a
    target label (e.g. "nash", "stationary") to KL(target, pi^t) per snapshot.
    min_coord_overall is min over *all* iterations, not just snapshots, of
    the smallest strategy coordinate; it is the interiority diagnostic for
    noisy-feedback runs.
    """

    config: dict
    times: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    exploitability: np.ndarray
    kl: dict = field(default_factory=dict)
    min_coord: np.ndarray | None = None
    min_coord_overall: float = 1.0
    epochs_completed: tuple = (0, 0)
    seed: int | None = None

    @property
    def final_exploitability(self) -> float:
        return float(self.exploitability[-1])

    @property
    def final_profile(self) -> StrategyProfile:
        return StrategyProfile(Strategy(self.p1[-1]), Strategy(self.p2[-1]))


def _kl_curve(target: np.ndarray, snaps: np.ndarray) -> np.ndarray:
    """KL(target, row) for every snapshot row; rounding negatives floored.

    A snapshot with zero mass on the target's support gives +inf.
    """
    support = target > 0.0
    tp = target[support]
    with np.errstate(divide="ignore"):
        vals = np.sum(tp * np.log(tp / snaps[..., support]), axis=-1)
    return np.maximum(vals, 0.0)


def _snapshot_times(T: int, record_every: int) -> np.ndarray:
    times = list(range(0, T + 1, max(record_every, 1)))
    if times[-1] != T:
        times.append(T)
    return np.asarray(times, dtype=int)


def _finish_trace(config, times, P1, P2, payoff, kl_targets, min_overall,
                  epochs, seed=None) -> RunTrace:
    q1 = P2 @ payoff.T
    q2 = -(P1 @ payoff)
    explt = q1.max(axis=-1) + q2.max(axis=-1)
    min_coord = np.minimum(P1.min(axis=-1), P2.min(axis=-1))
    kls = {}
    for label, target in (kl_targets or {}).items():
        kls[label] = (_kl_curve(_probs(target.p1), P1)
                      + _kl_curve(_probs(target.p2), P2))
    return RunTrace(config=config, times=times, p1=P1, p2=P2,
                    exploitability=explt, kl=kls, min_coord=min_coord,
                    min_coord_overall=float(min_overall),
                    epochs_completed=epochs, seed=seed)


def run(game: GameMatrix, config_p1: LearnerConfig, config_p2: LearnerConfig,
        channel: FeedbackChannel, schedule: Schedule, T: int,
        init: StrategyProfile, record_every: int = 1,
        kl_targets: Mapping[str, StrategyProfile] | None = None,
        seed: int | None = None) -> RunTrace:
    """Simulate T simultaneous update steps and record metrics.

    Snapshots are taken at t = 0, every record_every steps, and at the final
    step.  A non-finite or boundary strategy aborts with DivergedError
    carrying the offending iteration.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    p1_init, p2_init = _probs(init.p1), _probs(init.p2)
    if p1_init.size != game.rows or p2_init.size != game.cols:
        raise ValueError("init profile does not match the game dimensions")
    if not (p1_init.min() > 0 and p2_init.min() > 0):
        raise InteriorityError("initial profile must be interior")

    s1 = make_state(config_p1, p1_init)
    s2 = make_state(config_p2, p2_init)
    step1, step2 = _STEP[config_p1.algo], _STEP[config_p2.algo]
    payoff = game.payoff
    neg_payoff = np.ascontiguousarray(-payoff)
    # a zero coordinate is fatal only where the next update divides by pi
    ni1 = config_p1.algo == "m2wu" and config_p1.mu > 0.0
    ni2 = config_p2.algo == "m2wu" and config_p2.mu > 0.0

    times = _snapshot_times(T, record_every)
    P1 = np.empty((times.size, game.rows))
    P2 = np.empty((times.size, game.cols))
    P1[0], P2[0] = s1.strategy, s2.strategy
    snap = {int(t): k for k, t in enumerate(times)}

    identity = channel.is_identity
    constant_eta = schedule.eta0 if schedule.kind == "constant" else None
    min_overall = min(s1.strategy.min(), s2.strategy.min())
    with np.errstate(divide="ignore"):  # log of absorbed (zero) coordinates
        for t in range(T):
            q1 = payoff @ s2.strategy
            q2 = s1.strategy @ neg_payoff
            if identity:
                o1, o2 = q1, q2
            else:
                o1 = observe(channel, q1, 1)
                o2 = observe(channel, q2, 2)
            eta = constant_eta if constant_eta is not None else schedule.eta(t)
            step1(s1, o1, eta)
            step2(s2, o2, eta)
            m1 = s1.strategy.min()
            m2 = s2.strategy.min()
            if ((not (m1 > 0.0) and (ni1 or m1 != m1 or m1 < 0.0))
                    or (not (m2 > 0.0) and (ni2 or m2 != m2 or m2 < 0.0))):
                raise DivergedError(t + 1)
            m = m1 if m1 < m2 else m2
            if m < min_overall:
                min_overall = m
            k = snap.get(t + 1)
            if k is not None:
                P1[k], P2[k] = s1.strategy, s2.strategy

    config = {
        "algo_p1": config_p1.algo, "algo_p2": config_p2.algo,
        "mu_p1": config_p1.mu, "mu_p2": config_p2.mu,
        "update_freq_p1": config_p1.update_freq, "update_freq_p2": config_p2.update_freq,
        "schedule": (schedule.kind, schedule.eta0, schedule.lam),
        "T": T, "record_every": record_every, "noise": channel.model.kind,
    }
    return _finish_trace(config, times, P1, P2, payoff, kl_targets,
                         min_overall, (s1.epoch, s2.epoch), seed=seed)


def run_batch(games, config: LearnerConfig, schedule: Schedule,
              channels: Sequence[FeedbackChannel], T: int,
              inits: Sequence[StrategyProfile], record_every: int,
              kl_targets: Mapping[str, StrategyProfile] | None = None,
              seeds: Sequence[int] | None = None,
              noise_block: int = 2048) -> list[RunTrace]:
    """Run many independent seeds of one configuration in lockstep.

    The update math is the shared batched form of the step kernels (strategies
    stacked row-per-seed), which is how seed-level parallelism is realized on
    one core.  `games` is either a single GameMatrix shared by every seed or a
    sequence with one game per seed.  Both players use `config`.

    Noise is drawn in blocks from each seed's own channel, preserving each
    per-seed stream.  If any seed leaves the interior the whole batch aborts
    with DivergedError (callers can fall back to per-seed run() to isolate it).
    """
    S = len(channels)
    if len(inits) != S:
        raise ValueError("need one init per channel")
    shared = isinstance(games, GameMatrix)
    game0 = games if shared else games[0]
    n1, n2 = game0.rows, game0.cols
    if shared:
        payoff = game0.payoff
        payoff_t = np.ascontiguousarray(payoff.T)
        neg_payoff = np.ascontiguousarray(-payoff)
        payoffs = None
    else:
        if len(games) != S:
            raise ValueError("need one game per seed")
        payoffs = np.stack([g.payoff for g in games])
        neg_payoffs = -payoffs

    P1 = np.stack([_probs(pr.p1) for pr in inits])
    P2 = np.stack([_probs(pr.p2) for pr in inits])
    if not (P1.min() > 0 and P2.min() > 0):
        raise InteriorityError("initial profiles must be interior")

    algo = config.algo
    mu = config.mu
    N = config.update_freq
    if algo == "m2wu":
        if config.reference is None:
            R1 = np.full((S, n1), 1.0 / n1)
            R2 = np.full((S, n2), 1.0 / n2)
        else:
            R1 = np.tile(_probs(config.reference), (S, 1))
            R2 = R1.copy()
    prev1 = np.zeros((S, n1))
    prev2 = np.zeros((S, n2))

    noisy = not channels[0].is_identity
    if noisy:
        N1 = np.empty((S, noise_block, n1))
        N2 = np.empty((S, noise_block, n2))
    j = noise_block

    times = _snapshot_times(T, record_every)
    K = times.size
    snap = {int(t): k for k, t in enumerate(times)}
    P1snap = np.empty((K, S, n1))
    P2snap = np.empty((K, S, n2))
    P1snap[0], P2snap[0] = P1, P2

    min_acc1 = P1.min(axis=-1)
    min_acc2 = P2.min(axis=-1)
    tau = 0
    epochs = 0

    constant_eta = schedule.eta0 if schedule.kind == "constant" else None
    with np.errstate(divide="ignore"):  # log of absorbed (zero) coordinates
        for t in range(T):
            if shared:
                q1 = P2 @ payoff_t
                q2 = P1 @ neg_payoff
            else:
                q1 = np.einsum("sab,sb->sa", payoffs, P2)
                q2 = np.einsum("sa,sab->sb", P1, neg_payoffs)
            if noisy:
                if j == noise_block:
                    steps = min(noise_block, T - t)
                    for i, ch in enumerate(channels):
                        N1[i, :steps] = ch.draw_block(1, steps, n1)
                        N2[i, :steps] = ch.draw_block(2, steps, n2)
                    j = 0
                o1 = q1 + N1[:, j]
                o2 = q2 + N2[:, j]
                j += 1
            else:
                o1, o2 = q1, q2
            eta = constant_eta if constant_eta is not None else schedule.eta(t)
            if algo == "mwu":
                d1, d2 = o1, o2
            elif algo == "omwu":
                d1 = 2.0 * o1 - prev1
                d2 = 2.0 * o2 - prev2
                prev1, prev2 = o1, o2
            else:
                if mu == 0.0:
                    d1, d2 = o1, o2
                else:
                    t1 = R1 - P1
                    t1 *= mu
                    t1 /= P1
                    d1 = o1 + t1
                    t2 = R2 - P2
                    t2 *= mu
                    t2 /= P2
                    d2 = o2 + t2
            P1 = softmax_step(P1, d1, eta)
            P2 = softmax_step(P2, d2, eta)
            if algo == "m2wu" and mu > 0.0:
                np.maximum(P1, _STRATEGY_FLOOR, out=P1)
                np.maximum(P2, _STRATEGY_FLOOR, out=P2)
            m1 = P1.min(axis=-1)
            m2 = P2.min(axis=-1)
            mm1, mm2 = m1.min(), m2.min()
            needs_interior = algo == "m2wu" and mu > 0.0
            if ((not (mm1 > 0.0) and (needs_interior or mm1 != mm1 or mm1 < 0.0))
                    or (not (mm2 > 0.0) and (needs_interior or mm2 != mm2 or mm2 < 0.0))):
                bad = [i for i in range(S)
                       if not (m1[i] > 0 and m2[i] > 0) or m1[i] != m1[i] or m2[i] != m2[i]]
                err = DivergedError(t + 1)
                err.seeds = bad
                raise err
            np.minimum(min_acc1, m1, out=min_acc1)
            np.minimum(min_acc2, m2, out=min_acc2)
            if algo == "m2wu" and N is not None:
                tau += 1
                if tau == N:
                    tau = 0
                    epochs += 1
                    R1, R2 = P1.copy(), P2.copy()
            k = snap.get(t + 1)
            if k is not None:
                P1snap[k], P2snap[k] = P1, P2

    min_overall = np.minimum(min_acc1, min_acc2)
    base_config = {
        "algo": algo, "mu": mu, "update_freq": N,
        "schedule": (schedule.kind, schedule.eta0, schedule.lam),
        "T": T, "record_every": record_every,
        "noise": channels[0].model.kind,
    }
    traces = []
    for i in range(S):
        payoff_i = payoff if shared else payoffs[i]
        traces.append(_finish_trace(
            dict(base_config), times, P1snap[:, i].copy(), P2snap[:, i].copy(),
            payoff_i, kl_targets, min_overall[i], (epochs, epochs),
            seed=None if seeds is None else seeds[i]))
    return traces
