"""Executable invariant suite behind `zslearn verify`.

Each check measures a quantity and compares it against its pinned threshold;
failures are returned as report entries, never raised.  The fast tier stays
under ~10 seconds, the full tier adds the longer dynamical checks.
"""

from __future__ import annotations

import filecmp
import glob
import os
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from . import dynamics, games, harness
from .feedback import FeedbackChannel, NoiseModel, derive_seeds, observe
from .games import (GameMatrix, Strategy, StrategyProfile, brps_nash,
                    exploitability, expected_value, gradient, kl, kl_profile,
                    make_brps, make_mne, make_random, random_interior, uniform)
from .learners import (LearnerConfig, Schedule, make_state, run, softmax_step,
                       step_m2wu)

__all__ = ["CheckResult", "verify_suite", "format_report"]


@dataclass
class CheckResult:
    name: str
    level: str
    passed: bool
    measured: str
    threshold: str
    detail: str = ""


def _result(name, level, passed, measured, threshold, detail=""):
    return CheckResult(name, level, bool(passed), measured, threshold, detail)


_stationary_cache: dict = {}


def _stationary(tag: str):
    if tag not in _stationary_cache:
        if tag == "brps":
            game = make_brps()
        elif tag == "mne":
            game = make_mne()
        elif tag == "rand25":
            game = make_random(25, 7)
        else:
            raise ValueError(tag)
        ref = StrategyProfile(uniform(game.rows), uniform(game.cols))
        _stationary_cache[tag] = (game, ref, dynamics.solve_stationary(game, 0.1, ref))
    return _stationary_cache[tag]


def _random_pairs(rng, count, n):
    for _ in range(count):
        yield rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))


# ---------------------------------------------------------------------------
# fast checks

def check_zero_sum_exact():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(200):
        n, m = rng.integers(1, 8), rng.integers(1, 8)
        g = GameMatrix(rng.normal(size=(n, m)))
        prof = StrategyProfile(Strategy(rng.dirichlet(np.ones(n))),
                               Strategy(rng.dirichlet(np.ones(m))))
        worst = max(worst, abs(expected_value(g, prof, 1) + expected_value(g, prof, 2)))
    return _result("zero_sum_exact", "fast", worst == 0.0, f"{worst:.1e}", "0 exactly")


def check_gradient_consistency():
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(200):
        n, m = rng.integers(1, 8), rng.integers(1, 8)
        g = GameMatrix(rng.normal(size=(n, m)))
        p1, p2 = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(m))
        prof = StrategyProfile(Strategy(p1), Strategy(p2))
        for player, own, opp in ((1, p1, p2), (2, p2, p1)):
            v = expected_value(g, prof, player)
            q = gradient(g, opp, player)
            worst = max(worst, abs(v - float(own @ q)))
    return _result("gradient_consistency", "fast", worst <= 1e-12, f"{worst:.2e}", "<= 1e-12")


def check_exploitability_nonnegative():
    rng = np.random.default_rng(13)
    low = np.inf
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        g = GameMatrix(rng.normal(size=(n, n)))
        prof = StrategyProfile(Strategy(rng.dirichlet(np.ones(n))),
                               Strategy(rng.dirichlet(np.ones(n))))
        low = min(low, exploitability(g, prof))
    return _result("exploitability_nonnegative", "fast", low >= -1e-10, f"min {low:.2e}", ">= -1e-10")


def check_exploitability_duality_gap():
    rng = np.random.default_rng(14)
    worst = -np.inf
    for _ in range(500):
        n = int(rng.integers(2, 7))
        g = GameMatrix(rng.normal(size=(n, n)))
        p1 = rng.dirichlet(np.ones(n))
        p2 = rng.dirichlet(np.ones(n))
        prof = StrategyProfile(Strategy(p1), Strategy(p2))
        br1 = np.zeros(n)
        br1[games.best_response(g, p2, 1)] = 1.0
        br2 = np.zeros(n)
        br2[games.best_response(g, p1, 2)] = 1.0
        gap = (expected_value(g, StrategyProfile(Strategy(br1), Strategy(p2)), 1)
               - expected_value(g, StrategyProfile(Strategy(p1), Strategy(br2)), 1))
        worst = max(worst, gap - exploitability(g, prof))
    return _result("exploitability_duality_gap", "fast", worst <= 1e-10,
                   f"max gap excess {worst:.2e}", "<= 1e-10")


def check_pinsker():
    rng = np.random.default_rng(15)
    worst = -np.inf
    for p, q in _random_pairs(rng, 1000, 5):
        worst = max(worst, float(np.abs(p - q).sum()) ** 2 - 2.0 * kl(p, q))
    return _result("pinsker", "fast", worst <= 1e-12, f"max excess {worst:.2e}", "<= 1e-12")


def check_kl_identity_of_divergence():
    rng = np.random.default_rng(16)
    ok = True
    for p, _ in _random_pairs(rng, 200, 4):
        q = p + rng.uniform(-1, 1, size=4) * 1e-10
        q = np.abs(q)
        q /= q.sum()
        if np.abs(p - q).sum() <= 1e-9 and kl(p, q) > 1e-12:
            ok = False
    for p, q in _random_pairs(rng, 200, 4):
        if np.abs(p - q).sum() > 1e-4 and kl(p, q) <= 1e-12:
            ok = False
    return _result("kl_identity_of_divergence", "fast", ok, "both directions", "see spec tolerances")


def check_noise_zero_mean():
    worst_ratio = 0.0
    for model in (NoiseModel("gaussian", sigma=0.1),
                  NoiseModel("uniform-bounded", half_width=0.1)):
        ch = FeedbackChannel(model, 101, 102)
        draws = ch.draw_block(1, 100_000, 3)
        sd = model.sigma if model.kind == "gaussian" else model.half_width / np.sqrt(3.0)
        se = sd / np.sqrt(draws.shape[0])
        worst_ratio = max(worst_ratio, float(np.abs(draws.mean(axis=0)).max() / se))
    return _result("noise_zero_mean", "fast", worst_ratio < 4.0,
                   f"max |mean|/se {worst_ratio:.2f}", "< 4 standard errors")


def check_noise_player_independence():
    ch = FeedbackChannel(NoiseModel("gaussian", sigma=0.1), *derive_seeds(3)[:2])
    a = ch.draw_block(1, 100_000, 1)[:, 0]
    b = ch.draw_block(2, 100_000, 1)[:, 0]
    corr = float(np.corrcoef(a, b)[0, 1])
    return _result("noise_player_independence", "fast", abs(corr) < 0.02,
                   f"corr {corr:+.4f}", "|corr| < 0.02")


def check_feedback_determinism():
    model = NoiseModel("gaussian", sigma=0.1)
    grads = np.random.default_rng(0).normal(size=(50, 4))
    seen = []
    for _ in range(2):
        ch = FeedbackChannel.from_master_seed(model, 42)
        seen.append(np.stack([
            np.stack([observe(ch, g, 1) for g in grads]),
            np.stack([observe(ch, g, 2) for g in grads]),
        ]))
    same = np.array_equal(seen[0], seen[1])
    return _result("feedback_determinism", "fast", same, "bitwise equal", "bitwise equal")


def check_simplex_preservation():
    rng = np.random.default_rng(17)
    P = np.stack([rng.dirichlet(np.ones(6)) for _ in range(1000)])
    D = rng.normal(scale=5.0, size=(1000, 6))
    out = softmax_step(P, D, 0.1)
    dev = float(np.abs(out.sum(axis=-1) - 1.0).max())
    interior = bool(out.min() > 0)
    return _result("simplex_preservation", "fast", dev <= 1e-12 and interior,
                   f"max |sum-1| {dev:.2e}, min {out.min():.2e}", "<= 1e-12 and > 0")


def check_shift_invariance():
    rng = np.random.default_rng(18)
    P = np.stack([rng.dirichlet(np.ones(5)) for _ in range(1000)])
    D = rng.normal(scale=3.0, size=(1000, 5))
    c = rng.normal(scale=10.0, size=(1000, 1))
    delta = float(np.abs(softmax_step(P, D, 0.1) - softmax_step(P, D + c, 0.1)).max())
    return _result("shift_invariance", "fast", delta <= 1e-14, f"max delta {delta:.2e}", "<= 1e-14")


def check_mwu_degeneracy():
    game = make_brps()
    sched = Schedule("constant", 0.05)
    init = StrategyProfile(uniform(3), uniform(3))
    model = NoiseModel("gaussian", sigma=0.1)
    tr_mwu = run(game, LearnerConfig("mwu"), LearnerConfig("mwu"),
                 FeedbackChannel.from_master_seed(model, 5), sched, 500, init, 50)
    tr_mu0 = run(game, LearnerConfig("m2wu", mu=0.0), LearnerConfig("m2wu", mu=0.0),
                 FeedbackChannel.from_master_seed(model, 5), sched, 500, init, 50)
    same = (np.array_equal(tr_mwu.p1, tr_mu0.p1) and np.array_equal(tr_mwu.p2, tr_mu0.p2))
    return _result("mwu_degeneracy_bitwise", "fast", same, "bitwise equal", "bitwise equal")


def check_field_tangency():
    rng = np.random.default_rng(19)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        g = GameMatrix(rng.normal(size=(n, n)))
        prof = StrategyProfile(Strategy(rng.dirichlet(np.ones(n))),
                               Strategy(rng.dirichlet(np.ones(n))))
        ref = StrategyProfile(uniform(n), uniform(n))
        f1, f2 = dynamics.rmd_vector_field(g, prof, float(rng.uniform(0, 1)), ref)
        worst = max(worst, abs(float(f1.sum())), abs(float(f2.sum())))
    return _result("field_tangency", "fast", worst <= 1e-12, f"max |sum| {worst:.2e}", "<= 1e-12")


def check_stationary_certificate():
    game, ref, sp = _stationary("brps")
    f1, f2 = dynamics.rmd_vector_field(game, sp.profile, sp.mu, ref)
    res = max(np.abs(f1).max(), np.abs(f2).max())
    diff = abs(res - sp.residual)
    return _result("stationary_certificate", "fast", diff <= 1e-12,
                   f"|recheck - stored| {diff:.2e} (residual {sp.residual:.2e})", "<= 1e-12")


def check_fixed_point_step():
    game, ref, sp = _stationary("brps")
    moved = 0.0
    for player, own in ((1, sp.profile.p1), (2, sp.profile.p2)):
        state = make_state(LearnerConfig("m2wu", mu=0.1), own)
        state.reference = np.asarray(ref.p1.probs if player == 1 else ref.p2.probs)
        opp = sp.profile.p2 if player == 1 else sp.profile.p1
        before = state.strategy.copy()
        step_m2wu(state, gradient(game, opp, player), 0.1)
        moved = max(moved, float(np.abs(state.strategy - before).sum()))
    return _result("fixed_point_step", "fast", moved <= 1e-8, f"L1 move {moved:.2e}", "<= 1e-8")


# ---------------------------------------------------------------------------
# full checks

def check_geometric_kl_contraction():
    game, ref, sp = _stationary("brps")
    init = StrategyProfile(uniform(3), uniform(3))
    ch = FeedbackChannel(NoiseModel("none"))
    cfg = LearnerConfig("m2wu", mu=0.1)
    tr = run(game, cfg, cfg, ch, Schedule("constant", 0.01), 10_000, init, 1,
             kl_targets={"stationary": sp.profile})
    kls = tr.kl["stationary"]
    diffs = np.diff(kls)
    monotone = bool((diffs <= 1e-12).all())
    ratio_total = float(kls[-1] / kls[0])
    window = (kls > 1e-11) & (kls < 1e-8)
    ratios = kls[1:][window[:-1]] / kls[:-1][window[:-1]]
    fitted = float(ratios.mean()) if ratios.size else float("nan")
    ok = monotone and ratio_total <= 1e-6 and 0.0 < fitted < 1.0
    return _result("geometric_kl_contraction", "full", ok,
                   f"KL(T)/KL(0) {ratio_total:.2e}, fitted step ratio {fitted:.6f}",
                   "monotone, <= 1e-6, ratio in (0,1)")


def check_adaptive_reference_monotonicity():
    game = make_brps()
    nash = brps_nash()
    cfg = LearnerConfig("m2wu", mu=0.1, update_freq=1000)
    s1 = make_state(cfg, uniform(3))
    s2 = make_state(cfg, uniform(3))
    refs = [kl_profile(nash, StrategyProfile(Strategy(s1.reference), Strategy(s2.reference)))]
    epoch = 0
    for t in range(40_000):
        o1 = gradient(game, s2.strategy, 1)
        o2 = gradient(game, s1.strategy, 2)
        step_m2wu(s1, o1, 0.1)
        step_m2wu(s2, o2, 0.1)
        if s1.epoch != epoch:
            epoch = s1.epoch
            refs.append(kl_profile(nash, StrategyProfile(Strategy(s1.reference),
                                                         Strategy(s2.reference))))
            if refs[-1] < 1e-8:
                break
    drops = np.diff(np.array(refs))
    strict = bool((drops < 0).all())
    return _result("adaptive_reference_monotonicity", "full",
                   strict and refs[-1] < 1e-8,
                   f"{len(refs) - 1} refreshes, final KL {refs[-1]:.2e}",
                   "strictly decreasing until < 1e-8")


def check_rd_kl_conservation():
    game = make_brps()
    nash = brps_nash()
    init = StrategyProfile(Strategy(np.array([0.5, 0.3, 0.2])),
                           Strategy(np.array([0.25, 0.35, 0.4])))
    ref = StrategyProfile(uniform(3), uniform(3))
    traj = dynamics.integrate(game, init, 0.0, ref, dynamics.OdeConfig(step=1e-3, t_end=10.0))
    kls = np.array([kl_profile(nash, traj.profile(k)) for k in range(0, len(traj), 50)])
    drift = float(np.abs(kls - kls[0]).max())
    return _result("rd_kl_conservation", "full", drift <= 1e-6, f"max drift {drift:.2e}", "<= 1e-6")


def check_stationary_uniqueness():
    game, ref, sp = _stationary("brps")
    rng = np.random.default_rng(20)
    cfg = dynamics.OdeConfig(step=0.01, t_end=150.0)
    ends = []
    for _ in range(10):
        init = StrategyProfile(random_interior(3, rng), random_interior(3, rng))
        traj = dynamics.integrate(game, init, 0.1, ref, cfg)
        ends.append(np.concatenate([traj.p1[-1], traj.p2[-1]]))
    ends = np.stack(ends)
    spread = float(np.abs(ends - ends[0]).sum(axis=1).max())
    return _result("stationary_uniqueness", "full", spread <= 1e-3,
                   f"max pairwise L1 {spread:.2e} over 10 inits", "<= 1e-3")


def check_discrete_continuous_consistency():
    game = make_brps()
    rng = np.random.default_rng(21)
    init = StrategyProfile(random_interior(3, rng), random_interior(3, rng))
    ref = StrategyProfile(uniform(3), uniform(3))
    eta = 1e-3
    steps = 5000
    traj = dynamics.integrate(game, init, 0.1, ref, dynamics.OdeConfig(step=eta, t_end=5.0))
    ch = FeedbackChannel(NoiseModel("none"))
    cfg = LearnerConfig("m2wu", mu=0.1)
    tr = run(game, cfg, cfg, ch, Schedule("constant", eta), steps, init, 1)
    gap = float((np.abs(tr.p1 - traj.p1).sum(axis=1)
                 + np.abs(tr.p2 - traj.p2).sum(axis=1)).max())
    return _result("discrete_continuous_consistency", "full", gap <= 0.01,
                   f"max L1 gap {gap:.4f}", "<= 0.01")


def check_lyapunov_decay():
    game, ref, sp = _stationary("brps")
    rng = np.random.default_rng(22)
    init = StrategyProfile(random_interior(3, rng), random_interior(3, rng))
    rep = dynamics.lyapunov_decay_check(game, init, 0.1, ref,
                                        dynamics.OdeConfig(step=1e-3, t_end=50.0),
                                        stationary=sp)
    return _result("lyapunov_decay", "full", rep.passed,
                   f"rate {rep.measured_rate:.4f}, max step inc {rep.max_step_increase:.1e}",
                   f"rate <= {rep.rate_threshold:.4f}, non-increasing")


def check_value_gap_identity():
    rng = np.random.default_rng(23)
    worst = 0.0
    for tag in ("brps", "mne", "rand25"):
        game, ref, sp = _stationary(tag)
        for _ in range(100):
            prof = StrategyProfile(random_interior(game.rows, rng),
                                   random_interior(game.cols, rng))
            worst = max(worst, dynamics.value_gap_identity_residual(
                game, prof, 0.1, ref, sp))
    return _result("value_gap_identity", "full", worst <= 1e-8,
                   f"max |LHS-RHS| {worst:.2e} over 3 games x 100 profiles", "<= 1e-8")


def _tiny_config(out_dir):
    from .harness import AlgoSpec, ExperimentConfig
    return ExperimentConfig(
        name="tiny", game="brps", feedback="noisy", noise_sigma=0.1,
        init="uniform", T=300, record_every=50, seeds=(0, 1),
        out_dir=out_dir,
        algos=(AlgoSpec("mwu", "mwu", eta0=0.05),
               AlgoSpec("m2wu_f", "m2wu", eta0=0.05, mu=0.1)))


def check_config_roundtrip():
    from .presets import make_preset
    cfg = make_preset("fig2a", "desk")
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "cfg.ini")
        harness.save_config(cfg, path)
        loaded = harness.load_config(path)
    same = loaded == cfg
    return _result("config_roundtrip", "full", same, "field-by-field equal", "equal")


def check_reproducibility():
    with tempfile.TemporaryDirectory() as tmp:
        cfg_a = _tiny_config(os.path.join(tmp, "a"))
        cfg_b = replace(cfg_a, out_dir=os.path.join(tmp, "b"))
        harness.run_experiment(cfg_a)
        harness.run_experiment(cfg_b)
        files_a = sorted(glob.glob(os.path.join(tmp, "a", "**", "*.csv"), recursive=True))
        files_b = sorted(glob.glob(os.path.join(tmp, "b", "**", "*.csv"), recursive=True))
        same = len(files_a) == len(files_b) and all(
            filecmp.cmp(a, b, shallow=False) for a, b in zip(files_a, files_b))
    return _result("reproducibility", "full", same,
                   f"{len(files_a)} files byte-compared", "byte-identical")


def check_aggregate_correctness():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = _tiny_config(tmp)
        report = harness.run_experiment(cfg)
        worst = 0.0
        for label, series in report.series.items():
            per_seed = []
            for path in report.paths[label]["seeds"]:
                rows = np.genfromtxt(path, delimiter=",", skip_header=1, usecols=(1,))
                per_seed.append(rows)
            stack = np.stack(per_seed)
            mean = stack.mean(axis=0)
            stderr = stack.std(axis=0, ddof=1) / np.sqrt(stack.shape[0])
            worst = max(worst, float(np.abs(mean - series.mean).max()),
                        float(np.abs(stderr - series.stderr).max()))
    return _result("aggregate_correctness", "full", worst <= 1e-12,
                   f"max recompute gap {worst:.2e}", "<= 1e-12")


_FAST = [
    check_zero_sum_exact,
    check_gradient_consistency,
    check_exploitability_nonnegative,
    check_exploitability_duality_gap,
    check_pinsker,
    check_kl_identity_of_divergence,
    check_noise_zero_mean,
    check_noise_player_independence,
    check_feedback_determinism,
    check_simplex_preservation,
    check_shift_invariance,
    check_mwu_degeneracy,
    check_field_tangency,
    check_stationary_certificate,
    check_fixed_point_step,
]

_FULL = [
    check_geometric_kl_contraction,
    check_adaptive_reference_monotonicity,
    check_rd_kl_conservation,
    check_stationary_uniqueness,
    check_discrete_continuous_consistency,
    check_lyapunov_decay,
    check_value_gap_identity,
    check_config_roundtrip,
    check_reproducibility,
    check_aggregate_correctness,
]


def verify_suite(level: str = "fast") -> list[CheckResult]:
    """Run the invariant checks for the requested tier ('fast' or 'full').

    'full' includes the fast tier.  Failures appear in the returned report;
    nothing raises.
    """
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    checks = list(_FAST) + (list(_FULL) if level == "full" else [])
    results = []
    for fn in checks:
        try:
            results.append(fn())
        except Exception as exc:  # a crashed check is a failed check
            results.append(CheckResult(fn.__name__.removeprefix("check_"),
                                       level, False, "crashed", "-", repr(exc)))
    return results


def format_report(results) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"[{status}] {r.name:<36} measured: {r.measured:<44} "
                     f"threshold: {r.threshold}")
        if r.detail:
            lines.append(f"       {r.detail}")
    n_fail = sum(1 for r in results if not r.passed)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)
