"""Acceptance criteria for the whole package.

Each test enforces one numbered criterion at its stated tolerance and prints
one PASS/FAIL line with the measured values (run pytest with -s to see them
as they happen).  Stationary points are precomputed session fixtures; the
per-criterion runtime budgets cover the checks themselves.
"""

import filecmp
import time

import numpy as np

from zslearn import (AlgoSpec, ExperimentConfig, FeedbackChannel,
                     LearnerConfig, NoiseModel, Schedule, StrategyProfile,
                     brps_nash, exploitability, gradient, kl_profile,
                     lyapunov_decay_check, make_brps, make_random, make_state,
                     run, run_experiment, step_m2wu, uniform,
                     value_gap_identity_residual)
from zslearn.dynamics import OdeConfig
from zslearn.games import Strategy, random_interior
from zslearn.verify import (check_shift_invariance,
                            check_simplex_preservation)

FULL = NoiseModel("none")


def _line(num, name, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {name} -- {detail}")


def test_criterion_1_exploitability_cap_2mu():
    """Fixed-reference mutation learner lands below the 2*mu exploitability cap."""
    t0 = time.perf_counter()
    game = make_brps()
    cfg = LearnerConfig("m2wu", mu=0.1)
    trace = run(game, cfg, cfg, FeedbackChannel(FULL), Schedule("constant", 0.1),
                10_000, StrategyProfile(uniform(3), uniform(3)), record_every=1000)
    elapsed = time.perf_counter() - t0
    final = trace.final_exploitability
    ok = final <= 0.2 and elapsed < 1.0
    _line(1, "2*mu exploitability cap", ok,
          f"final exploitability {final:.4f} (cap 0.2, typical plateau <= 0.15: "
          f"{'yes' if final <= 0.15 else 'no'}), runtime {elapsed:.2f}s (< 1s)")
    assert final <= 0.2
    assert elapsed < 1.0


def test_criterion_2_geometric_kl_contraction(brps_stationary):
    """KL to the precomputed rest point is monotone and geometrically shrinking."""
    game, ref, sp = brps_stationary
    assert sp.residual <= 1e-10
    t0 = time.perf_counter()
    cfg = LearnerConfig("m2wu", mu=0.1)
    trace = run(game, cfg, cfg, FeedbackChannel(FULL), Schedule("constant", 0.01),
                100_000, StrategyProfile(uniform(3), uniform(3)), record_every=1,
                kl_targets={"stationary": sp.profile})
    kls = trace.kl["stationary"]
    diffs = np.diff(kls)
    max_increase = float(diffs.max())
    monotone = bool((diffs <= 1e-12).all())
    # last decade of decay above the KL evaluation noise floor (~1e-16)
    window = np.where((kls <= 1e-12) & (kls >= 1e-13))[0]
    ratios = kls[window[1:]] / kls[window[:-1]]
    ratio_dev = float(np.abs(ratios / ratios.mean() - 1.0).max())
    elapsed = time.perf_counter() - t0
    ok = monotone and window.size > 10 and ratio_dev <= 0.05 and elapsed < 5.0
    _line(2, "geometric KL contraction", ok,
          f"max step increase {max_increase:.2e} (tol 1e-12), tail ratio "
          f"{ratios.mean():.6f} +/- {ratio_dev * 100:.3f}% (tol 5%), "
          f"runtime {elapsed:.2f}s (< 5s)")
    assert monotone
    assert window.size > 10
    assert ratio_dev <= 0.05
    assert elapsed < 5.0


def test_criterion_3_adaptive_reference_reaches_equilibrium():
    """Reference refreshes strictly approach the equilibrium; final gap tiny."""
    t0 = time.perf_counter()
    game = make_brps()
    nash = brps_nash()
    cfg = LearnerConfig("m2wu", mu=0.1, update_freq=100)
    s1 = make_state(cfg, uniform(3))
    s2 = make_state(cfg, uniform(3))
    ref_kls = [kl_profile(nash, StrategyProfile(Strategy(s1.reference),
                                                Strategy(s2.reference)))]
    epoch = 0
    for _ in range(100_000):
        o1 = gradient(game, s2.strategy, 1)
        o2 = gradient(game, s1.strategy, 2)
        step_m2wu(s1, o1, 0.1)
        step_m2wu(s2, o2, 0.1)
        if s1.epoch != epoch:
            epoch = s1.epoch
            ref_kls.append(kl_profile(nash, StrategyProfile(Strategy(s1.reference),
                                                            Strategy(s2.reference))))
    final_explt = exploitability(
        game, StrategyProfile(Strategy(s1.strategy), Strategy(s2.strategy)))
    elapsed = time.perf_counter() - t0
    kr = np.array(ref_kls)
    below = np.where(kr < 1e-6)[0]
    cut = int(below[0]) if below.size else len(kr) - 1
    strictly_down = bool((np.diff(kr[:cut + 1]) < 0).all())
    ok = strictly_down and below.size > 0 and final_explt <= 1e-2 and elapsed < 10.0
    _line(3, "adaptive reference reaches equilibrium", ok,
          f"KL(nash, ref) strictly down for {cut} refreshes to "
          f"{kr[cut]:.2e} (< 1e-6), final exploitability {final_explt:.2e} "
          f"(<= 1e-2), runtime {elapsed:.1f}s (< 10s)")
    assert strictly_down and below.size > 0
    assert final_explt <= 1e-2
    assert elapsed < 10.0


def test_criterion_4_noisy_feedback_ordering(tmp_path):
    """Mutation learners beat MWU and OMWU under gradient noise (desk scale)."""
    t0 = time.perf_counter()
    roster = (AlgoSpec("mwu", "mwu", eta0=0.001),
              AlgoSpec("omwu", "omwu", eta0=0.001),
              AlgoSpec("m2wu_f", "m2wu", eta0=0.001, mu=0.1),
              AlgoSpec("m2wu_a", "m2wu", eta0=0.001, mu=0.5, update_freq=20_000))
    finals = {}
    for game_name in ("brps", "mne"):
        cfg = ExperimentConfig(
            name=f"noisy_{game_name}", game=game_name, feedback="noisy",
            noise_kind="gaussian", noise_sigma=0.1, init="uniform",
            T=200_000, record_every=20_000, seeds=tuple(range(10)),
            out_dir=str(tmp_path), algos=roster)
        report = run_experiment(cfg)
        finals[game_name] = {lbl: s.final_mean for lbl, s in report.series.items()}
    elapsed = time.perf_counter() - t0
    ok = True
    parts = []
    for game_name, f in finals.items():
        worst_baseline = min(f["mwu"], f["omwu"])
        game_ok = f["m2wu_f"] < worst_baseline and f["m2wu_a"] < worst_baseline
        ok = ok and game_ok
        parts.append(f"{game_name}: mwu {f['mwu']:.3f}, omwu {f['omwu']:.3f}, "
                     f"m2wu_f {f['m2wu_f']:.3f}, m2wu_a {f['m2wu_a']:.3f}")
    ok = ok and elapsed < 120.0
    _line(4, "noisy-feedback ordering", ok,
          "; ".join(parts) + f"; runtime {elapsed:.0f}s (< 120s)")
    for f in finals.values():
        assert f["m2wu_f"] < f["mwu"] and f["m2wu_f"] < f["omwu"]
        assert f["m2wu_a"] < f["mwu"] and f["m2wu_a"] < f["omwu"]
    assert elapsed < 120.0


def test_criterion_5_value_gap_identity_oracle(brps_stationary, mne_stationary,
                                               rand25_stationary):
    """Stationary-point value-gap identity holds to 1e-8 on random profiles."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(2718)
    worst = 0.0
    for game, ref, sp in (brps_stationary, mne_stationary, rand25_stationary):
        for _ in range(100):
            prof = StrategyProfile(random_interior(game.rows, rng),
                                   random_interior(game.cols, rng))
            worst = max(worst, value_gap_identity_residual(game, prof, 0.1, ref, sp))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 5.0
    _line(5, "value-gap identity oracle", ok,
          f"max |LHS - RHS| {worst:.2e} over 3 games x 100 profiles (tol 1e-8), "
          f"runtime {elapsed:.2f}s (< 5s)")
    assert worst <= 1e-8
    assert elapsed < 5.0


def test_criterion_6_continuous_lyapunov_decay(brps_stationary):
    """KL to the rest point decays monotonically along the flow, fast enough."""
    game, ref, sp = brps_stationary
    t0 = time.perf_counter()
    report = lyapunov_decay_check(
        game, StrategyProfile(uniform(3), uniform(3)), 0.1, ref,
        OdeConfig(step=1e-3, t_end=50.0), stationary=sp)
    elapsed = time.perf_counter() - t0
    ok = report.monotone and report.rate_ok and elapsed < 5.0
    _line(6, "continuous-flow KL decay", ok,
          f"monotone (max step inc {report.max_step_increase:.1e}, tol 1e-9), "
          f"rate {report.measured_rate:.4f} <= {report.rate_threshold:.4f} "
          f"(0.9 * mu * xi, xi {report.xi:.4f}), runtime {elapsed:.2f}s (< 5s)")
    assert report.monotone
    assert report.rate_ok
    assert elapsed < 5.0


def test_criterion_7_degeneracy_and_determinism(tmp_path):
    """Zero-mutation bitwise degeneracy, byte-level reproducibility, suites."""
    t0 = time.perf_counter()
    game = make_brps()
    model = NoiseModel("gaussian", sigma=0.1)
    init = StrategyProfile(uniform(3), uniform(3))
    sched = Schedule("constant", 0.05)
    tr_mwu = run(game, LearnerConfig("mwu"), LearnerConfig("mwu"),
                 FeedbackChannel.from_master_seed(model, 31), sched, 1000, init, 100)
    tr_mu0 = run(game, LearnerConfig("m2wu", mu=0.0), LearnerConfig("m2wu", mu=0.0),
                 FeedbackChannel.from_master_seed(model, 31), sched, 1000, init, 100)
    bitwise = (np.array_equal(tr_mwu.p1, tr_mu0.p1)
               and np.array_equal(tr_mwu.p2, tr_mu0.p2))

    def cfg_at(path):
        return ExperimentConfig(
            name="det", game="brps", feedback="noisy", noise_sigma=0.1,
            init="uniform", T=400, record_every=100, seeds=(7,),
            out_dir=str(path),
            algos=(AlgoSpec("m2wu_a", "m2wu", eta0=0.05, mu=0.1, update_freq=100),))

    rep_a = run_experiment(cfg_at(tmp_path / "a"))
    rep_b = run_experiment(cfg_at(tmp_path / "b"))
    bytes_same = all(
        filecmp.cmp(pa, pb, shallow=False)
        for pa, pb in zip(rep_a.paths["m2wu_a"]["seeds"] + [rep_a.paths["m2wu_a"]["aggregate"]],
                          rep_b.paths["m2wu_a"]["seeds"] + [rep_b.paths["m2wu_a"]["aggregate"]]))

    simplex = check_simplex_preservation()
    shift = check_shift_invariance()
    elapsed = time.perf_counter() - t0
    ok = bitwise and bytes_same and simplex.passed and shift.passed and elapsed < 10.0
    _line(7, "degeneracy and determinism", ok,
          f"mu=0 bitwise: {bitwise}; trace bytes identical: {bytes_same}; "
          f"simplex suite: {simplex.measured}; shift suite: {shift.measured}; "
          f"runtime {elapsed:.1f}s (< 10s)")
    assert bitwise
    assert bytes_same
    assert simplex.passed and shift.passed
    assert elapsed < 10.0


def test_criterion_8_large_game_scale():
    """100x100 game: adaptive mutation learner runs fast and beats MWU."""
    game = make_random(100, 2024)
    init = StrategyProfile(uniform(100), uniform(100))
    sched = Schedule("constant", 0.1)
    t0 = time.perf_counter()
    cfg_a = LearnerConfig("m2wu", mu=0.1, update_freq=100)
    tr_a = run(game, cfg_a, cfg_a, FeedbackChannel(FULL), sched, 100_000, init,
               record_every=10_000)
    elapsed_a = time.perf_counter() - t0
    cfg_m = LearnerConfig("mwu")
    tr_m = run(game, cfg_m, cfg_m, FeedbackChannel(FULL), sched, 100_000, init,
               record_every=10_000)
    ok = elapsed_a < 30.0 and tr_a.final_exploitability < tr_m.final_exploitability
    _line(8, "large-game scale", ok,
          f"m2wu_a run {elapsed_a:.1f}s (< 30s), final exploitability "
          f"m2wu_a {tr_a.final_exploitability:.2e} < mwu {tr_m.final_exploitability:.2e}")
    assert elapsed_a < 30.0
    assert tr_a.final_exploitability < tr_m.final_exploitability
