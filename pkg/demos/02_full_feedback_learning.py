"""Last-iterate behavior of MWU, OMWU, and M2WU under exact gradients.

MWU's actual iterate cycles without converging.  OMWU converges.  M2WU with
a fixed reference converges to an approximate equilibrium (exploitability
capped by 2*mu); refreshing the reference every N steps drives it to the
exact equilibrium.

Run:  python demos/02_full_feedback_learning.py
"""

from zslearn import (FeedbackChannel, LearnerConfig, NoiseModel, Schedule,
                     StrategyProfile, brps_nash, make_brps, run, uniform)

game = make_brps()
init = StrategyProfile(uniform(3), uniform(3))
sched = Schedule("constant", 0.1)
T = 20_000

variants = {
    "mwu": LearnerConfig("mwu"),
    "omwu": LearnerConfig("omwu"),
    "m2wu fixed ref (mu=0.1)": LearnerConfig("m2wu", mu=0.1),
    "m2wu adaptive (N=100)": LearnerConfig("m2wu", mu=0.1, update_freq=100),
}

traces = {}
for label, cfg in variants.items():
    traces[label] = run(game, cfg, cfg, FeedbackChannel(NoiseModel("none")),
                        sched, T, init, record_every=2000,
                        kl_targets={"nash": brps_nash()})

header_ts = traces["mwu"].times
print(f"exploitability on biased RPS, eta=0.1, T={T}:")
print(f"{'t':>8}" + "".join(f"{lbl[:18]:>22}" for lbl in variants))
for k, t in enumerate(header_ts):
    row = f"{t:>8}"
    for lbl in variants:
        row += f"{traces[lbl].exploitability[k]:>22.6f}"
    print(row)

print("\nfinal KL to the equilibrium:")
for lbl in variants:
    print(f"  {lbl:<24} {traces[lbl].kl['nash'][-1]:.3e}")
print("\nNote the 2*mu = 0.2 cap for the fixed reference (it plateaus near"
      " 0.09) and the adaptive variant's march to zero.")
