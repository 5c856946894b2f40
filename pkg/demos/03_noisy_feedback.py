"""Learning when every observed gradient carries Gaussian noise.

With noise, MWU and OMWU stall far from the equilibrium while both mutation
variants keep converging.  This is a shrunken version of the benchmark
sweep; the full one is `zslearn run --preset fig4a`.

Run:  python demos/03_noisy_feedback.py   (about half a minute)
"""

from zslearn import AlgoSpec, ExperimentConfig, run_experiment

cfg = ExperimentConfig(
    name="noisy_demo",
    game="brps",
    feedback="noisy",
    noise_kind="gaussian",
    noise_sigma=0.1,
    init="uniform",
    T=50_000,
    record_every=5_000,
    seeds=tuple(range(5)),
    out_dir="runs",
    algos=(
        AlgoSpec("mwu", "mwu", eta0=0.001),
        AlgoSpec("omwu", "omwu", eta0=0.001),
        AlgoSpec("m2wu_f", "m2wu", eta0=0.001, mu=0.1),
        AlgoSpec("m2wu_a", "m2wu", eta0=0.001, mu=0.5, update_freq=20_000),
    ))

print(f"running {len(cfg.algos)} algorithms x {len(cfg.seeds)} seeds of "
      f"T={cfg.T} noisy steps on biased RPS (sigma={cfg.noise_sigma}) ...")
report = run_experiment(cfg)

print(f"\nmean exploitability (stderr) over {len(cfg.seeds)} seeds:")
times = report.series["mwu"].times
print(f"{'t':>8}" + "".join(f"{lbl:>20}" for lbl in report.series))
for k in range(0, times.size, 2):
    row = f"{times[k]:>8}"
    for lbl, series in report.series.items():
        row += f"{series.mean[k]:>12.4f} ({series.stderr[k]:.4f})"
    print(row)

print(f"\nper-seed CSVs and aggregates written under {report.out_dir}/")
print("merge them for plotting with:")
print(f"  zslearn plotdata --in '{report.out_dir}/*_aggregate.csv' --out noisy_demo.csv")
