"""Experiment harness: configs, seed sweeps, CSV output, preset experiments.

An experiment is one game, one feedback setting, and a roster of learner
variants, swept over a list of master seeds.  Every algorithm variant sees
the same per-seed noise streams, games, and initial profiles (all derived
from the master seed), so comparisons are paired.  Output is one CSV per
(variant, seed) plus one aggregate CSV per variant with the mean and
standard error of exploitability at each recorded iteration.

Config files are INI-shaped::

    [experiment]
    name = fig2a
    game = brps            ; brps | brps_fig1 | mne | random
    feedback = full        ; full | noisy
    init = random          ; uniform | random
    T = 20000
    seeds = 0,1,2,3

    [noise]
    kind = gaussian
    sigma = 0.1

    [algo m2wu_f]
    algo = m2wu
    eta0 = 0.1
    mu = 0.1
    update_freq = 0        ; 0 means the reference is never refreshed

Environment variables prefixed ZS_ (ZS_SEEDS, ZS_T, ZS_OUT, ZS_RECORD_EVERY)
override file keys; command-line flags override both.
"""

from __future__ import annotations

import configparser
import json
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import solve_stationary
from .errors import DivergedError
from .feedback import FeedbackChannel, NoiseModel, derive_seeds
from .games import (StrategyProfile, brps_fig1_nash, brps_nash, make_brps,
                    make_brps_fig1, make_mne, make_random, random_interior,
                    uniform)
from .learners import LearnerConfig, RunTrace, Schedule, run, run_batch

__all__ = [
    "AlgoSpec",
    "ExperimentConfig",
    "ExperimentReport",
    "AggregateSeries",
    "load_config",
    "save_config",
    "apply_env_overrides",
    "run_experiment",
    "emit_plotdata",
]

GAMES = ("brps", "brps_fig1", "mne", "random")

KNOWN_NASH = {
    "brps": brps_nash,
    "brps_fig1": brps_fig1_nash,
}


@dataclass(frozen=True)
class AlgoSpec:
    """One learner variant in an experiment roster.

    update_freq uses the config-surface convention: 0 means the reference is
    never refreshed (infinite period).
    """

    label: str
    algo: str
    eta0: float = 0.1
    schedule: str = "constant"
    lam: float = 0.75
    mu: float = 0.0
    update_freq: int = 0

    def learner_config(self) -> LearnerConfig:
        freq = None if self.update_freq == 0 else self.update_freq
        return LearnerConfig(algo=self.algo, mu=self.mu, update_freq=freq)

    def schedule_config(self) -> Schedule:
        return Schedule(kind=self.schedule, eta0=self.eta0, lam=self.lam)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    game: str = "brps"
    game_size: int = 25
    feedback: str = "full"
    noise_kind: str = "gaussian"
    noise_sigma: float = 0.1
    noise_half_width: float = 0.1
    init: str = "uniform"
    T: int = 10_000
    record_every: int = 0
    seeds: tuple = (0,)
    out_dir: str = "runs"
    snapshots: bool = False
    kl_stationary: bool = False
    algos: tuple = ()

    def __post_init__(self):
        if self.game not in GAMES:
            raise ValueError(f"unknown game {self.game!r}")
        if self.feedback not in ("full", "noisy"):
            raise ValueError("feedback must be 'full' or 'noisy'")
        if self.init not in ("uniform", "random"):
            raise ValueError("init must be 'uniform' or 'random'")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if not self.algos:
            raise ValueError("experiment roster must name at least one algorithm")
        labels = [a.label for a in self.algos]
        if len(set(labels)) != len(labels):
            raise ValueError("algo labels must be unique")

    @property
    def effective_record_every(self) -> int:
        return self.record_every if self.record_every > 0 else max(1, self.T // 500)

    def noise_model(self) -> NoiseModel:
        if self.feedback == "full":
            return NoiseModel("none")
        if self.noise_kind == "gaussian":
            return NoiseModel("gaussian", sigma=self.noise_sigma)
        if self.noise_kind == "uniform-bounded":
            return NoiseModel("uniform-bounded", half_width=self.noise_half_width)
        return NoiseModel(self.noise_kind)


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# config file I/O

def save_config(cfg: ExperimentConfig, path) -> None:
    parser = configparser.ConfigParser()
    parser["experiment"] = {
        "name": cfg.name,
        "game": cfg.game,
        "game_size": str(cfg.game_size),
        "feedback": cfg.feedback,
        "init": cfg.init,
        "T": str(cfg.T),
        "record_every": str(cfg.record_every),
        "seeds": ",".join(str(s) for s in cfg.seeds),
        "out": cfg.out_dir,
        "snapshots": str(cfg.snapshots).lower(),
        "kl_stationary": str(cfg.kl_stationary).lower(),
    }
    parser["noise"] = {
        "kind": cfg.noise_kind,
        "sigma": _fmt(cfg.noise_sigma),
        "half_width": _fmt(cfg.noise_half_width),
    }
    for spec in cfg.algos:
        parser[f"algo {spec.label}"] = {
            "algo": spec.algo,
            "eta0": _fmt(spec.eta0),
            "schedule": spec.schedule,
            "lambda": _fmt(spec.lam),
            "mu": _fmt(spec.mu),
            "update_freq": str(spec.update_freq),
        }
    with open(path, "w") as fh:
        parser.write(fh)


def _parse_seeds(text: str) -> tuple:
    parts = text.replace(",", " ").split()
    return tuple(int(p) for p in parts)


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse an INI config; keys present in the file override `base`."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    fields = {}
    if base is not None:
        for name in ("name", "game", "game_size", "feedback", "noise_kind",
                     "noise_sigma", "noise_half_width", "init", "T",
                     "record_every", "seeds", "out_dir", "snapshots",
                     "kl_stationary", "algos"):
            fields[name] = getattr(base, name)
    if parser.has_section("experiment"):
        sec = parser["experiment"]
        for key, cast, dest in (
                ("name", str, "name"), ("game", str, "game"),
                ("game_size", int, "game_size"), ("feedback", str, "feedback"),
                ("init", str, "init"), ("t", int, "T"),
                ("record_every", int, "record_every"),
                ("seeds", _parse_seeds, "seeds"), ("out", str, "out_dir")):
            if key in sec:
                fields[dest] = cast(sec[key])
        for key, dest in (("snapshots", "snapshots"), ("kl_stationary", "kl_stationary")):
            if key in sec:
                fields[dest] = sec.getboolean(key)
    if parser.has_section("noise"):
        sec = parser["noise"]
        if "kind" in sec:
            fields["noise_kind"] = sec["kind"]
        if "sigma" in sec:
            fields["noise_sigma"] = float(sec["sigma"])
        if "half_width" in sec:
            fields["noise_half_width"] = float(sec["half_width"])
    specs = []
    for section in parser.sections():
        if not section.startswith("algo"):
            continue
        label = section[4:].strip() or parser[section].get("algo", "algo")
        sec = parser[section]
        specs.append(AlgoSpec(
            label=label,
            algo=sec.get("algo", "mwu"),
            eta0=sec.getfloat("eta0", 0.1),
            schedule=sec.get("schedule", "constant"),
            lam=sec.getfloat("lambda", 0.75),
            mu=sec.getfloat("mu", 0.0),
            update_freq=sec.getint("update_freq", 0),
        ))
    if specs:
        fields["algos"] = tuple(specs)
    return ExperimentConfig(**fields)


_ENV_KEYS = {
    "ZS_SEEDS": ("seeds", _parse_seeds),
    "ZS_T": ("T", int),
    "ZS_OUT": ("out_dir", str),
    "ZS_RECORD_EVERY": ("record_every", int),
    "ZS_GAME": ("game", str),
    "ZS_INIT": ("init", str),
}


def apply_env_overrides(cfg: ExperimentConfig, environ=None) -> ExperimentConfig:
    env = os.environ if environ is None else environ
    updates = {}
    for var, (dest, cast) in _ENV_KEYS.items():
        if var in env:
            updates[dest] = cast(env[var])
    return replace(cfg, **updates) if updates else cfg


# ---------------------------------------------------------------------------
# running

@dataclass
class AggregateSeries:
    label: str
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    final_per_seed: np.ndarray
    seeds: tuple

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    series: dict = field(default_factory=dict)
    diverged: dict = field(default_factory=dict)
    paths: dict = field(default_factory=dict)
    out_dir: str = ""


def _build_instances(cfg: ExperimentConfig):
    """Per-seed games and initial profiles, all derived from the master seeds.

    The auxiliary child seed drives first the game draw (random games only)
    and then the initial profile draw, in that order.
    """
    fixed = {
        "brps": make_brps, "brps_fig1": make_brps_fig1, "mne": make_mne,
    }
    games, inits, channel_seeds = [], [], []
    base_game = fixed[cfg.game]() if cfg.game in fixed else None
    for seed in cfg.seeds:
        s1, s2, aux = derive_seeds(seed)
        channel_seeds.append((s1, s2))
        aux_rng = np.random.default_rng(aux)
        game = base_game if base_game is not None else make_random(cfg.game_size, aux_rng)
        games.append(game)
        if cfg.init == "uniform":
            prof = StrategyProfile(uniform(game.rows), uniform(game.cols))
        else:
            prof = StrategyProfile(random_interior(game.rows, aux_rng),
                                   random_interior(game.cols, aux_rng))
        inits.append(prof)
    shared_game = base_game if base_game is not None else None
    return shared_game, games, inits, channel_seeds


def _kl_targets_for(cfg: ExperimentConfig, spec: AlgoSpec, game):
    targets = {}
    maker = KNOWN_NASH.get(cfg.game)
    if maker is not None:
        targets["nash"] = maker()
    if (cfg.kl_stationary and game is not None and spec.algo == "m2wu"
            and spec.update_freq == 0 and spec.mu > 0):
        ref = StrategyProfile(uniform(game.rows), uniform(game.cols))
        targets["stationary"] = solve_stationary(game, spec.mu, ref).profile
    return targets


def _write_trace_csv(path, trace: RunTrace, snapshots: bool) -> None:
    kl_nash = trace.kl.get("nash")
    kl_stat = trace.kl.get("stationary")
    header = ["t", "exploitability", "kl_to_nash", "kl_to_stationary",
              "min_strategy_coordinate"]
    if snapshots:
        header += [f"p1_{a + 1}" for a in range(trace.p1.shape[1])]
        header += [f"p2_{b + 1}" for b in range(trace.p2.shape[1])]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(trace.times.size):
            row = [str(int(trace.times[k])), _fmt(trace.exploitability[k]),
                   _fmt(kl_nash[k]) if kl_nash is not None else "",
                   _fmt(kl_stat[k]) if kl_stat is not None else "",
                   _fmt(trace.min_coord[k])]
            if snapshots:
                row += [_fmt(x) for x in trace.p1[k]]
                row += [_fmt(x) for x in trace.p2[k]]
            fh.write(",".join(row) + "\n")
        # interiority diagnostic over *all* iterations, not just snapshots
        fh.write(f"# min_strategy_coordinate_overall={_fmt(trace.min_coord_overall)}\n")
        fh.write(f"# epochs_completed={trace.epochs_completed[0]}\n")


def _write_aggregate_csv(path, series: AggregateSeries) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,exploitability_mean,exploitability_stderr\n")
        for k in range(series.times.size):
            fh.write(f"{int(series.times[k])},{_fmt(series.mean[k])},"
                     f"{_fmt(series.stderr[k])}\n")


def _aggregate(label, traces, seeds) -> AggregateSeries:
    times = traces[0].times
    stack = np.stack([tr.exploitability for tr in traces])
    mean = stack.mean(axis=0)
    if stack.shape[0] > 1:
        stderr = stack.std(axis=0, ddof=1) / np.sqrt(stack.shape[0])
    else:
        stderr = np.zeros_like(mean)
    return AggregateSeries(label=label, times=times, mean=mean, stderr=stderr,
                           final_per_seed=stack[:, -1].copy(), seeds=tuple(seeds))


def run_experiment(cfg: ExperimentConfig, progress=None) -> ExperimentReport:
    """Run the full sweep described by cfg and write CSVs under out_dir/name.

    One trace per (variant, seed); random games draw a fresh matrix per seed.
    Seeds that diverge are recorded in the report and skipped in the
    aggregate rather than failing the sweep.  Output bytes are fully
    determined by (cfg, seeds) apart from the timestamp in metadata.json.
    """
    record_every = cfg.effective_record_every
    shared_game, games, inits, channel_seeds = _build_instances(cfg)
    model = cfg.noise_model()
    out_root = os.path.join(cfg.out_dir, cfg.name)
    os.makedirs(out_root, exist_ok=True)

    report = ExperimentReport(config=cfg, out_dir=out_root)
    for spec in cfg.algos:
        lcfg = spec.learner_config()
        sched = spec.schedule_config()
        targets = _kl_targets_for(cfg, spec, shared_game)
        channels = [FeedbackChannel(model, s1, s2) for (s1, s2) in channel_seeds]
        batch_games = shared_game if shared_game is not None else games
        diverged = []
        try:
            traces = run_batch(batch_games, lcfg, sched, channels, cfg.T, inits,
                               record_every, kl_targets=targets, seeds=cfg.seeds)
        except DivergedError:
            # isolate the failing seeds with per-seed runs
            traces = []
            for i, seed in enumerate(cfg.seeds):
                ch = FeedbackChannel(model, *channel_seeds[i])
                try:
                    traces.append(run(games[i], lcfg, lcfg, ch, sched, cfg.T,
                                      inits[i], record_every,
                                      kl_targets=targets, seed=seed))
                except DivergedError as err:
                    diverged.append((seed, err.t))
        kept_seeds = [tr.seed for tr in traces]
        algo_dir = os.path.join(out_root, spec.label)
        os.makedirs(algo_dir, exist_ok=True)
        seed_paths = []
        for tr in traces:
            p = os.path.join(algo_dir, f"seed{tr.seed}.csv")
            _write_trace_csv(p, tr, cfg.snapshots)
            seed_paths.append(p)
        if traces:
            series = _aggregate(spec.label, traces, kept_seeds)
            agg_path = os.path.join(out_root, f"{spec.label}_aggregate.csv")
            _write_aggregate_csv(agg_path, series)
            report.series[spec.label] = series
            report.paths[spec.label] = {"seeds": seed_paths, "aggregate": agg_path}
        report.diverged[spec.label] = diverged
        if progress is not None:
            progress(spec.label, report.series.get(spec.label))

    meta = {
        "name": cfg.name,
        "game": cfg.game,
        "feedback": cfg.feedback,
        "T": cfg.T,
        "record_every": record_every,
        "seeds": list(cfg.seeds),
        "algos": [spec.label for spec in cfg.algos],
        "diverged": {k: v for k, v in report.diverged.items() if v},
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    with open(os.path.join(out_root, "metadata.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    return report


# ---------------------------------------------------------------------------
# plot data

def _read_aggregate(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    header = lines[0].split(",")
    if header[0] != "t":
        raise ValueError(f"{path}: expected a 't' column first, got {header[0]!r}")
    rows = [ln.split(",") for ln in lines[1:]]
    t = np.array([int(r[0]) for r in rows])
    mean = np.array([float(r[1]) for r in rows])
    stderr = np.array([float(r[2]) for r in rows])
    return t, mean, stderr


def emit_plotdata(trace_paths, out_path) -> int:
    """Merge aggregate CSVs into one wide CSV (t, label_mean, label_stderr, ...).

    All inputs must share the recording grid.  Exact-zero mean values are
    floored to 1e-16 here (and only here) so the file is log-scale friendly;
    the number of floored cells is reported in a footer comment line.
    Returns the floored-cell count.
    """
    trace_paths = list(trace_paths)
    if not trace_paths:
        raise ValueError("no input aggregate files given")
    labels, series = [], []
    for path in trace_paths:
        stem = os.path.splitext(os.path.basename(path))[0]
        labels.append(stem[:-len("_aggregate")] if stem.endswith("_aggregate") else stem)
        series.append(_read_aggregate(path))
    t0 = series[0][0]
    for path, (t, _, _) in zip(trace_paths[1:], series[1:]):
        if t.size != t0.size or (t != t0).any():
            if t.size != t0.size:
                bad = t0[min(t.size, t0.size) - 1]
            else:
                bad = t0[np.argmax(t != t0)]
            raise ValueError(f"{path}: recording grid mismatch, first diverging t={int(bad)}")
    floored = 0
    header = ["t"]
    for lbl in labels:
        header += [f"{lbl}_mean", f"{lbl}_stderr"]
    with open(out_path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(t0.size):
            row = [str(int(t0[k]))]
            for (_, mean, stderr) in series:
                m = mean[k]
                if m == 0.0:
                    m = 1e-16
                    floored += 1
                row += [_fmt(m), _fmt(stderr[k])]
            fh.write(",".join(row) + "\n")
        fh.write(f"# floored_zeros={floored}\n")
    return floored
