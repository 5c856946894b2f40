"""Named experiment presets.

Each preset pins a benchmark configuration of the exploitability experiments:

    fig2a-fig2d   full feedback, eta 0.1, mu 0.1, refresh period 100
                  (games: brps, mne, random 25x25, random 100x100)
    fig3          full feedback, fixed-reference sweep mu x eta on brps
    fig4a-fig4d   noisy feedback (gaussian sigma 0.1), eta 0.001,
                  mu 0.1 fixed-reference / 0.5 adaptive, refresh 20000
    fig6, fig7    noisy feedback learning-rate sweep (brps / mne)
    fig8a, fig8b  noisy feedback with the decayed rate eta_t = (t+1)^-3/4

Scale: "paper" uses 100 seeds and the full horizon; "desk" shrinks to 10
seeds and a fifth of the horizon.  Initial profiles are drawn uniformly at
random in the interior for brps/mne with full feedback and are uniform
otherwise, mirroring the benchmark setup.
"""

from __future__ import annotations

from dataclasses import replace

from .harness import AlgoSpec, ExperimentConfig

__all__ = ["PRESETS", "preset_names", "make_preset"]

_FULL_T = 100_000
_NOISY_T = 1_000_000


def _full_roster(eta=0.1, mu=0.1, freq=100):
    return (
        AlgoSpec("mwu", "mwu", eta0=eta),
        AlgoSpec("omwu", "omwu", eta0=eta),
        AlgoSpec("m2wu_f", "m2wu", eta0=eta, mu=mu, update_freq=0),
        AlgoSpec("m2wu_a", "m2wu", eta0=eta, mu=mu, update_freq=freq),
    )


def _noisy_roster(eta=0.001, mu_f=0.1, mu_a=0.5, freq=20_000, schedule="constant"):
    return (
        AlgoSpec("mwu", "mwu", eta0=eta, schedule=schedule),
        AlgoSpec("omwu", "omwu", eta0=eta, schedule=schedule),
        AlgoSpec("m2wu_f", "m2wu", eta0=eta, mu=mu_f, update_freq=0, schedule=schedule),
        AlgoSpec("m2wu_a", "m2wu", eta0=eta, mu=mu_a, update_freq=freq, schedule=schedule),
    )


def _eta_sweep_roster(etas=(0.1, 0.05, 0.01, 0.005, 0.001)):
    specs = []
    for eta in etas:
        tag = repr(eta).replace(".", "p")
        specs.append(AlgoSpec(f"mwu_eta{tag}", "mwu", eta0=eta))
        specs.append(AlgoSpec(f"omwu_eta{tag}", "omwu", eta0=eta))
        specs.append(AlgoSpec(f"m2wu_f_eta{tag}", "m2wu", eta0=eta, mu=0.1, update_freq=0))
        specs.append(AlgoSpec(f"m2wu_a_eta{tag}", "m2wu", eta0=eta, mu=0.5, update_freq=20_000))
    return tuple(specs)


def _mu_eta_roster():
    specs = []
    for mu in (0.1, 0.01):
        for eta in (0.1, 0.01, 0.001):
            mtag = repr(mu).replace(".", "p")
            etag = repr(eta).replace(".", "p")
            specs.append(AlgoSpec(f"m2wu_f_mu{mtag}_eta{etag}", "m2wu",
                                  eta0=eta, mu=mu, update_freq=0))
    return tuple(specs)


def _base(name, game, feedback, T, roster, init, game_size=25):
    return ExperimentConfig(
        name=name, game=game, game_size=game_size, feedback=feedback,
        init=init, T=T, seeds=tuple(range(100)), algos=roster)


PRESETS = {
    "fig2a": lambda: _base("fig2a", "brps", "full", _FULL_T, _full_roster(), "random"),
    "fig2b": lambda: _base("fig2b", "mne", "full", _FULL_T, _full_roster(), "random"),
    "fig2c": lambda: _base("fig2c", "random", "full", _FULL_T, _full_roster(), "uniform", 25),
    "fig2d": lambda: _base("fig2d", "random", "full", _FULL_T, _full_roster(), "uniform", 100),
    "fig3": lambda: _base("fig3", "brps", "full", _FULL_T, _mu_eta_roster(), "random"),
    "fig4a": lambda: _base("fig4a", "brps", "noisy", _NOISY_T, _noisy_roster(), "uniform"),
    "fig4b": lambda: _base("fig4b", "mne", "noisy", _NOISY_T, _noisy_roster(), "uniform"),
    "fig4c": lambda: _base("fig4c", "random", "noisy", _NOISY_T, _noisy_roster(), "uniform", 25),
    "fig4d": lambda: _base("fig4d", "random", "noisy", _NOISY_T, _noisy_roster(), "uniform", 100),
    "fig6": lambda: _base("fig6", "brps", "noisy", _NOISY_T, _eta_sweep_roster(), "uniform"),
    "fig7": lambda: _base("fig7", "mne", "noisy", _NOISY_T, _eta_sweep_roster(), "uniform"),
    "fig8a": lambda: _base("fig8a", "brps", "noisy", _NOISY_T,
                           _noisy_roster(eta=1.0, schedule="power"), "uniform"),
    "fig8b": lambda: _base("fig8b", "mne", "noisy", _NOISY_T,
                           _noisy_roster(eta=1.0, schedule="power"), "uniform"),
}


def preset_names():
    return sorted(PRESETS)


def make_preset(name: str, scale: str = "desk") -> ExperimentConfig:
    """Materialize a preset at 'desk' (10 seeds, horizon / 5) or 'paper' scale."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; known: {', '.join(preset_names())}")
    if scale not in ("desk", "paper"):
        raise ValueError("scale must be 'desk' or 'paper'")
    cfg = PRESETS[name]()
    if scale == "desk":
        cfg = replace(cfg, seeds=tuple(range(10)), T=max(1, cfg.T // 5))
    return cfg
