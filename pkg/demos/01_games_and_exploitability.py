"""Tour of the game primitives: payoffs, values, gradients, exploitability.

Run:  python demos/01_games_and_exploitability.py
"""

import numpy as np

from zslearn import (StrategyProfile, brps_nash, expected_value,
                     exploitability, gradient, kl_profile, make_brps,
                     make_mne, make_random, mne_nash_p1, nash_distance_mne,
                     uniform)

game = make_brps()
print("Biased rock-paper-scissors payoff (player 1):")
print(game.payoff)
print(f"u_max = {game.u_max}\n")

uniform_profile = StrategyProfile(uniform(3), uniform(3))
nash = brps_nash()

print("Against a uniform opponent, player 1's per-action payoffs are")
print(f"  q1 = {gradient(game, uniform_profile.p2, 1)}")
print("so 'rock' (payoff 2/3) is the best response.\n")

for label, prof in (("uniform", uniform_profile), ("equilibrium", nash)):
    v = expected_value(game, prof, 1)
    e = exploitability(game, prof)
    print(f"{label:>12}: value {v:+.4f}   exploitability {e:.4f}")
print("\nExploitability is zero exactly at the equilibrium; at (1/5, 3/5, 1/5)")
print("every action earns the same payoff, so no deviation helps.\n")

print(f"KL(nash, uniform profile) = {kl_profile(nash, uniform_profile):.4f}")
print("This is the quantity the learning dynamics drive to zero.\n")

mne = make_mne()
print("The 5x5 multi-equilibrium game gives the column player a continuum of")
print("optimal strategies y with y1 = y2 = y3 and y5/2 <= y4 <= 2 y5:")
for y in (np.array([1, 1, 1, 0, 0]) / 3.0, np.full(5, 0.2),
          np.array([0.3, 0.3, 0.3, 0.04, 0.06])):
    print(f"  y = {np.round(y, 3)}  distance to the set: {nash_distance_mne(y):.3f}")
print(f"Row player's unique equilibrium: {np.round(mne_nash_p1().probs, 4)}\n")

rnd = make_random(25, seed=7)
prof25 = StrategyProfile(uniform(25), uniform(25))
print(f"Random 25x25 Gaussian game (seed 7): u_max {rnd.u_max:.2f}, "
      f"uniform-play exploitability {exploitability(rnd, prof25):.3f}")
