"""Per-iteration feedback: exact gradients or gradients with additive noise.

Noise models are restricted to zero-mean families with light tails (Gaussian,
bounded uniform) so that every offered model keeps the variance finite and
the tail mass polynomially small for any exponent.  Heavier-tailed models are
deliberately not offered.

Each player owns an independent generator stream, derived from one master
seed, so adding or removing a learner on one side never perturbs the draws
seen by the other side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["NoiseModel", "FeedbackChannel", "observe", "derive_seeds"]

NOISE_KINDS = ("none", "gaussian", "uniform-bounded")

# Draws are produced in blocks of this many steps; numpy fills blocks from the
# bit stream in C order, so the values are identical for any block size.
_BLOCK = 1024


@dataclass(frozen=True)
class NoiseModel:
    """Additive noise specification for a feedback channel.

    kind            one of "none", "gaussian", "uniform-bounded"
    sigma           standard deviation (gaussian)
    half_width      support half-width (uniform-bounded)
    declared_kappa  informational tail-exponent metadata; both offered models
                    satisfy any kappa > 2, nothing is enforced at runtime
    """

    kind: str = "none"
    sigma: float = 0.0
    half_width: float = 0.0
    declared_kappa: float = 4.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}, expected one of {NOISE_KINDS}")
        if self.sigma < 0 or self.half_width < 0:
            raise ValueError("sigma and half_width must be nonnegative")
        if self.declared_kappa <= 2:
            raise ValueError("declared_kappa must exceed 2")

    @property
    def is_identity(self) -> bool:
        return self.kind == "none" or (self.kind == "gaussian" and self.sigma == 0.0) or (
            self.kind == "uniform-bounded" and self.half_width == 0.0)


class _Stream:
    """One player's buffered noise stream."""

    __slots__ = ("gen", "buf", "pos")

    def __init__(self, seed):
        self.gen = np.random.default_rng(seed)
        self.buf = None
        self.pos = 0

    def next_row(self, model: NoiseModel, n: int) -> np.ndarray:
        if self.buf is None or self.pos == self.buf.shape[0] or self.buf.shape[1] != n:
            if self.buf is not None and self.buf.shape[1] != n and self.pos != self.buf.shape[0]:
                raise ValueError("gradient length changed mid-stream")
            self.buf = self.draw(model, _BLOCK, n)
            self.pos = 0
        row = self.buf[self.pos]
        self.pos += 1
        return row

    def draw(self, model: NoiseModel, steps: int, n: int) -> np.ndarray:
        if model.kind == "gaussian":
            return self.gen.normal(0.0, model.sigma, size=(steps, n))
        if model.kind == "uniform-bounded":
            return self.gen.uniform(-model.half_width, model.half_width, size=(steps, n))
        return np.zeros((steps, n))


@dataclass
class FeedbackChannel:
    """Produces the observed gradient q_hat = q + noise for both players.

    Single-owner mutable state: one channel per run, never shared between
    concurrent runs.  Player streams are independent (distinct child seeds of
    the master seed) and noise is i.i.d. across actions and iterations.
    """

    model: NoiseModel
    seed_p1: int = 0
    seed_p2: int = 1
    _streams: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._streams = {1: _Stream(self.seed_p1), 2: _Stream(self.seed_p2)}

    @classmethod
    def from_master_seed(cls, model: NoiseModel, master_seed: int) -> "FeedbackChannel":
        s1, s2, _ = derive_seeds(master_seed)
        return cls(model, s1, s2)

    @property
    def is_identity(self) -> bool:
        return self.model.is_identity

    def draw_block(self, player: int, steps: int, n: int) -> np.ndarray:
        """Draw the next `steps` noise rows for one player in a single call.

        Used by vectorized sweep runners; interleaving draw_block with
        observe() on the same player is not supported.
        """
        return self._streams[player].draw(self.model, steps, n)


def observe(channel: FeedbackChannel, true_grad, player: int) -> np.ndarray:
    """Observed gradient for one player: the true gradient plus fresh noise.

    With kind "none" the true gradient is returned unchanged.  Only the
    calling player's stream advances.
    """
    grad = np.asarray(true_grad, dtype=float)
    if channel.model.kind == "none":
        return grad
    return grad + channel._streams[player].next_row(channel.model, grad.size)


def derive_seeds(master_seed: int) -> tuple[int, int, int]:
    """Split one master seed into (seed_p1, seed_p2, seed_aux).

    Deterministic and well-mixed (numpy SeedSequence hashing), so nearby
    master seeds give unrelated child seeds.
    """
    words = np.random.SeedSequence(master_seed).generate_state(3, np.uint64)
    return int(words[0]), int(words[1]), int(words[2])
